//! Per-domain verification pipeline and report-row assembly.

use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, Result};

use specbound::calculus::{
    coordinate_gamma_bound_slack, coordinate_identity_defect, correction_sum_slack,
    energy_bound_slack, gamma_forms_defect, green_defect, laplacian, mass_lower_bound_slack,
    pair_coefficients, trial_function, Coordinate,
};
use specbound::inequalities::{evaluate_all, unweighted_reduction_check, InequalitySlack};
use specbound::lattice::Vertex;
use specbound::rng::SplitMix64;
use specbound::spectral::{
    assemble, eigendecompose, verify_decomposition, Field, OperatorPair, SpectralDecomposition,
    SpectralError,
};

use crate::config::{KRange, RunConfig};
use crate::report::ReportRow;

/// How an explicit k list interacts with a domain's admissible range:
/// `run` silently intersects, `verify` rejects out-of-range orders.
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum KMode {
    Intersect,
    Strict,
}

/// Errors split by exit code: bad input (1) versus a failed numeric
/// contract inside the solver (2).
#[derive(Debug)]
pub enum RunnerError {
    Config(anyhow::Error),
    Numeric(anyhow::Error),
}

impl std::fmt::Display for RunnerError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunnerError::Config(e) => write!(f, "{e:#}"),
            RunnerError::Numeric(e) => write!(f, "{e:#}"),
        }
    }
}

fn config_err(e: impl Into<anyhow::Error>) -> RunnerError {
    RunnerError::Config(e.into())
}

pub struct RunOutcome {
    pub rows: Vec<ReportRow>,
    pub failures: usize,
}

/// Number of random (f, g) trial pairs per domain in the identity suite.
const IDENTITY_TRIALS: usize = 3;

pub fn execute(
    config: &RunConfig,
    base_dir: &Path,
    k_mode: KMode,
) -> Result<RunOutcome, RunnerError> {
    config.validate().map_err(RunnerError::Config)?;

    let mut rows = Vec::new();
    let mut failures = 0usize;
    let mut seed_stream = SplitMix64::new(config.seed);

    for spec in &config.domains {
        // one seed triple per domain, drawn in config order regardless of
        // whether the specs consume them
        let pot_seed = seed_stream.next_u64();
        let den_seed = seed_stream.next_u64();
        let trial_seed = seed_stream.next_u64();

        let label = spec.label();
        let domain = Arc::new(spec.realize(base_dir).map_err(RunnerError::Config)?);
        let potential = config
            .potential
            .realize(&domain, base_dir, pot_seed)
            .map_err(RunnerError::Config)?;
        let density = config
            .density
            .realize(&domain, base_dir, den_seed)
            .map_err(RunnerError::Config)?;

        let op = assemble(&domain, &potential, &density).map_err(config_err)?;
        let dec = eigendecompose(&op).map_err(|e| match e {
            SpectralError::NoConvergence
            | SpectralError::NonPositiveSpectrum(_)
            | SpectralError::ContractViolation { .. } => RunnerError::Numeric(e.into()),
            other => RunnerError::Config(other.into()),
        })?;

        let ks = select_orders(&config.k_range, dec.len(), k_mode)?;
        let slacks = evaluate_all(&dec, &ks).map_err(config_err)?;
        for s in &slacks {
            let pass =
                s.degenerate_gap || s.slack.is_none_or(|v| v >= -config.tolerances.slack_tol);
            if !pass {
                failures += 1;
            }
            rows.push(inequality_row(&label, &dec, s));
        }

        let suite = identity_suite(&label, &op, &dec, &potential, trial_seed, config);
        for (row, pass) in suite {
            if !pass {
                failures += 1;
            }
            rows.push(row);
        }
    }

    Ok(RunOutcome { rows, failures })
}

fn select_orders(k_range: &KRange, n: usize, k_mode: KMode) -> Result<Vec<usize>, RunnerError> {
    let max = n.saturating_sub(1);
    match k_range {
        KRange::All => Ok((1..=max).collect()),
        KRange::List(ks) => {
            if k_mode == KMode::Strict {
                if let Some(bad) = ks.iter().find(|&&k| k < 1 || k > max) {
                    return Err(RunnerError::Config(anyhow!(
                        "k out of range: k = {bad} but admissible orders are 1..={max}"
                    )));
                }
            }
            let mut ks: Vec<usize> = ks.iter().cloned().filter(|&k| k >= 1 && k <= max).collect();
            ks.sort_unstable();
            ks.dedup();
            Ok(ks)
        }
    }
}

fn inequality_row(label: &str, dec: &SpectralDecomposition, s: &InequalitySlack) -> ReportRow {
    let n = dec.dimension();
    let lambda_k = dec.eigenvalues[s.k - 1];
    ReportRow {
        domain_id: label.to_string(),
        n,
        num_vertices: dec.len(),
        k: Some(s.k),
        theorem: s.theorem.label().to_string(),
        lhs: s.lhs,
        rhs: Some(s.rhs),
        slack: s.slack,
        trivial: Some(s.trivial),
        degenerate_gap: Some(s.degenerate_gap),
        lambda_k: Some(lambda_k),
        lambda_k_plus_1: Some(s.lambda_next),
        rho_min: dec.rho_min,
        rho_max: dec.rho_max,
        lambda_k_vs_1_plus_4_over_n: Some(lambda_k <= 1.0 + 4.0 / n as f64),
    }
}

/// Runs every identity and lemma evaluator on one domain and folds each
/// into a summary row. Defect rows report the worst normalized defect in
/// `lhs` against the gate `identity_tol` in `rhs`; slack rows report the
/// worst (lowest) normalized slack in `lhs` against `-slack_tol`. In both
/// cases the `slack` column is the margin, nonnegative iff the check holds.
fn identity_suite(
    label: &str,
    op: &OperatorPair,
    dec: &SpectralDecomposition,
    potential: &Field,
    trial_seed: u64,
    config: &RunConfig,
) -> Vec<(ReportRow, bool)> {
    let domain = op.domain();
    let identity_tol = config.tolerances.identity_tol;
    let slack_tol = config.tolerances.slack_tol;
    let mut rng = SplitMix64::new(trial_seed);

    let trials: Vec<(Field, Field)> = (0..IDENTITY_TRIALS)
        .map(|_| {
            let f = Field::from_fn(domain.clone(), |_| rng.uniform(-1.0, 1.0));
            let g = Field::from_fn(domain.clone(), |_| rng.uniform(-1.0, 1.0));
            (f, g)
        })
        .collect();

    let mut green_worst: f64 = 0.0;
    let mut forms_worst: f64 = 0.0;
    let mut coord_worst: f64 = 0.0;
    let mut gamma_bound_worst = f64::INFINITY;
    for (f, g) in &trials {
        green_worst = green_worst.max(green_defect(domain, f, g).normalized());
        forms_worst = forms_worst.max(gamma_forms_defect(domain, f, g).normalized());
        coord_worst = coord_worst.max(coordinate_identity_defect(domain, f).normalized());
        gamma_bound_worst =
            gamma_bound_worst.min(coordinate_gamma_bound_slack(domain, f).normalized());
    }

    let mut harmonic_worst: f64 = 0.0;
    for alpha in 0..domain.dimension() {
        for (_, v) in laplacian(domain, &Coordinate(alpha)).iter() {
            harmonic_worst = harmonic_worst.max(v.abs());
        }
        let sq = |x: &Vertex| {
            let c = x.coords()[alpha] as f64;
            c * c
        };
        let expected = 1.0 / domain.dimension() as f64;
        for (_, v) in laplacian(domain, &sq).iter() {
            harmonic_worst = harmonic_worst.max((v - expected).abs());
        }
    }

    let check = verify_decomposition(op, dec);

    let mut energy_worst = f64::INFINITY;
    let mut mass_worst = f64::INFINITY;
    let mut correction_worst = f64::INFINITY;
    for i in 0..dec.len() {
        let lam = dec.eigenvalues[i];
        let energy = energy_bound_slack(dec, potential, i).expect("index in range");
        energy_worst = energy_worst.min(energy.slack / (1.0 + lam));
        mass_worst = mass_worst.min(mass_lower_bound_slack(dec, i).expect("index in range"));
        correction_worst =
            correction_worst.min(correction_sum_slack(dec, i).expect("index in range"));
    }

    let make_row = |name: &str, lhs: f64, rhs: f64, margin: f64| ReportRow {
        domain_id: label.to_string(),
        n: dec.dimension(),
        num_vertices: dec.len(),
        k: None,
        theorem: name.to_string(),
        lhs: Some(lhs),
        rhs: Some(rhs),
        slack: Some(margin),
        trivial: None,
        degenerate_gap: None,
        lambda_k: None,
        lambda_k_plus_1: None,
        rho_min: dec.rho_min,
        rho_max: dec.rho_max,
        lambda_k_vs_1_plus_4_over_n: None,
    };
    let defect_row = |name: &str, observed: f64| {
        (
            make_row(name, observed, identity_tol, identity_tol - observed),
            observed <= identity_tol,
        )
    };
    let slack_row = |name: &str, observed: f64| {
        (
            make_row(name, observed, -slack_tol, observed + slack_tol),
            observed >= -slack_tol,
        )
    };

    let mut out = vec![
        defect_row("GREEN", green_worst),
        defect_row("GAMMA_FORMS", forms_worst),
        defect_row("COORD_IDENTITY", coord_worst),
        defect_row("COORD_LAPLACIAN", harmonic_worst),
        slack_row("COORD_GAMMA_BOUND", gamma_bound_worst),
        defect_row("ORTHONORMALITY", check.max_orthonormality_defect),
        defect_row("RESIDUAL", check.max_normalized_residual),
        slack_row("ENERGY_BOUND", energy_worst),
        slack_row("MASS_BOUND", mass_worst),
        slack_row("CORRECTION_BOUND", correction_worst),
    ];

    // pair-coefficient checks need at least one admissible order
    let k = dec.len() - 1;
    if k >= 1 {
        let mut symmetry_worst: f64 = 0.0;
        let mut identity_worst: f64 = 0.0;
        let mut trial_worst: f64 = 0.0;
        let lam_k = dec.eigenvalues[k - 1];
        for alpha in 0..dec.dimension() {
            let pc = pair_coefficients(dec, alpha, k).expect("admissible order");
            let a_scale = (0..k)
                .flat_map(|i| (0..k).map(move |j| (i, j)))
                .fold(1.0f64, |m, (i, j)| m.max(pc.a[(i, j)].abs()));
            symmetry_worst = symmetry_worst.max(pc.symmetry_defect() / a_scale);
            identity_worst =
                identity_worst.max(pc.identity_defect(&dec.eigenvalues) / (1.0 + lam_k));
            for &i in &[0, k - 1] {
                let tf = trial_function(dec, alpha, i, k).expect("admissible order");
                trial_worst = trial_worst.max(tf.orthogonality_defect(dec));
            }
        }
        out.push(defect_row("A_SYMMETRY", symmetry_worst));
        out.push(defect_row("PROP_PAIR_IDENTITY", identity_worst));
        out.push(defect_row("TRIAL_ORTHOGONALITY", trial_worst));

        if dec.rho_min == 1.0 && dec.rho_max == 1.0 {
            let mut reduction_worst: f64 = 0.0;
            for kk in 1..=k {
                let check = unweighted_reduction_check(dec, kk).expect("unit density");
                reduction_worst = reduction_worst.max(check.discrepancy / check.scale);
            }
            out.push(defect_row("REDUCTION", reduction_worst));
        }
    }

    out
}
