//! The four universal eigenvalue bounds and their slack evaluators.
//!
//! Each bound relates `λ_{k+1}` to the first `k` eigenvalues through the
//! density extrema `ρ_min`, `ρ_max` and the dimension `n`. Every evaluator
//! normalizes its result so that `slack ≥ 0` means the bound holds, which
//! lets a single assertion cover all four statements. The weighted brackets
//! such as `ρ_min/ρ_max − ρ_min λ_i` can turn nonpositive, making a bound
//! vacuously true; evaluators flag that regime as `trivial` but still
//! report the numbers.

use thiserror::Error;

use crate::spectral::SpectralDecomposition;

/// Gap below which `λ_{k+1} = λ_k` is treated as exactly degenerate, which
/// leaves the Hile–Protter sum undefined at that `k`.
pub const DEGENERATE_GAP_TOL: f64 = 1e-12;

#[derive(Error, Debug)]
pub enum InequalityError {
    #[error("k = {k} out of range (admissible 1..={max})")]
    KOutOfRange { k: usize, max: usize },
    #[error("reduction check requires rho ≡ 1, got extrema [{rho_min}, {rho_max}]")]
    NonConstantDensity { rho_min: f64, rho_max: f64 },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Theorem {
    Yang1,
    Yang2,
    HileProtter,
    Ppw,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [
        Theorem::Yang1,
        Theorem::Yang2,
        Theorem::HileProtter,
        Theorem::Ppw,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Theorem::Yang1 => "YANG1",
            Theorem::Yang2 => "YANG2",
            Theorem::HileProtter => "HP",
            Theorem::Ppw => "PPW",
        }
    }
}

/// One bound evaluated at one `k`.
///
/// `lhs` and `slack` are `None` only for Hile–Protter at a degenerate gap,
/// where the defining sum is not a number; everything else is always
/// reported, triviality included.
#[derive(Clone, Debug)]
pub struct InequalitySlack {
    pub theorem: Theorem,
    pub k: usize,
    pub lhs: Option<f64>,
    pub rhs: f64,
    pub slack: Option<f64>,
    pub trivial: bool,
    pub degenerate_gap: bool,
    /// `λ_{k+1}`.
    pub lambda_next: f64,
}

fn check_k(dec: &SpectralDecomposition, k: usize) -> Result<(), InequalityError> {
    let max = dec.len().saturating_sub(1);
    if k == 0 || k > max {
        return Err(InequalityError::KOutOfRange { k, max });
    }
    Ok(())
}

/// First Yang-type bound: the weighted quadratic sum
/// `Σ_{i≤k} (λ_{k+1} − λ_i)·(λ_{k+1}(ρ_min/ρ_max − ρ_min λ_i) − λ_i(ρ_min/ρ_max − ρ_min λ_i + 4/n))`
/// is nonpositive. Reported with `lhs` = the sum, `rhs` = 0, `slack` = −sum.
pub fn yang1(dec: &SpectralDecomposition, k: usize) -> Result<InequalitySlack, InequalityError> {
    check_k(dec, k)?;
    let n = dec.dimension() as f64;
    let ratio = dec.rho_min / dec.rho_max;
    let lambda_next = dec.eigenvalues[k];
    let mut sum = 0.0;
    let mut trivial = true;
    for &li in &dec.eigenvalues[..k] {
        let bracket = ratio - dec.rho_min * li;
        if bracket > 0.0 {
            trivial = false;
        }
        sum += (lambda_next - li) * (lambda_next * bracket - li * (bracket + 4.0 / n));
    }
    Ok(InequalitySlack {
        theorem: Theorem::Yang1,
        k,
        lhs: Some(sum),
        rhs: 0.0,
        slack: Some(-sum),
        trivial,
        degenerate_gap: false,
        lambda_next,
    })
}

/// Second Yang-type bound:
/// `λ_{k+1}(1 − (ρ_max/k) Σ λ_i) ≤ (1/k)(1 + 4ρ_max/(nρ_min)) Σ λ_i − (ρ_max/k) Σ λ_i²`.
pub fn yang2(dec: &SpectralDecomposition, k: usize) -> Result<InequalitySlack, InequalityError> {
    check_k(dec, k)?;
    let n = dec.dimension() as f64;
    let kf = k as f64;
    let lambda_next = dec.eigenvalues[k];
    let sum: f64 = dec.eigenvalues[..k].iter().sum();
    let sum_sq: f64 = dec.eigenvalues[..k].iter().map(|l| l * l).sum();
    let bracket = 1.0 - dec.rho_max / kf * sum;
    let lhs = lambda_next * bracket;
    let rhs = (1.0 + 4.0 * dec.rho_max / (n * dec.rho_min)) / kf * sum - dec.rho_max / kf * sum_sq;
    Ok(InequalitySlack {
        theorem: Theorem::Yang2,
        k,
        lhs: Some(lhs),
        rhs,
        slack: Some(rhs - lhs),
        trivial: bracket <= 0.0,
        degenerate_gap: false,
        lambda_next,
    })
}

/// Hile–Protter-type bound:
/// `Σ_{i≤k} λ_i/(λ_{k+1} − λ_i) ≥ (nk/4)(ρ_min/ρ_max − (ρ_min/k) Σ λ_i)`.
///
/// When `λ_{k+1} = λ_k` the left sum is undefined; the result then carries
/// the `degenerate_gap` marker and no lhs/slack.
pub fn hile_protter(
    dec: &SpectralDecomposition,
    k: usize,
) -> Result<InequalitySlack, InequalityError> {
    check_k(dec, k)?;
    let n = dec.dimension() as f64;
    let kf = k as f64;
    let lambda_next = dec.eigenvalues[k];
    let sum: f64 = dec.eigenvalues[..k].iter().sum();
    let rhs = n * kf / 4.0 * (dec.rho_min / dec.rho_max - dec.rho_min / kf * sum);
    let trivial = rhs <= 0.0;

    let gap = lambda_next - dec.eigenvalues[k - 1];
    if gap <= DEGENERATE_GAP_TOL * (1.0 + lambda_next.abs()) {
        return Ok(InequalitySlack {
            theorem: Theorem::HileProtter,
            k,
            lhs: None,
            rhs,
            slack: None,
            trivial,
            degenerate_gap: true,
            lambda_next,
        });
    }

    let lhs: f64 = dec.eigenvalues[..k]
        .iter()
        .map(|&li| li / (lambda_next - li))
        .sum();
    Ok(InequalitySlack {
        theorem: Theorem::HileProtter,
        k,
        lhs: Some(lhs),
        rhs,
        slack: Some(lhs - rhs),
        trivial,
        degenerate_gap: false,
        lambda_next,
    })
}

/// Payne–Pólya–Weinberger-type bound:
/// `(λ_{k+1} − λ_k)(ρ_min/ρ_max − (ρ_min/k) Σ λ_i) ≤ (4/nk) Σ λ_i`.
pub fn ppw(dec: &SpectralDecomposition, k: usize) -> Result<InequalitySlack, InequalityError> {
    check_k(dec, k)?;
    let n = dec.dimension() as f64;
    let kf = k as f64;
    let lambda_next = dec.eigenvalues[k];
    let sum: f64 = dec.eigenvalues[..k].iter().sum();
    let bracket = dec.rho_min / dec.rho_max - dec.rho_min / kf * sum;
    let lhs = (lambda_next - dec.eigenvalues[k - 1]) * bracket;
    let rhs = 4.0 / (n * kf) * sum;
    Ok(InequalitySlack {
        theorem: Theorem::Ppw,
        k,
        lhs: Some(lhs),
        rhs,
        slack: Some(rhs - lhs),
        trivial: bracket <= 0.0,
        degenerate_gap: false,
        lambda_next,
    })
}

/// Evaluates all four bounds at every admissible `k` in the given list,
/// ordered by `k` then theorem. Degenerate-gap Hile–Protter entries are
/// carried as markers.
pub fn evaluate_all(
    dec: &SpectralDecomposition,
    ks: &[usize],
) -> Result<Vec<InequalitySlack>, InequalityError> {
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let mut out = Vec::with_capacity(4 * ks.len());
    for &k in &ks {
        out.push(yang1(dec, k)?);
        out.push(yang2(dec, k)?);
        out.push(hile_protter(dec, k)?);
        out.push(ppw(dec, k)?);
    }
    Ok(out)
}

/// Every admissible order: `1..=N−1` (empty for a single-vertex domain).
pub fn admissible_orders(dec: &SpectralDecomposition) -> Vec<usize> {
    (1..dec.len()).collect()
}

/// Discrepancy between the weighted evaluators at `ρ ≡ 1` and the
/// independently coded unweighted forms.
#[derive(Clone, Copy, Debug)]
pub struct ReductionCheck {
    /// Maximum absolute difference over all compared lhs/rhs/slack values.
    pub discrepancy: f64,
    /// Largest magnitude among the compared values.
    pub scale: f64,
}

/// Checks that at `ρ ≡ 1` the weighted bounds reduce to the unweighted
/// ones. Rejects nonconstant densities; `ρ ≡ c ≠ 1` is covered by the
/// spectral scaling law instead.
pub fn unweighted_reduction_check(
    dec: &SpectralDecomposition,
    k: usize,
) -> Result<ReductionCheck, InequalityError> {
    if dec.rho_min != 1.0 || dec.rho_max != 1.0 {
        return Err(InequalityError::NonConstantDensity {
            rho_min: dec.rho_min,
            rho_max: dec.rho_max,
        });
    }
    check_k(dec, k)?;

    let n = dec.dimension() as f64;
    let kf = k as f64;
    let lam = &dec.eigenvalues;
    let lambda_next = lam[k];
    let sum: f64 = lam[..k].iter().sum();
    let sum_sq: f64 = lam[..k].iter().map(|l| l * l).sum();

    // unweighted forms, coded from scratch
    let u_yang1_sum: f64 = lam[..k]
        .iter()
        .map(|&li| (lambda_next - li) * (lambda_next * (1.0 - li) - li * (1.0 - li + 4.0 / n)))
        .sum();
    let u_yang2_lhs = lambda_next * (1.0 - sum / kf);
    let u_yang2_rhs = (1.0 + 4.0 / n) / kf * sum - sum_sq / kf;
    let u_hp_rhs = n * kf / 4.0 * (1.0 - sum / kf);
    let u_hp_lhs: Option<f64> = {
        let gap = lambda_next - lam[k - 1];
        if gap <= DEGENERATE_GAP_TOL * (1.0 + lambda_next.abs()) {
            None
        } else {
            Some(lam[..k].iter().map(|&li| li / (lambda_next - li)).sum())
        }
    };
    let u_ppw_lhs = (lambda_next - lam[k - 1]) * (1.0 - sum / kf);
    let u_ppw_rhs = 4.0 / (n * kf) * sum;

    let w1 = yang1(dec, k)?;
    let w2 = yang2(dec, k)?;
    let wh = hile_protter(dec, k)?;
    let wp = ppw(dec, k)?;

    let mut pairs: Vec<(f64, f64)> = vec![
        (w1.lhs.unwrap(), u_yang1_sum),
        (w2.lhs.unwrap(), u_yang2_lhs),
        (w2.rhs, u_yang2_rhs),
        (wh.rhs, u_hp_rhs),
        (wp.lhs.unwrap(), u_ppw_lhs),
        (wp.rhs, u_ppw_rhs),
    ];
    if let (Some(w), Some(u)) = (wh.lhs, u_hp_lhs) {
        pairs.push((w, u));
    }

    let mut discrepancy: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (w, u) in pairs {
        discrepancy = discrepancy.max((w - u).abs());
        scale = scale.max(w.abs()).max(u.abs());
    }
    Ok(ReductionCheck {
        discrepancy,
        scale: scale.max(1.0),
    })
}
