//! Discrete differential calculus on lattice domains.
//!
//! Provides the edge gradient, the degree-normalized Laplacian, and the
//! carré du champ operator `Γ`, together with defect/slack evaluators for
//! every intermediate identity the eigenvalue bounds rest on: the
//! summation-by-parts (Green) identity, the coordinate-function identities,
//! the Dirichlet energy bound, the pair coefficients `a_ij`/`b_ij` and their
//! commutation identity `2 b_ij = (λ_i − λ_j) a_ij`, orthogonalized trial
//! functions, and the mass/correction estimates.
//!
//! Two kinds of functions enter these formulas and they extend differently
//! beyond `Ω`: fields (eigenfunctions, potentials, test functions) extend by
//! zero, while coordinate functions `x ↦ x_α` keep their exact values on all
//! of `Z^n`. The [`LatticeFunction`] trait captures both. All quantities
//! below are supported on the closure `Ω ∪ ∂Ω`, so sums nominally over `Z^n`
//! are taken there.
//!
//! Edge sums `Σ_{x,y}` run over ordered pairs (both orientations of every
//! edge); the prefactors (1/2 in the Green identity, 1/4 in the correction
//! term) assume exactly that convention.

use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::lattice::{LatticeDomain, Vertex};
use crate::spectral::{same_domain, Field, SpectralDecomposition};

#[derive(Error, Debug)]
pub enum CalculusError {
    #[error("vertices {x:?} and {y:?} are not lattice neighbors")]
    NotAdjacent { x: Vertex, y: Vertex },
    #[error("eigenpair index {index} out of range for {n} eigenpairs")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("order k = {k} out of range (admissible 1..={max})")]
    OrderOutOfRange { k: usize, max: usize },
    #[error("coordinate axis {alpha} out of range for dimension {n}")]
    AxisOutOfRange { alpha: usize, n: usize },
    #[error("trial index {index} must be below the order k = {k}")]
    TrialIndexOutOfRange { index: usize, k: usize },
    #[error("field is defined on a different domain")]
    DomainMismatch,
}

/// A real-valued function on all of `Z^n`.
pub trait LatticeFunction {
    fn eval(&self, v: &Vertex) -> f64;
}

/// Fields evaluate by zero extension outside their domain.
impl LatticeFunction for Field {
    fn eval(&self, v: &Vertex) -> f64 {
        self.at(v)
    }
}

/// The coordinate function `x ↦ x_α` (0-based axis), exact at every vertex.
#[derive(Clone, Copy, Debug)]
pub struct Coordinate(pub usize);

impl LatticeFunction for Coordinate {
    fn eval(&self, v: &Vertex) -> f64 {
        v.coords()[self.0] as f64
    }
}

impl<F: Fn(&Vertex) -> f64> LatticeFunction for F {
    fn eval(&self, v: &Vertex) -> f64 {
        self(v)
    }
}

/// Values on the closure `Ω ∪ ∂Ω`, the support of every zero-extended
/// derivative quantity.
#[derive(Clone, Debug)]
pub struct ClosureField {
    domain: Arc<LatticeDomain>,
    interior: Vec<f64>,
    boundary: Vec<f64>,
}

impl ClosureField {
    pub fn domain(&self) -> &Arc<LatticeDomain> {
        &self.domain
    }

    /// Values on `Ω` in canonical vertex order.
    pub fn interior_values(&self) -> &[f64] {
        &self.interior
    }

    /// Values on `∂Ω` in lexicographic order.
    pub fn boundary_values(&self) -> &[f64] {
        &self.boundary
    }

    /// Value at an arbitrary vertex; zero beyond the closure.
    pub fn at(&self, v: &Vertex) -> f64 {
        if let Some(i) = self.domain.index_of(v) {
            return self.interior[i];
        }
        match self.domain.boundary().binary_search(v) {
            Ok(i) => self.boundary[i],
            Err(_) => 0.0,
        }
    }

    /// Iterates `(vertex, value)` over `Ω` then `∂Ω`.
    pub fn iter(&self) -> impl Iterator<Item = (&Vertex, f64)> {
        self.domain
            .vertices()
            .iter()
            .zip(self.interior.iter().cloned())
            .chain(
                self.domain
                    .boundary()
                    .iter()
                    .zip(self.boundary.iter().cloned()),
            )
    }

    /// `Σ_x value(x) · d_x` over the closure.
    pub fn weighted_sum(&self) -> f64 {
        let d = self.domain.degree();
        let mut total = 0.0;
        for v in self.interior.iter().chain(self.boundary.iter()) {
            total += v * d;
        }
        total
    }
}

/// Evaluates `per_vertex(x)` at every closure vertex.
fn on_closure(
    domain: &Arc<LatticeDomain>,
    mut per_vertex: impl FnMut(&Vertex) -> f64,
) -> ClosureField {
    let interior = domain.vertices().iter().map(&mut per_vertex).collect();
    let boundary = domain.boundary().iter().map(&mut per_vertex).collect();
    ClosureField {
        domain: domain.clone(),
        interior,
        boundary,
    }
}

/// Sums `term(x, y, ∇_xy)` over ordered pairs: every closure vertex `x`
/// paired with each of its `2n` lattice neighbors `y`.
fn ordered_edge_sum(domain: &LatticeDomain, mut term: impl FnMut(&Vertex, &Vertex) -> f64) -> f64 {
    let mut total = 0.0;
    for x in domain.vertices().iter().chain(domain.boundary().iter()) {
        for y in x.lattice_neighbors() {
            total += term(x, &y);
        }
    }
    total
}

/// Gradient `f(y) − f(x)` along the edge `(x, y)`. The endpoints may lie
/// outside the domain; zero extension (or exact coordinates) apply.
pub fn edge_gradient(
    f: &impl LatticeFunction,
    x: &Vertex,
    y: &Vertex,
) -> Result<f64, CalculusError> {
    if x.dim() != y.dim() || x.l1_distance(y) != 1 {
        return Err(CalculusError::NotAdjacent {
            x: x.clone(),
            y: y.clone(),
        });
    }
    Ok(f.eval(y) - f.eval(x))
}

/// Degree-normalized Laplacian `Δf(x) = (1/d_x) Σ_{y~x} (f(y) − f(x))` on
/// the closure.
pub fn laplacian(domain: &Arc<LatticeDomain>, f: &impl LatticeFunction) -> ClosureField {
    let inv_d = 1.0 / domain.degree();
    on_closure(domain, |x| {
        let fx = f.eval(x);
        let mut acc = 0.0;
        for y in x.lattice_neighbors() {
            acc += f.eval(&y) - fx;
        }
        inv_d * acc
    })
}

/// Carré du champ `Γ(f,g)(x) = (1/2d_x) Σ_{y~x} ∇_xy f · ∇_xy g` on the
/// closure. `Γ(f) := Γ(f,f)` is nonnegative everywhere.
pub fn gamma(
    domain: &Arc<LatticeDomain>,
    f: &impl LatticeFunction,
    g: &impl LatticeFunction,
) -> ClosureField {
    let half_inv_d = 0.5 / domain.degree();
    on_closure(domain, |x| {
        let fx = f.eval(x);
        let gx = g.eval(x);
        let mut acc = 0.0;
        for y in x.lattice_neighbors() {
            acc += (f.eval(&y) - fx) * (g.eval(&y) - gx);
        }
        half_inv_d * acc
    })
}

/// Two sides of one identity, their absolute defect, and the magnitude of
/// the summed terms against which the defect should be judged.
#[derive(Clone, Copy, Debug)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
    pub scale: f64,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64, scale: f64) -> Self {
        IdentityCheck {
            lhs,
            rhs,
            defect: (lhs - rhs).abs(),
            scale,
        }
    }

    /// Defect relative to the summand magnitude (0 when nothing was summed).
    pub fn normalized(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.defect / self.scale
        }
    }
}

/// A one-sided bound: `slack ≥ 0` up to rounding means the bound holds.
#[derive(Clone, Copy, Debug)]
pub struct SlackCheck {
    pub slack: f64,
    pub scale: f64,
}

impl SlackCheck {
    /// Slack relative to the magnitudes entering the bound.
    pub fn normalized(&self) -> f64 {
        if self.scale == 0.0 {
            0.0
        } else {
            self.slack / self.scale
        }
    }
}

/// Summation-by-parts defect: compares `Σ_x (Δf)(x) g(x) d_x` (lhs) with
/// `−(1/2) Σ_{x,y} μ_xy ∇_xy f ∇_xy g` (rhs). `f` must be a zero-extended
/// field so the sums are finite; `g` may be any lattice function.
pub fn green_defect(
    domain: &Arc<LatticeDomain>,
    f: &Field,
    g: &impl LatticeFunction,
) -> IdentityCheck {
    let d = domain.degree();
    let lap = laplacian(domain, f);
    let mut lhs = 0.0;
    let mut scale = 0.0;
    for (x, df) in lap.iter() {
        let term = df * g.eval(x) * d;
        lhs += term;
        scale += term.abs();
    }
    let mut edge = 0.0;
    let mut edge_abs = 0.0;
    ordered_edge_sum(domain, |x, y| {
        let t = (f.eval(y) - f.eval(x)) * (g.eval(y) - g.eval(x));
        edge += t;
        edge_abs += t.abs();
        0.0
    });
    let rhs = -0.5 * edge;
    IdentityCheck::new(lhs, rhs, scale + 0.5 * edge_abs)
}

/// Pointwise agreement of the two forms of `Γ(f,g)`: the edge sum versus
/// `(1/2)(Δ(fg) − fΔg − gΔf)`. Returns the maximum pointwise discrepancy
/// over the closure as `defect`.
pub fn gamma_forms_defect(domain: &Arc<LatticeDomain>, f: &Field, g: &Field) -> IdentityCheck {
    let product = Field::from_fn(domain.clone(), |v| f.at(v) * g.at(v));
    let lap_fg = laplacian(domain, &product);
    let lap_f = laplacian(domain, f);
    let lap_g = laplacian(domain, g);
    let edge_form = gamma(domain, f, g);

    let mut max_defect: f64 = 0.0;
    let mut max_mag: f64 = 0.0;
    for (((x, e), (_, dfg)), ((_, df), (_, dg))) in edge_form
        .iter()
        .zip(lap_fg.iter())
        .zip(lap_f.iter().zip(lap_g.iter()))
    {
        let bracket = 0.5 * (dfg - f.at(x) * dg - g.at(x) * df);
        max_defect = max_defect.max((e - bracket).abs());
        max_mag = max_mag.max(e.abs() + bracket.abs());
    }
    IdentityCheck {
        lhs: max_defect,
        rhs: 0.0,
        defect: max_defect,
        scale: max_mag.max(1.0),
    }
}

/// Coordinate-function energy identity: compares
/// `Σ_α (1/2) Σ_{x,y} μ_xy |∇_xy x_α|² |∇_xy u|²` with `Σ_x Γ(u)(x) d_x`.
pub fn coordinate_identity_defect(domain: &Arc<LatticeDomain>, u: &Field) -> IdentityCheck {
    let n = domain.dimension();
    let mut lhs = 0.0;
    for alpha in 0..n {
        ordered_edge_sum(domain, |x, y| {
            let dg = (y.coords()[alpha] - x.coords()[alpha]) as f64;
            let du = u.at(y) - u.at(x);
            lhs += 0.5 * dg * dg * du * du;
            0.0
        });
    }
    let rhs = gamma(domain, u, u).weighted_sum();
    IdentityCheck::new(lhs, rhs, lhs.abs() + rhs.abs())
}

/// Coordinate-Γ bound: slack of
/// `Σ_α Σ_x Γ(x_α, u)²(x) d_x ≤ (1/2n) Σ_x Γ(u)(x) d_x`.
pub fn coordinate_gamma_bound_slack(domain: &Arc<LatticeDomain>, u: &Field) -> SlackCheck {
    let n = domain.dimension();
    let bound = gamma(domain, u, u).weighted_sum() / (2.0 * n as f64);
    let d = domain.degree();
    let mut total = 0.0;
    for alpha in 0..n {
        let g = gamma(domain, &Coordinate(alpha), u);
        for (_, val) in g.iter() {
            total += val * val * d;
        }
    }
    SlackCheck {
        slack: bound - total,
        scale: bound.abs() + total.abs(),
    }
}

/// Dirichlet energy bound for one eigenpair: `Σ_x Γ(u_i)(x) d_x ≤ λ_i`.
#[derive(Clone, Copy, Debug)]
pub struct EnergyBound {
    /// `λ_i − Σ_x Γ(u_i) d_x`; nonnegative up to rounding.
    pub slack: f64,
    /// `Σ_x V u_i² d_x`, which the slack equals identically.
    pub potential_term: f64,
}

pub fn energy_bound_slack(
    dec: &SpectralDecomposition,
    potential: &Field,
    i: usize,
) -> Result<EnergyBound, CalculusError> {
    if i >= dec.len() {
        return Err(CalculusError::IndexOutOfRange {
            index: i,
            n: dec.len(),
        });
    }
    if !same_domain(dec.domain(), potential.domain()) {
        return Err(CalculusError::DomainMismatch);
    }
    let domain = dec.domain();
    let u = &dec.eigenfunctions[i];
    let energy = gamma(domain, u, u).weighted_sum();
    let d = domain.degree();
    let mut potential_term = 0.0;
    for x in 0..domain.len() {
        potential_term += potential.value(x) * u.value(x) * u.value(x) * d;
    }
    Ok(EnergyBound {
        slack: dec.eigenvalues[i] - energy,
        potential_term,
    })
}

/// Mass lower bound for one eigenpair: `Σ_x u_i² d_x ≥ 1/ρ_max`; returns
/// the slack `Σ_x u_i² d_x − 1/ρ_max`.
pub fn mass_lower_bound_slack(dec: &SpectralDecomposition, i: usize) -> Result<f64, CalculusError> {
    if i >= dec.len() {
        return Err(CalculusError::IndexOutOfRange {
            index: i,
            n: dec.len(),
        });
    }
    let d = dec.domain().degree();
    let u = &dec.eigenfunctions[i];
    let mass: f64 = u.values().iter().map(|v| v * v * d).sum();
    Ok(mass - 1.0 / dec.rho_max)
}

/// Correction term `I_g(u) = (1/4) Σ_{x,y} μ_xy |∇_xy g|² |∇_xy u|²` for the
/// coordinate function `g = x_α`.
pub fn correction_term(domain: &Arc<LatticeDomain>, u: &Field, alpha: usize) -> f64 {
    let mut total = 0.0;
    ordered_edge_sum(domain, |x, y| {
        let dg = (y.coords()[alpha] - x.coords()[alpha]) as f64;
        let du = u.at(y) - u.at(x);
        total += 0.25 * dg * dg * du * du;
        0.0
    });
    total
}

/// Correction-sum bound for one eigenpair:
/// `Σ_α I_{x_α}(u_i) ≤ λ_i/2`; returns the slack.
pub fn correction_sum_slack(dec: &SpectralDecomposition, i: usize) -> Result<f64, CalculusError> {
    if i >= dec.len() {
        return Err(CalculusError::IndexOutOfRange {
            index: i,
            n: dec.len(),
        });
    }
    let domain = dec.domain();
    let u = &dec.eigenfunctions[i];
    let total: f64 = (0..domain.dimension())
        .map(|alpha| correction_term(domain, u, alpha))
        .sum();
    Ok(0.5 * dec.eigenvalues[i] - total)
}

/// Pair coefficients of the first `k` eigenpairs against one coordinate
/// function `g = x_α`:
/// `a_ij = Σ_x g u_i u_j ρ d_x` and `b_ij = Σ_x u_j Γ(g, u_i) d_x`.
#[derive(Clone, Debug)]
pub struct PairCoefficients {
    pub alpha: usize,
    pub k: usize,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl PairCoefficients {
    /// `max_{i,j} |a_ij − a_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.k {
            for j in 0..self.k {
                worst = worst.max((self.a[(i, j)] - self.a[(j, i)]).abs());
            }
        }
        worst
    }

    /// Commutation identity defect `max_{i,j} |2 b_ij − (λ_i − λ_j) a_ij|`
    /// against the first `k` eigenvalues.
    pub fn identity_defect(&self, eigenvalues: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.k {
            for j in 0..self.k {
                let expected = (eigenvalues[i] - eigenvalues[j]) * self.a[(i, j)];
                worst = worst.max((2.0 * self.b[(i, j)] - expected).abs());
            }
        }
        worst
    }
}

pub fn pair_coefficients(
    dec: &SpectralDecomposition,
    alpha: usize,
    k: usize,
) -> Result<PairCoefficients, CalculusError> {
    let domain = dec.domain();
    let n_dim = domain.dimension();
    if alpha >= n_dim {
        return Err(CalculusError::AxisOutOfRange { alpha, n: n_dim });
    }
    // The coefficients and their identity need no (k+1)-th eigenvalue, so
    // k may run up to N here; trial functions restrict it further.
    let n = dec.len();
    if k == 0 || k > n {
        return Err(CalculusError::OrderOutOfRange { k, max: n });
    }

    let d = domain.degree();
    let g: Vec<f64> = domain
        .vertices()
        .iter()
        .map(|v| v.coords()[alpha] as f64)
        .collect();

    let mut a = DMatrix::zeros(k, k);
    for i in 0..k {
        let ui = dec.eigenfunctions[i].values();
        for j in 0..k {
            let uj = dec.eigenfunctions[j].values();
            let mut acc = 0.0;
            for x in 0..domain.len() {
                acc += g[x] * ui[x] * uj[x] * dec.rho.value(x) * d;
            }
            a[(i, j)] = acc;
        }
    }

    let coord = Coordinate(alpha);
    let mut b = DMatrix::zeros(k, k);
    for i in 0..k {
        // u_j vanishes outside Ω, so the interior part of Γ(g, u_i) suffices.
        let gam = gamma(domain, &coord, &dec.eigenfunctions[i]);
        for j in 0..k {
            let uj = dec.eigenfunctions[j].values();
            let mut acc = 0.0;
            for (ujx, gx) in uj.iter().zip(gam.interior_values()) {
                acc += ujx * gx * d;
            }
            b[(i, j)] = acc;
        }
    }

    Ok(PairCoefficients { alpha, k, a, b })
}

/// Trial function `φ_i = g·u_i − Σ_{j<k} a_ij u_j`, ρ-orthogonal to the
/// first `k` eigenfunctions by construction.
#[derive(Clone, Debug)]
pub struct TrialFunction {
    /// 0-based index of the eigenpair the trial function is built from.
    pub index: usize,
    pub alpha: usize,
    pub k: usize,
    pub phi: Field,
    /// `Σ_x φ_i² ρ d_x`.
    pub norm_sq_rho: f64,
    /// Correction term `I_g(u_i)`.
    pub correction: f64,
}

impl TrialFunction {
    /// `max_{j<k} |Σ_x φ_i u_j ρ d_x|`.
    pub fn orthogonality_defect(&self, dec: &SpectralDecomposition) -> f64 {
        let domain = dec.domain();
        let d = domain.degree();
        let mut worst: f64 = 0.0;
        for j in 0..self.k {
            let uj = dec.eigenfunctions[j].values();
            let mut dot = 0.0;
            for (x, &ujx) in uj.iter().enumerate() {
                dot += self.phi.value(x) * ujx * dec.rho.value(x) * d;
            }
            worst = worst.max(dot.abs());
        }
        worst
    }
}

pub fn trial_function(
    dec: &SpectralDecomposition,
    alpha: usize,
    i: usize,
    k: usize,
) -> Result<TrialFunction, CalculusError> {
    if k > dec.len().saturating_sub(1) {
        // a trial function is only useful against λ_{k+1}
        return Err(CalculusError::OrderOutOfRange {
            k,
            max: dec.len().saturating_sub(1),
        });
    }
    let coeffs = pair_coefficients(dec, alpha, k)?;
    if i >= k {
        return Err(CalculusError::TrialIndexOutOfRange { index: i, k });
    }
    let domain = dec.domain();
    let d = domain.degree();

    let mut phi: Vec<f64> = domain
        .vertices()
        .iter()
        .enumerate()
        .map(|(x, v)| v.coords()[alpha] as f64 * dec.eigenfunctions[i].value(x))
        .collect();
    for j in 0..k {
        let a_ij = coeffs.a[(i, j)];
        for (x, p) in phi.iter_mut().enumerate() {
            *p -= a_ij * dec.eigenfunctions[j].value(x);
        }
    }

    let mut norm_sq = 0.0;
    for (x, p) in phi.iter().enumerate() {
        norm_sq += p * p * dec.rho.value(x) * d;
    }
    let phi = Field::new(domain.clone(), phi).expect("phi matches domain");
    let correction = correction_term(domain, &dec.eigenfunctions[i], alpha);

    Ok(TrialFunction {
        index: i,
        alpha,
        k,
        phi,
        norm_sq_rho: norm_sq,
        correction,
    })
}
