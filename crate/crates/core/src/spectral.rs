//! Assembly and full diagonalization of the Dirichlet Schrödinger operator.
//!
//! The eigenvalue problem on a domain `Ω` is
//!
//! ```text
//! -Δu(x) + V(x) u(x) = λ ρ(x) u(x)   for x ∈ Ω,   u = 0 outside Ω,
//! ```
//!
//! with `Δu(x) = (1/d_x) Σ_{y~x} (u(y) − u(x))` and `d_x = 2n`. In the
//! canonical vertex order this is the generalized symmetric problem
//! `D A u = λ M u` with stiffness `A` (`A_xx = 1 + V(x)`, `A_xy = −1/2n` on
//! interior edges), `D = diag(d_x)` and `M = diag(ρ(x) d_x)`. It is solved
//! by the similarity reduction `B = M^{-1/2} (D A) M^{-1/2}`, a dense
//! symmetric eigendecomposition of `B` (Householder tridiagonalization plus
//! implicit-shift iteration), and back-substitution `u = M^{-1/2} w`, which
//! lands the eigenfunctions directly in the `⟨·,·⟩_ρ` orthonormalization
//! `Σ_x u_i u_j ρ d_x = δ_ij`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::lattice::{LatticeDomain, Vertex};

/// Orthonormality tolerance for a returned decomposition.
pub const ORTHONORMALITY_TOL: f64 = 1e-10;

/// Residual tolerance factor; the per-pair contract is
/// `max_x |d_x·(Hu_i − λ_i ρ u_i)(x)| ≤ RESIDUAL_TOL · (1 + |λ_i|)`.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Error, Debug)]
pub enum SpectralError {
    #[error("potential must be nonnegative (V({vertex:?}) = {value})")]
    NegativePotential { vertex: Vertex, value: f64 },
    #[error("density must be positive (rho({vertex:?}) = {value})")]
    NonpositiveDensity { vertex: Vertex, value: f64 },
    #[error("field has {got} values, domain has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("fields are defined on different domains")]
    DomainMismatch,
    #[error("field value at {0:?} is not finite")]
    NonFiniteValue(Vertex),
    #[error("the zero function has no Rayleigh quotient")]
    ZeroFunction,
    #[error("eigensolver did not converge")]
    NoConvergence,
    #[error("spectrum is not positive (lambda_1 = {0}); operator data is inconsistent")]
    NonPositiveSpectrum(f64),
    #[error(
        "decomposition violates its contract (orthonormality defect {orthonormality:e}, \
         normalized residual {residual:e})"
    )]
    ContractViolation { orthonormality: f64, residual: f64 },
}

/// A real-valued function on the vertices of one domain, stored in the
/// canonical vertex order. Evaluation at any vertex outside the domain
/// yields zero (Dirichlet zero extension).
#[derive(Clone, Debug)]
pub struct Field {
    domain: Arc<LatticeDomain>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(domain: Arc<LatticeDomain>, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != domain.len() {
            return Err(SpectralError::LengthMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFiniteValue(domain.vertices()[i].clone()));
        }
        Ok(Field { domain, values })
    }

    pub fn constant(domain: Arc<LatticeDomain>, value: f64) -> Self {
        let n = domain.len();
        Field {
            domain,
            values: vec![value; n],
        }
    }

    pub fn zeros(domain: Arc<LatticeDomain>) -> Self {
        Field::constant(domain, 0.0)
    }

    pub fn from_fn(domain: Arc<LatticeDomain>, f: impl FnMut(&Vertex) -> f64) -> Self {
        let values = domain.vertices().iter().map(f).collect();
        Field { domain, values }
    }

    pub fn domain(&self) -> &Arc<LatticeDomain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at canonical index `i`.
    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Value at an arbitrary lattice vertex; zero outside the domain.
    pub fn at(&self, v: &Vertex) -> f64 {
        match self.domain.index_of(v) {
            Some(i) => self.values[i],
            None => 0.0,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// True when two fields live on the same domain (pointer or structural).
pub fn same_domain(a: &Arc<LatticeDomain>, b: &Arc<LatticeDomain>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Stiffness matrix and density vector of one assembled problem.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    domain: Arc<LatticeDomain>,
    stiffness: DMatrix<f64>,
    mass: DVector<f64>,
}

impl OperatorPair {
    pub fn domain(&self) -> &Arc<LatticeDomain> {
        &self.domain
    }

    /// Symmetric matrix of `−Δ + V` in the canonical vertex order.
    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    /// Density values `ρ(x)` in the canonical vertex order.
    pub fn mass(&self) -> &DVector<f64> {
        &self.mass
    }
}

fn validate_potential(v: &Field) -> Result<(), SpectralError> {
    for (i, &val) in v.values().iter().enumerate() {
        if val < 0.0 || !val.is_finite() {
            return Err(SpectralError::NegativePotential {
                vertex: v.domain().vertices()[i].clone(),
                value: val,
            });
        }
    }
    Ok(())
}

fn validate_density(rho: &Field) -> Result<(), SpectralError> {
    for (i, &val) in rho.values().iter().enumerate() {
        if val <= 0.0 || !val.is_finite() {
            return Err(SpectralError::NonpositiveDensity {
                vertex: rho.domain().vertices()[i].clone(),
                value: val,
            });
        }
    }
    Ok(())
}

/// Assembles the stiffness/mass pair for `−Δ + V` against density `ρ`.
///
/// Row `x` of the stiffness encodes
/// `(1 + V(x)) u(x) − (1/2n) Σ_{y∈Ω, y~x} u(y)`; neighbors outside `Ω`
/// contribute nothing by zero extension.
pub fn assemble(
    domain: &Arc<LatticeDomain>,
    potential: &Field,
    density: &Field,
) -> Result<OperatorPair, SpectralError> {
    if !same_domain(domain, potential.domain()) || !same_domain(domain, density.domain()) {
        return Err(SpectralError::DomainMismatch);
    }
    validate_potential(potential)?;
    validate_density(density)?;

    let n = domain.len();
    let off = -1.0 / domain.degree();
    let mut stiffness = DMatrix::zeros(n, n);
    for i in 0..n {
        stiffness[(i, i)] = 1.0 + potential.value(i);
    }
    for &(i, j) in domain.interior_edges() {
        stiffness[(i, j)] = off;
        stiffness[(j, i)] = off;
    }
    let mass = DVector::from_iterator(n, density.values().iter().cloned());
    Ok(OperatorPair {
        domain: domain.clone(),
        stiffness,
        mass,
    })
}

/// Full spectrum of one assembled problem: ascending eigenvalues, the
/// ρ-orthonormal eigenbasis, and the density extrema the inequality
/// evaluators need.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenfunctions: Vec<Field>,
    pub rho: Field,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl SpectralDecomposition {
    /// Number of eigenpairs `N = |Ω|`.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn domain(&self) -> &Arc<LatticeDomain> {
        self.rho.domain()
    }

    pub fn dimension(&self) -> usize {
        self.domain().dimension()
    }
}

/// Orthonormality and residual maxima of a decomposition against its
/// operator; see [`verify_decomposition`].
#[derive(Clone, Copy, Debug)]
pub struct DecompositionCheck {
    /// `max_{i,j} |Σ_x u_i u_j ρ d_x − δ_ij|`.
    pub max_orthonormality_defect: f64,
    /// `max_i max_x |d_x·(−Δu_i + V u_i − λ_i ρ u_i)(x)|`.
    pub max_residual: f64,
    /// `max_i max_x |d_x·(…)(x)| / (1 + |λ_i|)`, the contract quantity.
    pub max_normalized_residual: f64,
}

/// Computes all `N` eigenpairs of an assembled problem.
///
/// Eigenvalues come back ascending (stable original order inside equal
/// clusters); eigenfunctions satisfy `Σ_x u_i u_j ρ d_x = δ_ij`. The result
/// is verified against the orthonormality and residual contracts before it
/// is returned.
pub fn eigendecompose(op: &OperatorPair) -> Result<SpectralDecomposition, SpectralError> {
    let domain = op.domain();
    let n = domain.len();
    let degree = domain.degree();

    // M = diag(rho * d); B = M^{-1/2} (D A) M^{-1/2}
    let scale: Vec<f64> = op.mass.iter().map(|&r| (r * degree).sqrt()).collect();
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let a = op.stiffness[(i, j)];
            if a != 0.0 {
                b[(i, j)] = degree * a / (scale[i] * scale[j]);
            }
        }
    }

    let (raw_values, raw_vectors) = if n == 1 {
        (vec![b[(0, 0)]], DMatrix::from_element(1, 1, 1.0))
    } else {
        let eig = nalgebra::SymmetricEigen::try_new(b, f64::EPSILON, 0)
            .ok_or(SpectralError::NoConvergence)?;
        (eig.eigenvalues.iter().cloned().collect(), eig.eigenvectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        raw_values[i]
            .partial_cmp(&raw_values[j])
            .expect("eigenvalues are finite")
            .then(i.cmp(&j))
    });

    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw_values[i]).collect();
    if eigenvalues[0] <= 0.0 {
        return Err(SpectralError::NonPositiveSpectrum(eigenvalues[0]));
    }

    let eigenfunctions: Vec<Field> = order
        .iter()
        .map(|&col| {
            let values: Vec<f64> = (0..n)
                .map(|row| raw_vectors[(row, col)] / scale[row])
                .collect();
            Field {
                domain: domain.clone(),
                values,
            }
        })
        .collect();

    let rho = Field {
        domain: domain.clone(),
        values: op.mass.iter().cloned().collect(),
    };
    let dec = SpectralDecomposition {
        eigenvalues,
        eigenfunctions,
        rho_min: rho.min(),
        rho_max: rho.max(),
        rho,
    };

    let check = verify_decomposition(op, &dec);
    if check.max_orthonormality_defect > ORTHONORMALITY_TOL
        || check.max_normalized_residual > RESIDUAL_TOL
    {
        return Err(SpectralError::ContractViolation {
            orthonormality: check.max_orthonormality_defect,
            residual: check.max_normalized_residual,
        });
    }
    Ok(dec)
}

/// Applies `−Δ + V` to the values of a zero-extended field, returning the
/// result on `Ω`.
fn apply_operator(domain: &LatticeDomain, potential: &Field, f: &[f64]) -> Vec<f64> {
    let n = domain.len();
    let inv_deg = 1.0 / domain.degree();
    let mut out: Vec<f64> = (0..n).map(|i| (1.0 + potential.value(i)) * f[i]).collect();
    for &(i, j) in domain.interior_edges() {
        out[i] -= inv_deg * f[j];
        out[j] -= inv_deg * f[i];
    }
    out
}

/// Rayleigh quotient `⟨f, Hf⟩ / ⟨f, f⟩_ρ` of a nonzero trial field, where
/// `⟨f, Hf⟩ = Σ_x f·(−Δf + Vf)·d_x` and `⟨f, f⟩_ρ = Σ_x f² ρ d_x`.
pub fn rayleigh_quotient(
    domain: &Arc<LatticeDomain>,
    potential: &Field,
    density: &Field,
    f: &Field,
) -> Result<f64, SpectralError> {
    if !same_domain(domain, potential.domain())
        || !same_domain(domain, density.domain())
        || !same_domain(domain, f.domain())
    {
        return Err(SpectralError::DomainMismatch);
    }
    validate_potential(potential)?;
    validate_density(density)?;

    let degree = domain.degree();
    let hf = apply_operator(domain, potential, f.values());
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &hfi) in hf.iter().enumerate() {
        num += f.value(i) * hfi * degree;
        den += f.value(i) * f.value(i) * density.value(i) * degree;
    }
    if den == 0.0 {
        return Err(SpectralError::ZeroFunction);
    }
    Ok(num / den)
}

/// Measures how far a decomposition is from its contracts. Callers compare
/// the maxima against [`ORTHONORMALITY_TOL`] and [`RESIDUAL_TOL`].
pub fn verify_decomposition(op: &OperatorPair, dec: &SpectralDecomposition) -> DecompositionCheck {
    let domain = op.domain();
    let n = domain.len();
    let degree = domain.degree();

    let mut max_orth: f64 = 0.0;
    for i in 0..n {
        let ui = dec.eigenfunctions[i].values();
        for j in i..n {
            let uj = dec.eigenfunctions[j].values();
            let mut dot = 0.0;
            for x in 0..n {
                dot += ui[x] * uj[x] * op.mass[x] * degree;
            }
            let target = if i == j { 1.0 } else { 0.0 };
            max_orth = max_orth.max((dot - target).abs());
        }
    }

    let potential = potential_of(op);
    let mut max_res: f64 = 0.0;
    let mut max_norm_res: f64 = 0.0;
    for i in 0..n {
        let ui = dec.eigenfunctions[i].values();
        let lambda = dec.eigenvalues[i];
        let hu = apply_operator(domain, &potential, ui);
        let mut res: f64 = 0.0;
        for x in 0..n {
            let r = degree * (hu[x] - lambda * op.mass[x] * ui[x]);
            res = res.max(r.abs());
        }
        max_res = max_res.max(res);
        max_norm_res = max_norm_res.max(res / (1.0 + lambda.abs()));
    }

    DecompositionCheck {
        max_orthonormality_defect: max_orth,
        max_residual: max_res,
        max_normalized_residual: max_norm_res,
    }
}

/// Recovers `V` from the assembled diagonal (`A_xx = 1 + V(x)`).
fn potential_of(op: &OperatorPair) -> Field {
    let n = op.domain().len();
    Field {
        domain: op.domain().clone(),
        values: (0..n).map(|i| op.stiffness[(i, i)] - 1.0).collect(),
    }
}
