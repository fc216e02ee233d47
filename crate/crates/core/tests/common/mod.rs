//! Shared oracles for the integration suites.
//!
//! Everything here is computed through routes independent of the library's
//! solve path: adjacency by brute-force pairwise distance, eigenvalues by
//! explicit determinant expansion of the characteristic polynomial, and
//! closed forms for paths and boxes.

#![allow(dead_code)]

use std::sync::Arc;

use specbound::lattice::LatticeDomain;
use specbound::rng::SplitMix64;
use specbound::spectral::Field;

/// Closed-form Dirichlet spectrum of the path of `len` vertices in Z¹ with
/// `V = 0`, `ρ ≡ 1`: `λ_k = 1 − cos(kπ/(len+1))`.
pub fn path_eigenvalues(len: usize) -> Vec<f64> {
    (1..=len)
        .map(|k| 1.0 - (k as f64 * std::f64::consts::PI / (len as f64 + 1.0)).cos())
        .collect()
}

/// Closed-form spectrum of the `m×m` box in Z²:
/// `λ_{p,q} = 1 − (cos(pπ/(m+1)) + cos(qπ/(m+1)))/2`, sorted ascending.
pub fn box_eigenvalues(m: usize) -> Vec<f64> {
    let theta = std::f64::consts::PI / (m as f64 + 1.0);
    let mut out = Vec::with_capacity(m * m);
    for p in 1..=m {
        for q in 1..=m {
            out.push(1.0 - ((p as f64 * theta).cos() + (q as f64 * theta).cos()) / 2.0);
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

/// Dense polynomial in one variable, `coeffs[i]` multiplying `λ^i`.
#[derive(Clone, Debug)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn constant(c: f64) -> Self {
        Poly(vec![c])
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Σ |a_i| |x|^i, the natural magnitude of evaluation at `x`.
    pub fn eval_abs(&self, x: f64) -> f64 {
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc: f64, &c| acc * x.abs() + c.abs())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out)
    }

    pub fn add_scaled(&mut self, other: &Poly, factor: f64) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), 0.0);
        }
        for (i, &b) in other.0.iter().enumerate() {
            self.0[i] += factor * b;
        }
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(vec![0.0]);
        }
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| i as f64 * c)
                .collect(),
        )
    }
}

/// Determinant of a square matrix of polynomials by cofactor expansion
/// along the first column. Factorial cost; meant for N ≤ 8.
pub fn det_poly(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = Poly(vec![0.0]);
    for row in 0..n {
        // skip structural zeros to keep the recursion shallow
        if m[row][0].0.iter().all(|&c| c == 0.0) {
            continue;
        }
        let minor: Vec<Vec<Poly>> = (0..n)
            .filter(|&r| r != row)
            .map(|r| m[r][1..].to_vec())
            .collect();
        let sign = if row % 2 == 0 { 1.0 } else { -1.0 };
        let sub = det_poly(&minor);
        det.add_scaled(&m[row][0].mul(&sub), sign);
    }
    det
}

/// All real roots of a polynomial known to have only real roots, with
/// multiplicity, ascending. Roots of the derivative are found recursively;
/// between consecutive critical points the polynomial is monotone, so each
/// surviving root is isolated by a sign change and pinned by bisection.
pub fn real_roots(p: &Poly) -> Vec<f64> {
    let coeffs = &p.0;
    let deg = coeffs.len() - 1;
    assert!(deg >= 1, "constant polynomial");
    let lead = coeffs[deg];
    assert!(lead != 0.0, "leading coefficient vanished");

    if deg == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }

    let crit = real_roots(&p.derivative());
    // Cauchy root bound
    let bound = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| (c / lead).abs())
            .fold(0.0, f64::max);

    let mut endpoints = Vec::with_capacity(crit.len() + 2);
    endpoints.push(-bound - 1.0);
    endpoints.extend(crit.iter().cloned());
    endpoints.push(bound + 1.0);

    let near_zero = |x: f64| p.eval(x).abs() <= 1e-11 * p.eval_abs(x).max(f64::MIN_POSITIVE);

    let mut roots = Vec::new();
    // multiple roots sit at critical points: multiplicity m in p appears
    // as multiplicity m−1 in p'
    let mut i = 0;
    while i < crit.len() {
        let mut j = i + 1;
        while j < crit.len() && (crit[j] - crit[i]).abs() <= 1e-9 * (1.0 + crit[i].abs()) {
            j += 1;
        }
        if near_zero(crit[i]) {
            let multiplicity = (j - i) + 1;
            for _ in 0..multiplicity {
                roots.push(crit[i]);
            }
        }
        i = j;
    }

    for w in endpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (pa, pb) = (p.eval(a), p.eval(b));
        if near_zero(a) || near_zero(b) {
            continue; // roots at critical points were already collected
        }
        if pa.signum() == pb.signum() {
            continue;
        }
        let (mut lo, mut hi) = (a, b);
        let mut flo = pa;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = p.eval(mid);
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo.signum() {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }

    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Generalized eigenvalues of `(K, diag(rho))` as the roots of
/// `det(K − λ diag(rho))`, expanded explicitly.
pub fn charpoly_eigenvalues(stiffness: &[Vec<f64>], rho: &[f64]) -> Vec<f64> {
    let n = rho.len();
    let entries: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Poly(vec![stiffness[i][j], -rho[i]])
                    } else {
                        Poly::constant(stiffness[i][j])
                    }
                })
                .collect()
        })
        .collect();
    real_roots(&det_poly(&entries))
}

/// Stiffness of `−Δ + V` built independently of the lattice module's edge
/// list: adjacency decided by brute-force pairwise ℓ¹ distance.
pub fn brute_force_stiffness(domain: &LatticeDomain, potential: &Field) -> Vec<Vec<f64>> {
    let n = domain.len();
    let off = -1.0 / domain.degree();
    let mut k = vec![vec![0.0; n]; n];
    for (i, row) in k.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i == j {
                *cell = 1.0 + potential.value(i);
            } else if domain.vertices()[i].l1_distance(&domain.vertices()[j]) == 1 {
                *cell = off;
            }
        }
    }
    k
}

/// One randomized verification case.
pub struct RandomCase {
    pub domain: Arc<LatticeDomain>,
    pub potential: Field,
    pub density: Field,
}

/// Deterministic case stream: dimension cycles `{1,2,3}`, size uniform in
/// `[min_size, max_size]`, `V ~ U[0, v_max]`, `ρ ~ U[rho_lo, rho_hi]`.
pub fn random_case(
    rng: &mut SplitMix64,
    min_size: usize,
    max_size: usize,
    v_max: f64,
    rho_lo: f64,
    rho_hi: f64,
) -> RandomCase {
    let n = 1 + rng.next_index(3);
    let size = min_size + rng.next_index(max_size - min_size + 1);
    let seed = rng.next_u64();
    let domain = Arc::new(LatticeDomain::make_random_connected(n, size, seed).unwrap());
    let mut vals = Vec::with_capacity(domain.len());
    for _ in 0..domain.len() {
        vals.push(if v_max == 0.0 {
            0.0
        } else {
            rng.uniform(0.0, v_max)
        });
    }
    let potential = Field::new(domain.clone(), vals).unwrap();
    let mut dvals = Vec::with_capacity(domain.len());
    for _ in 0..domain.len() {
        dvals.push(rng.uniform(rho_lo, rho_hi));
    }
    let density = Field::new(domain.clone(), dvals).unwrap();
    RandomCase {
        domain,
        potential,
        density,
    }
}

/// Uniform test field in `[-1, 1]`.
pub fn random_field(domain: &Arc<LatticeDomain>, rng: &mut SplitMix64) -> Field {
    Field::from_fn(domain.clone(), |_| rng.uniform(-1.0, 1.0))
}
