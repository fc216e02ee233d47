//! Dirichlet Schrödinger operators on finite subsets of the integer lattice.
//!
//! The crate assembles the weighted operator `(-Δ + V)/ρ` on an arbitrary
//! finite vertex set `Ω ⊂ Z^n` with zero-extension (Dirichlet) boundary
//! conditions, computes its full spectrum, and provides evaluators for the
//! discrete calculus identities and the four universal eigenvalue bounds
//! (two Yang-type, Hile–Protter, Payne–Pólya–Weinberger) that the spectrum
//! must satisfy.
//!
//! Conventions used throughout:
//!
//! * Every vertex of `Z^n` has degree `d_x = 2n`, including vertices next to
//!   the boundary. Dirichlet conditions are imposed by extending functions
//!   by zero outside `Ω`, never by truncating degrees.
//! * Inner products carry the degree weight explicitly:
//!   `⟨f, g⟩_ρ = Σ_x f(x) g(x) ρ(x) d_x`.
//! * Edge sums run over ordered vertex pairs (both orientations), which is
//!   why the summation-by-parts identity carries a 1/2 prefactor.

pub mod calculus;
pub mod inequalities;
pub mod lattice;
pub mod rng;
pub mod spectral;

pub use calculus::{Coordinate, LatticeFunction, PairCoefficients, TrialFunction};
pub use inequalities::{InequalitySlack, Theorem};
pub use lattice::{LatticeDomain, Vertex};
pub use spectral::{Field, OperatorPair, SpectralDecomposition};
