//! Finite subsets of the integer lattice `Z^n`.
//!
//! A [`LatticeDomain`] is a nonempty finite vertex set `Ω ⊂ Z^n` together
//! with its vertex boundary `∂Ω` (the outside vertices adjacent to `Ω`) and
//! the set of interior edges (unordered pairs of `Ω`-vertices at ℓ¹ distance
//! one). Vertices are stored in lexicographic coordinate order and every
//! matrix or report downstream indexes them by that canonical order.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::Deserialize;
use thiserror::Error;

use crate::rng::SplitMix64;

/// Coordinates are capped so that squared coordinates and their sums stay
/// exactly representable in an f64; coordinate-function identities would
/// silently lose precision past this.
pub const MAX_COORD: i64 = 1 << 20;

/// Hard cap on domain size; dense solves beyond this are not supported.
pub const MAX_VERTICES: usize = 4096;

/// A point of `Z^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex(pub Vec<i64>);

impl Vertex {
    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// All `2n` unit-ℓ¹ neighbors in `Z^n`, in a fixed order: for each axis,
    /// the −1 step then the +1 step.
    pub fn lattice_neighbors(&self) -> Vec<Vertex> {
        let n = self.0.len();
        let mut out = Vec::with_capacity(2 * n);
        for axis in 0..n {
            for step in [-1i64, 1] {
                let mut c = self.0.clone();
                c[axis] += step;
                out.push(Vertex(c));
            }
        }
        out
    }

    /// ℓ¹ distance to another vertex of the same dimension.
    pub fn l1_distance(&self, other: &Vertex) -> i64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Error, Debug)]
pub enum LatticeError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("domain must contain at least one vertex")]
    EmptyDomain,
    #[error("box sides must all be at least 1")]
    ZeroSide,
    #[error("expected {expected} box sides, got {got}")]
    SideCountMismatch { expected: usize, got: usize },
    #[error("L-shape arm must be at least 2")]
    ArmTooSmall,
    #[error("random domain size must be at least 1")]
    ZeroSize,
    #[error("domain may hold at most {MAX_VERTICES} vertices, got {0}")]
    TooManyVertices(usize),
    #[error("duplicate vertex {0:?}")]
    DuplicateVertex(Vertex),
    #[error("vertex {vertex:?} has {got} coordinates, expected {expected}")]
    DimensionMismatch {
        vertex: Vertex,
        expected: usize,
        got: usize,
    },
    #[error("coordinate magnitude of {0:?} exceeds {MAX_COORD}")]
    CoordinateOverflow(Vertex),
    #[error("vertex {0:?} is not in the domain")]
    VertexNotInDomain(Vertex),
    #[error("invalid domain file: {0}")]
    Parse(String),
}

/// A finite subset of `Z^n` with cached boundary and interior edges.
///
/// Immutable after construction; wrap it in an `Arc` to share between
/// fields, operators and parallel evaluations.
#[derive(Clone)]
pub struct LatticeDomain {
    dimension: usize,
    vertices: Vec<Vertex>,
    index: HashMap<Vertex, usize>,
    boundary: Vec<Vertex>,
    interior_edges: Vec<(usize, usize)>,
}

impl PartialEq for LatticeDomain {
    fn eq(&self, other: &Self) -> bool {
        // Boundary and edges are derived from (dimension, vertices).
        self.dimension == other.dimension && self.vertices == other.vertices
    }
}

impl Eq for LatticeDomain {}

impl fmt::Debug for LatticeDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LatticeDomain")
            .field("dimension", &self.dimension)
            .field("vertices", &self.vertices.len())
            .field("boundary", &self.boundary.len())
            .field("interior_edges", &self.interior_edges.len())
            .finish()
    }
}

impl LatticeDomain {
    /// Builds a domain from an arbitrary vertex list. The list is sorted
    /// into lexicographic order; boundary and interior edges are computed.
    pub fn new(dimension: usize, vertices: Vec<Vertex>) -> Result<Self, LatticeError> {
        if dimension == 0 {
            return Err(LatticeError::ZeroDimension);
        }
        if vertices.is_empty() {
            return Err(LatticeError::EmptyDomain);
        }
        if vertices.len() > MAX_VERTICES {
            return Err(LatticeError::TooManyVertices(vertices.len()));
        }
        for v in &vertices {
            if v.dim() != dimension {
                return Err(LatticeError::DimensionMismatch {
                    vertex: v.clone(),
                    expected: dimension,
                    got: v.dim(),
                });
            }
            if v.coords().iter().any(|c| c.abs() > MAX_COORD) {
                return Err(LatticeError::CoordinateOverflow(v.clone()));
            }
        }

        let mut vertices = vertices;
        vertices.sort();
        for w in vertices.windows(2) {
            if w[0] == w[1] {
                return Err(LatticeError::DuplicateVertex(w[0].clone()));
            }
        }

        let index: HashMap<Vertex, usize> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i))
            .collect();

        let mut boundary = BTreeSet::new();
        let mut interior_edges = Vec::new();
        for (i, v) in vertices.iter().enumerate() {
            for nb in v.lattice_neighbors() {
                match index.get(&nb) {
                    Some(&j) => {
                        if i < j {
                            interior_edges.push((i, j));
                        }
                    }
                    None => {
                        boundary.insert(nb);
                    }
                }
            }
        }
        interior_edges.sort_unstable();

        Ok(LatticeDomain {
            dimension,
            vertices,
            index,
            boundary: boundary.into_iter().collect(),
            interior_edges,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Number of vertices `N = |Ω|`.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Constant vertex degree `d_x = 2n` of the ambient lattice.
    pub fn degree(&self) -> f64 {
        2.0 * self.dimension as f64
    }

    /// Vertices of `Ω` in lexicographic order.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    /// The vertex boundary `∂Ω`, in lexicographic order.
    pub fn boundary(&self) -> &[Vertex] {
        &self.boundary
    }

    /// Interior edges as index pairs `(i, j)` with `i < j` into the
    /// canonical vertex order.
    pub fn interior_edges(&self) -> &[(usize, usize)] {
        &self.interior_edges
    }

    pub fn contains(&self, v: &Vertex) -> bool {
        self.index.contains_key(v)
    }

    /// Canonical index of an `Ω`-vertex.
    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    /// All `2n` lattice neighbors of `x ∈ Ω`, each flagged `true` when the
    /// neighbor lies inside `Ω`. Rejects vertices outside the domain.
    pub fn lattice_neighbors(&self, x: &Vertex) -> Result<Vec<(Vertex, bool)>, LatticeError> {
        if !self.contains(x) {
            return Err(LatticeError::VertexNotInDomain(x.clone()));
        }
        Ok(x.lattice_neighbors()
            .into_iter()
            .map(|nb| {
                let inside = self.contains(&nb);
                (nb, inside)
            })
            .collect())
    }

    /// True when breadth-first traversal over interior edges reaches every
    /// vertex from the first one.
    pub fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in &self.interior_edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; n];
        let mut queue = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    queue.push(j);
                }
            }
        }
        count == n
    }

    /// Axis-aligned box `{0..sides[0]-1} × … × {0..sides[n-1]-1}`.
    pub fn make_box(n: usize, sides: &[u32]) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::ZeroDimension);
        }
        if sides.len() != n {
            return Err(LatticeError::SideCountMismatch {
                expected: n,
                got: sides.len(),
            });
        }
        if sides.contains(&0) {
            return Err(LatticeError::ZeroSide);
        }
        let total: usize = sides.iter().map(|&s| s as usize).product();
        if total > MAX_VERTICES {
            return Err(LatticeError::TooManyVertices(total));
        }

        let mut vertices = Vec::with_capacity(total);
        let mut coords = vec![0i64; n];
        loop {
            vertices.push(Vertex(coords.clone()));
            // odometer increment, last axis fastest
            let mut axis = n;
            loop {
                if axis == 0 {
                    return LatticeDomain::new(n, vertices);
                }
                axis -= 1;
                coords[axis] += 1;
                if coords[axis] < sides[axis] as i64 {
                    break;
                }
                coords[axis] = 0;
            }
        }
    }

    /// L-shaped planar domain: the union of a `(2·arm)×arm` box and an
    /// `arm×(2·arm)` box sharing their `arm×arm` corner at the origin.
    pub fn make_l_shape(arm: u32) -> Result<Self, LatticeError> {
        if arm < 2 {
            return Err(LatticeError::ArmTooSmall);
        }
        let arm = arm as i64;
        let mut vertices = Vec::new();
        for x in 0..2 * arm {
            for y in 0..arm {
                vertices.push(Vertex(vec![x, y]));
            }
        }
        for x in 0..arm {
            for y in arm..2 * arm {
                vertices.push(Vertex(vec![x, y]));
            }
        }
        LatticeDomain::new(2, vertices)
    }

    /// Connected random domain of exactly `size` vertices, grown from the
    /// origin by repeatedly adjoining a uniformly chosen outside neighbor of
    /// the current set. Identical `(n, size, seed)` give identical domains.
    pub fn make_random_connected(n: usize, size: usize, seed: u64) -> Result<Self, LatticeError> {
        if n == 0 {
            return Err(LatticeError::ZeroDimension);
        }
        if size == 0 {
            return Err(LatticeError::ZeroSize);
        }
        if size > MAX_VERTICES {
            return Err(LatticeError::TooManyVertices(size));
        }

        let mut rng = SplitMix64::new(seed);
        let origin = Vertex(vec![0i64; n]);
        let mut chosen: HashSet<Vertex> = HashSet::new();
        let mut frontier: BTreeSet<Vertex> = BTreeSet::new();
        chosen.insert(origin.clone());
        for nb in origin.lattice_neighbors() {
            frontier.insert(nb);
        }
        while chosen.len() < size {
            let pick = rng.next_index(frontier.len());
            let v = frontier.iter().nth(pick).cloned().expect("frontier empty");
            frontier.remove(&v);
            for nb in v.lattice_neighbors() {
                if !chosen.contains(&nb) {
                    frontier.insert(nb);
                }
            }
            chosen.insert(v);
        }
        LatticeDomain::new(n, chosen.into_iter().collect())
    }

    /// Serializes to the domain file format: lexicographic vertex order,
    /// 2-space indentation, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        out.push_str(&format!("  \"dimension\": {},\n", self.dimension));
        out.push_str("  \"vertices\": [\n");
        for (i, v) in self.vertices.iter().enumerate() {
            let coords: Vec<String> = v.coords().iter().map(|c| c.to_string()).collect();
            let sep = if i + 1 < self.vertices.len() { "," } else { "" };
            out.push_str(&format!("    [{}]{}\n", coords.join(", "), sep));
        }
        out.push_str("  ]\n");
        out.push_str("}\n");
        out
    }

    /// Parses the domain file format. Vertex order in the file is free; the
    /// result is canonicalized.
    pub fn from_json(text: &str) -> Result<Self, LatticeError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct DomainFile {
            dimension: usize,
            vertices: Vec<Vec<i64>>,
        }
        let file: DomainFile =
            serde_json::from_str(text).map_err(|e| LatticeError::Parse(e.to_string()))?;
        LatticeDomain::new(
            file.dimension,
            file.vertices.into_iter().map(Vertex).collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(coords: &[i64]) -> Vertex {
        Vertex(coords.to_vec())
    }

    #[test]
    fn box_single_point() {
        let d = LatticeDomain::make_box(1, &[1]).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.boundary(), &[v(&[-1]), v(&[1])]);
        assert!(d.interior_edges().is_empty());
    }

    #[test]
    fn box_path_of_two() {
        let d = LatticeDomain::make_box(1, &[2]).unwrap();
        assert_eq!(d.vertices(), &[v(&[0]), v(&[1])]);
        assert_eq!(d.interior_edges(), &[(0, 1)]);
        assert_eq!(d.boundary(), &[v(&[-1]), v(&[2])]);
    }

    #[test]
    fn box_two_by_two() {
        let d = LatticeDomain::make_box(2, &[2, 2]).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.interior_edges().len(), 4);
        assert_eq!(d.boundary().len(), 8);
        // hand enumeration of the 8 boundary points
        let expected: BTreeSet<Vertex> = [
            [-1, 0],
            [-1, 1],
            [2, 0],
            [2, 1],
            [0, -1],
            [1, -1],
            [0, 2],
            [1, 2],
        ]
        .iter()
        .map(|c| v(c))
        .collect();
        let got: BTreeSet<Vertex> = d.boundary().iter().cloned().collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn box_rejects_degenerate_parameters() {
        assert!(matches!(
            LatticeDomain::make_box(0, &[]),
            Err(LatticeError::ZeroDimension)
        ));
        assert!(matches!(
            LatticeDomain::make_box(2, &[2, 0]),
            Err(LatticeError::ZeroSide)
        ));
        assert!(matches!(
            LatticeDomain::make_box(2, &[2]),
            Err(LatticeError::SideCountMismatch { .. })
        ));
    }

    #[test]
    fn l_shape_counts() {
        let d = LatticeDomain::make_l_shape(2).unwrap();
        assert_eq!(d.len(), 12);
        assert!(d.is_connected());
        let d = LatticeDomain::make_l_shape(3).unwrap();
        assert_eq!(d.len(), 27);
        assert!(matches!(
            LatticeDomain::make_l_shape(1),
            Err(LatticeError::ArmTooSmall)
        ));
    }

    #[test]
    fn random_connected_basics() {
        let d = LatticeDomain::make_random_connected(2, 1, 99).unwrap();
        assert_eq!(d.vertices(), &[v(&[0, 0])]);

        // in Z^1 any connected 5-set is an interval
        let d = LatticeDomain::make_random_connected(1, 5, 7).unwrap();
        assert_eq!(d.len(), 5);
        let lo = d.vertices()[0].coords()[0];
        let coords: Vec<i64> = d.vertices().iter().map(|x| x.coords()[0]).collect();
        assert_eq!(coords, (lo..lo + 5).collect::<Vec<_>>());

        let a = LatticeDomain::make_random_connected(2, 20, 42).unwrap();
        let b = LatticeDomain::make_random_connected(2, 20, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.is_connected());
    }

    #[test]
    fn random_connected_is_connected_across_seeds() {
        for seed in 0..30 {
            for n in 1..=3 {
                let d = LatticeDomain::make_random_connected(n, 25, seed).unwrap();
                assert_eq!(d.len(), 25);
                assert!(d.is_connected(), "seed {seed} n {n}");
            }
        }
    }

    #[test]
    fn neighbors_have_ambient_degree() {
        let d = LatticeDomain::make_l_shape(2).unwrap();
        for x in d.vertices() {
            let nbs = d.lattice_neighbors(x).unwrap();
            assert_eq!(nbs.len(), 4);
        }
        let outside = v(&[50, 50]);
        assert!(matches!(
            d.lattice_neighbors(&outside),
            Err(LatticeError::VertexNotInDomain(_))
        ));
    }

    #[test]
    fn neighbor_flags_on_small_domains() {
        let d = LatticeDomain::make_box(1, &[1]).unwrap();
        let nbs = d.lattice_neighbors(&v(&[0])).unwrap();
        assert_eq!(nbs, vec![(v(&[-1]), false), (v(&[1]), false)]);

        let d = LatticeDomain::make_box(1, &[2]).unwrap();
        let nbs = d.lattice_neighbors(&v(&[0])).unwrap();
        assert_eq!(nbs, vec![(v(&[-1]), false), (v(&[1]), true)]);

        let d = LatticeDomain::make_box(2, &[2, 2]).unwrap();
        let nbs = d.lattice_neighbors(&v(&[0, 0])).unwrap();
        let inside = nbs.iter().filter(|(_, flag)| *flag).count();
        assert_eq!(inside, 2);
    }

    #[test]
    fn boundary_disjoint_and_adjacent() {
        for seed in [3, 11, 29] {
            let d = LatticeDomain::make_random_connected(2, 30, seed).unwrap();
            for b in d.boundary() {
                assert!(!d.contains(b));
                let touches = b.lattice_neighbors().iter().any(|nb| d.contains(nb));
                assert!(touches);
            }
        }
    }

    #[test]
    fn interior_edges_match_brute_force() {
        for seed in [1, 17] {
            let d = LatticeDomain::make_random_connected(3, 20, seed).unwrap();
            let mut expected = Vec::new();
            for i in 0..d.len() {
                for j in (i + 1)..d.len() {
                    if d.vertices()[i].l1_distance(&d.vertices()[j]) == 1 {
                        expected.push((i, j));
                    }
                }
            }
            assert_eq!(d.interior_edges(), expected.as_slice());
        }
    }

    #[test]
    fn disconnected_domains_are_permitted() {
        let d = LatticeDomain::new(1, vec![v(&[0]), v(&[5])]).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.interior_edges().is_empty());
        assert!(!d.is_connected());
        assert_eq!(d.boundary().len(), 4);
    }

    #[test]
    fn rejects_duplicates_and_bad_coordinates() {
        let dup = LatticeDomain::new(1, vec![v(&[0]), v(&[0])]);
        assert!(matches!(dup, Err(LatticeError::DuplicateVertex(_))));

        let mixed = LatticeDomain::new(2, vec![v(&[0, 0]), v(&[1])]);
        assert!(matches!(mixed, Err(LatticeError::DimensionMismatch { .. })));

        let big = LatticeDomain::new(1, vec![v(&[MAX_COORD + 1])]);
        assert!(matches!(big, Err(LatticeError::CoordinateOverflow(_))));

        assert!(matches!(
            LatticeDomain::new(1, vec![]),
            Err(LatticeError::EmptyDomain)
        ));
    }

    #[test]
    fn enforces_vertex_cap() {
        assert!(LatticeDomain::make_box(1, &[MAX_VERTICES as u32]).is_ok());
        assert!(matches!(
            LatticeDomain::make_box(1, &[MAX_VERTICES as u32 + 1]),
            Err(LatticeError::TooManyVertices(_))
        ));
        assert!(matches!(
            LatticeDomain::make_random_connected(2, MAX_VERTICES + 1, 0),
            Err(LatticeError::TooManyVertices(_))
        ));
    }

    #[test]
    fn serialization_round_trip() {
        let domains = [
            LatticeDomain::make_box(2, &[3, 2]).unwrap(),
            LatticeDomain::make_l_shape(2).unwrap(),
            LatticeDomain::make_random_connected(3, 15, 5).unwrap(),
        ];
        for d in &domains {
            let text = d.to_json();
            assert!(text.ends_with('\n'));
            let back = LatticeDomain::from_json(&text).unwrap();
            assert_eq!(&back, d);
        }
    }

    #[test]
    fn parser_canonicalizes_order() {
        let text = "{\"dimension\": 1, \"vertices\": [[2], [0], [1]]}";
        let d = LatticeDomain::from_json(text).unwrap();
        assert_eq!(d.vertices(), &[v(&[0]), v(&[1]), v(&[2])]);
    }

    #[test]
    fn parser_rejects_garbage() {
        assert!(LatticeDomain::from_json("{}").is_err());
        assert!(LatticeDomain::from_json("not json").is_err());
        assert!(LatticeDomain::from_json("{\"dimension\": 0, \"vertices\": [[0]]}").is_err());
    }
}
