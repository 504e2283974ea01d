//! White graphs, Goeritz matrices and graph lattices.
//!
//! The graph lattice of a connected multigraph `G` is `Z^V / Z[V]` with the
//! Laplacian pairing: `v·v` is the degree of `v` and `u·v = -e(u, v)`.
//! Lattice vectors are written in vertex coordinates, so a vector is any
//! integer combination of vertices, defined up to adding multiples of `[V]`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use num_bigint::BigInt;

use crate::linalg::{determinant, is_positive_definite};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("edge ({0}, {1}) refers to a vertex outside 0..{2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("vertex {0} does not exist")]
    NoSuchVertex(usize),
    #[error("vertex set must be a proper nonempty subset")]
    BadSubset,
    #[error("vector has {got} coordinates, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("no cut-edge decomposition: {0}")]
    NoCutEdgeStructure(String),
}

/// An undirected multigraph without loops; vertices are `0..vertices`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct WhiteGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    mult: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    vertices: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for WhiteGraph {
    type Error = GraphError;
    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        WhiteGraph::new(raw.vertices, raw.edges.iter().map(|e| (e[0], e[1])).collect())
    }
}

impl From<WhiteGraph> for RawGraph {
    fn from(g: WhiteGraph) -> Self {
        RawGraph {
            vertices: g.n,
            edges: g.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl WhiteGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        if vertices == 0 {
            return Err(GraphError::Empty);
        }
        let mut mult = vec![vec![0i64; vertices]; vertices];
        for &(a, b) in &edges {
            if a >= vertices || b >= vertices {
                return Err(GraphError::VertexOutOfRange(a, b, vertices));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            mult[a][b] += 1;
            mult[b][a] += 1;
        }
        Ok(WhiteGraph { n: vertices, edges, mult })
    }

    /// Builds a graph from a symmetric multiplicity matrix.
    pub fn from_multiplicities(mult: &[Vec<i64>]) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        for i in 0..mult.len() {
            for j in i + 1..mult.len() {
                for _ in 0..mult[i][j] {
                    edges.push((i, j));
                }
            }
        }
        WhiteGraph::new(mult.len(), edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// `e(u, v)`.
    pub fn multiplicity(&self, u: usize, v: usize) -> i64 {
        self.mult[u][v]
    }

    pub fn degree(&self, v: usize) -> i64 {
        self.mult[v].iter().sum()
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&u| self.mult[v][u] > 0)
    }

    /// The full `|V| x |V|` Gram matrix of the vertices.
    pub fn laplacian(&self) -> Vec<Vec<i64>> {
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| if i == j { self.degree(i) } else { -self.mult[i][j] })
                    .collect()
            })
            .collect()
    }

    /// The lattice pairing of two vectors in vertex coordinates.
    pub fn pair(&self, x: &[i64], y: &[i64]) -> i64 {
        let mut total = 0;
        for i in 0..self.n {
            if x[i] == 0 {
                continue;
            }
            let mut row = self.degree(i) * y[i];
            for j in 0..self.n {
                if j != i {
                    row -= self.mult[i][j] * y[j];
                }
            }
            total += x[i] * row;
        }
        total
    }

    /// Connected components of the subgraph induced on `mask`.
    pub fn components(&self, mask: &[bool]) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if !mask[start] || seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < comp.len() {
                let v = comp[i];
                for u in 0..self.n {
                    if mask[u] && !seen[u] && self.mult[v][u] > 0 {
                        seen[u] = true;
                        comp.push(u);
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components(&vec![true; self.n]).len() == 1
    }

    fn induced_connected(&self, mask: &[bool]) -> bool {
        self.components(mask).len() == 1
    }

    /// At least two vertices, connected, and no cut vertex.
    pub fn is_2_connected(&self) -> bool {
        if self.n < 2 || !self.is_connected() {
            return false;
        }
        (0..self.n).all(|v| {
            let mut mask = vec![true; self.n];
            mask[v] = false;
            self.induced_connected(&mask)
        })
    }

    /// Vertex pairs `(u, v)`, `u < v`, joined by a single edge whose removal
    /// disconnects the graph.
    pub fn cut_edges(&self) -> Vec<(usize, usize)> {
        self.cut_edges_within(&vec![true; self.n])
    }

    /// Cut edges of the subgraph induced on `mask`.
    pub fn cut_edges_within(&self, mask: &[bool]) -> Vec<(usize, usize)> {
        let before = self.components(mask).len();
        let mut out = Vec::new();
        let mut g = self.clone();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !mask[u] || !mask[v] || self.mult[u][v] != 1 {
                    continue;
                }
                g.mult[u][v] = 0;
                g.mult[v][u] = 0;
                if g.components(mask).len() > before {
                    out.push((u, v));
                }
                g.mult[u][v] = 1;
                g.mult[v][u] = 1;
            }
        }
        out
    }

    /// Components of the subgraph induced on `mask` after deleting one copy
    /// of the edge `(a, b)`.
    pub fn components_without_edge(&self, mask: &[bool], (a, b): (usize, usize)) -> Vec<Vec<usize>> {
        let mut h = self.clone();
        if h.mult[a][b] > 0 {
            h.mult[a][b] -= 1;
            h.mult[b][a] -= 1;
        }
        h.components(mask)
    }

    /// A multigraph is a candidate white graph of a reduced alternating
    /// diagram when it is connected and has no cut edges.
    pub fn is_reduced(&self) -> bool {
        self.is_connected() && self.cut_edges().is_empty()
    }

    /// Canonical form under vertex relabeling, by brute force over all
    /// permutations. Intended for small graphs (at most 8 vertices).
    pub fn canonical_form(&self) -> Vec<Vec<i64>> {
        let mut perm: Vec<usize> = (0..self.n).collect();
        let mut best: Option<Vec<Vec<i64>>> = None;
        loop {
            let m: Vec<Vec<i64>> = (0..self.n)
                .map(|i| (0..self.n).map(|j| self.mult[perm[i]][perm[j]]).collect())
                .collect();
            if best.as_ref().is_none_or(|b| m < *b) {
                best = Some(m);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        best.expect("at least one permutation")
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// A Goeritz matrix: the vertex Gram matrix with one vertex deleted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoeritzMatrix {
    pub deleted: usize,
    pub matrix: Vec<Vec<i64>>,
}

impl GoeritzMatrix {
    pub fn det(&self) -> BigInt {
        determinant(&self.matrix)
    }

    pub fn is_positive_definite(&self) -> bool {
        is_positive_definite(&self.matrix)
    }
}

/// The Goeritz matrix with `deleted` removed; defaults to the last vertex.
pub fn goeritz_matrix(g: &WhiteGraph, deleted: Option<usize>) -> Result<GoeritzMatrix, GraphError> {
    let deleted = deleted.unwrap_or(g.n - 1);
    if deleted >= g.n {
        return Err(GraphError::NoSuchVertex(deleted));
    }
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let keep: Vec<usize> = (0..g.n).filter(|&v| v != deleted).collect();
    let lap = g.laplacian();
    let matrix = keep
        .iter()
        .map(|&i| keep.iter().map(|&j| lap[i][j]).collect())
        .collect();
    Ok(GoeritzMatrix { deleted, matrix })
}

/// `[R]`, the sum of a set of vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexSum(Vec<usize>);

impl VertexSum {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        VertexSum(members)
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        for &v in &self.0 {
            m[v] = true;
        }
        m
    }

    /// Vertex coordinates of `[R]`.
    pub fn vector(&self, n: usize) -> Vec<i64> {
        self.mask(n).iter().map(|&b| b as i64).collect()
    }
}

/// `v·[R]`: `e(v, V∖R)` if `v ∈ R`, otherwise `-e(v, R)`.
pub fn pairing(g: &WhiteGraph, v: usize, r: &VertexSum) -> i64 {
    if r.contains(v) {
        (0..g.n).filter(|u| !r.contains(*u)).map(|u| g.mult[v][u]).sum()
    } else {
        -r.members().iter().map(|&u| g.mult[v][u]).sum::<i64>()
    }
}

/// `[R]` is irreducible exactly when `R` and its complement both induce
/// connected subgraphs.
pub fn is_irreducible_sum(g: &WhiteGraph, r: &VertexSum) -> Result<bool, GraphError> {
    if r.members().is_empty() || r.members().len() >= g.n || r.members().iter().any(|&v| v >= g.n) {
        return Err(GraphError::BadSubset);
    }
    let mask = r.mask(g.n);
    let comp: Vec<bool> = mask.iter().map(|b| !b).collect();
    Ok(g.induced_connected(&mask) && g.induced_connected(&comp))
}

/// The structure behind a splitting `v = x + y` with `x·y = -1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutEdgeStructure {
    /// The cut edge of `G∖{v}`, written `(u1, u2)`.
    pub edge: (usize, usize),
    /// Component of `(G∖{v})∖e` containing `u1`; `x = [R] + v`.
    pub r: Vec<usize>,
    /// Component containing `u2`; `y = [S] + v`.
    pub s: Vec<usize>,
    /// The unique vertex with `x·u1 = 1`.
    pub u1: usize,
    /// The unique vertex with `y·u2 = 1`.
    pub u2: usize,
}

/// Equal as elements of the graph lattice, i.e. differing by a multiple of `[V]`.
pub fn lattice_eq(x: &[i64], y: &[i64]) -> bool {
    let d = x[0] - y[0];
    x.iter().zip(y).all(|(a, b)| a - b == d)
}

/// Locates the cut edge of `G∖{v}` responsible for `v = x + y`, `x·y = -1`.
pub fn cut_edge_structure(
    g: &WhiteGraph,
    v: usize,
    x: &[i64],
    y: &[i64],
) -> Result<CutEdgeStructure, GraphError> {
    let n = g.n;
    if v >= n {
        return Err(GraphError::NoSuchVertex(v));
    }
    for z in [x, y] {
        if z.len() != n {
            return Err(GraphError::Dimension { got: z.len(), expected: n });
        }
    }
    let fail = |why: &str| Err(GraphError::NoCutEdgeStructure(why.to_string()));
    if !g.is_2_connected() || !g.cut_edges().is_empty() {
        return fail("graph must be 2-connected without cut edges");
    }
    let mut vv = vec![0; n];
    vv[v] = 1;
    let sum: Vec<i64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
    if !lattice_eq(&sum, &vv) {
        return fail("x + y is not v");
    }
    if g.pair(x, y) != -1 {
        return fail("x·y is not -1");
    }
    let mut mask = vec![true; n];
    mask[v] = false;
    for (a, b) in g.cut_edges_within(&mask) {
        let comps = g.components_without_edge(&mask, (a, b));
        let side_a = comps.iter().find(|c| c.contains(&a)).expect("a is in some component");
        let side_b = comps.iter().find(|c| c.contains(&b)).expect("b is in some component");
        let as_vec = |side: &[usize]| {
            let mut z = VertexSum::new(side.to_vec()).vector(n);
            z[v] += 1;
            z
        };
        let (za, zb) = (as_vec(side_a), as_vec(side_b));
        let (r, s, u1, u2) = if lattice_eq(x, &za) && lattice_eq(y, &zb) {
            (side_a, side_b, a, b)
        } else if lattice_eq(x, &zb) && lattice_eq(y, &za) {
            (side_b, side_a, b, a)
        } else {
            continue;
        };
        return Ok(CutEdgeStructure {
            edge: (u1, u2),
            r: r.clone(),
            s: s.clone(),
            u1,
            u2,
        });
    }
    fail("x, y do not come from a cut edge of G∖{v}")
}

/// `([R] - z)·z <= 0`, which holds for every `R` and `z`.
pub fn useful_bound_check(g: &WhiteGraph, r: &VertexSum, z: &[i64]) -> bool {
    let x = r.vector(g.n);
    let diff: Vec<i64> = x.iter().zip(z).map(|(a, b)| a - b).collect();
    g.pair(&diff, z) <= 0
}
