//! Recognizing changemaker lattices among graph lattices, and reading off
//! the rational tangle.
//!
//! A [`VertexLabeling`] assigns to every vertex of a white graph a vector of
//! a changemaker lattice such that the vertex Gram matrix is reproduced.
//! [`find_embedding`] searches for one; [`normalize_fractional`],
//! [`locate_markers`], [`extract_tangle`] and [`reduce_to_half_integer`]
//! turn it into a tangle certificate.

mod flype;
mod search;
mod tangle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contfrac::{CfError, Rational};
use crate::graph::{goeritz_matrix, GraphError, WhiteGraph};
use crate::lattice::{AmbientVector, ChangemakerLatticeSpec, LatticeError, SigmaTail};
use crate::linalg::{dot, norm};

pub use flype::{
    flype1, flype1_options, flype2, flype2_options, normalize_fractional, FlypeMove, FlypeTrace,
};
pub use search::{find_all_embeddings, find_embedding, NotFound, SearchOutcome};
pub use tangle::{
    extract_tangle, locate_markers, reduce_to_half_integer, HalfIntegerReduction, Markers,
    TangleCertificate,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RecognitionError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    ContinuedFraction(#[from] CfError),
    #[error("invalid labeling: {0}")]
    InvalidLabeling(String),
    #[error("flype not applicable: {0}")]
    FlypeHypothesis(String),
    #[error("normalization failed: {0}")]
    Normalization(String),
    #[error("marker vertices: {0}")]
    Markers(String),
    #[error("tangle extraction: {0}")]
    Tangle(String),
    #[error("tangle slope {got} differs from the expected {expected}")]
    SlopeMismatch { expected: Box<Rational>, got: Box<Rational> },
    #[error("reduction: {0}")]
    Reduction(String),
}

fn invalid(msg: impl Into<String>) -> RecognitionError {
    RecognitionError::InvalidLabeling(msg.into())
}

/// Vertex `i` of the graph carries `labels[i]`, in flat ambient coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexLabeling {
    pub spec: ChangemakerLatticeSpec,
    pub labels: Vec<Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct RawLabeling {
    pq: Rational,
    sigma: SigmaTail,
    labels: Vec<AmbientVector>,
}

impl Serialize for VertexLabeling {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawLabeling {
            pq: self.spec.pq.clone(),
            sigma: self.spec.sigma.clone(),
            labels: self.ambient_labels(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VertexLabeling {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawLabeling::deserialize(d)?;
        let spec = crate::lattice::build_cm_lattice(&raw.pq, &raw.sigma)
            .map_err(serde::de::Error::custom)?;
        let labels = labels_from_ambient(&spec, &raw.labels).map_err(serde::de::Error::custom)?;
        Ok(VertexLabeling { spec, labels })
    }
}

/// Flattens labels, checking each has `t` f- and `s + 1` e-coordinates.
pub fn labels_from_ambient(
    spec: &ChangemakerLatticeSpec,
    labels: &[AmbientVector],
) -> Result<Vec<Vec<i64>>, RecognitionError> {
    labels
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if v.f.len() == spec.t && v.e.len() == spec.s + 1 {
                Ok(v.to_flat())
            } else {
                Err(invalid(format!("label {i} has the wrong number of coordinates")))
            }
        })
        .collect()
}

impl VertexLabeling {
    pub fn new(spec: ChangemakerLatticeSpec, labels: Vec<Vec<i64>>) -> Self {
        VertexLabeling { spec, labels }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn ambient_labels(&self) -> Vec<AmbientVector> {
        self.labels.iter().map(|x| self.spec.split(x)).collect()
    }

    /// The white graph whose vertex Gram matrix these labels realize:
    /// `e(u, v) = -label(u)·label(v)`.
    pub fn graph(&self) -> Result<WhiteGraph, RecognitionError> {
        let n = self.labels.len();
        let mut mult = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = dot(&self.labels[i], &self.labels[j]);
                if d > 0 {
                    return Err(invalid(format!("labels {i} and {j} pair positively ({d})")));
                }
                mult[i][j] = -d;
                mult[j][i] = -d;
            }
        }
        Ok(WhiteGraph::from_multiplicities(&mult)?)
    }

    /// Checks every labeling invariant and that the labels realize an
    /// isomorphism between the graph lattice of `g` and the changemaker
    /// lattice.
    pub fn validate_against(&self, g: &WhiteGraph) -> Result<(), RecognitionError> {
        let n = g.vertex_count();
        if self.labels.len() != n {
            return Err(invalid(format!("{} labels for {n} vertices", self.labels.len())));
        }
        let dim = self.spec.dim();
        let mut sum = vec![0i64; dim];
        for (v, x) in self.labels.iter().enumerate() {
            if x.len() != dim {
                return Err(invalid(format!("label {v} has {} coordinates, expected {dim}", x.len())));
            }
            if !self.spec.contains(x) {
                return Err(invalid(format!("label {v} is not orthogonal to every w")));
            }
            if norm(x) != g.degree(v) {
                return Err(invalid(format!(
                    "label {v} has norm {} but the vertex has degree {}",
                    norm(x),
                    g.degree(v)
                )));
            }
            for (s, c) in sum.iter_mut().zip(x) {
                *s += c;
            }
        }
        if sum.iter().any(|&c| c != 0) {
            return Err(invalid("labels do not sum to zero"));
        }
        for u in 0..n {
            for v in u + 1..n {
                let d = dot(&self.labels[u], &self.labels[v]);
                if d != -g.multiplicity(u, v) {
                    return Err(invalid(format!(
                        "labels {u}, {v} pair to {d} but the vertices share {} edges",
                        g.multiplicity(u, v)
                    )));
                }
            }
        }
        // Equal rank and equal determinant make the image all of L.
        if n.saturating_sub(1) != self.spec.rank() {
            return Err(invalid(format!(
                "graph lattice has rank {} but the changemaker lattice has rank {}",
                n.saturating_sub(1),
                self.spec.rank()
            )));
        }
        let det = goeritz_matrix(g, None)?.det();
        if det != num_bigint::BigInt::from(self.spec.p) {
            return Err(invalid(format!("Goeritz determinant {det} differs from p = {}", self.spec.p)));
        }
        Ok(())
    }

    /// Validates against the graph the labels themselves determine.
    pub fn validate(&self) -> Result<WhiteGraph, RecognitionError> {
        let g = self.graph()?;
        if !g.is_connected() {
            return Err(invalid("labels determine a disconnected graph"));
        }
        self.validate_against(&g)?;
        Ok(g)
    }

    /// Index of the vertex whose label equals `x`.
    pub fn find(&self, x: &[i64]) -> Option<usize> {
        self.labels.iter().position(|l| l == x)
    }
}
