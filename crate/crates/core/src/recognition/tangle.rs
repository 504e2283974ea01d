//! Markers, the fractional tangle and the half-integer reduction.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{RecognitionError, VertexLabeling};
use crate::contfrac::{eval_neg_cf_relaxed, Rational};
use crate::lattice::{build_cm_lattice, fractional_basis, AmbientVector, ChangemakerLatticeSpec};
use crate::linalg::{dot, norm};

/// The vertices with positive and negative `e0` coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Markers {
    pub v: usize,
    pub w: usize,
}

/// The rational tangle spanned by `v1, ..., vm` and the `v`-`w` edges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TangleCertificate {
    pub v_marker: usize,
    pub w_marker: usize,
    /// Vertices carrying `v1, ..., vm`, in order.
    pub path: Vec<usize>,
    /// `|v_F·w_F| - 1`, the `v`-`w` edges inside the tangle.
    pub direct_edges: i64,
    /// All edges between the markers; at least `direct_edges`.
    pub marker_edges: i64,
    /// `[b0, ..., bm]⁻ = β/α` for the slope `α/β`.
    pub b: Vec<i64>,
    pub slope: Rational,
}

/// The `(n - 1/2)`-changemaker labeling left after the tangle is replaced by
/// one crossing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HalfIntegerReduction {
    pub labeling: VertexLabeling,
    /// `vertex_map[i]` is the original vertex behind reduced vertex `i`.
    pub vertex_map: Vec<usize>,
    /// Reduced indices of `ṽ` and `w̃`.
    pub marked_crossing: (usize, usize),
    /// Edges between `ṽ` and `w̃`.
    pub marked_edges: i64,
}

#[derive(Serialize, Deserialize)]
struct RawReduction {
    spec: ChangemakerLatticeSpec,
    labels: Vec<AmbientVector>,
    vertex_map: Vec<usize>,
    marked_crossing: (usize, usize),
    marked_edges: i64,
}

impl Serialize for HalfIntegerReduction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RawReduction {
            spec: self.labeling.spec.clone(),
            labels: self.labeling.ambient_labels(),
            vertex_map: self.vertex_map.clone(),
            marked_crossing: self.marked_crossing,
            marked_edges: self.marked_edges,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HalfIntegerReduction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = RawReduction::deserialize(d)?;
        let spec = build_cm_lattice(&raw.spec.pq, &raw.spec.sigma).map_err(D::Error::custom)?;
        if spec != raw.spec {
            return Err(D::Error::custom("reduced lattice data is inconsistent with its slope and tail"));
        }
        let labels = super::labels_from_ambient(&spec, &raw.labels).map_err(D::Error::custom)?;
        Ok(HalfIntegerReduction {
            labeling: VertexLabeling::new(spec, labels),
            vertex_map: raw.vertex_map,
            marked_crossing: raw.marked_crossing,
            marked_edges: raw.marked_edges,
        })
    }
}

fn markers_err(msg: impl Into<String>) -> RecognitionError {
    RecognitionError::Markers(msg.into())
}

fn tangle_err(msg: impl Into<String>) -> RecognitionError {
    RecognitionError::Tangle(msg.into())
}

/// Finds the unique vertex `v` with `v·e0 > 0`, which must have `v_F = v0`,
/// and the unique `w` with `w·e0 < 0`, which must have
/// `w_F = -(v0 + ... + vm)`.
pub fn locate_markers(lab: &VertexLabeling) -> Result<Markers, RecognitionError> {
    let spec = &lab.spec;
    let fb = fractional_basis(spec);
    let e0 = spec.e(0);
    let pick = |positive: bool| -> Result<usize, RecognitionError> {
        let hits: Vec<usize> = (0..lab.len())
            .filter(|&i| if positive { lab.labels[i][e0] > 0 } else { lab.labels[i][e0] < 0 })
            .collect();
        match hits.as_slice() {
            [one] => Ok(*one),
            [] => Err(markers_err(format!(
                "no vertex with {} e0 coefficient",
                if positive { "positive" } else { "negative" }
            ))),
            many => Err(markers_err(format!(
                "vertices {many:?} all have {} e0 coefficient",
                if positive { "positive" } else { "negative" }
            ))),
        }
    };
    let v = pick(true)?;
    let w = pick(false)?;
    if spec.fractional_part(&lab.labels[v]) != fb.v[0] {
        return Err(markers_err(format!("vertex {v} does not have fractional part v0")));
    }
    let full: Vec<i64> = fb.chain(0, fb.m()).iter().map(|c| -c).collect();
    if spec.fractional_part(&lab.labels[w]) != full {
        return Err(markers_err(format!(
            "vertex {w} does not have fractional part -(v0 + ... + vm)"
        )));
    }
    Ok(Markers { v, w })
}

/// Reads off the fractional tangle from a normalized labeling and checks
/// that its slope is `(q - r)/r`.
pub fn extract_tangle(lab: &VertexLabeling) -> Result<TangleCertificate, RecognitionError> {
    let g = lab.validate()?;
    let spec = &lab.spec;
    let fb = fractional_basis(spec);
    let m = fb.m();
    let Markers { v, w } = locate_markers(lab)?;
    let mut path = Vec::with_capacity(m);
    for k in 1..=m {
        let idx = lab
            .find(&fb.v[k])
            .ok_or_else(|| tangle_err(format!("v{k} is not a vertex; normalize first")))?;
        path.push(idx);
    }
    let vf = spec.fractional_part(&lab.labels[v]);
    let wf = spec.fractional_part(&lab.labels[w]);
    let vfwf = dot(&vf, &wf);
    let direct_edges = vfwf.abs() - 1;
    let marker_edges = g.multiplicity(v, w);
    if dot(&lab.labels[v], &lab.labels[w]) > vfwf + 1 {
        return Err(tangle_err(format!(
            "markers share {marker_edges} edges, fewer than the {direct_edges} the tangle needs"
        )));
    }
    // v - v1 - ... - vm is a path of single edges; every other edge at a
    // path vertex goes to w, and no other vertex has a fractional part.
    let chain: Vec<usize> = std::iter::once(v).chain(path.iter().copied()).collect();
    for pair in chain.windows(2) {
        if g.multiplicity(pair[0], pair[1]) != 1 {
            return Err(tangle_err(format!(
                "vertices {} and {} should share exactly one edge",
                pair[0], pair[1]
            )));
        }
    }
    for (i, &p) in path.iter().enumerate() {
        let allowed = [chain[i], w, *chain.get(i + 2).unwrap_or(&w)];
        if let Some(u) = g.neighbors(p).find(|u| !allowed.contains(u)) {
            return Err(tangle_err(format!("path vertex {p} has a stray neighbour {u}")));
        }
    }
    for u in 0..lab.len() {
        if u != v && u != w && !path.contains(&u) && lab.labels[u][spec.t..].iter().any(|&c| c != 0) {
            return Err(tangle_err(format!("vertex {u} has a nonzero fractional part")));
        }
    }
    let mut b = vec![direct_edges + i64::from(m >= 1)];
    b.extend(fb.v[1..].iter().map(|x| norm(x)));
    let big: Vec<BigInt> = b.iter().map(|&x| BigInt::from(x)).collect();
    let beta_over_alpha = eval_neg_cf_relaxed(&big)?;
    let slope = beta_over_alpha.recip()?;
    let expected = Rational::new(spec.q - spec.r, spec.r)?;
    if slope != expected {
        return Err(RecognitionError::SlopeMismatch { expected: Box::new(expected), got: Box::new(slope) });
    }
    Ok(TangleCertificate {
        v_marker: v,
        w_marker: w,
        path,
        direct_edges,
        marker_edges,
        b,
        slope,
    })
}

/// Deletes the path vertices and moves the markers into `Z^(t+2)`:
/// `v ↦ v_I + e1`, `w ↦ w_I - e1`, and every other vertex keeps its
/// f-coordinates.
pub fn reduce_to_half_integer(
    lab: &VertexLabeling,
    cert: &TangleCertificate,
) -> Result<HalfIntegerReduction, RecognitionError> {
    let spec = &lab.spec;
    let half = Rational::new(2 * spec.n - 1, 2)?;
    let reduced_spec = build_cm_lattice(&half, &spec.sigma)?;
    let vertex_map: Vec<usize> = (0..lab.len()).filter(|u| !cert.path.contains(u)).collect();
    let t = spec.t;
    let labels: Vec<Vec<i64>> = vertex_map
        .iter()
        .map(|&u| {
            let x = &lab.labels[u];
            let x0 = x[t];
            let mut y = x[..t].to_vec();
            y.push(x0);
            y.push(x0);
            y
        })
        .collect();
    let reduced = VertexLabeling::new(reduced_spec, labels);
    let g = reduced
        .validate()
        .map_err(|e| RecognitionError::Reduction(e.to_string()))?;
    let position = |u: usize| vertex_map.iter().position(|&x| x == u).expect("markers are kept");
    let (rv, rw) = (position(cert.v_marker), position(cert.w_marker));
    let e0 = reduced.spec.e(0);
    if reduced.labels[rv][e0] != 1 || reduced.labels[rw][e0] != -1 {
        return Err(RecognitionError::Reduction("markers must have e0 coefficients 1 and -1".into()));
    }
    let marked_edges = g.multiplicity(rv, rw);
    if marked_edges < 1 {
        return Err(RecognitionError::Reduction("no crossing between the reduced markers".into()));
    }
    Ok(HalfIntegerReduction {
        labeling: reduced,
        vertex_map,
        marked_crossing: (rv, rw),
        marked_edges,
    })
}
