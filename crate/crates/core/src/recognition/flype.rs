//! Flypes as relabelings of lattice vertex sets.

use serde::{Deserialize, Serialize};

use super::{RecognitionError, VertexLabeling};
use crate::graph::{cut_edge_structure, GraphError};
use crate::lattice::{fractional_basis, AmbientVector};
use crate::linalg::{dot, integer_coordinates};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum FlypeMove {
    /// `v = x + y`, `x·y = -1`: the slots of `v`, `u1`, `u2` receive `x`,
    /// `y` and `u1 + u2`.
    Flype1 {
        v: usize,
        u1: usize,
        u2: usize,
        x: AmbientVector,
        y: AmbientVector,
    },
    /// `G1` is a component of `G∖{v, w}`: every `z ∈ G1` becomes `-z`, and
    /// `v`, `w` each gain `[G1]`.
    Flype2 { v: usize, w: usize, g1: Vec<usize> },
}

/// A labeling together with the moves applied to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlypeTrace {
    pub moves: Vec<FlypeMove>,
}

impl FlypeTrace {
    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Applies every move to `start`, validating each intermediate labeling.
    pub fn replay(&self, start: &VertexLabeling) -> Result<VertexLabeling, RecognitionError> {
        let mut cur = start.clone();
        for mv in &self.moves {
            cur = match mv {
                FlypeMove::Flype1 { v, u1, u2, x, y } => {
                    let (next, a, b) = flype1_with_targets(&cur, *v, &x.to_flat(), &y.to_flat())?;
                    if (a, b) != (*u1, *u2) {
                        return Err(RecognitionError::FlypeHypothesis(format!(
                            "replay touched vertices ({a}, {b}) instead of ({u1}, {u2})"
                        )));
                    }
                    next
                }
                FlypeMove::Flype2 { v, w, g1 } => flype2(&cur, *v, *w, g1)?,
            };
        }
        Ok(cur)
    }
}

fn hypothesis(msg: impl Into<String>) -> RecognitionError {
    RecognitionError::FlypeHypothesis(msg.into())
}

/// Replaces `v`, `u1`, `u2` by `x`, `y`, `u1 + u2`, where `v = x + y`,
/// `x·y = -1` and `u1`, `u2` are the unique vertices with `x·u1 = y·u2 = 1`.
pub fn flype1(
    lab: &VertexLabeling,
    v: usize,
    x: &[i64],
    y: &[i64],
) -> Result<VertexLabeling, RecognitionError> {
    flype1_with_targets(lab, v, x, y).map(|(l, _, _)| l)
}

fn flype1_with_targets(
    lab: &VertexLabeling,
    v: usize,
    x: &[i64],
    y: &[i64],
) -> Result<(VertexLabeling, usize, usize), RecognitionError> {
    let g = lab.validate()?;
    let n = lab.len();
    let dim = lab.spec.dim();
    if v >= n {
        return Err(hypothesis(format!("vertex {v} does not exist")));
    }
    if x.len() != dim || y.len() != dim {
        return Err(hypothesis("x and y must be ambient vectors"));
    }
    if x.iter().all(|&c| c == 0) || y.iter().all(|&c| c == 0) {
        return Err(hypothesis("x and y must be nonzero"));
    }
    if x.iter().zip(y).zip(&lab.labels[v]).any(|((a, b), c)| a + b != *c) {
        return Err(hypothesis("x + y is not the label of v"));
    }
    if dot(x, y) != -1 {
        return Err(hypothesis(format!("x·y = {}, expected -1", dot(x, y))));
    }
    if !lab.spec.contains(x) {
        return Err(hypothesis("x is not in the lattice"));
    }
    // Express x, y in vertex coordinates; all but the last vertex form a basis.
    let basis = &lab.labels[..n - 1];
    let to_vertex = |z: &[i64]| -> Result<Vec<i64>, RecognitionError> {
        let mut c = integer_coordinates(basis, z)
            .ok_or_else(|| hypothesis("vector is not in the span of the vertices"))?;
        c.push(0);
        Ok(c)
    };
    let (xv, yv) = (to_vertex(x)?, to_vertex(y)?);
    let st = cut_edge_structure(&g, v, &xv, &yv).map_err(|e| match e {
        GraphError::NoCutEdgeStructure(why) => hypothesis(why),
        other => other.into(),
    })?;
    let (u1, u2) = (st.u1, st.u2);
    debug_assert_eq!(dot(&lab.labels[u1], x), 1);
    debug_assert_eq!(dot(&lab.labels[u2], y), 1);
    let mut labels = lab.labels.clone();
    labels[v] = x.to_vec();
    labels[u1] = y.to_vec();
    labels[u2] = lab.labels[u1].iter().zip(&lab.labels[u2]).map(|(a, b)| a + b).collect();
    let out = VertexLabeling::new(lab.spec.clone(), labels);
    out.validate()?;
    Ok((out, u1, u2))
}

/// Negates every vertex of the component `g1` of `G∖{v, w}` and adds `[G1]`
/// to both `v` and `w`.
pub fn flype2(
    lab: &VertexLabeling,
    v: usize,
    w: usize,
    g1: &[usize],
) -> Result<VertexLabeling, RecognitionError> {
    let g = lab.validate()?;
    let n = lab.len();
    if v >= n || w >= n || v == w {
        return Err(hypothesis("v and w must be distinct vertices"));
    }
    if g1.is_empty() {
        return Ok(lab.clone());
    }
    if g.multiplicity(v, w) < 1 {
        return Err(hypothesis(format!("no edge between {v} and {w}")));
    }
    let mut mask = vec![true; n];
    mask[v] = false;
    mask[w] = false;
    let mut wanted = g1.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    if !g.components(&mask).contains(&wanted) {
        return Err(hypothesis(format!("{g1:?} is not a component of the graph minus {{{v}, {w}}}")));
    }
    let dim = lab.spec.dim();
    let mut block = vec![0i64; dim];
    for &z in &wanted {
        for (b, c) in block.iter_mut().zip(&lab.labels[z]) {
            *b += c;
        }
    }
    let mut labels = lab.labels.clone();
    for &z in &wanted {
        labels[z] = labels[z].iter().map(|c| -c).collect();
    }
    for u in [v, w] {
        labels[u] = labels[u].iter().zip(&block).map(|(a, b)| a + b).collect();
    }
    let out = VertexLabeling::new(lab.spec.clone(), labels);
    out.validate()?;
    Ok(out)
}

/// Every `(v, x, y)` to which [`flype1`] applies.
pub fn flype1_options(lab: &VertexLabeling) -> Result<Vec<(usize, Vec<i64>, Vec<i64>)>, RecognitionError> {
    let g = lab.validate()?;
    let n = lab.len();
    let mut out = Vec::new();
    for v in 0..n {
        let mut mask = vec![true; n];
        mask[v] = false;
        for (a, b) in g.cut_edges_within(&mask) {
            let comps = g.components_without_edge(&mask, (a, b));
            let side = comps.into_iter().find(|c| c.contains(&a)).expect("endpoint has a component");
            let mut x = lab.labels[v].clone();
            for &u in &side {
                for (xi, c) in x.iter_mut().zip(&lab.labels[u]) {
                    *xi += c;
                }
            }
            let y: Vec<i64> = lab.labels[v].iter().zip(&x).map(|(a, b)| a - b).collect();
            out.push((v, x, y));
        }
    }
    Ok(out)
}

/// Every `(v, w, G1)` to which [`flype2`] applies with `G1` nonempty.
pub fn flype2_options(lab: &VertexLabeling) -> Result<Vec<(usize, usize, Vec<usize>)>, RecognitionError> {
    let g = lab.validate()?;
    let n = lab.len();
    let mut out = Vec::new();
    for v in 0..n {
        for w in v + 1..n {
            if g.multiplicity(v, w) == 0 {
                continue;
            }
            let mut mask = vec![true; n];
            mask[v] = false;
            mask[w] = false;
            let comps = g.components(&mask);
            if comps.len() >= 2 {
                for c in comps {
                    out.push((v, w, c));
                }
            }
        }
    }
    Ok(out)
}

/// Flypes until every `v1, ..., vm` of the fractional basis is a vertex.
///
/// Each round takes the largest `c` with `vc` missing, finds the vertex `u`
/// with `u_F = v_a + ... + v_c`, `a < c`, and splits it as
/// `(u - vc) + vc`.
pub fn normalize_fractional(
    lab: &VertexLabeling,
) -> Result<(VertexLabeling, FlypeTrace), RecognitionError> {
    let fb = fractional_basis(&lab.spec);
    let m = fb.m();
    let mut cur = lab.clone();
    let mut moves = Vec::new();
    let mut last_c: Option<usize> = None;
    while let Some(c) = (1..=m).rev().find(|&k| cur.find(&fb.v[k]).is_none()) {
        if last_c.is_some_and(|prev| c >= prev) {
            return Err(RecognitionError::Normalization(format!(
                "v{c} is missing again after a flype that should have fixed it"
            )));
        }
        let u = (0..cur.len())
            .find(|&i| {
                let Ok(coords) = fb.coordinates(&cur.spec.fractional_part(&cur.labels[i])) else {
                    return false;
                };
                let support: Vec<usize> = (0..coords.len()).filter(|&k| coords[k] != 0).collect();
                support.len() >= 2
                    && support.last() == Some(&c)
                    && support.windows(2).all(|w| w[1] == w[0] + 1)
                    && support.iter().all(|&k| coords[k] == 1)
            })
            .ok_or_else(|| {
                RecognitionError::Normalization(format!(
                    "no vertex has fractional part v_a + ... + v{c} with a < {c}"
                ))
            })?;
        let y = fb.v[c].clone();
        let x: Vec<i64> = cur.labels[u].iter().zip(&y).map(|(a, b)| a - b).collect();
        let (next, u1, u2) = flype1_with_targets(&cur, u, &x, &y)?;
        moves.push(FlypeMove::Flype1 {
            v: u,
            u1,
            u2,
            x: cur.spec.split(&x),
            y: cur.spec.split(&y),
        });
        cur = next;
        last_c = Some(c);
    }
    Ok((cur, FlypeTrace { moves }))
}
