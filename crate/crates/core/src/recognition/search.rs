//! Backtracking search for a changemaker labeling of a white graph.
//!
//! Tails `σ` are tried in lexicographic order. For a fixed `σ` vertices are
//! labeled one at a time, starting from a vertex of largest degree and then
//! always taking the unplaced vertex with the most edges into the placed
//! set. The last vertex is forced to be minus the sum of the others.
//!
//! Candidate labels for a vertex of degree `d` are the lattice vectors of
//! norm `d` whose e-part is zero or `±(v_a + ... + v_b)` (the fractional part
//! of an irreducible vector is irreducible) and whose `f1` coefficient has
//! absolute value at most 2. Every partial sum of labels also keeps
//! `|x·f1| <= 2`.
//!
//! Ambient coordinate permutations fixing every `wk` are broken by asking the
//! columns of each symmetry block to be lexicographically nondecreasing when
//! read down the rows in search order. Together with sorted candidate lists
//! this makes the first labeling found the lexicographically smallest one.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{RecognitionError, VertexLabeling};
use crate::contfrac::{neg_cf_expand, Rational};
use crate::graph::{goeritz_matrix, WhiteGraph};
use crate::lattice::{build_cm_lattice, enumerate_sigma, fractional_basis, ChangemakerLatticeSpec, SigmaTail};
use crate::linalg::{dot, isqrt, norm};

/// Why no labeling exists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum NotFound {
    /// The Goeritz determinant is not `p`.
    Determinant { det: String, p: i64 },
    /// `|V| - 1 = t + s - l` has no solution `t >= 1`.
    Rank { graph_rank: usize, s: usize, l: usize },
    /// No changemaker tail of the required length has `1 + Σσ² = n`.
    NoSigma { n: i64, t: usize },
    /// Changemaker lattices with positive tails are indecomposable, so the
    /// graph must be 2-connected.
    NotTwoConnected,
    /// Every candidate tail was searched exhaustively.
    Exhausted { tails: Vec<SigmaTail> },
}

impl std::fmt::Display for NotFound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NotFound::Determinant { det, p } => write!(f, "Goeritz determinant {det} is not p = {p}"),
            NotFound::Rank { graph_rank, s, l } => write!(
                f,
                "graph lattice rank {graph_rank} leaves no room for f-coordinates (s = {s}, l = {l})"
            ),
            NotFound::NoSigma { n, t } => write!(f, "no changemaker tail of length {t} has norm {n}"),
            NotFound::NotTwoConnected => write!(f, "graph is not 2-connected"),
            NotFound::Exhausted { tails } => {
                let names: Vec<String> = tails.iter().map(ToString::to_string).collect();
                write!(f, "no labeling for tails {}", names.join(" "))
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found(VertexLabeling),
    NotFound(NotFound),
}

impl SearchOutcome {
    pub fn labeling(&self) -> Option<&VertexLabeling> {
        match self {
            SearchOutcome::Found(l) => Some(l),
            SearchOutcome::NotFound(_) => None,
        }
    }
}

struct Problem {
    tails: Vec<SigmaTail>,
}

fn prepare(g: &WhiteGraph, pq: &Rational) -> Result<Result<Problem, NotFound>, RecognitionError> {
    let (p, q) = pq
        .to_i64_pair()
        .ok_or_else(|| RecognitionError::InvalidInput(format!("slope {pq} is too large")))?;
    if q < 2 || p <= q {
        return Err(RecognitionError::InvalidInput(format!(
            "slope {pq} must be non-integral and greater than 1"
        )));
    }
    if !g.is_connected() {
        return Err(RecognitionError::InvalidInput("graph is disconnected".into()));
    }
    if let Some((a, b)) = g.cut_edges().first() {
        return Err(RecognitionError::InvalidInput(format!("graph has a cut edge ({a}, {b})")));
    }
    let det = goeritz_matrix(g, None)?.det();
    if det != BigInt::from(p) {
        return Ok(Err(NotFound::Determinant { det: det.to_string(), p }));
    }
    let cf = neg_cf_expand(pq)?.to_i64_vec()?;
    let l = cf.len() - 1;
    let s = (cf[1..].iter().sum::<i64>() - l as i64) as usize;
    let graph_rank = g.vertex_count() - 1;
    if graph_rank + l <= s {
        return Ok(Err(NotFound::Rank { graph_rank, s, l }));
    }
    let t = graph_rank + l - s;
    let n = cf[0];
    let tails: Vec<SigmaTail> = enumerate_sigma(n).into_iter().filter(|x| x.len() == t).collect();
    if tails.is_empty() {
        return Ok(Err(NotFound::NoSigma { n, t }));
    }
    if !g.is_2_connected() {
        return Ok(Err(NotFound::NotTwoConnected));
    }
    Ok(Ok(Problem { tails }))
}

/// Searches for a labeling of `g` by the `p/q`-changemaker lattice.
///
/// The result is deterministic: the first tail in lexicographic order that
/// admits a labeling, with its lexicographically smallest labeling.
pub fn find_embedding(g: &WhiteGraph, pq: &Rational) -> Result<SearchOutcome, RecognitionError> {
    let problem = match prepare(g, pq)? {
        Ok(p) => p,
        Err(reason) => return Ok(SearchOutcome::NotFound(reason)),
    };
    let found = problem
        .tails
        .par_iter()
        .map(|sigma| -> Result<Option<VertexLabeling>, RecognitionError> {
            let spec = build_cm_lattice(pq, sigma)?;
            let mut out = Vec::new();
            Search::new(g, &spec).run(&mut out, 1);
            Ok(out.pop().map(|labels| VertexLabeling::new(spec, labels)))
        })
        .find_map_first(|r| match r {
            Ok(None) => None,
            other => Some(other),
        });
    match found {
        Some(Ok(Some(lab))) => Ok(SearchOutcome::Found(lab)),
        Some(Err(e)) => Err(e),
        _ => Ok(SearchOutcome::NotFound(NotFound::Exhausted { tails: problem.tails })),
    }
}

/// Every labeling that survives symmetry breaking, over all tails, in the
/// same order as [`find_embedding`] would meet them, up to `limit` labelings.
pub fn find_all_embeddings(
    g: &WhiteGraph,
    pq: &Rational,
    limit: usize,
) -> Result<Vec<VertexLabeling>, RecognitionError> {
    let problem = match prepare(g, pq)? {
        Ok(p) => p,
        Err(_) => return Ok(Vec::new()),
    };
    let per_tail: Vec<Vec<VertexLabeling>> = problem
        .tails
        .par_iter()
        .map(|sigma| -> Result<Vec<VertexLabeling>, RecognitionError> {
            let spec = build_cm_lattice(pq, sigma)?;
            let mut out = Vec::new();
            Search::new(g, &spec).run(&mut out, limit);
            Ok(out.into_iter().map(|labels| VertexLabeling::new(spec.clone(), labels)).collect())
        })
        .collect::<Result<_, _>>()?;
    Ok(per_tail.into_iter().flatten().take(limit).collect())
}

/// The order in which vertices are labeled.
fn search_order(g: &WhiteGraph) -> Vec<usize> {
    let n = g.vertex_count();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let first = (0..n).max_by_key(|&v| (g.degree(v), std::cmp::Reverse(v))).expect("nonempty");
    placed[first] = true;
    order.push(first);
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let into_placed: i64 = order.iter().map(|&u| g.multiplicity(u, v)).sum();
                (into_placed, g.degree(v), std::cmp::Reverse(v))
            })
            .expect("an unplaced vertex remains");
        placed[next] = true;
        order.push(next);
    }
    order
}

/// Lattice vectors of norm `d` with an admissible e-part, sorted.
fn candidates(spec: &ChangemakerLatticeSpec, e_parts: &[Vec<i64>], d: i64) -> Vec<Vec<i64>> {
    let t = spec.t;
    let sigma = spec.sigma.values();
    let tail_sq: Vec<i64> = (0..=t).map(|i| sigma[i..].iter().map(|s| s * s).sum()).collect();
    let mut out = Vec::new();
    for eps in e_parts {
        let rest = d - norm(eps);
        if rest < 0 {
            continue;
        }
        let target = -eps[0];
        let mut f = Vec::with_capacity(t);
        f_parts(sigma, &tail_sq, &mut f, rest, target, &mut |f| {
            let mut v = f.to_vec();
            v.extend_from_slice(eps);
            out.push(v);
        });
    }
    out.sort();
    out.dedup();
    out
}

/// f-coordinate vectors with `‖f‖ = budget`, `σ·f = target`, `|f1| <= 2`.
fn f_parts(
    sigma: &[i64],
    tail_sq: &[i64],
    f: &mut Vec<i64>,
    budget: i64,
    target: i64,
    visit: &mut dyn FnMut(&[i64]),
) {
    let i = f.len();
    if i == sigma.len() {
        if budget == 0 && target == 0 {
            visit(f);
        }
        return;
    }
    // Cauchy-Schwarz: the remaining coordinates reach at most
    // sqrt(budget * Σ σj²) in σ·f.
    if target * target > budget * tail_sq[i] {
        return;
    }
    let mut bound = isqrt(budget);
    if i == 0 {
        bound = bound.min(2);
    }
    for c in -bound..=bound {
        f.push(c);
        f_parts(sigma, tail_sq, f, budget - c * c, target - sigma[i] * c, visit);
        f.pop();
    }
}

struct Search<'a> {
    g: &'a WhiteGraph,
    order: Vec<usize>,
    cands: BTreeMap<i64, Vec<Vec<i64>>>,
    /// Adjacent column pairs that must stay in nondecreasing order.
    pairs: Vec<(usize, usize)>,
    rows: Vec<Vec<i64>>,
    sum: Vec<i64>,
}

impl<'a> Search<'a> {
    fn new(g: &'a WhiteGraph, spec: &ChangemakerLatticeSpec) -> Self {
        let order = search_order(g);
        let fb = fractional_basis(spec);
        let mut e_parts: Vec<Vec<i64>> =
            fb.irreducibles().into_iter().map(|v| v[spec.t..].to_vec()).collect();
        e_parts.push(vec![0; spec.s + 1]);
        let mut cands = BTreeMap::new();
        for &v in &order[..order.len() - 1] {
            let d = g.degree(v);
            cands.entry(d).or_insert_with(|| candidates(spec, &e_parts, d));
        }
        let pairs = spec
            .symmetry_blocks()
            .iter()
            .flat_map(|b| b.windows(2).map(|w| (w[0], w[1])).collect::<Vec<_>>())
            .collect();
        Search {
            g,
            order,
            cands,
            pairs,
            rows: Vec::new(),
            sum: vec![0; spec.dim()],
        }
    }

    fn run(mut self, out: &mut Vec<Vec<Vec<i64>>>, limit: usize) {
        let tied = vec![true; self.pairs.len()];
        self.dfs(&tied, out, limit);
    }

    /// Updates the tie state for `row`, or `None` if a tied pair would be
    /// put out of order.
    fn order_ok(&self, tied: &[bool], row: &[i64]) -> Option<Vec<bool>> {
        let mut next = tied.to_vec();
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            if tied[k] {
                if row[a] > row[b] {
                    return None;
                }
                next[k] = row[a] == row[b];
            }
        }
        Some(next)
    }

    fn compatible(&self, v: usize, row: &[i64]) -> bool {
        self.rows
            .iter()
            .zip(&self.order)
            .all(|(placed, &u)| dot(placed, row) == -self.g.multiplicity(u, v))
    }

    fn dfs(&mut self, tied: &[bool], out: &mut Vec<Vec<Vec<i64>>>, limit: usize) -> bool {
        let depth = self.rows.len();
        let n = self.order.len();
        if depth == n - 1 {
            let last: Vec<i64> = self.sum.iter().map(|c| -c).collect();
            if self.order_ok(tied, &last).is_none() || !self.compatible(self.order[depth], &last) {
                return false;
            }
            self.rows.push(last);
            let mut labels = vec![Vec::new(); n];
            for (row, &v) in self.rows.iter().zip(&self.order) {
                labels[v] = row.clone();
            }
            self.rows.pop();
            out.push(labels);
            return out.len() >= limit;
        }
        let v = self.order[depth];
        let d = self.g.degree(v);
        for idx in 0..self.cands[&d].len() {
            let (row, next) = {
                let row = &self.cands[&d][idx];
                if (self.sum[0] + row[0]).abs() > 2 || !self.compatible(v, row) {
                    continue;
                }
                let Some(next) = self.order_ok(tied, row) else {
                    continue;
                };
                (row.clone(), next)
            };
            for (s, c) in self.sum.iter_mut().zip(&row) {
                *s += c;
            }
            self.rows.push(row);
            let stop = self.dfs(&next, out, limit);
            let row = self.rows.pop().expect("pushed above");
            for (s, c) in self.sum.iter_mut().zip(&row) {
                *s -= c;
            }
            if stop {
                return true;
            }
        }
        false
    }
}
