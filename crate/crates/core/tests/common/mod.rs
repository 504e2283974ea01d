//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

use changemaker::contfrac::neg_cf_expand;
use changemaker::graph::{goeritz_matrix, WhiteGraph};
use changemaker::lattice::{build_cm_lattice, is_changemaker, SigmaTail};
use changemaker::linalg::{dot, for_each_vector_in_ball, norm};
use changemaker::recognition::VertexLabeling;
use changemaker::Rational;
use num_bigint::BigInt;

/// Connected loopless multigraphs with `2..=max_vertices` vertices and at
/// most `max_edges` edges, without cut edges, one per isomorphism class.
pub fn bridgeless_multigraphs(max_vertices: usize, max_edges: usize) -> Vec<WhiteGraph> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for n in 2..=max_vertices {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let mut mult = vec![0usize; pairs.len()];
        while next_multiplicities(&mut mult, max_edges) {
            if mult.iter().sum::<usize>() < n {
                continue;
            }
            let edges: Vec<(usize, usize)> = pairs
                .iter()
                .zip(&mult)
                .flat_map(|(&e, &k)| std::iter::repeat_n(e, k))
                .collect();
            let g = WhiteGraph::new(n, edges).expect("valid pairs");
            if g.is_connected() && g.cut_edges().is_empty() && seen.insert(g.canonical_form()) {
                out.push(g);
            }
        }
    }
    out
}

/// Odometer step over vectors with total at most `max`; false once exhausted.
fn next_multiplicities(mult: &mut [usize], max: usize) -> bool {
    for i in 0..mult.len() {
        mult[i] += 1;
        if mult.iter().sum::<usize>() <= max {
            return true;
        }
        mult[i] = 0;
    }
    false
}

/// Nondecreasing tails of length `t` with entries `>= 0`, the changemaker
/// property and `1 + Σσ² = n`.
pub fn all_tails(n: i64, t: usize) -> Vec<Vec<i64>> {
    fn rec(t: usize, budget: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == t {
            if budget == 0 && is_changemaker(prefix).unwrap() {
                out.push(prefix.clone());
            }
            return;
        }
        let lo = prefix.last().copied().unwrap_or(0);
        let mut s = lo;
        while s * s <= budget {
            prefix.push(s);
            rec(t, budget - s * s, prefix, out);
            prefix.pop();
            s += 1;
        }
    }
    let mut out = Vec::new();
    if n >= 1 {
        rec(t, n - 1, &mut Vec::new(), &mut out);
    }
    out
}

/// Exhaustive search for a labeling: vertices in index order, every lattice
/// vector of the right norm, every changemaker tail including zeros.
pub fn oracle_labeling(g: &WhiteGraph, pq: &Rational) -> Option<VertexLabeling> {
    let (p, _) = pq.to_i64_pair()?;
    if goeritz_matrix(g, None).ok()?.det() != BigInt::from(p) {
        return None;
    }
    let cf = neg_cf_expand(pq).ok()?.to_i64_vec().ok()?;
    let l = cf.len() - 1;
    let s: i64 = cf[1..].iter().sum::<i64>() - l as i64;
    let rank = g.vertex_count() as i64 - 1;
    let t = rank + l as i64 - s;
    if t < 1 {
        return None;
    }
    let nv = g.vertex_count();
    let max_deg = (0..nv).map(|v| g.degree(v)).max().unwrap_or(0);
    for tail in all_tails(cf[0], t as usize) {
        let spec = build_cm_lattice(pq, &SigmaTail::new(tail).unwrap()).unwrap();
        let mut by_norm: Vec<Vec<Vec<i64>>> = vec![Vec::new(); max_deg as usize + 1];
        for_each_vector_in_ball(spec.dim(), max_deg, |x| {
            if spec.contains(x) {
                by_norm[norm(x) as usize].push(x.to_vec());
            }
        });
        let mut rows: Vec<Vec<i64>> = Vec::new();
        if place(g, &by_norm, &mut rows) {
            let lab = VertexLabeling::new(spec, rows);
            lab.validate_against(g).expect("oracle labelings are valid");
            return Some(lab);
        }
    }
    None
}

fn place(g: &WhiteGraph, by_norm: &[Vec<Vec<i64>>], rows: &mut Vec<Vec<i64>>) -> bool {
    let nv = g.vertex_count();
    let v = rows.len();
    let fits = |rows: &[Vec<i64>], x: &[i64]| {
        rows.iter().enumerate().all(|(u, r)| dot(r, x) == -g.multiplicity(u, v))
    };
    if v == nv - 1 {
        let dim = by_norm.iter().flatten().next().map_or(0, Vec::len);
        let mut last = vec![0i64; dim];
        for r in rows.iter() {
            for (a, b) in last.iter_mut().zip(r) {
                *a -= b;
            }
        }
        if norm(&last) == g.degree(v) && fits(rows, &last) {
            rows.push(last);
            return true;
        }
        return false;
    }
    for x in &by_norm[g.degree(v) as usize] {
        if fits(rows, x) {
            rows.push(x.clone());
            if place(g, by_norm, rows) {
                return true;
            }
            rows.pop();
        }
    }
    false
}

/// Every integer in `0..=Σσ` is a subset sum of `σ`.
pub fn all_subtotals_realized(sigma: &[i64]) -> bool {
    let total: i64 = sigma.iter().sum();
    let mut reach = vec![false; total as usize + 1];
    reach[0] = true;
    for &s in sigma {
        for k in (s as usize..reach.len()).rev() {
            reach[k] = reach[k] || reach[k - s as usize];
        }
    }
    reach.iter().all(|&b| b)
}

/// White graph of the linear diagram `[a1, ..., ak]⁻`: a path `v1 ... vk`
/// plus a hub `v0` taking the remaining edges, so that deleting `v0`
/// leaves the tridiagonal Goeritz matrix.
pub fn linear_graph(a: &[i64]) -> WhiteGraph {
    let k = a.len();
    let mut edges = Vec::new();
    for i in 0..k {
        let path_neighbours = (i > 0) as i64 + (i + 1 < k) as i64;
        for _ in 0..a[i] - path_neighbours {
            edges.push((0, i + 1));
        }
        if i + 1 < k {
            edges.push((i + 1, i + 2));
        }
    }
    WhiteGraph::new(k + 1, edges).unwrap()
}
