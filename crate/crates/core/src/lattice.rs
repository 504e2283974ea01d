//! Changemaker lattices.
//!
//! For `p/q = n - r/q` with `q/r = [a1, ..., al]⁻` and a changemaker tail
//! `σ`, the lattice is the orthogonal complement of `w0, ..., wl` inside
//! `Z^(t+s+1)` with orthonormal basis `f1..ft, e0..es`:
//!
//! ```text
//! w0 = e0 + σ1 f1 + ... + σt ft
//! wk = -e(m_{k-1}) + e(m_{k-1}+1) + ... + e(m_k)
//! ```
//!
//! Vectors are stored flat: the `t` f-coordinates come first, then the
//! `s+1` e-coordinates.

use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contfrac::{neg_cf_expand, split_n_r, CfError, NegCf, Rational};
use crate::linalg::{dot, gram, integer_coordinates, isqrt, norm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error(transparent)]
    ContinuedFraction(#[from] CfError),
    #[error("sigma must be nondecreasing and nonnegative: {0:?}")]
    Unsorted(Vec<i64>),
    #[error("sigma {0:?} is not a changemaker tail")]
    NotChangemaker(Vec<i64>),
    #[error("{k} is not between 0 and the tail total {total}")]
    SubsetOutOfRange { k: i64, total: i64 },
    #[error("‖w0‖ = {got} but n = {expected}")]
    NormMismatch { got: i64, expected: i64 },
    #[error("slope {0} must exceed 1")]
    Degenerate(Rational),
    #[error("vector does not lie in the fractional sublattice")]
    NotInFractionalPart,
    #[error("vector has dimension {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("norm {norm} exceeds the exhaustive search bound {bound}")]
    OracleBound { norm: i64, bound: i64 },
}

/// A nondecreasing changemaker tail `(σ1, ..., σt)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct SigmaTail(Vec<i64>);

impl SigmaTail {
    pub fn new(sigma: Vec<i64>) -> Result<Self, LatticeError> {
        if is_changemaker(&sigma)? {
            Ok(SigmaTail(sigma))
        } else {
            Err(LatticeError::NotChangemaker(sigma))
        }
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    /// `1 + Σ σi²`, the norm of `w0`.
    pub fn w0_norm(&self) -> i64 {
        1 + self.0.iter().map(|s| s * s).sum::<i64>()
    }
}

impl TryFrom<Vec<i64>> for SigmaTail {
    type Error = LatticeError;
    fn try_from(v: Vec<i64>) -> Result<Self, LatticeError> {
        SigmaTail::new(v)
    }
}

impl From<SigmaTail> for Vec<i64> {
    fn from(s: SigmaTail) -> Self {
        s.0
    }
}

impl fmt::Display for SigmaTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `σ1 <= 1` and `σi <= 1 + σ1 + ... + σ(i-1)`.
pub fn is_changemaker(sigma: &[i64]) -> Result<bool, LatticeError> {
    if sigma.windows(2).any(|w| w[0] > w[1]) || sigma.iter().any(|&s| s < 0) {
        return Err(LatticeError::Unsorted(sigma.to_vec()));
    }
    let mut total = 0i64;
    for &s in sigma {
        if s > total + 1 {
            return Ok(false);
        }
        total += s;
    }
    Ok(true)
}

/// Indices (0-based) of a sub-tail summing to `k`, chosen greedily from the
/// largest entry down.
pub fn realize_subset(sigma: &SigmaTail, k: i64) -> Result<Vec<usize>, LatticeError> {
    let total = sigma.total();
    if k < 0 || k > total {
        return Err(LatticeError::SubsetOutOfRange { k, total });
    }
    let mut remaining = k;
    let mut chosen = Vec::new();
    for (i, &s) in sigma.values().iter().enumerate().rev() {
        if s <= remaining && s > 0 {
            remaining -= s;
            chosen.push(i);
        }
    }
    debug_assert_eq!(remaining, 0, "greedy realization holds for changemaker tails");
    chosen.reverse();
    Ok(chosen)
}

/// All changemaker tails with positive entries and `1 + Σ σi² = n`, in
/// lexicographic order.
///
/// Zero entries are excluded: they can be appended freely (the family is
/// infinite) and always produce a norm-one vector `fi` in the lattice.
pub fn enumerate_sigma(n: i64) -> Vec<SigmaTail> {
    fn rec(prefix: &mut Vec<i64>, total: i64, budget: i64, out: &mut Vec<SigmaTail>) {
        if budget == 0 {
            out.push(SigmaTail(prefix.clone()));
            return;
        }
        let lo = prefix.last().copied().unwrap_or(1);
        let hi = (total + 1).min(isqrt(budget));
        for s in lo..=hi {
            prefix.push(s);
            rec(prefix, total + s, budget - s * s, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n >= 1 {
        rec(&mut Vec::new(), 0, n - 1, &mut out);
    }
    out
}

/// A vector of the ambient lattice, split into f- and e-coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmbientVector {
    pub f: Vec<i64>,
    pub e: Vec<i64>,
}

impl AmbientVector {
    pub fn from_flat(t: usize, flat: &[i64]) -> Self {
        AmbientVector {
            f: flat[..t].to_vec(),
            e: flat[t..].to_vec(),
        }
    }

    pub fn to_flat(&self) -> Vec<i64> {
        let mut v = self.f.clone();
        v.extend_from_slice(&self.e);
        v
    }

    pub fn dot(&self, other: &AmbientVector) -> i64 {
        dot(&self.f, &other.f) + dot(&self.e, &other.e)
    }

    pub fn norm(&self) -> i64 {
        self.dot(self)
    }

    /// The `e0` coefficient.
    pub fn x0(&self) -> i64 {
        self.e.first().copied().unwrap_or(0)
    }
}

impl fmt::Display for AmbientVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, &c) in self.f.iter().enumerate() {
            push_term(&mut terms, c, &format!("f{}", i + 1));
        }
        for (j, &c) in self.e.iter().enumerate() {
            push_term(&mut terms, c, &format!("e{j}"));
        }
        if terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, (c, name)) in terms.into_iter().enumerate() {
            let sign = if c < 0 { "-" } else if i > 0 { "+" } else { "" };
            let mag = if c.abs() == 1 { String::new() } else { c.abs().to_string() };
            out.push_str(&format!("{sign}{mag}{name}"));
        }
        write!(f, "{out}")
    }
}

fn push_term(terms: &mut Vec<(i64, String)>, c: i64, name: &str) {
    if c != 0 {
        terms.push((c, name.to_string()));
    }
}

/// The data defining a `p/q`-changemaker lattice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangemakerLatticeSpec {
    pub pq: Rational,
    pub p: i64,
    pub q: i64,
    pub n: i64,
    pub r: i64,
    /// `[n, a1, ..., al]⁻`, the expansion of `p/q`.
    pub cf: NegCf,
    /// `m0 = 0, ..., ml = s`.
    pub m: Vec<usize>,
    pub s: usize,
    pub t: usize,
    pub sigma: SigmaTail,
    /// `w0, ..., wl` as flat ambient coordinates.
    pub w: Vec<Vec<i64>>,
}

impl ChangemakerLatticeSpec {
    /// Ambient rank `t + s + 1`.
    pub fn dim(&self) -> usize {
        self.t + self.s + 1
    }

    /// Number of `wk` beyond `w0`.
    pub fn l(&self) -> usize {
        self.w.len() - 1
    }

    /// Rank of the lattice, `t + s - l`.
    pub fn rank(&self) -> usize {
        self.dim() - self.w.len()
    }

    /// Flat index of `e_j`.
    pub fn e(&self, j: usize) -> usize {
        self.t + j
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.dim() && self.w.iter().all(|w| dot(w, x) == 0)
    }

    pub fn gram(&self) -> Vec<Vec<i64>> {
        gram(&self.w)
    }

    pub fn split(&self, x: &[i64]) -> AmbientVector {
        AmbientVector::from_flat(self.t, x)
    }

    /// `x_F`: the e-coordinates of `x`, embedded back into the ambient space.
    pub fn fractional_part(&self, x: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.dim()];
        out[self.t..].copy_from_slice(&x[self.t..]);
        out
    }

    /// `x_I`: the f-coordinates of `x` together with its `e0` coefficient.
    pub fn integer_part(&self, x: &[i64]) -> Vec<i64> {
        let mut out = vec![0; self.dim()];
        out[..=self.t].copy_from_slice(&x[..=self.t]);
        out
    }

    /// The column blocks permuted by ambient symmetries fixing every `wk`:
    /// f-coordinates sharing a `σ` value, and the free part of each `wk`'s
    /// positive tail.
    pub fn symmetry_blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = Vec::new();
        let sigma = self.sigma.values();
        let mut i = 0;
        while i < sigma.len() {
            let mut j = i;
            while j < sigma.len() && sigma[j] == sigma[i] {
                j += 1;
            }
            if j - i > 1 {
                blocks.push((i..j).collect());
            }
            i = j;
        }
        let l = self.l();
        for k in 1..=l {
            // e(m_k) also occurs in w(k+1) unless k is the last index.
            let lo = self.m[k - 1] + 1;
            let hi = if k == l { self.m[k] } else { self.m[k] - 1 };
            if hi > lo {
                blocks.push((lo..=hi).map(|j| self.e(j)).collect());
            }
        }
        blocks
    }
}

fn to_i64(x: &BigInt) -> Result<i64, LatticeError> {
    i64::try_from(x).map_err(|_| CfError::TooLarge(x.to_string()).into())
}

/// Builds the `p/q`-changemaker lattice for the tail `σ`.
///
/// Integral `p/q = n` is accepted as well (then `s = 0` and only `w0`
/// appears); recognition itself needs `q >= 2`.
pub fn build_cm_lattice(
    pq: &Rational,
    sigma: &SigmaTail,
) -> Result<ChangemakerLatticeSpec, LatticeError> {
    if pq <= &Rational::one() {
        return Err(LatticeError::Degenerate(pq.clone()));
    }
    let p = to_i64(pq.numer())?;
    let q = to_i64(pq.denom())?;
    let (n, r) = if pq.is_integer() {
        (p, 0)
    } else {
        let (n, r) = split_n_r(pq)?;
        (to_i64(&n)?, to_i64(&r)?)
    };
    let cf = neg_cf_expand(pq)?;
    let a = cf.to_i64_vec()?;
    debug_assert_eq!(a[0], n);
    let mut m = vec![0usize];
    let mut acc = 0i64;
    for (k, &ak) in a.iter().enumerate().skip(1) {
        acc += ak;
        m.push((acc - k as i64) as usize);
    }
    let s = *m.last().expect("m0 exists");
    let t = sigma.len();
    let got = sigma.w0_norm();
    if got != n {
        return Err(LatticeError::NormMismatch { got, expected: n });
    }
    let dim = t + s + 1;
    let mut w = Vec::with_capacity(m.len());
    let mut w0 = vec![0i64; dim];
    w0[..t].copy_from_slice(sigma.values());
    w0[t] = 1;
    w.push(w0);
    for k in 1..m.len() {
        let mut wk = vec![0i64; dim];
        wk[t + m[k - 1]] = -1;
        for j in m[k - 1] + 1..=m[k] {
            wk[t + j] = 1;
        }
        w.push(wk);
    }
    Ok(ChangemakerLatticeSpec {
        pq: pq.clone(),
        p,
        q,
        n,
        r,
        cf,
        m,
        s,
        t,
        sigma: sigma.clone(),
        w,
    })
}

/// Is every `σi >= 1`? Equivalently, the lattice has no vector of norm 1.
pub fn is_indecomposable(spec: &ChangemakerLatticeSpec) -> bool {
    spec.sigma.values().iter().all(|&s| s >= 1)
}

/// The basis `v0, ..., vm` of the fractional sublattice `L_F`, the lattice
/// vectors supported on e-coordinates (with `e0` allowed).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalBasis {
    pub t: usize,
    /// Flat ambient coordinates, zero on every f-coordinate.
    pub v: Vec<Vec<i64>>,
}

impl FractionalBasis {
    /// `m`, the index of the last basis vector.
    pub fn m(&self) -> usize {
        self.v.len() - 1
    }

    /// Integer coordinates of `x_F` in this basis.
    pub fn coordinates(&self, x: &[i64]) -> Result<Vec<i64>, LatticeError> {
        if x.len() != self.v[0].len() {
            return Err(LatticeError::Dimension {
                got: x.len(),
                expected: self.v[0].len(),
            });
        }
        if x[..self.t].iter().any(|&c| c != 0) {
            return Err(LatticeError::NotInFractionalPart);
        }
        integer_coordinates(&self.v, x).ok_or(LatticeError::NotInFractionalPart)
    }

    /// `v_a + ... + v_b`.
    pub fn chain(&self, a: usize, b: usize) -> Vec<i64> {
        let mut out = vec![0; self.v[0].len()];
        for v in &self.v[a..=b] {
            for (o, c) in out.iter_mut().zip(v) {
                *o += c;
            }
        }
        out
    }

    /// Every `±(v_a + ... + v_b)`.
    pub fn irreducibles(&self) -> Vec<Vec<i64>> {
        let mut out = Vec::new();
        for a in 0..self.v.len() {
            for b in a..self.v.len() {
                let c = self.chain(a, b);
                out.push(c.iter().map(|x| -x).collect());
                out.push(c);
            }
        }
        out
    }
}

pub fn fractional_basis(spec: &ChangemakerLatticeSpec) -> FractionalBasis {
    let dim = spec.dim();
    let t = spec.t;
    let missing: Vec<usize> = (0..=spec.s).filter(|j| !spec.m.contains(j)).collect();
    let span = |from: usize, to: usize, lead: i64| {
        let mut v = vec![0i64; dim];
        v[t + from] = lead;
        for j in from + 1..=to {
            v[t + j] = 1;
        }
        v
    };
    let mut basis = Vec::with_capacity(missing.len() + 1);
    let first = missing.first().copied().unwrap_or(spec.s);
    let mut v0 = span(0, first, 1);
    v0[t] = 1;
    basis.push(v0);
    for (i, &k) in missing.iter().enumerate() {
        let end = missing.get(i + 1).copied().unwrap_or(spec.s);
        basis.push(span(k, end, -1));
    }
    FractionalBasis { t, v: basis }
}

/// Is `x ∈ L_F` of the form `±(v_a + ... + v_b)`?
pub fn is_irreducible_lf(x: &[i64], basis: &FractionalBasis) -> Result<bool, LatticeError> {
    let c = basis.coordinates(x)?;
    let sign = match c.iter().find(|&&ci| ci != 0) {
        Some(&s) if s.abs() == 1 => s,
        _ => return Ok(false),
    };
    let support: Vec<usize> = (0..c.len()).filter(|&i| c[i] != 0).collect();
    let contiguous = support.windows(2).all(|w| w[1] == w[0] + 1);
    Ok(contiguous && c.iter().all(|&ci| ci == 0 || ci == sign))
}

/// Exhaustively decides whether `x` is irreducible in the lattice described
/// by `contains`: no split `x = y + z` with `y, z` nonzero lattice vectors and
/// `y·z >= 0`.
///
/// `y·(x - y) >= 0` says `‖2y - x‖ <= ‖x‖`, so only that ball is searched.
pub fn brute_force_irreducible(
    x: &[i64],
    contains: impl Fn(&[i64]) -> bool,
    max_norm: i64,
) -> Result<bool, LatticeError> {
    fn rec(
        x: &[i64],
        y: &mut Vec<i64>,
        budget: i64,
        visit: &mut dyn FnMut(&[i64]) -> bool,
    ) -> bool {
        let i = y.len();
        if i == x.len() {
            return visit(y);
        }
        // d = 2y - x has the parity of x.
        let bound = isqrt(budget);
        let mut d = -bound;
        if (d - x[i]).rem_euclid(2) != 0 {
            d += 1;
        }
        while d <= bound {
            y.push((d + x[i]) / 2);
            let found = rec(x, y, budget - d * d, visit);
            y.pop();
            if found {
                return true;
            }
            d += 2;
        }
        false
    }
    let nx = norm(x);
    if nx > max_norm {
        return Err(LatticeError::OracleBound { norm: nx, bound: max_norm });
    }
    if nx == 0 {
        return Ok(false);
    }
    let mut visit = |y: &[i64]| {
        y.iter().any(|&c| c != 0) && y != x && contains(y)
    };
    Ok(!rec(x, &mut Vec::with_capacity(x.len()), nx, &mut visit))
}
