//! Surgery slope bookkeeping and the d-invariant counting obstructions.
//!
//! V-sequences are inputs here; nothing in this module computes them.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::contfrac::{CfError, Rational};
use crate::graph::GoeritzMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurgeryError {
    #[error("p and q must be positive, got p = {p}, q = {q}")]
    NonPositive { p: i64, q: i64 },
    #[error("p = {p} and q = {q} are not coprime")]
    NotCoprime { p: i64, q: i64 },
    #[error("index {i} is outside 0..{p}")]
    IndexOutOfRange { i: i64, p: i64 },
    #[error("V-sequence must be nonnegative and non-increasing: {0:?}")]
    BadVSequence(Vec<i64>),
    #[error("need 0 < r < q and n >= 1, got n = {n}, r = {r}, q = {q}")]
    BadParameters { n: i64, r: i64, q: i64 },
    #[error("tangle slope {0} must be nonnegative")]
    NegativeTangle(Rational),
    #[error("slope {0} is not strictly between 0 and 1")]
    NotSmall(Rational),
    #[error("gtilde must be nonnegative, got {0}")]
    NegativeGenus(i64),
    #[error(transparent)]
    ContinuedFraction(#[from] CfError),
}

fn check_pq(p: i64, q: i64) -> Result<(), SurgeryError> {
    if p <= 0 || q <= 0 {
        return Err(SurgeryError::NonPositive { p, q });
    }
    if p.gcd(&q) != 1 {
        return Err(SurgeryError::NotCoprime { p, q });
    }
    Ok(())
}

/// `V0 >= V1 >= ... >= 0`; entries past the stored prefix are zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct VSequence(Vec<i64>);

impl TryFrom<Vec<i64>> for VSequence {
    type Error = SurgeryError;

    fn try_from(v: Vec<i64>) -> Result<Self, SurgeryError> {
        VSequence::new(v)
    }
}

impl From<VSequence> for Vec<i64> {
    fn from(v: VSequence) -> Vec<i64> {
        v.0
    }
}

impl VSequence {
    pub fn new(mut values: Vec<i64>) -> Result<Self, SurgeryError> {
        if values.iter().any(|&v| v < 0) || values.windows(2).any(|w| w[0] < w[1]) {
            return Err(SurgeryError::BadVSequence(values));
        }
        while values.last() == Some(&0) {
            values.pop();
        }
        Ok(VSequence(values))
    }

    /// `V_j = max(0, g̃ - j)`.
    pub fn canonical(gtilde: i64) -> Result<Self, SurgeryError> {
        if gtilde < 0 {
            return Err(SurgeryError::NegativeGenus(gtilde));
        }
        Ok(VSequence((0..gtilde).map(|j| gtilde - j).collect()))
    }

    pub fn get(&self, j: i64) -> i64 {
        usize::try_from(j).ok().and_then(|j| self.0.get(j).copied()).unwrap_or(0)
    }

    /// The least `j` with `V_j = 0`.
    pub fn gtilde(&self) -> i64 {
        self.0.len() as i64
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }
}

/// `d̃_i = -2 V_min(⌊i/q⌋, ⌈(p-i)/q⌉)`.
pub fn d_tilde(v: &VSequence, p: i64, q: i64, i: i64) -> Result<i64, SurgeryError> {
    check_pq(p, q)?;
    if !(0..p).contains(&i) {
        return Err(SurgeryError::IndexOutOfRange { i, p });
    }
    let j = Integer::div_floor(&i, &q).min(Integer::div_ceil(&(p - i), &q));
    Ok(-2 * v.get(j))
}

/// Which closed form gave `|Z|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZBranch {
    /// `g̃ = 0`: every index counts.
    Trivial,
    /// `p/q > 2g̃ - 1 > 0`: the window `[g̃q, p + q - g̃q - 1]`.
    Window,
    /// `p/q <= 2g̃ - 1`: nothing vanishes.
    Empty,
}

/// `|Z|`, the number of `i` with `d̃_i = 0`, and the branch that produced it.
pub fn z_count_branch(gtilde: i64, p: i64, q: i64) -> Result<(i64, ZBranch), SurgeryError> {
    check_pq(p, q)?;
    if gtilde < 0 {
        return Err(SurgeryError::NegativeGenus(gtilde));
    }
    if gtilde == 0 {
        return Ok((p, ZBranch::Trivial));
    }
    let (p, q, g) = (i128::from(p), i128::from(q), i128::from(gtilde));
    if p > (2 * g - 1) * q {
        let z = p - (2 * g - 1) * q;
        Ok((z as i64, ZBranch::Window))
    } else {
        Ok((0, ZBranch::Empty))
    }
}

pub fn z_count(gtilde: i64, p: i64, q: i64) -> Result<i64, SurgeryError> {
    z_count_branch(gtilde, p, q).map(|(z, _)| z)
}

/// `2g̃ <= n - √n` for `n = ⌈p/q⌉`, as `n - 2g̃ >= 0` and `(n - 2g̃)² >= n`.
pub fn greene_bound_ok(gtilde: i64, p: i64, q: i64) -> Result<bool, SurgeryError> {
    check_pq(p, q)?;
    let n = i128::from(Integer::div_ceil(&p, &q));
    let d = n - 2 * i128::from(gtilde);
    Ok(d >= 0 && d * d >= n)
}

/// `|Z| > min(p - 1, q)`.
pub fn gibbons_hypothesis_ok(gtilde: i64, p: i64, q: i64) -> Result<bool, SurgeryError> {
    let z = z_count(gtilde, p, q)?;
    Ok(z > (p - 1).min(q))
}

/// The surgery coefficient `-(μ0 + a/(a+b))` produced by replacing the
/// `1/0` tangle with the tangle of slope `a/b`.
pub fn montesinos_slope(tangle: &Rational, mu0: i64) -> Result<Rational, SurgeryError> {
    if !tangle.is_zero() && !tangle.is_positive() {
        return Err(SurgeryError::NegativeTangle(tangle.clone()));
    }
    let (a, b) = (tangle.numer(), tangle.denom());
    let frac = Rational::new(a.clone(), a + b)?;
    Ok(-(Rational::from_integer(mu0) + frac))
}

/// `p = qn - r` and the slope `-p/q`.
pub fn theorem_slope(n: i64, r: i64, q: i64) -> Result<(i64, Rational), SurgeryError> {
    if !(0 < r && r < q) || n < 1 {
        return Err(SurgeryError::BadParameters { n, r, q });
    }
    let p = i128::from(q) * i128::from(n) - i128::from(r);
    let p = i64::try_from(p).map_err(|_| CfError::TooLarge(format!("{q}*{n} - {r}")))?;
    check_pq(p, q)?;
    Ok((p, -Rational::new(p, q)?))
}

/// The conclusion forced by a surgery slope in `(0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmallSlopeVerdict {
    pub slope: Rational,
    pub knot: String,
    pub manifold: String,
    pub link: String,
}

/// `2g - 1 <= p/q < 1` forces genus zero.
pub fn small_slope_verdict(pq: &Rational) -> Result<SmallSlopeVerdict, SurgeryError> {
    if !pq.is_positive() || *pq >= Rational::one() {
        return Err(SurgeryError::NotSmall(pq.clone()));
    }
    Ok(SmallSlopeVerdict {
        slope: pq.clone(),
        knot: "unknot".into(),
        manifold: "lens space".into(),
        link: "2-bridge".into(),
    })
}

pub fn det_check(gm: &GoeritzMatrix, p: i64) -> bool {
    gm.det() == num_bigint::BigInt::from(p)
}

/// Which obstructions a `p/q` surgery with the given `g̃` passes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub z_count: i64,
    pub z_branch: ZBranch,
    /// `|Z| > min(p - 1, q)`.
    pub z_bound: bool,
    /// `2g̃ <= n - √n`.
    pub greene_bound: bool,
    /// Goeritz determinant equals `p`, when a matrix was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub determinant: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurgeryVerdict {
    /// Signed slope, `-p/q` on the branched double cover side.
    pub slope: Rational,
    pub p: i64,
    pub q: i64,
    pub gtilde: i64,
    pub hypotheses: Hypotheses,
}

impl SurgeryVerdict {
    /// Whether every evaluated check passed.
    pub fn all_ok(&self) -> bool {
        let h = &self.hypotheses;
        h.z_bound && h.greene_bound && h.determinant != Some(false)
    }
}

pub fn obstruct(
    gtilde: i64,
    p: i64,
    q: i64,
    goeritz: Option<&GoeritzMatrix>,
) -> Result<SurgeryVerdict, SurgeryError> {
    let (z, branch) = z_count_branch(gtilde, p, q)?;
    Ok(SurgeryVerdict {
        slope: -Rational::new(p, q)?,
        p,
        q,
        gtilde,
        hypotheses: Hypotheses {
            z_count: z,
            z_branch: branch,
            z_bound: z > (p - 1).min(q),
            greene_bound: greene_bound_ok(gtilde, p, q)?,
            determinant: goeritz.map(|gm| det_check(gm, p)),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{goeritz_matrix, WhiteGraph};
    use proptest::prelude::*;

    fn rat(s: &str) -> Rational {
        s.parse().unwrap()
    }

    /// Counts `i` with `d̃_i = 0` straight from the index formula.
    fn z_by_enumeration(v: &VSequence, p: i64, q: i64) -> i64 {
        (0..p).filter(|&i| d_tilde(v, p, q, i).unwrap() == 0).count() as i64
    }

    #[test]
    fn d_tilde_examples() {
        let zero = VSequence::new(vec![0]).unwrap();
        assert_eq!(d_tilde(&zero, 7, 2, 4).unwrap(), 0);
        let one = VSequence::new(vec![1, 0]).unwrap();
        assert_eq!(d_tilde(&one, 7, 2, 0).unwrap(), -2);
        assert_eq!(d_tilde(&one, 7, 2, 3).unwrap(), 0);
        assert!(d_tilde(&one, 7, 2, 7).is_err());
        assert!(d_tilde(&one, 7, 2, -1).is_err());
        assert!(d_tilde(&one, 6, 2, 0).is_err());
    }

    #[test]
    fn z_count_examples() {
        assert_eq!(z_count(0, 13, 5).unwrap(), 13);
        assert_eq!(z_count(1, 7, 2).unwrap(), 5);
        assert_eq!(z_count(2, 5, 2).unwrap(), 0);
        assert_eq!(z_count_branch(2, 5, 2).unwrap().1, ZBranch::Empty);
    }

    #[test]
    fn z_count_matches_enumeration() {
        for p in 1..=60 {
            for q in 1..=8 {
                if p.gcd(&q) != 1 {
                    continue;
                }
                for g in 0..=5 {
                    let v = VSequence::canonical(g).unwrap();
                    assert_eq!(z_count(g, p, q).unwrap(), z_by_enumeration(&v, p, q), "{g} {p}/{q}");
                }
            }
        }
    }

    #[test]
    fn zero_window() {
        // d̃ vanishes exactly on [g̃q, p + q - g̃q - 1].
        for (p, q, g) in [(7, 2, 1), (29, 3, 2), (41, 5, 3), (13, 5, 1)] {
            let v = VSequence::canonical(g).unwrap();
            for i in 0..p {
                let inside = g * q <= i && i < p + q - g * q;
                assert_eq!(d_tilde(&v, p, q, i).unwrap() == 0, inside, "{p}/{q} g={g} i={i}");
            }
        }
    }

    #[test]
    fn greene_examples() {
        for n in 1..20 {
            assert!(greene_bound_ok(0, n, 1).unwrap());
        }
        assert!(greene_bound_ok(1, 4, 1).unwrap());
        assert!(greene_bound_ok(1, 7, 2).unwrap());
        assert!(!greene_bound_ok(2, 4, 1).unwrap());
    }

    #[test]
    fn greene_matches_float_away_from_ties() {
        for n in 1i64..400 {
            for g in 0..30 {
                let lhs = 2.0 * g as f64;
                let rhs = n as f64 - (n as f64).sqrt();
                if (lhs - rhs).abs() > 1e-9 {
                    assert_eq!(greene_bound_ok(g, n, 1).unwrap(), lhs <= rhs, "n={n} g={g}");
                }
            }
        }
    }

    #[test]
    fn gibbons_examples() {
        assert!(gibbons_hypothesis_ok(0, 5, 2).unwrap());
        assert!(gibbons_hypothesis_ok(1, 7, 2).unwrap());
        assert!(!gibbons_hypothesis_ok(3, 7, 2).unwrap());
    }

    #[test]
    fn montesinos_examples() {
        assert_eq!(montesinos_slope(&rat("2/3"), 21).unwrap(), rat("-107/5"));
        for n in 1..10 {
            let expected = -Rational::new(2 * n - 1, 2).unwrap();
            assert_eq!(montesinos_slope(&Rational::one(), n - 1).unwrap(), expected);
        }
        assert_eq!(montesinos_slope(&Rational::zero(), 4).unwrap(), rat("-4"));
        assert!(montesinos_slope(&rat("-1/2"), 1).is_err());
    }

    #[test]
    fn theorem_slope_examples() {
        assert_eq!(theorem_slope(22, 3, 5).unwrap(), (107, rat("-107/5")));
        for n in 1..10 {
            assert_eq!(theorem_slope(n, 1, 2).unwrap(), (2 * n - 1, -Rational::new(2 * n - 1, 2).unwrap()));
        }
        assert_eq!(theorem_slope(1, 1, 2).unwrap(), (1, rat("-1/2")));
        assert!(theorem_slope(3, 0, 2).is_err());
        assert!(theorem_slope(3, 2, 2).is_err());
        assert!(theorem_slope(0, 1, 2).is_err());
        assert!(theorem_slope(3, 2, 4).is_err());
    }

    #[test]
    fn theorem_and_montesinos_agree() {
        for q in 2..=20 {
            for r in 1..q {
                if r.gcd(&q) != 1 {
                    continue;
                }
                for n in 1..=30 {
                    let (_, slope) = theorem_slope(n, r, q).unwrap();
                    let tangle = Rational::new(q - r, r).unwrap();
                    assert_eq!(montesinos_slope(&tangle, n - 1).unwrap(), slope);
                }
            }
        }
    }

    #[test]
    fn small_slopes() {
        assert_eq!(small_slope_verdict(&rat("1/2")).unwrap().knot, "unknot");
        assert_eq!(small_slope_verdict(&rat("3/4")).unwrap().manifold, "lens space");
        assert!(small_slope_verdict(&rat("5/4")).is_err());
        assert!(small_slope_verdict(&rat("1")).is_err());
        assert!(small_slope_verdict(&rat("-1/2")).is_err());
    }

    #[test]
    fn det_check_examples() {
        let b3 = WhiteGraph::new(2, vec![(0, 1); 3]).unwrap();
        assert!(det_check(&goeritz_matrix(&b3, None).unwrap(), 3));
        // Vertex 0 has degree 5 and one edge to vertex 1 (degree 2).
        let g = WhiteGraph::new(3, vec![(0, 1), (0, 2), (0, 2), (0, 2), (0, 2), (1, 2)]).unwrap();
        let gm = goeritz_matrix(&g, Some(2)).unwrap();
        assert_eq!(gm.matrix, vec![vec![5, -1], vec![-1, 2]]);
        assert!(det_check(&gm, 9));
        assert!(!det_check(&gm, 10));
    }

    #[test]
    fn v_sequence_validation() {
        assert!(VSequence::new(vec![2, 1, 0]).is_ok());
        assert!(VSequence::new(vec![1, 2]).is_err());
        assert!(VSequence::new(vec![-1]).is_err());
        assert_eq!(VSequence::new(vec![3, 1, 0, 0]).unwrap().gtilde(), 2);
        assert_eq!(VSequence::canonical(3).unwrap().values(), &[3, 2, 1]);
        let json = serde_json::to_string(&VSequence::canonical(2).unwrap()).unwrap();
        assert_eq!(json, "[2,1]");
        assert!(serde_json::from_str::<VSequence>("[0,1]").is_err());
    }

    #[test]
    fn obstruct_reports_consistent_fields() {
        let v = obstruct(1, 7, 2, None).unwrap();
        assert_eq!(v.slope, rat("-7/2"));
        assert_eq!(v.hypotheses.z_count, 5);
        assert_eq!(v.hypotheses.z_branch, ZBranch::Window);
        assert!(v.all_ok());
        let v = obstruct(3, 7, 2, None).unwrap();
        assert!(!v.all_ok());
    }

    proptest! {
        #[test]
        fn d_tilde_is_nonpositive(v in proptest::collection::vec(0i64..6, 0..6), p in 1i64..80, q in 1i64..12, i in 0i64..80) {
            prop_assume!(p.gcd(&q) == 1 && i < p);
            let mut v = v;
            v.sort_unstable_by(|a, b| b.cmp(a));
            let v = VSequence::new(v).unwrap();
            prop_assert!(d_tilde(&v, p, q, i).unwrap() <= 0);
        }

        #[test]
        fn z_count_depends_only_on_gtilde(v in proptest::collection::vec(1i64..6, 0..5), p in 1i64..80, q in 1i64..10) {
            prop_assume!(p.gcd(&q) == 1);
            let mut v = v;
            v.sort_unstable_by(|a, b| b.cmp(a));
            let v = VSequence::new(v).unwrap();
            prop_assert_eq!(z_count(v.gtilde(), p, q).unwrap(), z_by_enumeration(&v, p, q));
        }
    }
}
