//! Exact continued fractions in the two conventions used throughout the crate.
//!
//! The *minus* convention `[a0, a1, ..., al]⁻ = a0 - 1/(a1 - 1/(... - 1/al))`
//! drives changemaker lattices and tangle slopes. The *plus* convention
//! `[c0, c1, ..., ck]⁺ = c0 + 1/(c1 + 1/(... + 1/ck))` is the classical one.
//! [`pos_to_neg`] converts between them.

mod rational;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rational::{coprime, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CfError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("expected a value greater than 1, got {0}")]
    NotGreaterThanOne(Rational),
    #[error("expected a non-integral value, got {0}")]
    Integral(Rational),
    #[error("empty continued fraction")]
    Empty,
    #[error("coefficient {index} = {value} violates the {convention} convention")]
    BadCoefficient {
        index: usize,
        value: BigInt,
        convention: &'static str,
    },
    #[error("continued fraction has a vanishing tail at position {0}")]
    VanishingTail(usize),
    #[error("cannot parse {0:?}")]
    Parse(String),
    #[error("value {0} is too large for a lattice computation")]
    TooLarge(String),
}

/// `[a0, ..., al]⁻` with `a0 >= 1` and `ai >= 2` for `i >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<JsonInt>", into = "Vec<JsonInt>")]
pub struct NegCf(Vec<BigInt>);

impl NegCf {
    pub fn new(coefficients: Vec<BigInt>) -> Result<Self, CfError> {
        if coefficients.is_empty() {
            return Err(CfError::Empty);
        }
        for (i, a) in coefficients.iter().enumerate() {
            let min = if i == 0 { 1 } else { 2 };
            if a < &BigInt::from(min) {
                return Err(CfError::BadCoefficient {
                    index: i,
                    value: a.clone(),
                    convention: "minus",
                });
            }
        }
        Ok(NegCf(coefficients))
    }

    pub fn from_i64(coefficients: &[i64]) -> Result<Self, CfError> {
        Self::new(coefficients.iter().map(|&a| BigInt::from(a)).collect())
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The coefficients as machine integers, for sizing lattices.
    pub fn to_i64_vec(&self) -> Result<Vec<i64>, CfError> {
        self.0
            .iter()
            .map(|a| a.to_i64().ok_or_else(|| CfError::TooLarge(a.to_string())))
            .collect()
    }
}

impl TryFrom<Vec<JsonInt>> for NegCf {
    type Error = CfError;
    fn try_from(v: Vec<JsonInt>) -> Result<Self, CfError> {
        NegCf::new(v.into_iter().map(JsonInt::into_bigint).collect::<Result<_, _>>()?)
    }
}

impl From<NegCf> for Vec<JsonInt> {
    fn from(cf: NegCf) -> Self {
        cf.0.iter().map(JsonInt::from_bigint).collect()
    }
}

/// `[c0, ..., ck]⁺` with `c0 >= 0` and `ci >= 1` for `i >= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<JsonInt>", into = "Vec<JsonInt>")]
pub struct PosCf(Vec<BigInt>);

impl PosCf {
    pub fn new(coefficients: Vec<BigInt>) -> Result<Self, CfError> {
        if coefficients.is_empty() {
            return Err(CfError::Empty);
        }
        for (i, c) in coefficients.iter().enumerate() {
            let min = if i == 0 { 0 } else { 1 };
            if c < &BigInt::from(min) {
                return Err(CfError::BadCoefficient {
                    index: i,
                    value: c.clone(),
                    convention: "plus",
                });
            }
        }
        Ok(PosCf(coefficients))
    }

    pub fn from_i64(coefficients: &[i64]) -> Result<Self, CfError> {
        Self::new(coefficients.iter().map(|&a| BigInt::from(a)).collect())
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<JsonInt>> for PosCf {
    type Error = CfError;
    fn try_from(v: Vec<JsonInt>) -> Result<Self, CfError> {
        PosCf::new(v.into_iter().map(JsonInt::into_bigint).collect::<Result<_, _>>()?)
    }
}

impl From<PosCf> for Vec<JsonInt> {
    fn from(cf: PosCf) -> Self {
        cf.0.iter().map(JsonInt::from_bigint).collect()
    }
}

/// An integer as it appears in JSON: a plain number when it fits in `i64`,
/// a decimal string otherwise.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonInt {
    Small(i64),
    Big(String),
}

impl JsonInt {
    pub fn from_bigint(x: &BigInt) -> Self {
        match x.to_i64() {
            Some(v) => JsonInt::Small(v),
            None => JsonInt::Big(x.to_string()),
        }
    }

    pub fn into_bigint(self) -> Result<BigInt, CfError> {
        match self {
            JsonInt::Small(v) => Ok(BigInt::from(v)),
            JsonInt::Big(s) => s.parse().map_err(|_| CfError::Parse(s)),
        }
    }
}

/// The unique minus-convention expansion of `x > 1` with every tail entry `>= 2`.
pub fn neg_cf_expand(x: &Rational) -> Result<NegCf, CfError> {
    if x <= &Rational::one() {
        return Err(CfError::NotGreaterThanOne(x.clone()));
    }
    let mut coefficients = Vec::new();
    let mut cur = x.clone();
    loop {
        let a = cur.ceil();
        let rest = &Rational::from_integer(a.clone()) - &cur;
        coefficients.push(a);
        if rest.is_zero() {
            break;
        }
        // 0 < rest < 1, so the next value exceeds 1 and its ceiling is >= 2.
        cur = rest.recip()?;
    }
    NegCf::new(coefficients)
}

pub fn eval_neg_cf(cf: &NegCf) -> Rational {
    eval_neg_cf_relaxed(cf.coefficients()).expect("minus-convention tails never vanish")
}

/// Evaluates `[b0, ..., bl]⁻` for arbitrary integer entries, failing if some
/// tail `[bi, ..., bl]⁻` with `i >= 1` evaluates to zero.
///
/// Tangle edge counts can start at 0 or 1, which [`NegCf`] rejects.
pub fn eval_neg_cf_relaxed(coefficients: &[BigInt]) -> Result<Rational, CfError> {
    let (last, init) = coefficients.split_last().ok_or(CfError::Empty)?;
    let mut acc = Rational::from_integer(last.clone());
    for (i, b) in init.iter().enumerate().rev() {
        if acc.is_zero() {
            return Err(CfError::VanishingTail(i + 1));
        }
        acc = &Rational::from_integer(b.clone()) - &acc.recip()?;
    }
    Ok(acc)
}

pub fn eval_pos_cf(cf: &PosCf) -> Rational {
    let (last, init) = cf.coefficients().split_last().expect("non-empty by construction");
    let mut acc = Rational::from_integer(last.clone());
    for c in init.iter().rev() {
        // Every tail is >= 1 here, so the reciprocal exists.
        acc = &Rational::from_integer(c.clone()) + &acc.recip().expect("positive tail");
    }
    acc
}

/// The classical expansion of a non-negative rational.
pub fn pos_cf_expand(x: &Rational) -> Result<PosCf, CfError> {
    if x.numer().is_negative() {
        return Err(CfError::BadCoefficient {
            index: 0,
            value: x.floor(),
            convention: "plus",
        });
    }
    let mut coefficients = Vec::new();
    let (mut num, mut den) = (x.numer().clone(), x.denom().clone());
    while !den.is_zero() {
        let q = &num / &den;
        let r = &num - &q * &den;
        coefficients.push(q);
        num = den;
        den = r;
    }
    PosCf::new(coefficients)
}

/// Converts a plus-convention fraction into the minus convention.
///
/// Even-length input `[c0, ..., c_{2d-1}]⁺` maps to
/// `[c0+1, 2^(c1-1), c2+2, 2^(c3-1), ..., c_{2d-2}+2, 2^(c_{2d-1}-1)]⁻`,
/// where `2^(k)` stands for `k` consecutive twos. Odd-length input is first
/// rewritten with `[..., c] = [..., c-1, 1]`.
pub fn pos_to_neg(cf: &PosCf) -> Result<NegCf, CfError> {
    for (i, c) in cf.coefficients().iter().enumerate() {
        if !c.is_positive() {
            return Err(CfError::BadCoefficient {
                index: i,
                value: c.clone(),
                convention: "plus (positive)",
            });
        }
    }
    let mut c: Vec<BigInt> = cf.coefficients().to_vec();
    if c.len() % 2 == 1 {
        let last = c.pop().expect("non-empty");
        if last > BigInt::one() {
            c.push(last - 1);
            c.push(BigInt::one());
        } else if let Some(prev) = c.pop() {
            // [..., a, 1] = [..., a + 1]
            c.push(prev + 1);
        } else {
            return NegCf::new(vec![BigInt::one()]);
        }
    }
    let mut out = Vec::new();
    for (pair, chunk) in c.chunks(2).enumerate() {
        let bump = if pair == 0 { 1 } else { 2 };
        let head = &chunk[0] + bump;
        // c0 + 1 and later c + 2 open a new entry; the twos pad the rest.
        out.push(head);
        let twos = (&chunk[1] - 1u32)
            .to_usize()
            .ok_or_else(|| CfError::TooLarge(chunk[1].to_string()))?;
        out.extend(std::iter::repeat_n(BigInt::from(2), twos));
    }
    NegCf::new(out)
}

/// Writes `x = n - r/q` with `0 < r < q`, i.e. `n = ceil(x)`.
pub fn split_n_r(x: &Rational) -> Result<(BigInt, BigInt), CfError> {
    if x.is_integer() {
        return Err(CfError::Integral(x.clone()));
    }
    let n = x.ceil();
    let r = &n * x.denom() - x.numer();
    debug_assert!(r.is_positive() && &r < x.denom());
    Ok((n, r))
}

/// Parses a comma or whitespace separated list of integers.
pub fn parse_coefficients(s: &str) -> Result<Vec<BigInt>, CfError> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<BigInt>().map_err(|_| CfError::Parse(t.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&a| BigInt::from(a)).collect()
    }

    /// Independent evaluation through the convergent recurrence
    /// `h_k = a_k h_{k-1} - h_{k-2}`, `k_k = a_k k_{k-1} - k_{k-2}`.
    fn neg_convergent(a: &[i64]) -> Rational {
        let (mut h0, mut h1) = (BigInt::from(1), BigInt::from(a[0]));
        let (mut k0, mut k1) = (BigInt::from(0), BigInt::from(1));
        for &ai in &a[1..] {
            let h2 = BigInt::from(ai) * &h1 - &h0;
            let k2 = BigInt::from(ai) * &k1 - &k0;
            h0 = std::mem::replace(&mut h1, h2);
            k0 = std::mem::replace(&mut k1, k2);
        }
        Rational::new(h1, k1).unwrap()
    }

    fn pos_convergent(c: &[i64]) -> Rational {
        let (mut h0, mut h1) = (BigInt::from(1), BigInt::from(c[0]));
        let (mut k0, mut k1) = (BigInt::from(0), BigInt::from(1));
        for &ci in &c[1..] {
            let h2 = BigInt::from(ci) * &h1 + &h0;
            let k2 = BigInt::from(ci) * &k1 + &k0;
            h0 = std::mem::replace(&mut h1, h2);
            k0 = std::mem::replace(&mut k1, k2);
        }
        Rational::new(h1, k1).unwrap()
    }

    #[test]
    fn expand_examples() {
        assert_eq!(neg_cf_expand(&r("107/5")).unwrap().coefficients(), big(&[22, 2, 3]));
        assert_eq!(neg_cf_expand(&r("9")).unwrap().coefficients(), big(&[9]));
        let cf = neg_cf_expand(&r("7/2")).unwrap();
        assert_eq!(cf.coefficients(), big(&[4, 2]));
        assert_eq!(neg_convergent(&[4, 2]), r("7/2"));
    }

    #[test]
    fn expand_rejects_small_values() {
        assert!(matches!(neg_cf_expand(&r("1")), Err(CfError::NotGreaterThanOne(_))));
        assert!(neg_cf_expand(&r("3/4")).is_err());
        assert!(neg_cf_expand(&r("-5/2")).is_err());
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_neg_cf(&NegCf::from_i64(&[22, 2, 3]).unwrap()), r("107/5"));
        assert_eq!(eval_neg_cf(&NegCf::from_i64(&[13]).unwrap()), r("13"));
        for k in 1..10usize {
            let twos = vec![2i64; k];
            let expected = Rational::new(k as i64 + 1, k as i64).unwrap();
            assert_eq!(neg_convergent(&twos), expected);
            assert_eq!(eval_neg_cf(&NegCf::from_i64(&twos).unwrap()), expected);
        }
    }

    #[test]
    fn relaxed_eval_reports_vanishing_tail() {
        assert_eq!(eval_neg_cf_relaxed(&big(&[0])).unwrap(), r("0"));
        assert_eq!(eval_neg_cf_relaxed(&big(&[2, 2])).unwrap(), r("3/2"));
        assert_eq!(eval_neg_cf_relaxed(&big(&[1])).unwrap(), r("1"));
        // [3, 1, 1]: the tail [1, 1] = 0.
        assert_eq!(eval_neg_cf_relaxed(&big(&[3, 1, 1])), Err(CfError::VanishingTail(1)));
        assert!(eval_neg_cf_relaxed(&[]).is_err());
    }

    #[test]
    fn negcf_rejects_bad_coefficients() {
        assert!(NegCf::from_i64(&[0, 2]).is_err());
        assert!(NegCf::from_i64(&[3, 1]).is_err());
        assert!(NegCf::from_i64(&[]).is_err());
    }

    #[test]
    fn pos_eval_examples() {
        assert_eq!(eval_pos_cf(&PosCf::from_i64(&[21, 2, 2]).unwrap()), r("107/5"));
        assert_eq!(pos_convergent(&[21, 2, 2]), r("107/5"));
        assert_eq!(eval_pos_cf(&PosCf::from_i64(&[5]).unwrap()), r("5"));
        assert_eq!(eval_pos_cf(&PosCf::from_i64(&[1, 1, 1]).unwrap()), r("3/2"));
    }

    #[test]
    fn conversion_examples() {
        let conv = |c: &[i64]| pos_to_neg(&PosCf::from_i64(c).unwrap()).unwrap();
        assert_eq!(conv(&[21, 2, 1, 1]).coefficients(), big(&[22, 2, 3]));
        assert_eq!(neg_convergent(&[22, 2, 3]), pos_convergent(&[21, 2, 1, 1]));
        assert_eq!(conv(&[1, 1]).coefficients(), big(&[2]));
        assert_eq!(conv(&[4, 2]).coefficients(), big(&[5, 2]));
        assert_eq!(neg_convergent(&[5, 2]), r("9/2"));
        assert_eq!(pos_convergent(&[4, 2]), r("9/2"));
        // Odd lengths are padded first.
        assert_eq!(conv(&[21, 2, 2]).coefficients(), big(&[22, 2, 3]));
        assert_eq!(conv(&[1]).coefficients(), big(&[1]));
        assert_eq!(conv(&[3, 2, 1]).coefficients(), big(&[4, 2, 2]));
    }

    #[test]
    fn conversion_rejects_zero_coefficients() {
        assert!(pos_to_neg(&PosCf::from_i64(&[0, 2]).unwrap()).is_err());
    }

    #[test]
    fn serde_as_plain_integers() {
        let cf = NegCf::from_i64(&[22, 2, 3]).unwrap();
        let js = serde_json::to_string(&cf).unwrap();
        assert_eq!(js, "[22,2,3]");
        assert_eq!(serde_json::from_str::<NegCf>(&js).unwrap(), cf);
        let huge = r#"["123456789012345678901234567890",2]"#;
        let cf: NegCf = serde_json::from_str(huge).unwrap();
        assert_eq!(serde_json::to_string(&cf).unwrap(), huge);
        assert!(serde_json::from_str::<NegCf>("[3,1]").is_err());
    }

    #[test]
    fn split_examples() {
        let s = |x: &str| {
            let (n, r) = split_n_r(&r(x)).unwrap();
            (n.to_i64().unwrap(), r.to_i64().unwrap())
        };
        assert_eq!(s("107/5"), (22, 3));
        assert_eq!(s("43/2"), (22, 1));
        assert_eq!(s("7/2"), (4, 1));
        assert!(split_n_r(&r("6")).is_err());
    }

    #[test]
    fn pos_expand_matches_classical() {
        assert_eq!(pos_cf_expand(&r("107/5")).unwrap().coefficients(), big(&[21, 2, 2]));
        assert_eq!(pos_cf_expand(&r("0")).unwrap().coefficients(), big(&[0]));
    }

    #[test]
    fn round_trip_exhaustive() {
        for q in 1..=12i64 {
            for p in (q + 1)..=(50 * q) {
                let x = Rational::new(p, q).unwrap();
                if x.denom() != &BigInt::from(q) {
                    continue;
                }
                let cf = neg_cf_expand(&x).unwrap();
                assert_eq!(eval_neg_cf(&cf), x);
                assert!(cf.coefficients()[1..].iter().all(|a| a >= &BigInt::from(2)));
                assert_eq!(neg_convergent(&cf.to_i64_vec().unwrap()), x);
            }
        }
    }

    #[test]
    fn conversion_exhaustive() {
        fn rec(prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if !prefix.is_empty() && prefix.len() % 2 == 0 {
                out.push(prefix.clone());
            }
            if prefix.len() == 6 {
                return;
            }
            for c in 1..=6 {
                prefix.push(c);
                rec(prefix, out);
                prefix.pop();
            }
        }
        let mut all = Vec::new();
        rec(&mut Vec::new(), &mut all);
        for c in all {
            let pos = PosCf::from_i64(&c).unwrap();
            let neg = pos_to_neg(&pos).unwrap();
            assert_eq!(eval_neg_cf(&neg), pos_convergent(&c), "{c:?}");
        }
    }

    #[test]
    fn tridiagonal_determinant_is_numerator() {
        fn rec(prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
            if !prefix.is_empty() {
                out.push(prefix.clone());
            }
            if prefix.len() == 5 {
                return;
            }
            let lo = if prefix.is_empty() { 1 } else { 2 };
            for a in lo..=6 {
                prefix.push(a);
                rec(prefix, out);
                prefix.pop();
            }
        }
        let mut all = Vec::new();
        rec(&mut Vec::new(), &mut all);
        for a in all {
            let k = a.len();
            let m: Vec<Vec<i64>> = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| match i.abs_diff(j) {
                            0 => a[i],
                            1 => -1,
                            _ => 0,
                        })
                        .collect()
                })
                .collect();
            let value = eval_neg_cf(&NegCf::from_i64(&a).unwrap());
            assert_eq!(&crate::linalg::determinant(&m), value.numer(), "{a:?}");
        }
    }

    proptest! {
        #[test]
        fn expansion_never_has_small_tail(p in 2i64..5000, q in 1i64..200) {
            let x = Rational::new(p, q).unwrap();
            prop_assume!(x > Rational::one());
            let cf = neg_cf_expand(&x).unwrap();
            prop_assert!(cf.coefficients()[1..].iter().all(|a| a >= &BigInt::from(2)));
            prop_assert_eq!(eval_neg_cf(&cf), x.clone());
            let pos = pos_cf_expand(&x).unwrap();
            prop_assert_eq!(eval_pos_cf(&pos), x);
        }
    }
}
