//! Small exact linear algebra over the integers.
//!
//! Everything here works on dense `i64` matrices of modest size (lattice
//! ranks in this crate rarely exceed a dozen). Determinants are computed with
//! fraction-free Bareiss elimination over [`BigInt`] so no intermediate value
//! can overflow.

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[i64]) -> i64 {
    dot(a, a)
}

/// Determinant of a square matrix by Bareiss elimination with row pivoting.
pub fn determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            assert_eq!(row.len(), n, "determinant of a non-square matrix");
            row.iter().map(|&x| BigInt::from(x)).collect()
        })
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * a[n - 1][n - 1].clone()
}

/// Leading principal minors `M_1, ..., M_n` of a square matrix.
pub fn leading_minors(m: &[Vec<i64>]) -> Vec<BigInt> {
    (1..=m.len())
        .map(|k| {
            let sub: Vec<Vec<i64>> = m[..k].iter().map(|r| r[..k].to_vec()).collect();
            determinant(&sub)
        })
        .collect()
}

/// Sylvester's criterion.
pub fn is_positive_definite(m: &[Vec<i64>]) -> bool {
    leading_minors(m).iter().all(|d| d.is_positive())
}

pub fn gram(vectors: &[Vec<i64>]) -> Vec<Vec<i64>> {
    vectors
        .iter()
        .map(|a| vectors.iter().map(|b| dot(a, b)).collect())
        .collect()
}

/// Integer coordinates of `x` in the (linearly independent) `basis`, if `x`
/// lies in the integer span.
pub fn integer_coordinates(basis: &[Vec<i64>], x: &[i64]) -> Option<Vec<i64>> {
    let k = basis.len();
    if k == 0 {
        return x.iter().all(|&c| c == 0).then(Vec::new);
    }
    // Normal equations G c = B x, solved exactly over Q.
    let g = gram(basis);
    let mut aug: Vec<Vec<Ratio<i128>>> = (0..k)
        .map(|i| {
            let mut row: Vec<Ratio<i128>> =
                g[i].iter().map(|&v| Ratio::from_integer(v as i128)).collect();
            row.push(Ratio::from_integer(dot(&basis[i], x) as i128));
            row
        })
        .collect();
    for col in 0..k {
        let piv = (col..k).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, piv);
        let p = aug[col][col];
        for j in col..=k {
            aug[col][j] /= p;
        }
        for r in 0..k {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col];
                for j in col..=k {
                    let v = aug[col][j];
                    aug[r][j] -= f * v;
                }
            }
        }
    }
    let mut coords = Vec::with_capacity(k);
    for row in &aug {
        let c = row[k];
        if !c.is_integer() {
            return None;
        }
        coords.push(i64::try_from(c.to_integer()).ok()?);
    }
    let mut recon = vec![0i64; x.len()];
    for (c, b) in coords.iter().zip(basis) {
        for (r, v) in recon.iter_mut().zip(b) {
            *r += c * v;
        }
    }
    (recon == x).then_some(coords)
}

/// Calls `visit` on every integer vector of dimension `dim` whose squared
/// norm is at most `max_norm`.
pub fn for_each_vector_in_ball(dim: usize, max_norm: i64, mut visit: impl FnMut(&[i64])) {
    fn rec(buf: &mut Vec<i64>, dim: usize, budget: i64, visit: &mut dyn FnMut(&[i64])) {
        if buf.len() == dim {
            visit(buf);
            return;
        }
        let bound = isqrt(budget);
        for c in -bound..=bound {
            buf.push(c);
            rec(buf, dim, budget - c * c, visit);
            buf.pop();
        }
    }
    if max_norm < 0 {
        return;
    }
    let mut buf = Vec::with_capacity(dim);
    rec(&mut buf, dim, max_norm, &mut visit);
}

pub fn isqrt(n: i64) -> i64 {
    if n <= 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}
