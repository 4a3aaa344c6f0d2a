//! Dense linear algebra over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Q = BigRational;
pub type QMat = Vec<Vec<Q>>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn identity(n: usize) -> QMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect())
        .collect()
}

pub fn det(m: &QMat) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Q::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::zero();
        };
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        let p = a[col][col].clone();
        d *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] / &p;
            for c in col..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
            }
        }
    }
    d
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let mut a = m.clone();
    let mut inv = identity(n);
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(piv, col);
        inv.swap(piv, col);
        let p = a[col][col].clone();
        for c in 0..n {
            a[col][c] = &a[col][c] / &p;
            inv[col][c] = &inv[col][c] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
                let t = &f * &inv[col][c];
                inv[r][c] -= t;
            }
        }
    }
    Some(inv)
}

/// Row vector times matrix.
pub fn vec_mul(v: &[Q], m: &QMat) -> Vec<Q> {
    let cols = m.first().map_or(0, |r| r.len());
    (0..cols)
        .map(|j| v.iter().zip(m).fold(Q::zero(), |acc, (x, row)| acc + x * &row[j]))
        .collect()
}

pub fn mat_mul(a: &QMat, b: &QMat) -> QMat {
    a.iter().map(|row| vec_mul(row, b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_and_inverse() {
        let m = vec![vec![q(2), q(1)], vec![q(7), q(4)]];
        assert_eq!(det(&m), q(1));
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(2));
        assert!(inverse(&vec![vec![q(1), q(2)], vec![q(2), q(4)]]).is_none());
    }
}
