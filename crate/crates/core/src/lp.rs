//! Dense tableau simplex with Bland's rule for `max c·x, A x <= b, x >= 0`
//! with `b >= 0`, over floats or exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub trait Scalar: Clone + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn less(&self, o: &Self) -> bool;
}

const F64_TOL: f64 = 1e-11;

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_pos(&self) -> bool {
        *self > F64_TOL
    }
    fn is_neg(&self) -> bool {
        *self < -F64_TOL
    }
    fn less(&self, o: &Self) -> bool {
        self < o
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_pos(&self) -> bool {
        self.is_positive()
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
    fn less(&self, o: &Self) -> bool {
        self < o
    }
}

/// Exact rational value of a finite double.
pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
}

#[derive(Clone, Debug)]
pub struct LpSolution<S> {
    pub x: Vec<S>,
    pub value: S,
    /// Optimal multipliers of the constraints.
    pub duals: Vec<S>,
}

pub fn maximize<S: Scalar>(c: &[S], a: &[Vec<S>], b: &[S]) -> Result<LpSolution<S>> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err(Error::input("linear program dimensions disagree"));
    }
    if b.iter().any(|v| v.is_neg()) {
        return Err(Error::input("linear program needs a nonnegative right-hand side"));
    }
    let width = n + m + 1;
    let mut t: Vec<Vec<S>> = Vec::with_capacity(m + 1);
    for i in 0..m {
        let mut row = a[i].clone();
        row.extend((0..m).map(|j| if i == j { S::one() } else { S::zero() }));
        row.push(b[i].clone());
        t.push(row);
    }
    let mut obj: Vec<S> = c.iter().map(|v| S::zero().sub(v)).collect();
    obj.extend((0..=m).map(|_| S::zero()));
    t.push(obj);
    let mut basis: Vec<usize> = (n..n + m).collect();

    for _ in 0..100_000 {
        let Some(col) = (0..width - 1).find(|&j| t[m][j].is_neg()) else {
            let mut x = vec![S::zero(); n];
            for (i, &bv) in basis.iter().enumerate() {
                if bv < n {
                    x[bv] = t[i][width - 1].clone();
                }
            }
            let duals = (0..m).map(|i| t[m][n + i].clone()).collect();
            return Ok(LpSolution { x, value: t[m][width - 1].clone(), duals });
        };
        let mut row: Option<usize> = None;
        let mut best: Option<S> = None;
        for i in 0..m {
            if t[i][col].is_pos() {
                let ratio = t[i][width - 1].div(&t[i][col]);
                let better = match &best {
                    None => true,
                    Some(bst) => ratio.less(bst) || (!bst.less(&ratio) && basis[i] < basis[row.unwrap()]),
                };
                if better {
                    best = Some(ratio);
                    row = Some(i);
                }
            }
        }
        let r = row.ok_or(Error::Unbounded)?;
        let p = t[r][col].clone();
        for v in t[r].iter_mut() {
            *v = v.div(&p);
        }
        let pivot_row = t[r].clone();
        for (i, trow) in t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = trow[col].clone();
            if f.is_pos() || f.is_neg() {
                for (v, pv) in trow.iter_mut().zip(&pivot_row) {
                    *v = v.sub(&f.mul(pv));
                }
            }
        }
        basis[r] = col;
    }
    Err(Error::SearchFailed("simplex iteration limit reached".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_float_lp() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
        let s = maximize(&[3.0, 2.0], &[vec![1.0, 1.0], vec![1.0, 3.0], vec![1.0, 0.0]], &[4.0, 6.0, 3.0]).unwrap();
        assert!((s.value - 11.0).abs() < 1e-12);
        assert!((s.x[0] - 3.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        // duals certify the optimum: b·y = value
        let dual: f64 = [4.0, 6.0, 3.0].iter().zip(&s.duals).map(|(b, y)| b * y).sum();
        assert!((dual - 11.0).abs() < 1e-12);
    }

    #[test]
    fn exact_lp_and_unbounded() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let s = maximize(&[q(1, 1), q(1, 1)], &[vec![q(3, 1), q(1, 1)], vec![q(1, 1), q(3, 1)]], &[q(1, 1), q(1, 1)]).unwrap();
        assert_eq!(s.value, q(1, 2));
        assert!(matches!(maximize(&[1.0], &[vec![-1.0]], &[1.0]), Err(Error::Unbounded)));
    }
}
