//! Small exact rationals over `i128`. Every operation is checked and reports
//! [`Error::Overflow`] instead of wrapping.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Q {
    num: i128,
    den: i128,
}

fn ck(v: Option<i128>) -> Result<i128> {
    v.ok_or(Error::Overflow)
}

impl Q {
    pub const ZERO: Q = Q { num: 0, den: 1 };
    pub const ONE: Q = Q { num: 1, den: 1 };

    pub fn new(num: i128, den: i128) -> Result<Q> {
        if den == 0 {
            return Err(Error::input("zero denominator"));
        }
        let g = num.gcd(&den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = ck(n.checked_neg())?;
            d = ck(d.checked_neg())?;
        }
        Ok(Q { num: n, den: d })
    }

    pub fn int(n: i128) -> Q {
        Q { num: n, den: 1 }
    }

    pub fn num(&self) -> i128 {
        self.num
    }

    pub fn den(&self) -> i128 {
        self.den
    }

    /// Exact value of a finite double.
    pub fn from_f64(x: f64) -> Result<Q> {
        if !x.is_finite() {
            return Err(Error::input(format!("non-finite coordinate {x}")));
        }
        if x == 0.0 {
            return Ok(Q::ZERO);
        }
        let bits = x.to_bits();
        let sign: i128 = if bits >> 63 == 0 { 1 } else { -1 };
        let exp = ((bits >> 52) & 0x7ff) as i32;
        let mut mant = (bits & 0xf_ffff_ffff_ffff) as i128;
        let mut e = if exp == 0 {
            -1074
        } else {
            mant |= 1 << 52;
            exp - 1075
        };
        let tz = mant.trailing_zeros() as i32;
        mant >>= tz;
        e += tz;
        if e >= 0 {
            if e > 70 {
                return Err(Error::Overflow);
            }
            Ok(Q::int(sign * (mant << e)))
        } else {
            if -e > 125 {
                return Err(Error::Overflow);
            }
            Ok(Q { num: sign * mant, den: 1i128 << (-e) })
        }
    }

    /// Nearest double, up to a couple of ulps.
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn add(self, o: Q) -> Result<Q> {
        let g = self.den.gcd(&o.den);
        let a = ck(self.num.checked_mul(o.den / g))?;
        let b = ck(o.num.checked_mul(self.den / g))?;
        Q::new(ck(a.checked_add(b))?, ck(self.den.checked_mul(o.den / g))?)
    }

    pub fn sub(self, o: Q) -> Result<Q> {
        self.add(Q { num: ck(o.num.checked_neg())?, den: o.den })
    }

    pub fn mul(self, o: Q) -> Result<Q> {
        let g1 = self.num.gcd(&o.den).max(1);
        let g2 = o.num.gcd(&self.den).max(1);
        let n = ck((self.num / g1).checked_mul(o.num / g2))?;
        let d = ck((self.den / g2).checked_mul(o.den / g1))?;
        Q::new(n, d)
    }

    pub fn div(self, o: Q) -> Result<Q> {
        if o.num == 0 {
            return Err(Error::Domain("division by zero".into()));
        }
        self.mul(Q::new(o.den, o.num)?)
    }

    pub fn mul_int(self, k: i128) -> Result<Q> {
        self.mul(Q::int(k))
    }

    pub fn sub_int(self, k: i128) -> Result<Q> {
        self.sub(Q::int(k))
    }

    pub fn floor(self) -> i128 {
        Integer::div_floor(&self.num, &self.den)
    }

    /// Smallest integer `>= self`.
    pub fn ceil(self) -> i128 {
        -Integer::div_floor(&(-self.num), &self.den)
    }

    pub fn is_positive(self) -> bool {
        self.num > 0
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }
}

impl Ord for Q {
    fn cmp(&self, o: &Q) -> Ordering {
        match (self.num.checked_mul(o.den), o.num.checked_mul(self.den)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => (BigInt::from(self.num) * BigInt::from(o.den)).cmp(&(BigInt::from(o.num) * BigInt::from(self.den))),
        }
    }
}

impl PartialOrd for Q {
    fn partial_cmp(&self, o: &Q) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// `base^n` as an exact integer.
pub fn pow_i128(base: u32, n: u32) -> Result<i128> {
    (base as i128).checked_pow(n).ok_or(Error::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_round_trip() {
        for x in [0.0, 1.0, -0.75, 0.1, 1e-20, 3.0e15, 1.0 / 3.0] {
            assert_eq!(Q::from_f64(x).unwrap().to_f64(), x);
        }
    }

    #[test]
    fn arithmetic_and_order() {
        let a = Q::new(1, 3).unwrap();
        let b = Q::new(1, 6).unwrap();
        assert_eq!(a.add(b).unwrap(), Q::new(1, 2).unwrap());
        assert_eq!(a.sub(b).unwrap(), b);
        assert_eq!(a.mul(b).unwrap(), Q::new(1, 18).unwrap());
        assert_eq!(a.div(b).unwrap(), Q::int(2));
        assert!(b < a);
        assert_eq!(Q::new(-7, 2).unwrap().floor(), -4);
        assert_eq!(Q::new(-7, 2).unwrap().ceil(), -3);
        assert_eq!(Q::new(6, 2).unwrap().ceil(), 3);
    }

    #[test]
    fn overflow_is_reported() {
        let big = Q::int(i128::MAX / 2);
        assert!(matches!(big.mul_int(4), Err(Error::Overflow)));
    }
}
