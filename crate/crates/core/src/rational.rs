//! Exact rational scalars shared by every module.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// The integer `n` as a rational.
pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The fraction `num/den`. Panics when `den == 0`.
pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Returns `Some(n)` when `x` is an integer that fits in an `i64`.
pub fn to_i64(x: &Rational) -> Option<i64> {
    if x.is_integer() {
        x.to_integer().to_i64()
    } else {
        None
    }
}

/// Smallest integer not below `x`.
pub fn ceil(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

/// Non-negative gcd of a list of integers, with `gcd() = 0` and `gcd(0, x) = |x|`.
pub fn gcd_all(values: &[i64]) -> i64 {
    values.iter().fold(0i64, |acc, v| acc.gcd(v)).abs()
}

pub fn vec_q(values: &[i64]) -> Vec<Rational> {
    values.iter().map(|&v| q(v)).collect()
}

pub fn is_zero_vec(values: &[Rational]) -> bool {
    values.iter().all(Zero::is_zero)
}

/// Absolute value, kept here so callers need not import `Signed`.
pub fn abs(x: &Rational) -> Rational {
    x.abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_conventions() {
        assert_eq!(gcd_all(&[8, 0, 3]), 1);
        assert_eq!(gcd_all(&[0, 0, -6]), 6);
        assert_eq!(gcd_all(&[4, -2, -1]), 1);
        assert_eq!(gcd_all(&[]), 0);
    }

    #[test]
    fn ceil_of_fractions() {
        assert_eq!(ceil(&frac(162, 1)), BigInt::from(162));
        assert_eq!(ceil(&frac(7, 2)), BigInt::from(4));
        assert_eq!(ceil(&frac(-7, 2)), BigInt::from(-3));
    }

    #[test]
    fn integer_extraction() {
        assert_eq!(to_i64(&frac(6, 3)), Some(2));
        assert_eq!(to_i64(&frac(1, 2)), None);
    }
}
