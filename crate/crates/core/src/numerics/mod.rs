//! Exact scalars, polynomials and small symmetric matrices.
//!
//! Everything symbolic in this crate is carried in [`Rational`], an
//! arbitrary-precision fraction that is always kept in lowest terms with a
//! positive denominator. Floating point only appears in [`SymMatrixFloat`]
//! and in the solver.

mod matrix;
mod poly;

pub use matrix::{psd_check, PsdCheck, RatMatrix, SymMatrixExact, SymMatrixFloat};
pub use poly::UniPoly;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

/// Exact arbitrary-precision fraction.
pub type Rational = num_rational::BigRational;

/// Builds `num / den` in lowest terms. Panics when `den == 0`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as a rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `value^exp` for a small non-negative exponent.
pub fn pow(value: &Rational, exp: u32) -> Rational {
    num_traits::pow(value.clone(), exp as usize)
}

/// Largest integer not exceeding `value`.
pub fn floor(value: &Rational) -> BigInt {
    value.numer().div_floor(value.denom())
}

/// Nearest `f64`; exact for values whose numerator and denominator fit.
pub fn to_f64(value: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (value.numer().to_f64(), value.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Huge operands: shift both down to keep the quotient representable.
    let nbits = value.numer().bits() as i64;
    let dbits = value.denom().bits() as i64;
    let shift_n = (nbits - 1000).max(0) as usize;
    let shift_d = (dbits - 1000).max(0) as usize;
    let n = (value.numer() >> shift_n).to_f64().unwrap_or(f64::NAN);
    let d = (value.denom() >> shift_d).to_f64().unwrap_or(f64::NAN);
    n / d * 2f64.powi((shift_n as i64 - shift_d as i64) as i32)
}

/// Exact rational value of a finite double.
pub fn from_f64(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

/// Parses `"p/q"`, `"p"` or a signed integer pair into a rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => text.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Renders `p/q`, or `p` for integers.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use proptest::prelude::*;

    #[test]
    fn normalizes_sign_and_gcd() {
        let r = rat(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn floor_of_negative_fraction() {
        assert_eq!(floor(&rat(-7, 2)), BigInt::from(-4));
        assert_eq!(floor(&rat(7, 2)), BigInt::from(3));
        assert_eq!(floor(&int(5)), BigInt::from(5));
    }

    #[test]
    fn huge_values_convert_to_float() {
        let big = pow(&rat(10, 3), 900);
        let f = to_f64(&(big.clone() / (big * int(4))));
        assert!((f - 0.25).abs() < 1e-15);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("1/5"), Some(rat(1, 5)));
        assert_eq!(parse_rational(" -2/4 "), Some(rat(-1, 2)));
        assert_eq!(parse_rational("7"), Some(int(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(format_rational(&rat(2, 10)), "1/5");
        assert_eq!(format_rational(&int(-3)), "-3");
    }

    proptest! {
        #[test]
        fn fraction_invariants(a in -10_000i64..10_000, b in 1i64..10_000, c in -10_000i64..10_000, d in 1i64..10_000) {
            let x = rat(a, b);
            let y = rat(c, d);
            for v in [&x, &y, &(&x / &rat(b, 1)), &(&x + &y), &(&x * &y)] {
                prop_assert!(v.denom() > &BigInt::zero());
                prop_assert!(v.numer().gcd(v.denom()).is_one() || v.numer().is_zero());
            }
            prop_assert_eq!(&(&x + &y) - &y, x);
        }
    }
}
