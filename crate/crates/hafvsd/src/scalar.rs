//! Scalar abstraction shared by the exact and floating-point layers.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Field-like scalar used by the transition algebra and the linear models.
pub trait Scalar: Num + Signed + Clone + PartialOrd + Debug + Display {}

impl<T> Scalar for T where T: Num + Signed + Clone + PartialOrd + Debug + Display {}

/// Exact rational scalar used throughout the scene calculus.
pub type Q = BigRational;

/// Builds `num/den` as a normalized rational. Panics on a zero denominator.
pub fn q(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a signed variant of either.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Q::new(n, d))
}

/// Always renders as `num/den`, including integers (`3/1`).
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn q_to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Converts between scalar types through `f64`; exact for `f32`/`f64`.
pub fn to_f64<T: ToPrimitive>(x: &T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn is_positive<T: Scalar>(x: &T) -> bool {
    x > &T::zero()
}

pub fn recip<T: Scalar>(x: &T) -> T {
    T::one() / x.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_q("3"), Some(q(3, 1)));
        assert_eq!(parse_q("-6/4"), Some(q(-3, 2)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_q("x"), None);
        assert_eq!(fmt_q(&q(6, 2)), "3/1");
        assert_eq!(fmt_q(&q(-1, 3)), "-1/3");
    }

    #[test]
    fn generic_helpers() {
        assert!(is_positive(&2.0f32));
        assert!(!is_positive(&q(-1, 2)));
        assert_eq!(recip(&q(2, 3)), q(3, 2));
        assert_eq!(recip(&4.0f64), 0.25);
    }
}
