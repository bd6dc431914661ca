//! Scalars that stay rational as long as the arithmetic allows it.
//!
//! Field parameters such as `8/3` are kept exact so that chain bounds like
//! `b^2 r^2 / (4(b-1))` come out as exact rationals. Any operation that
//! leaves the rationals (overflow, irrational function) silently falls back
//! to `f64`.

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;

pub type Rational = Ratio<i64>;

/// Exact-when-possible scalar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Exact(Rational),
    Approx(f64),
}

impl Scalar {
    pub fn from_int(n: i64) -> Self {
        Scalar::Exact(Rational::from_integer(n))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Scalar::Exact(Rational::new(num, den))
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Scalar::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Approx(x) => x,
        }
    }

    pub fn as_exact(self) -> Option<Rational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    pub fn is_zero(self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Approx(x) => x == 0.0,
        }
    }

    pub fn is_one(self) -> bool {
        match self {
            Scalar::Exact(r) => r == Rational::from_integer(1),
            Scalar::Approx(x) => x == 1.0,
        }
    }

    fn binop(
        self,
        other: Scalar,
        exact: impl Fn(Rational, Rational) -> Option<Rational>,
        approx: impl Fn(f64, f64) -> f64,
    ) -> Scalar {
        if let (Scalar::Exact(a), Scalar::Exact(b)) = (self, other) {
            if let Some(r) = exact(a, b) {
                return Scalar::Exact(r);
            }
        }
        Scalar::Approx(approx(self.to_f64(), other.to_f64()))
    }

    pub fn add(self, other: Scalar) -> Scalar {
        self.binop(other, |a, b| checked(|| a + b), |a, b| a + b)
    }

    pub fn sub(self, other: Scalar) -> Scalar {
        self.binop(other, |a, b| checked(|| a - b), |a, b| a - b)
    }

    pub fn mul(self, other: Scalar) -> Scalar {
        self.binop(other, |a, b| checked(|| a * b), |a, b| a * b)
    }

    /// Division; exact path returns `None` (-> NaN via approx) on zero denominator.
    pub fn div(self, other: Scalar) -> Scalar {
        self.binop(
            other,
            |a, b| {
                if b.is_zero() {
                    None
                } else {
                    checked(|| a / b)
                }
            },
            |a, b| a / b,
        )
    }

    pub fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Approx(x) => Scalar::Approx(-x),
        }
    }

    /// Integer power; negative exponents leave the exact path only on zero base.
    pub fn powi(self, n: i32) -> Scalar {
        match self {
            Scalar::Exact(r) => {
                if n < 0 && r.is_zero() {
                    return Scalar::Approx(f64::NAN);
                }
                match checked(|| r.pow(n)) {
                    Some(p) => Scalar::Exact(p),
                    None => Scalar::Approx(self.to_f64().powi(n)),
                }
            }
            Scalar::Approx(x) => Scalar::Approx(x.powi(n)),
        }
    }

    pub fn abs(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Approx(x) => Scalar::Approx(x.abs()),
        }
    }
}

/// Run a rational op, converting arithmetic overflow panics into `None`.
fn checked(f: impl Fn() -> Rational + std::panic::UnwindSafe) -> Option<Rational> {
    std::panic::catch_unwind(f).ok()
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.is_integer() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Approx(x) => write!(f, "{x}"),
        }
    }
}

/// Round `x` up (toward +inf) at `sig` significant decimal digits.
pub fn round_up_sig(x: f64, sig: u32) -> f64 {
    round_sig(x, sig, true)
}

/// Round `x` down (toward -inf) at `sig` significant decimal digits.
pub fn round_down_sig(x: f64, sig: u32) -> f64 {
    round_sig(x, sig, false)
}

fn round_sig(x: f64, sig: u32, up: bool) -> f64 {
    assert!(sig >= 1, "need at least one significant digit");
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let mag = x.abs().log10().floor() as i32;
    let shift = sig as i32 - 1 - mag;
    let factor = 10f64.powi(shift);
    let scaled = x * factor;
    let rounded = if up { scaled.ceil() } else { scaled.floor() };
    // Guard against e.g. 1000.0 * 1e-3 drifting off the grid.
    let result = rounded / factor;
    if up && result < x {
        (rounded + 1.0) / factor
    } else if !up && result > x {
        (rounded - 1.0) / factor
    } else {
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_arithmetic_stays_exact() {
        let b = Scalar::from_ratio(8, 3);
        let r = Scalar::from_int(28);
        let r2 = b
            .powi(2)
            .mul(r.powi(2))
            .div(Scalar::from_int(4).mul(b.sub(Scalar::from_int(1))));
        assert_eq!(r2, Scalar::from_ratio(12544, 15));
    }

    #[test]
    fn overflow_falls_back_to_float() {
        let big = Scalar::from_int(i64::MAX / 2);
        let x = big.mul(big);
        assert!(matches!(x, Scalar::Approx(_)));
        assert!((x.to_f64() - (i64::MAX / 2) as f64 * (i64::MAX / 2) as f64).abs() < 1e10);
    }

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(round_up_sig(836.26666666, 5), 836.27);
        assert_eq!(round_up_sig(3239.6961, 5), 3239.7);
        assert_eq!(round_down_sig(4.76449509, 5), 4.7644);
        assert_eq!(round_up_sig(208.111111, 5), 208.12);
        assert_eq!(round_up_sig(2196.7, 4), 2197.0);
        assert_eq!(round_up_sig(-1.234567, 3), -1.23);
        assert_eq!(round_down_sig(-1.234567, 3), -1.24);
        assert_eq!(round_up_sig(680.0, 5), 680.0);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Scalar::from_ratio(8, 3).to_string(), "8/3");
        assert_eq!(Scalar::from_int(28).to_string(), "28");
    }
}
