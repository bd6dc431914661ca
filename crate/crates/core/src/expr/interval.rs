//! Coarse interval evaluation of expression trees over boxes.
//!
//! Used to certify Lipschitz constants for grid bounds: the enclosure is
//! conservative (outward-directed at every operation) but not tight. Trig
//! functions use the [-1, 1] envelope, which is all the bound calculus
//! needs.

use super::{Expr, UnaryFn};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum IntervalError {
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("square root of an interval reaching below zero")]
    SqrtOfNegative,
    #[error("non-finite interval bound")]
    NonFinite,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn contains_zero(self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }

    fn sub(self, o: Interval) -> Interval {
        Interval::new(self.lo - o.hi, self.hi - o.lo)
    }

    fn mul(self, o: Interval) -> Interval {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        Interval::new(
            c.iter().cloned().fold(f64::INFINITY, f64::min),
            c.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        )
    }

    fn div(self, o: Interval) -> Result<Interval, IntervalError> {
        if o.contains_zero() {
            return Err(IntervalError::DivisionByZero);
        }
        Ok(self.mul(Interval::new(1.0 / o.hi, 1.0 / o.lo)))
    }

    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }

    fn powi(self, n: i32) -> Result<Interval, IntervalError> {
        if n == 0 {
            return Ok(Interval::point(1.0));
        }
        if n < 0 {
            return self.powi(-n)?.div_into_one();
        }
        if n % 2 == 0 {
            let m = self.mag();
            let lo = if self.contains_zero() {
                0.0
            } else {
                self.lo.abs().min(self.hi.abs()).powi(n)
            };
            Ok(Interval::new(lo, m.powi(n)))
        } else {
            Ok(Interval::new(self.lo.powi(n), self.hi.powi(n)))
        }
    }

    fn div_into_one(self) -> Result<Interval, IntervalError> {
        Interval::point(1.0).div(self)
    }
}

/// Evaluate `e` over the axis-aligned box (one interval per variable).
pub fn eval_interval(e: &Expr, box_: &[Interval]) -> Result<Interval, IntervalError> {
    let iv = match e {
        Expr::Num(s) => Interval::point(s.to_f64()),
        Expr::Var(i) => box_[*i],
        Expr::Add(a, b) => eval_interval(a, box_)?.add(eval_interval(b, box_)?),
        Expr::Sub(a, b) => eval_interval(a, box_)?.sub(eval_interval(b, box_)?),
        Expr::Mul(a, b) => eval_interval(a, box_)?.mul(eval_interval(b, box_)?),
        Expr::Div(a, b) => eval_interval(a, box_)?.div(eval_interval(b, box_)?)?,
        Expr::Neg(a) => eval_interval(a, box_)?.neg(),
        Expr::Pow(a, n) => eval_interval(a, box_)?.powi(*n)?,
        Expr::Unary(f, a) => {
            let iv = eval_interval(a, box_)?;
            match f {
                UnaryFn::Sin | UnaryFn::Cos => Interval::new(-1.0, 1.0),
                UnaryFn::Exp => Interval::new(iv.lo.exp(), iv.hi.exp()),
                UnaryFn::Sqrt => {
                    if iv.lo < 0.0 {
                        return Err(IntervalError::SqrtOfNegative);
                    }
                    Interval::new(iv.lo.sqrt(), iv.hi.sqrt())
                }
            }
        }
    };
    if !iv.lo.is_finite() || !iv.hi.is_finite() {
        return Err(IntervalError::NonFinite);
    }
    Ok(iv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse_expr_str;

    fn boxed(ranges: &[(f64, f64)]) -> Vec<Interval> {
        ranges.iter().map(|&(a, b)| Interval::new(a, b)).collect()
    }

    #[test]
    fn encloses_polynomial_range() {
        let e = parse_expr_str("x1^2 - x2", 2).unwrap();
        let iv = eval_interval(&e, &boxed(&[(-2.0, 3.0), (0.0, 1.0)])).unwrap();
        // true range is [-1, 9]
        assert!(iv.lo <= -1.0 && iv.hi >= 9.0);
        assert!(iv.lo >= -2.0 && iv.hi <= 10.0);
    }

    #[test]
    fn even_power_nonnegative() {
        let e = parse_expr_str("x1^2", 1).unwrap();
        let iv = eval_interval(&e, &boxed(&[(-3.0, 2.0)])).unwrap();
        assert_eq!(iv.lo, 0.0);
        assert_eq!(iv.hi, 9.0);
    }

    #[test]
    fn division_through_zero_rejected() {
        let e = parse_expr_str("1/x1", 1).unwrap();
        assert_eq!(
            eval_interval(&e, &boxed(&[(-1.0, 1.0)])),
            Err(IntervalError::DivisionByZero)
        );
    }

    #[test]
    fn constant_is_a_point() {
        let e = parse_expr_str("41/3", 1).unwrap();
        let iv = eval_interval(&e, &boxed(&[(-100.0, 100.0)])).unwrap();
        assert_eq!(iv.lo, iv.hi);
    }
}
