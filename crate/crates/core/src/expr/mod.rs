//! Expression trees for smooth vector-field components.
//!
//! The expression language is deliberately small: constants, variables
//! `x1..xd`, the four arithmetic operations, integer powers, and the unary
//! functions `sin`, `cos`, `exp`, `sqrt`. Symbolic differentiation is closed
//! over this language, which keeps Jacobians, divergences and Frobenius
//! norms exact.

pub mod interval;
pub mod parse;

use crate::exact::Scalar;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryFn {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl UnaryFn {
    pub fn name(self) -> &'static str {
        match self {
            UnaryFn::Sin => "sin",
            UnaryFn::Cos => "cos",
            UnaryFn::Exp => "exp",
            UnaryFn::Sqrt => "sqrt",
        }
    }
}

/// Expression tree. Variables are zero-based indices (`Var(0)` is `x1`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Scalar),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Unary(UnaryFn, Box<Expr>),
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of negative value {0}")]
    SqrtOfNegative(f64),
    #[error("expression evaluated to a non-finite value")]
    NonFinite,
}

impl Expr {
    pub fn num(s: Scalar) -> Expr {
        Expr::Num(s)
    }

    pub fn int(n: i64) -> Expr {
        Expr::Num(Scalar::from_int(n))
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    /// Evaluate at a point. Division by zero and square roots of negatives
    /// are reported, not propagated as NaN.
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(s) => s.to_f64(),
            Expr::Var(i) => x[*i],
            Expr::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Expr::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Expr::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Expr::Div(a, b) => {
                let d = b.eval(x)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                a.eval(x)? / d
            }
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Pow(a, n) => a.eval(x)?.powi(*n),
            Expr::Unary(f, a) => {
                let v = a.eval(x)?;
                match f {
                    UnaryFn::Sin => v.sin(),
                    UnaryFn::Cos => v.cos(),
                    UnaryFn::Exp => v.exp(),
                    UnaryFn::Sqrt => {
                        if v < 0.0 {
                            return Err(EvalError::SqrtOfNegative(v));
                        }
                        v.sqrt()
                    }
                }
            }
        };
        if v.is_nan() {
            return Err(EvalError::NonFinite);
        }
        Ok(v)
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Num(_) => Expr::int(0),
            Expr::Var(i) => Expr::int(if *i == var { 1 } else { 0 }),
            Expr::Add(a, b) => add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => add(
                mul(a.diff(var), (**b).clone()),
                mul((**a).clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => {
                // (a'b - ab') / b^2
                let numer = sub(
                    mul(a.diff(var), (**b).clone()),
                    mul((**a).clone(), b.diff(var)),
                );
                div(numer, pow((**b).clone(), 2))
            }
            Expr::Neg(a) => neg(a.diff(var)),
            Expr::Pow(a, n) => {
                if *n == 0 {
                    return Expr::int(0);
                }
                mul(
                    mul(Expr::int(*n as i64), pow((**a).clone(), n - 1)),
                    a.diff(var),
                )
            }
            Expr::Unary(f, a) => {
                let inner = a.diff(var);
                let outer = match f {
                    UnaryFn::Sin => Expr::Unary(UnaryFn::Cos, a.clone()),
                    UnaryFn::Cos => neg(Expr::Unary(UnaryFn::Sin, a.clone())),
                    UnaryFn::Exp => Expr::Unary(UnaryFn::Exp, a.clone()),
                    UnaryFn::Sqrt => div(
                        Expr::int(1),
                        mul(Expr::int(2), Expr::Unary(UnaryFn::Sqrt, a.clone())),
                    ),
                };
                mul(outer, inner)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(s) if s.is_zero())
    }

    pub fn as_constant(&self) -> Option<Scalar> {
        match self {
            Expr::Num(s) => Some(*s),
            _ => None,
        }
    }

    /// Largest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Unary(_, a) => a.max_var(),
        }
    }
}

// Smart constructors: fold constants (in exact arithmetic where possible)
// and drop arithmetic identities. Every derivative goes through these, so
// Jacobian entries stay compact.

pub fn add(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, b) if a.is_zero() => b,
        (a, b) if b.is_zero() => a,
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x.add(y)),
        (a, Expr::Neg(b)) => sub(a, *b),
        (a, b) => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, b) if b.is_zero() => a,
        (a, b) if a.is_zero() => neg(b),
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x.sub(y)),
        (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, _) if a.is_zero() => Expr::int(0),
        (_, b) if b.is_zero() => Expr::int(0),
        (Expr::Num(x), b) if x.is_one() => b,
        (a, Expr::Num(y)) if y.is_one() => a,
        (Expr::Num(x), Expr::Num(y)) => Expr::Num(x.mul(y)),
        (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (a, b) {
        (a, _) if a.is_zero() => Expr::int(0),
        (a, Expr::Num(y)) if y.is_one() => a,
        (Expr::Num(x), Expr::Num(y)) if !y.is_zero() => Expr::Num(x.div(y)),
        (a, b) => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub fn neg(a: Expr) -> Expr {
    match a {
        Expr::Num(x) => Expr::Num(x.neg()),
        Expr::Neg(inner) => *inner,
        a => Expr::Neg(Box::new(a)),
    }
}

pub fn pow(a: Expr, n: i32) -> Expr {
    match n {
        0 => Expr::int(1),
        1 => a,
        _ => match a {
            Expr::Num(x) => Expr::Num(x.powi(n)),
            a => Expr::Pow(Box::new(a), n),
        },
    }
}

// Precedence: Add/Sub = 1, Mul/Div = 2, Neg = 3, Pow = 4, atoms = 5.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(s) if s.to_f64() < 0.0 => 3,
        _ => 5,
    }
}

fn fmt_child(e: &Expr, parent_prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if prec(e) < parent_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(s) => write!(f, "{s}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Add(a, b) => {
                fmt_child(a, 1, f)?;
                write!(f, " + ")?;
                fmt_child(b, 2, f)
            }
            Expr::Sub(a, b) => {
                fmt_child(a, 1, f)?;
                write!(f, " - ")?;
                fmt_child(b, 2, f)
            }
            Expr::Mul(a, b) => {
                fmt_child(a, 2, f)?;
                write!(f, "*")?;
                fmt_child(b, 3, f)
            }
            Expr::Div(a, b) => {
                fmt_child(a, 2, f)?;
                write!(f, "/")?;
                fmt_child(b, 3, f)
            }
            Expr::Neg(a) => {
                write!(f, "-")?;
                fmt_child(a, 3, f)
            }
            Expr::Pow(a, n) => {
                fmt_child(a, 5, f)?;
                write!(f, "^{n}")
            }
            Expr::Unary(func, a) => write!(f, "{}({})", func.name(), a),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Expr {
        Expr::var(i)
    }

    #[test]
    fn eval_basics() {
        // 10*(x2 - x1)
        let e = mul(Expr::int(10), sub(x(1), x(0)));
        assert_eq!(e.eval(&[1.0, 3.0, 0.0]).unwrap(), 20.0);
    }

    #[test]
    fn derivative_of_product() {
        // d/dx1 (x1*x2) = x2
        let e = mul(x(0), x(1));
        let d = e.diff(0);
        assert_eq!(d.eval(&[5.0, 7.0]).unwrap(), 7.0);
    }

    #[test]
    fn derivative_chain_rule() {
        // d/dx (sin(x^2)) = cos(x^2) * 2x
        let e = Expr::Unary(UnaryFn::Sin, Box::new(pow(x(0), 2)));
        let d = e.diff(0);
        let x0 = 0.7;
        let expect = (x0 * x0).cos() * 2.0 * x0;
        assert!((d.eval(&[x0]).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn division_by_zero_reported() {
        let e = div(Expr::int(1), x(0));
        assert_eq!(e.eval(&[0.0]), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn sqrt_negative_reported() {
        let e = Expr::Unary(UnaryFn::Sqrt, Box::new(x(0)));
        assert!(matches!(
            e.eval(&[-2.0]),
            Err(EvalError::SqrtOfNegative(_))
        ));
    }

    #[test]
    fn constant_folding_is_exact() {
        // 8/3 stays an exact rational through the smart constructors
        let e = div(Expr::int(8), Expr::int(3));
        assert_eq!(e, Expr::Num(Scalar::from_ratio(8, 3)));
    }

    #[test]
    fn display_round_trips_structure() {
        let e = sub(
            mul(Expr::int(28), x(0)),
            add(x(1), mul(x(0), x(2))),
        );
        let text = e.to_string();
        let back = parse::parse_expr_str(&text, 3).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn derivative_of_sqrt() {
        let e = Expr::Unary(UnaryFn::Sqrt, Box::new(x(0)));
        let d = e.diff(0);
        assert!((d.eval(&[4.0]).unwrap() - 0.25).abs() < 1e-15);
    }
}
