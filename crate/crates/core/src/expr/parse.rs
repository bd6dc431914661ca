//! Parser for field-description documents and bare expressions.
//!
//! Document grammar (UTF-8 text, one item per line):
//!
//! ```text
//! # comment
//! param <name> = <rational-or-decimal>
//! dx<i> = <expression>
//! ```
//!
//! Rationals like `8/3` survive parsing exactly. Parameters are substituted
//! into the component expressions here, so the result is a closed expression
//! in `x1..xd` only.

use super::{add, div, mul, neg, pow, sub, Expr, UnaryFn};
use crate::exact::Scalar;
use num_rational::Ratio;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: unknown identifier `{name}`")]
    UnknownIdentifier { line: usize, name: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Parsed field document before validation against stable dimensions.
#[derive(Debug, Clone)]
pub struct FieldDocument {
    pub parameters: BTreeMap<String, Scalar>,
    /// Component expressions, index 0 holding `dx1`.
    pub components: Vec<Expr>,
}

pub fn parse_field_document(text: &str) -> Result<FieldDocument, ParseError> {
    let mut parameters = BTreeMap::new();
    let mut raw_components: Vec<(usize, usize, &str)> = Vec::new(); // (index, line_no, rhs)

    for (line_idx, raw_line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = strip_comment(raw_line).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("param ") {
            let (name, value_text) = split_assignment(rest, line_no)?;
            if !is_valid_name(&name) || name.starts_with('x') && var_index(&name).is_some() {
                return Err(ParseError::Syntax {
                    line: line_no,
                    col: 1,
                    msg: format!("invalid parameter name `{name}`"),
                });
            }
            let value = parse_scalar_literal(&value_text, line_no)?;
            parameters.insert(name, value);
        } else if line.starts_with("dx") {
            let (lhs, rhs) = split_assignment(line, line_no)?;
            let idx = lhs
                .strip_prefix("dx")
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&i| i >= 1)
                .ok_or_else(|| ParseError::Syntax {
                    line: line_no,
                    col: 1,
                    msg: format!("expected `dx<i> = ...`, found `{lhs}`"),
                })?;
            let rhs_offset = raw_line.find('=').map(|p| p + 2).unwrap_or(1);
            raw_components.push((idx, line_no, &raw_line[rhs_offset.min(raw_line.len())..]));
        } else {
            return Err(ParseError::Syntax {
                line: line_no,
                col: 1,
                msg: format!("expected `param`, `dx<i>` or comment, found `{line}`"),
            });
        }
    }

    if raw_components.is_empty() {
        return Err(ParseError::DimensionMismatch(
            "no dx<i> component lines found".into(),
        ));
    }
    let dim = raw_components.len();
    let mut seen = vec![false; dim];
    for &(idx, line_no, _) in &raw_components {
        if idx > dim {
            return Err(ParseError::DimensionMismatch(format!(
                "component dx{idx} declared but only {dim} components present (line {line_no})"
            )));
        }
        if seen[idx - 1] {
            return Err(ParseError::DimensionMismatch(format!(
                "component dx{idx} declared twice (line {line_no})"
            )));
        }
        seen[idx - 1] = true;
    }

    let mut components = vec![Expr::int(0); dim];
    for &(idx, line_no, rhs) in &raw_components {
        let rhs = strip_comment(rhs);
        components[idx - 1] = parse_expression(rhs, line_no, dim, Some(&parameters))?;
    }
    Ok(FieldDocument {
        parameters,
        components,
    })
}

/// Parse a bare expression over `x1..xd` with no parameters. Test helper and
/// round-trip entry point.
pub fn parse_expr_str(text: &str, dim: usize) -> Result<Expr, ParseError> {
    parse_expression(text, 1, dim, None)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(p) => &line[..p],
        None => line,
    }
}

fn split_assignment(s: &str, line: usize) -> Result<(String, String), ParseError> {
    let mut parts = s.splitn(2, '=');
    let lhs = parts.next().unwrap_or("").trim().to_string();
    let rhs = parts
        .next()
        .ok_or_else(|| ParseError::Syntax {
            line,
            col: s.len(),
            msg: "expected `=`".into(),
        })?
        .trim()
        .to_string();
    if lhs.is_empty() || rhs.is_empty() {
        return Err(ParseError::Syntax {
            line,
            col: 1,
            msg: "empty assignment side".into(),
        });
    }
    Ok((lhs, rhs))
}

fn is_valid_name(s: &str) -> bool {
    !s.is_empty()
        && s.chars().next().unwrap().is_ascii_alphabetic()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn var_index(name: &str) -> Option<usize> {
    name.strip_prefix('x')
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&i| i >= 1)
}

fn parse_scalar_literal(text: &str, line: usize) -> Result<Scalar, ParseError> {
    // A parameter value is a single number or a rational `p/q`.
    let e = parse_expression(text, line, 0, None)?;
    e.as_constant().ok_or_else(|| ParseError::Syntax {
        line,
        col: 1,
        msg: format!("parameter value `{text}` is not a constant"),
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Scalar),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    src: &'a str,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Lexer {
            chars: src.chars().collect(),
            pos: 0,
            line,
            src,
        }
    }

    fn error(&self, col: usize, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            let col = self.pos + 1;
            match c {
                ' ' | '\t' => {
                    self.pos += 1;
                }
                '+' => {
                    out.push((Tok::Plus, col));
                    self.pos += 1;
                }
                '-' => {
                    out.push((Tok::Minus, col));
                    self.pos += 1;
                }
                '*' => {
                    out.push((Tok::Star, col));
                    self.pos += 1;
                }
                '/' => {
                    out.push((Tok::Slash, col));
                    self.pos += 1;
                }
                '^' => {
                    out.push((Tok::Caret, col));
                    self.pos += 1;
                }
                '(' => {
                    out.push((Tok::LParen, col));
                    self.pos += 1;
                }
                ')' => {
                    out.push((Tok::RParen, col));
                    self.pos += 1;
                }
                c if c.is_ascii_digit() || c == '.' => {
                    out.push((self.number(col)?, col));
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = self.pos;
                    while self.pos < self.chars.len()
                        && (self.chars[self.pos].is_ascii_alphanumeric()
                            || self.chars[self.pos] == '_')
                    {
                        self.pos += 1;
                    }
                    let name: String = self.chars[start..self.pos].iter().collect();
                    out.push((Tok::Ident(name), col));
                }
                other => {
                    return Err(self.error(col, format!("unexpected character `{other}`")));
                }
            }
        }
        let _ = self.src;
        Ok(out)
    }

    fn number(&mut self, col: usize) -> Result<Tok, ParseError> {
        let start = self.pos;
        let mut saw_dot = false;
        let mut saw_exp = false;
        while self.pos < self.chars.len() {
            let c = self.chars[self.pos];
            if c.is_ascii_digit() {
                self.pos += 1;
            } else if c == '.' && !saw_dot && !saw_exp {
                saw_dot = true;
                self.pos += 1;
            } else if (c == 'e' || c == 'E') && !saw_exp && self.pos > start {
                saw_exp = true;
                self.pos += 1;
                if self.pos < self.chars.len()
                    && (self.chars[self.pos] == '+' || self.chars[self.pos] == '-')
                {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        decimal_to_scalar(&text)
            .map(Tok::Num)
            .ok_or_else(|| self.error(col, format!("malformed number `{text}`")))
    }
}

/// Convert a decimal literal to a Scalar, exactly when it fits in i64.
fn decimal_to_scalar(text: &str) -> Option<Scalar> {
    let (mantissa, exp10) = match text.find(['e', 'E']) {
        Some(p) => {
            let exp: i32 = text[p + 1..].parse().ok()?;
            (&text[..p], exp)
        }
        None => (text, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(p) => (&mantissa[..p], &mantissa[p + 1..]),
        None => (mantissa, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    if digits.is_empty() {
        return None;
    }
    let total_exp = exp10 - frac_part.len() as i32;
    if let (Ok(m), true) = (digits.parse::<i64>(), total_exp.unsigned_abs() <= 18) {
        let p = 10i64.checked_pow(total_exp.unsigned_abs());
        match (p, total_exp >= 0) {
            (Some(p), true) => {
                if let Some(v) = m.checked_mul(p) {
                    return Some(Scalar::Exact(Ratio::from_integer(v)));
                }
            }
            (Some(p), false) => return Some(Scalar::Exact(Ratio::new(m, p))),
            _ => {}
        }
    }
    text.parse::<f64>().ok().map(Scalar::Approx)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    dim: usize,
    params: Option<&'a BTreeMap<String, Scalar>>,
}

fn parse_expression(
    text: &str,
    line: usize,
    dim: usize,
    params: Option<&BTreeMap<String, Scalar>>,
) -> Result<Expr, ParseError> {
    let toks = Lexer::new(text, line).tokens()?;
    if toks.is_empty() {
        return Err(ParseError::Syntax {
            line,
            col: 1,
            msg: "empty expression".into(),
        });
    }
    let mut p = Parser {
        toks,
        pos: 0,
        line,
        dim,
        params,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        let (_, col) = p.toks[p.pos];
        return Err(ParseError::Syntax {
            line,
            col,
            msg: "trailing input after expression".into(),
        });
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, msg: impl Into<String>) -> ParseError {
        let col = self
            .toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|&(_, c)| c)
            .unwrap_or(1);
        ParseError::Syntax {
            line: self.line,
            col,
            msg: msg.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    lhs = add(lhs, self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    lhs = sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    lhs = mul(lhs, self.unary()?);
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    lhs = div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(neg(self.unary()?))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.pos += 1;
            let negative = if matches!(self.peek(), Some(Tok::Minus)) {
                self.pos += 1;
                true
            } else {
                false
            };
            match self.bump() {
                Some((Tok::Num(Scalar::Exact(r)), col)) if r.is_integer() => {
                    let mut n = *r.numer() as i32;
                    if negative {
                        n = -n;
                    }
                    if n.unsigned_abs() > 64 {
                        return Err(ParseError::Syntax {
                            line: self.line,
                            col,
                            msg: format!("exponent {n} out of range"),
                        });
                    }
                    if n < 0 {
                        Ok(div(Expr::int(1), pow(base, -n)))
                    } else {
                        Ok(pow(base, n))
                    }
                }
                _ => Err(self.err_here("exponent must be an integer literal")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            Some((Tok::Num(s), _)) => Ok(Expr::Num(s)),
            Some((Tok::LParen, _)) => {
                let e = self.expr()?;
                match self.bump() {
                    Some((Tok::RParen, _)) => Ok(e),
                    _ => Err(self.err_here("expected `)`")),
                }
            }
            Some((Tok::Ident(name), col)) => self.resolve_ident(name, col),
            _ => Err(self.err_here("expected a number, variable or `(`")),
        }
    }

    fn resolve_ident(&mut self, name: String, col: usize) -> Result<Expr, ParseError> {
        // Function call?
        if matches!(self.peek(), Some(Tok::LParen)) {
            let func = match name.as_str() {
                "sin" => Some(UnaryFn::Sin),
                "cos" => Some(UnaryFn::Cos),
                "exp" => Some(UnaryFn::Exp),
                "sqrt" => Some(UnaryFn::Sqrt),
                _ => None,
            };
            if let Some(func) = func {
                self.pos += 1; // consume `(`
                let arg = self.expr()?;
                return match self.bump() {
                    Some((Tok::RParen, _)) => Ok(Expr::Unary(func, Box::new(arg))),
                    _ => Err(self.err_here("expected `)` after function argument")),
                };
            }
            return Err(ParseError::Syntax {
                line: self.line,
                col,
                msg: format!("unknown function `{name}`"),
            });
        }
        if let Some(i) = var_index(&name) {
            if i <= self.dim {
                return Ok(Expr::Var(i - 1));
            }
            return Err(ParseError::UnknownIdentifier {
                line: self.line,
                name,
            });
        }
        if let Some(params) = self.params {
            if let Some(&v) = params.get(&name) {
                return Ok(Expr::Num(v));
            }
        }
        Err(ParseError::UnknownIdentifier {
            line: self.line,
            name,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorenz_document_parses() {
        let doc = parse_field_document(
            "# classical parameters\n\
             param sigma = 10\n\
             param r = 28\n\
             param b = 8/3\n\
             \n\
             dx1 = sigma*(x2 - x1)\n\
             dx2 = r*x1 - x2 - x1*x3\n\
             dx3 = x1*x2 - b*x3\n",
        )
        .unwrap();
        assert_eq!(doc.components.len(), 3);
        assert_eq!(doc.parameters["b"], Scalar::from_ratio(8, 3));
        let g1 = doc.components[0].eval(&[1.0, 3.0, 0.0]).unwrap();
        assert_eq!(g1, 20.0);
    }

    #[test]
    fn rational_parameter_stays_exact() {
        let doc = parse_field_document("param b = 8/3\ndx1 = -x1\ndx2 = -x2\ndx3 = b*x3").unwrap();
        assert_eq!(
            doc.components[2],
            super::super::mul(Expr::Num(Scalar::from_ratio(8, 3)), Expr::Var(2))
        );
    }

    #[test]
    fn unknown_variable_reported() {
        let err = parse_field_document("dx1 = -x1\ndx2 = -x2\ndx3 = x4").unwrap_err();
        assert_eq!(
            err,
            ParseError::UnknownIdentifier {
                line: 3,
                name: "x4".into()
            }
        );
    }

    #[test]
    fn unknown_parameter_reported() {
        let err = parse_field_document("dx1 = rho*x1\ndx2 = -x2\ndx3 = -x3").unwrap_err();
        assert!(matches!(err, ParseError::UnknownIdentifier { .. }));
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_field_document("dx1 = 1 + * 2\ndx2 = -x2\ndx3 = -x3").unwrap_err();
        match err {
            ParseError::Syntax { line, col, .. } => {
                assert_eq!(line, 1);
                assert!(col >= 10);
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_component_rejected() {
        let err = parse_field_document("dx1 = -x1\ndx1 = -x1").unwrap_err();
        assert!(matches!(err, ParseError::DimensionMismatch(_)));
    }

    #[test]
    fn decimal_literals_are_exact_rationals() {
        assert_eq!(decimal_to_scalar("0.5"), Some(Scalar::from_ratio(1, 2)));
        assert_eq!(decimal_to_scalar("28"), Some(Scalar::from_int(28)));
        assert_eq!(decimal_to_scalar("1e-3"), Some(Scalar::from_ratio(1, 1000)));
    }

    #[test]
    fn powers_parse() {
        let e = parse_expr_str("x1^2 + x2^3", 2).unwrap();
        assert_eq!(e.eval(&[2.0, 3.0]).unwrap(), 4.0 + 27.0);
        let inv = parse_expr_str("x1^-2", 1).unwrap();
        assert_eq!(inv.eval(&[2.0]).unwrap(), 0.25);
    }
}
