//! Polynomial expressions in `x1..xn` and `lambda`.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := ("+" | "-") unary | power
//! power  := atom ("^" integer)?
//! atom   := number | "[" signed "," signed "]" | "x" index | "lambda" | "(" expr ")"
//! ```
//!
//! Division is only allowed by constants. Numbers denote the nearest
//! double; an uncertain constant is written as an interval literal.
//! `λ` is accepted as a spelling of `lambda`.

use multiflow_core::{Interval, Polynomial};
use thiserror::Error;

/// Parse failure at a character offset into the expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{message} (at offset {offset})")]
pub struct ExprError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Lambda,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let err = |offset, message: &str| ExprError { offset, message: message.to_string() };
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            ',' => Some(Tok::Comma),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBracket),
            ']' => Some(Tok::RBracket),
            'λ' => Some(Tok::Lambda),
            _ => None,
        };
        if let Some(t) = single {
            out.push((pos, t));
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            if i < chars.len() && matches!(chars[i].1, 'e' | 'E') {
                let mut j = i + 1;
                if j < chars.len() && matches!(chars[j].1, '+' | '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].1.is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].1.is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let end = chars.get(i).map_or(src.len(), |c| c.0);
            let text = &src[pos..end];
            let v: f64 = text.parse().map_err(|_| err(pos, &format!("malformed number '{text}'")))?;
            out.push((pos, Tok::Num(v)));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            let end = chars.get(i).map_or(src.len(), |c| c.0);
            let word = &src[pos..end];
            let tok = if word == "lambda" {
                Tok::Lambda
            } else if let Some(idx) = word.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                if idx == 0 {
                    return Err(err(pos, "state variables are numbered from x1"));
                }
                Tok::Var(idx - 1)
            } else {
                return Err(err(pos, &format!("unknown name '{word}'")));
            };
            out.push((pos, tok));
            continue;
        }
        return Err(err(pos, &format!("unexpected character '{c}'")));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    nvars: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial, ExprError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc = acc.add(&self.term()?);
            } else if self.eat(&Tok::Minus) {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ExprError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                acc = acc.mul(&self.unary()?);
            } else if self.peek() == Some(&Tok::Slash) {
                self.at += 1;
                let at = self.offset();
                let d = self.unary()?;
                let c = constant_value(&d).ok_or_else(|| ExprError {
                    offset: at,
                    message: "division is only allowed by a constant".into(),
                })?;
                let r = exact_recip(c).or_else(|| c.recip()).ok_or_else(|| ExprError {
                    offset: at,
                    message: "division by an interval containing zero".into(),
                })?;
                acc = acc.scale(r);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, ExprError> {
        if self.eat(&Tok::Minus) {
            return Ok(self.unary()?.neg());
        }
        if self.eat(&Tok::Plus) {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, ExprError> {
        let base = self.atom()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        match self.peek().cloned() {
            Some(Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= 64.0 => {
                self.at += 1;
                Ok(base.pow(v as u32))
            }
            _ => self.fail("exponent must be an integer between 0 and 64"),
        }
    }

    fn signed(&mut self) -> Result<f64, ExprError> {
        let neg = if self.eat(&Tok::Minus) {
            true
        } else {
            self.eat(&Tok::Plus);
            false
        };
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(if neg { -v } else { v })
            }
            _ => self.fail("expected a number"),
        }
    }

    fn atom(&mut self) -> Result<Polynomial, ExprError> {
        let n = self.nvars;
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.at += 1;
                Ok(Polynomial::constant(n, Interval::point(v)))
            }
            Some(Tok::Var(i)) => {
                if i >= n {
                    return self.fail(format!("x{} is not a state variable of a {n}-dimensional system", i + 1));
                }
                self.at += 1;
                Ok(Polynomial::var(n, i))
            }
            Some(Tok::Lambda) => {
                self.at += 1;
                Ok(Polynomial::lambda(n))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return self.fail("expected ')'");
                }
                Ok(e)
            }
            Some(Tok::LBracket) => {
                self.at += 1;
                let at = self.offset();
                let lo = self.signed()?;
                if !self.eat(&Tok::Comma) {
                    return self.fail("expected ',' in interval literal");
                }
                let hi = self.signed()?;
                if !self.eat(&Tok::RBracket) {
                    return self.fail("expected ']'");
                }
                let iv = Interval::new(lo, hi).ok_or_else(|| ExprError {
                    offset: at,
                    message: format!("empty interval [{lo}, {hi}]"),
                })?;
                Ok(Polynomial::constant(n, iv))
            }
            Some(_) => self.fail("expected a number, variable, interval or '('"),
            None => self.fail("unexpected end of expression"),
        }
    }
}

/// `1/c` when `c` is a point whose reciprocal is a double.
fn exact_recip(c: Interval) -> Option<Interval> {
    let v = c.lo();
    if !c.is_point() || v == 0.0 {
        return None;
    }
    let r = 1.0 / v;
    (r.is_finite() && r.mul_add(v, -1.0) == 0.0).then(|| Interval::point(r))
}

fn constant_value(p: &Polynomial) -> Option<Interval> {
    if p.is_zero() {
        return Some(Interval::ZERO);
    }
    let mut terms = p.terms();
    let (e, c) = terms.next()?;
    (terms.next().is_none() && e.iter().all(|&k| k == 0)).then_some(c)
}

/// Parses a polynomial over `nvars` state variables.
pub fn parse_polynomial(src: &str, nvars: usize) -> Result<Polynomial, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: src.len(),
        nvars,
    };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.fail("unexpected trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use multiflow_core::IntervalVector;

    #[test]
    fn precedence_and_powers() {
        let p = parse_polynomial("1 - x1^2 * 2 + (x1 + 1)^2", 1).unwrap();
        // 1 - 2x^2 + x^2 + 2x + 1 = 2 + 2x - x^2
        assert_eq!(p.to_string(), "2.0 + 2.0*x1 + -1.0*x1^2");
    }

    #[test]
    fn saddle_family_evaluates() {
        let p = parse_polynomial("x1^2 + λ", 1).unwrap();
        let v = p.eval(&IntervalVector::point(&[0.0]), Interval::ONE);
        assert_eq!(v, Interval::ONE);
    }

    #[test]
    fn interval_literals_and_division() {
        let p = parse_polynomial("[0, 1] + x1/4", 1).unwrap();
        assert_eq!(p.to_string(), "[0.0, 1.0] + 0.25*x1");
        let third = parse_polynomial("x1/3", 1).unwrap().coefficient(&[1, 0]).unwrap();
        assert!(!third.is_point() && third.contains(1.0 / 3.0));
        assert!(parse_polynomial("x1 / x1", 1).is_err());
        assert!(parse_polynomial("1 / [-1, 1]", 1).is_err());
    }

    #[test]
    fn errors_point_at_the_offending_token() {
        let e = parse_polynomial("x1 + * 2", 1).unwrap_err();
        assert_eq!(e.offset, 5);
        let e = parse_polynomial("x1 + x3", 2).unwrap_err();
        assert_eq!(e.offset, 5);
        assert!(e.message.contains("x3"));
        let e = parse_polynomial("x1 + y", 1).unwrap_err();
        assert_eq!(e.offset, 5);
        let e = parse_polynomial("(x1", 1).unwrap_err();
        assert_eq!(e.offset, 3);
        assert!(parse_polynomial("[2, 1]", 1).is_err());
        assert!(parse_polynomial("x1^0.5", 1).is_err());
    }

    #[test]
    fn scientific_notation() {
        let p = parse_polynomial("1e-7*x1 + 2.5E3", 1).unwrap();
        assert_eq!(p.coefficient(&[1, 0]), Some(Interval::point(1e-7)));
        assert_eq!(p.coefficient(&[0, 0]), Some(Interval::point(2500.0)));
    }
}
