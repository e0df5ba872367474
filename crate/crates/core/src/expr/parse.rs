//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (("+"|"-") term)* ;
//! term   := factor (("*"|"/") factor)* ;
//! factor := base ("^" uint)? ;
//! base   := number | "z" | "(" expr ")" | "exp" "(" expr ")" | "-" base ;
//! number := digits ("." digits)? "i"? ;
//! ```

use std::fmt;

use num_complex::Complex;
use thiserror::Error;

use super::Expr;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SyntaxError {
    /// Byte offset into the source where parsing failed.
    pub offset: usize,
    pub expected: Vec<&'static str>,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at byte {}: expected {}", self.offset, self.expected.join(" or "))
    }
}

pub fn parse<T: Scalar>(src: &str) -> Result<Expr<T>, SyntaxError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn error(&mut self, expected: &[&'static str]) -> SyntaxError {
        self.skip_ws();
        SyntaxError { offset: self.pos, expected: expected.to_vec() }
    }

    fn expect(&mut self, byte: u8, name: &'static str) -> Result<(), SyntaxError> {
        if self.peek() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&[name]))
        }
    }

    fn expr<T: Scalar>(&mut self) -> Result<Expr<T>, SyntaxError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::add(lhs, self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term<T: Scalar>(&mut self) -> Result<Expr<T>, SyntaxError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::mul(lhs, self.factor()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::div(lhs, self.factor()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor<T: Scalar>(&mut self) -> Result<Expr<T>, SyntaxError> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.error(&["unsigned integer"]));
            }
            let n: u32 = digits.parse().map_err(|_| SyntaxError { offset: start, expected: vec!["exponent fitting in u32"] })?;
            return Ok(Expr::pow(base, n));
        }
        Ok(base)
    }

    fn base<T: Scalar>(&mut self) -> Result<Expr<T>, SyntaxError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::neg(self.base()?))
            }
            Some(b'z') => {
                self.pos += 1;
                Ok(Expr::Z)
            }
            Some(b'e') if self.src[self.pos..].starts_with(b"exp") => {
                self.pos += 3;
                self.expect(b'(', "'('")?;
                let e = self.expr()?;
                self.expect(b')', "')'")?;
                Ok(Expr::exp(e))
            }
            Some(b) if b.is_ascii_digit() => self.number(),
            _ => Err(self.error(&["number", "'z'", "'('", "'exp'", "'-'"])),
        }
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn number<T: Scalar>(&mut self) -> Result<Expr<T>, SyntaxError> {
        let mut text = self.digits();
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            let frac = self.digits();
            if frac.is_empty() {
                return Err(SyntaxError { offset: self.pos, expected: vec!["digit"] });
            }
            text.push('.');
            text.push_str(&frac);
        }
        let value: f64 = text.parse().expect("digits form a valid float");
        let value = T::lit(value);
        if self.src.get(self.pos) == Some(&b'i') {
            self.pos += 1;
            Ok(Expr::Const(Complex::new(T::zero(), value)))
        } else {
            Ok(Expr::Const(Complex::new(value, T::zero())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    type E = Expr<f64>;

    fn p(s: &str) -> E {
        parse(s).unwrap()
    }

    #[test]
    fn two_exponentials_tree() {
        let expected = Expr::Add(
            Box::new(Expr::Exp(Box::new(Expr::Z))),
            Box::new(Expr::Exp(Box::new(Expr::Mul(Box::new(Expr::Const(c(0.0, 1.0))), Box::new(Expr::Z))))),
        );
        assert_eq!(p("exp(z)+exp(1i*z)"), expected);
    }

    #[test]
    fn rational_tree() {
        let expected = Expr::Div(
            Box::new(Expr::Z),
            Box::new(Expr::Add(
                Box::new(Expr::Mul(Box::new(Expr::Const(c(0.5, 0.0))), Box::new(Expr::Z))),
                Box::new(Expr::Const(c(1.0, 0.0))),
            )),
        );
        assert_eq!(p("z/(0.5*z+1)"), expected);
        assert_eq!(p("  z / ( 0.5 * z + 1 ) "), expected);
    }

    #[test]
    fn unbalanced_paren_offset() {
        let err = parse::<f64>("exp(").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(err.expected.contains(&"number"));
    }

    #[test]
    fn complex_literals_fold() {
        assert_eq!(p("1+2i"), Expr::Const(c(1.0, 2.0)));
        assert_eq!(p("-1.5-2i"), Expr::Const(c(-1.5, -2.0)));
        assert_eq!(p("(2+1i)^2"), Expr::Const(c(3.0, 4.0)));
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        assert_eq!(p("-z^2"), Expr::Pow(Box::new(Expr::Neg(Box::new(Expr::Z))), 2));
        assert_eq!(p("-(z^2)"), Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::Z), 2))));
    }

    #[test]
    fn left_associative_subtraction() {
        let e = p("z-1-z");
        assert!(matches!(e, Expr::Sub(ref a, _) if matches!(**a, Expr::Sub(_, _))));
    }

    #[test]
    fn rejects_malformed_input() {
        assert_eq!(parse::<f64>("z+").unwrap_err().offset, 2);
        assert_eq!(parse::<f64>("z z").unwrap_err().offset, 2);
        assert!(parse::<f64>("1.").is_err());
        assert!(parse::<f64>("z^").is_err());
        assert!(parse::<f64>("z^-1").is_err());
        assert!(parse::<f64>("sin(z)").is_err());
        assert!(parse::<f64>("").is_err());
        assert_eq!(parse::<f64>("(z").unwrap_err().expected, vec!["')'"]);
    }
}
