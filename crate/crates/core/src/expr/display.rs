//! Minimal-parenthesis printer. Output reparses to the same (folded) tree.

use std::fmt;

use num_complex::Complex;

use super::Expr;
use crate::scalar::Scalar;

// Binding levels mirror the grammar: expr < term < factor < base.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const FACTOR: u8 = 3;
const BASE: u8 = 4;

fn real_text<T: Scalar>(x: T) -> String {
    if x.is_sign_negative() {
        format!("-{}", -x)
    } else {
        format!("{}", x)
    }
}

fn const_text<T: Scalar>(c: Complex<T>) -> (String, u8) {
    if c.im == T::zero() {
        (real_text(c.re), BASE)
    } else if c.re == T::zero() {
        (format!("{}i", real_text(c.im)), BASE)
    } else {
        let sign = if c.im.is_sign_negative() { '-' } else { '+' };
        (format!("{}{}{}i", real_text(c.re), sign, c.im.abs()), SUM)
    }
}

fn render<T: Scalar>(e: &Expr<T>) -> (String, u8) {
    match e {
        Expr::Const(c) => const_text(*c),
        Expr::Z => ("z".to_string(), BASE),
        Expr::Add(a, b) => (format!("{}+{}", at(a, SUM), at(b, PRODUCT)), SUM),
        Expr::Sub(a, b) => (format!("{}-{}", at(a, SUM), at(b, PRODUCT)), SUM),
        Expr::Mul(a, b) => (format!("{}*{}", at(a, PRODUCT), at(b, FACTOR)), PRODUCT),
        Expr::Div(a, b) => (format!("{}/{}", at(a, PRODUCT), at(b, FACTOR)), PRODUCT),
        Expr::Neg(a) => (format!("-{}", at(a, BASE)), BASE),
        Expr::Pow(a, n) => (format!("{}^{}", at(a, BASE), n), FACTOR),
        Expr::Exp(a) => (format!("exp({})", at(a, SUM)), BASE),
    }
}

/// Renders `e` so that it parses at binding level `min`.
fn at<T: Scalar>(e: &Expr<T>, min: u8) -> String {
    let (text, level) = render(e);
    if level >= min {
        text
    } else {
        format!("({})", text)
    }
}

impl<T: Scalar> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self).0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn corpus_round_trips_textually() {
        let corpus = [
            "exp(z)",
            "exp(z)+z",
            "z*exp(z)+z",
            "z*(exp(z)+1)",
            "exp(z)+exp(1i*z)",
            "exp(z)+exp(0.5*z)",
            "exp(z)+exp(-1*z)",
            "exp(z)+exp(2*z)",
            "exp(z)+exp(1+1i*z)",
            "exp(z)+z/(2*z-1)",
            "exp(z)+z/(0.5*z+1)",
            "z/(0.5*z+1)",
            "(z^2+1)/(z-2)",
            "exp(z^2)",
            "1/(exp(z)+1)",
            "z*exp(z)",
            "exp(2*z+1)",
            "z",
        ];
        for src in corpus {
            let e: Expr<f64> = parse(src).unwrap();
            assert_eq!(e.to_string(), src, "round trip of {src}");
        }
    }

    #[test]
    fn whitespace_is_ignored() {
        let e: Expr<f64> = parse(" exp( z ) + exp( 1i * z ) ").unwrap();
        assert_eq!(e.to_string(), "exp(z)+exp(1i*z)");
    }

    #[test]
    fn nested_operators_get_parentheses() {
        let e: Expr<f64> = parse("z-(z-1)").unwrap();
        assert_eq!(e.to_string(), "z-(z-1)");
        let e: Expr<f64> = parse("z/(z*z)").unwrap();
        assert_eq!(e.to_string(), "z/(z*z)");
        let e: Expr<f64> = parse("(z+1)^3").unwrap();
        assert_eq!(e.to_string(), "(z+1)^3");
        let e: Expr<f64> = parse("(1+2i)*z").unwrap();
        assert_eq!(e.to_string(), "(1+2i)*z");
    }
}
