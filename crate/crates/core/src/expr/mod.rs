//! A small language of complex functions: constants, `z`, the four
//! arithmetic operations, non-negative integer powers and `exp`.
//!
//! ```
//! use brody_core::expr::Expr;
//! let f: Expr<f64> = "z*exp(z)+z".parse().unwrap();
//! assert_eq!(f.to_string(), "z*exp(z)+z");
//! ```

mod display;
mod eval;
mod parse;

use std::str::FromStr;

use num_complex::Complex;

use crate::algebra::{Polynomial, RationalFunction};
use crate::scalar::Scalar;

pub use eval::{EvalFlags, Evaluation};
pub use parse::{parse, SyntaxError};

/// Expression tree. Build through [`parse`] or the folding constructors
/// (`Expr::add`, `Expr::mul`, ...) to keep literal arithmetic folded.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T> {
    Const(Complex<T>),
    Z,
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Div(Box<Expr<T>>, Box<Expr<T>>),
    Neg(Box<Expr<T>>),
    Pow(Box<Expr<T>>, u32),
    Exp(Box<Expr<T>>),
}

impl<T: Scalar> Expr<T> {
    pub fn constant(c: Complex<T>) -> Self {
        Expr::Const(c)
    }

    pub fn real(x: f64) -> Self {
        Expr::Const(Complex::new(T::lit(x), T::zero()))
    }

    pub fn as_const(&self) -> Option<Complex<T>> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn is_literal(&self, re: f64) -> bool {
        matches!(self, Expr::Const(c) if c.re == T::lit(re) && c.im == T::zero())
    }

    // Folding constructors: literal-with-literal arithmetic is evaluated.

    pub fn add(a: Self, b: Self) -> Self {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(*x + *y),
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Self, b: Self) -> Self {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(*x - *y),
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Self, b: Self) -> Self {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(*x * *y),
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Self, b: Self) -> Self {
        match (&a, &b) {
            (Expr::Const(x), Expr::Const(y)) if !(y.re == T::zero() && y.im == T::zero()) => {
                Expr::Const(*x / *y)
            }
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Self) -> Self {
        match a {
            Expr::Const(x) => Expr::Const(-x),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn pow(a: Self, n: u32) -> Self {
        match a {
            Expr::Const(x) => Expr::Const(x.powu(n)),
            other => Expr::Pow(Box::new(other), n),
        }
    }

    pub fn exp(a: Self) -> Self {
        Expr::Exp(Box::new(a))
    }

    // Identity-aware variants used by the differentiator so derivatives do not
    // accumulate `0*x` and `1*x` debris.

    fn add_s(a: Self, b: Self) -> Self {
        if a.is_literal(0.0) {
            b
        } else if b.is_literal(0.0) {
            a
        } else {
            Self::add(a, b)
        }
    }

    fn sub_s(a: Self, b: Self) -> Self {
        if b.is_literal(0.0) {
            a
        } else if a.is_literal(0.0) {
            Self::neg(b)
        } else {
            Self::sub(a, b)
        }
    }

    fn mul_s(a: Self, b: Self) -> Self {
        if a.is_literal(0.0) || b.is_literal(0.0) {
            Self::real(0.0)
        } else if a.is_literal(1.0) {
            b
        } else if b.is_literal(1.0) {
            a
        } else {
            Self::mul(a, b)
        }
    }

    /// Symbolic derivative with respect to `z`.
    pub fn differentiate(&self) -> Self {
        match self {
            Expr::Const(_) => Self::real(0.0),
            Expr::Z => Self::real(1.0),
            Expr::Add(a, b) => Self::add_s(a.differentiate(), b.differentiate()),
            Expr::Sub(a, b) => Self::sub_s(a.differentiate(), b.differentiate()),
            Expr::Mul(a, b) => Self::add_s(
                Self::mul_s(a.differentiate(), (**b).clone()),
                Self::mul_s((**a).clone(), b.differentiate()),
            ),
            Expr::Div(a, b) => {
                let da = a.differentiate();
                let db = b.differentiate();
                let top = Self::sub_s(Self::mul_s(da, (**b).clone()), Self::mul_s((**a).clone(), db));
                if top.is_literal(0.0) {
                    top
                } else {
                    Self::div(top, Self::pow((**b).clone(), 2))
                }
            }
            Expr::Neg(a) => {
                let d = a.differentiate();
                if d.is_literal(0.0) {
                    d
                } else {
                    Self::neg(d)
                }
            }
            Expr::Pow(a, n) => match n {
                0 => Self::real(0.0),
                1 => a.differentiate(),
                _ => {
                    let base = if *n == 2 { (**a).clone() } else { Self::pow((**a).clone(), n - 1) };
                    Self::mul_s(Self::mul_s(Self::real(f64::from(*n)), base), a.differentiate())
                }
            },
            Expr::Exp(a) => Self::mul_s(self.clone(), a.differentiate()),
        }
    }

    /// Polynomial in `z` with the given ascending coefficients, written as a
    /// sum of `c*z^k` terms with zero coefficients dropped.
    pub fn from_polynomial(p: &Polynomial<T>) -> Self {
        let mut out: Option<Self> = None;
        for (k, &c) in p.coeffs().iter().enumerate() {
            if c.re == T::zero() && c.im == T::zero() {
                continue;
            }
            let power = match k {
                0 => None,
                1 => Some(Expr::Z),
                _ => Some(Self::pow(Expr::Z, k as u32)),
            };
            let term = match power {
                None => Expr::Const(c),
                Some(m) if c == Complex::new(T::one(), T::zero()) => m,
                Some(m) => Self::mul(Expr::Const(c), m),
            };
            out = Some(match out {
                None => term,
                Some(acc) => Self::add_signed(acc, term),
            });
        }
        out.unwrap_or_else(|| Self::real(0.0))
    }

    pub fn from_rational(r: &RationalFunction<T>) -> Self {
        let num = Self::from_polynomial(r.num());
        if r.den().degree() == Some(0) {
            return num;
        }
        Self::div(num, Self::from_polynomial(r.den()))
    }

    /// `R(z) exp(z) + Q(z)`.
    pub fn exp_rational(r: &RationalFunction<T>, q: &RationalFunction<T>) -> Self {
        let lead = if r.is_zero() {
            Self::real(0.0)
        } else {
            Self::mul_s(Self::from_rational(r), Self::exp(Expr::Z))
        };
        if q.is_zero() {
            lead
        } else {
            Self::add_signed(lead, Self::from_rational(q))
        }
    }

    /// `a + b`, written as `a - (-b)` when `b` starts with a negative real
    /// coefficient.
    fn add_signed(a: Self, b: Self) -> Self {
        if a.is_literal(0.0) {
            return b;
        }
        match b.without_negative_lead() {
            Some(nb) => Self::sub(a, nb),
            None => Self::add(a, b),
        }
    }

    fn without_negative_lead(&self) -> Option<Self> {
        match self {
            Expr::Const(c) if c.im == T::zero() && c.re < T::zero() => Some(Expr::Const(-*c)),
            Expr::Mul(x, y) => x.without_negative_lead().map(|nx| Self::mul_s(nx, (**y).clone())),
            Expr::Div(x, y) => x.without_negative_lead().map(|nx| Self::div(nx, (**y).clone())),
            _ => None,
        }
    }

    /// `exp(z) + exp(lambda z)`.
    pub fn two_exponentials(lambda: Complex<T>) -> Self {
        Self::add(Self::exp(Expr::Z), Self::exp(Self::mul(Expr::Const(lambda), Expr::Z)))
    }

    /// `f(alpha z + beta)`.
    pub fn compose_affine(&self, alpha: Complex<T>, beta: Complex<T>) -> Self {
        let inner = Self::add(Self::mul(Expr::Const(alpha), Expr::Z), Expr::Const(beta));
        self.substitute(&inner)
    }

    /// Replaces every `z` by `inner`.
    pub fn substitute(&self, inner: &Self) -> Self {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Z => inner.clone(),
            Expr::Add(a, b) => Self::add(a.substitute(inner), b.substitute(inner)),
            Expr::Sub(a, b) => Self::sub(a.substitute(inner), b.substitute(inner)),
            Expr::Mul(a, b) => Self::mul(a.substitute(inner), b.substitute(inner)),
            Expr::Div(a, b) => Self::div(a.substitute(inner), b.substitute(inner)),
            Expr::Neg(a) => Self::neg(a.substitute(inner)),
            Expr::Pow(a, n) => Self::pow(a.substitute(inner), *n),
            Expr::Exp(a) => Self::exp(a.substitute(inner)),
        }
    }

    pub fn reciprocal(&self) -> Self {
        Self::div(Self::real(1.0), self.clone())
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Z => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.depth().max(b.depth())
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Exp(a) => 1 + a.depth(),
        }
    }
}

impl<T: Scalar> FromStr for Expr<T> {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    type E = Expr<f64>;

    #[test]
    fn derivative_of_exp_is_exp() {
        let e: E = "exp(z)".parse().unwrap();
        assert_eq!(e.differentiate(), e);
    }

    #[test]
    fn product_rule_shape() {
        let e: E = "z*exp(z)".parse().unwrap();
        let expected: E = "exp(z)+z*exp(z)".parse().unwrap();
        assert_eq!(e.differentiate(), expected);
    }

    #[test]
    fn constants_differentiate_to_zero() {
        let e: E = "3+2i".parse().unwrap();
        assert_eq!(e.differentiate(), E::real(0.0));
        let q: E = "1/(2+1i)".parse().unwrap();
        assert_eq!(q.differentiate(), E::real(0.0));
    }

    #[test]
    fn rational_embedding_evaluates_like_algebra() {
        let r = RationalFunction::new(Polynomial::from_real(&[1.0, 0.0, 1.0]), Polynomial::from_real(&[-1.0, 1.0]))
            .unwrap();
        let e = E::from_rational(&r);
        assert_eq!(e.to_string(), "(1+z^2)/(-1+z)");
        let w = c(0.3, 1.7);
        let a = e.eval(w).value.finite().unwrap();
        let b = r.eval(w).unwrap().finite().unwrap();
        assert!((a - b).norm() < 1e-14);
    }

    #[test]
    fn family_builders() {
        let f = E::two_exponentials(c(0.0, 1.0));
        assert_eq!(f.to_string(), "exp(z)+exp(1i*z)");
        let r = RationalFunction::constant(c(1.0, 0.0));
        let q = RationalFunction::polynomial(Polynomial::z());
        assert_eq!(E::exp_rational(&r, &q).to_string(), "exp(z)+z");
    }

    #[test]
    fn affine_substitution() {
        let f: E = "exp(z)".parse().unwrap();
        let g = f.compose_affine(c(2.0, 0.0), c(1.0, 0.0));
        assert_eq!(g.to_string(), "exp(2*z+1)");
    }
}
