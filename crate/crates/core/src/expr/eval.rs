//! Evaluation on the Riemann sphere and in wide-exponent arithmetic.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::Expr;
use crate::algebra::ExtendedComplex;
use crate::scalar::{is_finite_complex, Scalar, WideComplex};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalFlags {
    /// Some `exp` argument had real part beyond the overflow threshold, or a
    /// finite intermediate left the range of the scalar type.
    pub overflow: bool,
    /// An indeterminate form (`0/0`, `inf*0`, `inf-inf`, `exp(inf)`) arose.
    pub indeterminate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation<T> {
    pub value: ExtendedComplex<T>,
    pub flags: EvalFlags,
}

/// Real part above which `exp` is reported as overflowing.
pub(crate) fn exp_threshold<T: Scalar>() -> T {
    let natural = T::max_value().ln() - T::one();
    natural.min(T::lit(700.0))
}

type Ext<T> = ExtendedComplex<T>;

fn finite_or_overflow<T: Scalar>(z: Complex<T>, flags: &mut EvalFlags) -> Ext<T> {
    if is_finite_complex(z) {
        Ext::Finite(z)
    } else {
        flags.overflow = true;
        Ext::Infinity
    }
}

fn is_zero<T: Scalar>(z: Complex<T>) -> bool {
    z.re == T::zero() && z.im == T::zero()
}

fn indeterminate<T>(flags: &mut EvalFlags) -> Ext<T> {
    flags.indeterminate = true;
    Ext::Infinity
}

impl<T: Scalar> Expr<T> {
    /// Evaluates at `z`. Division of a nonzero value by an exact zero gives
    /// the point at infinity; `exp` with real part above 700 (or the scalar's
    /// own limit) gives infinity and sets the overflow flag.
    pub fn eval(&self, z: Complex<T>) -> Evaluation<T> {
        let mut flags = EvalFlags::default();
        let value = self.eval_ext(z, &mut flags);
        Evaluation { value, flags }
    }

    fn eval_ext(&self, z: Complex<T>, flags: &mut EvalFlags) -> Ext<T> {
        use ExtendedComplex::{Finite, Infinity};
        match self {
            Expr::Const(c) => Finite(*c),
            Expr::Z => Finite(z),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let x = a.eval_ext(z, flags);
                let y = b.eval_ext(z, flags);
                match (x, y) {
                    (Finite(x), Finite(y)) => {
                        let s = if matches!(self, Expr::Add(..)) { x + y } else { x - y };
                        finite_or_overflow(s, flags)
                    }
                    (Infinity, Infinity) => indeterminate(flags),
                    _ => Infinity,
                }
            }
            Expr::Mul(a, b) => match (a.eval_ext(z, flags), b.eval_ext(z, flags)) {
                (Finite(x), Finite(y)) => finite_or_overflow(x * y, flags),
                (Infinity, Finite(w)) | (Finite(w), Infinity) if is_zero(w) => indeterminate(flags),
                _ => Infinity,
            },
            Expr::Div(a, b) => match (a.eval_ext(z, flags), b.eval_ext(z, flags)) {
                (Finite(x), Finite(y)) => {
                    if is_zero(y) {
                        if is_zero(x) {
                            indeterminate(flags)
                        } else {
                            Infinity
                        }
                    } else {
                        finite_or_overflow(x / y, flags)
                    }
                }
                (Finite(_), Infinity) => Finite(Complex::new(T::zero(), T::zero())),
                (Infinity, Finite(_)) => Infinity,
                (Infinity, Infinity) => indeterminate(flags),
            },
            Expr::Neg(a) => match a.eval_ext(z, flags) {
                Finite(x) => Finite(-x),
                Infinity => Infinity,
            },
            Expr::Pow(a, n) => {
                if *n == 0 {
                    // evaluate for flags only; x^0 = 1 everywhere
                    let _ = a.eval_ext(z, flags);
                    return Finite(Complex::new(T::one(), T::zero()));
                }
                match a.eval_ext(z, flags) {
                    Finite(x) => finite_or_overflow(x.powu(*n), flags),
                    Infinity => Infinity,
                }
            }
            Expr::Exp(a) => match a.eval_ext(z, flags) {
                Finite(w) => {
                    if w.re > exp_threshold::<T>() {
                        flags.overflow = true;
                        Infinity
                    } else {
                        finite_or_overflow(w.exp(), flags)
                    }
                }
                Infinity => indeterminate(flags),
            },
        }
    }

    /// Evaluates in `mantissa * e^scale` form so that intermediate values like
    /// `e^900` do not overflow. `None` for indeterminate forms.
    pub fn eval_wide(&self, z: Complex<T>) -> Option<WideComplex<T>> {
        Some(match self {
            Expr::Const(c) => WideComplex::from_complex(*c),
            Expr::Z => WideComplex::from_complex(z),
            Expr::Add(a, b) => a.eval_wide(z)?.add(b.eval_wide(z)?)?,
            Expr::Sub(a, b) => a.eval_wide(z)?.sub(b.eval_wide(z)?)?,
            Expr::Mul(a, b) => {
                let x = a.eval_wide(z)?;
                let y = b.eval_wide(z)?;
                if (x.is_infinite() && y.is_zero()) || (x.is_zero() && y.is_infinite()) {
                    return None;
                }
                x.mul(y)
            }
            Expr::Div(a, b) => a.eval_wide(z)?.div(b.eval_wide(z)?)?,
            Expr::Neg(a) => a.eval_wide(z)?.neg(),
            Expr::Pow(a, n) => a.eval_wide(z)?.powi(*n),
            Expr::Exp(a) => a.eval_wide(z)?.exp()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    type E = Expr<f64>;

    fn at(src: &str, z: Complex<f64>) -> Evaluation<f64> {
        src.parse::<E>().unwrap().eval(z)
    }

    #[test]
    fn basic_values() {
        assert_eq!(at("exp(z)", c(0.0, 0.0)).value, Ext::Finite(c(1.0, 0.0)));
        assert_eq!(at("z/(0*z+1)", c(3.0, 4.0)).value, Ext::Finite(c(3.0, 4.0)));
        assert_eq!(at("exp(z)+exp(1i*z)", c(0.0, 0.0)).value, Ext::Finite(c(2.0, 0.0)));
    }

    #[test]
    fn division_by_exact_zero_is_infinity() {
        let e = at("1/z", c(0.0, 0.0));
        assert_eq!(e.value, Ext::Infinity);
        assert_eq!(e.flags, EvalFlags::default());
        assert!(at("z/z", c(0.0, 0.0)).flags.indeterminate);
    }

    #[test]
    fn exp_overflow_is_flagged_underflow_is_not() {
        let e = at("exp(z)", c(701.0, 0.0));
        assert_eq!(e.value, Ext::Infinity);
        assert!(e.flags.overflow);
        let e = at("exp(z)", c(-701.0, 0.0));
        assert!(e.value.finite().unwrap().norm() < 1e-300);
        assert!(!e.flags.overflow);
        let e = at("1/exp(z)", c(800.0, 0.0));
        assert_eq!(e.value, Ext::Finite(c(0.0, 0.0)));
        assert!(e.flags.overflow);
    }

    #[test]
    fn infinity_arithmetic() {
        assert!(at("exp(z)-exp(z)", c(800.0, 0.0)).flags.indeterminate);
        assert_eq!(at("1/z+1", c(0.0, 0.0)).value, Ext::Infinity);
        assert!(at("exp(1/z)", c(0.0, 0.0)).flags.indeterminate);
    }

    #[test]
    fn wide_evaluation_survives_large_exponents() {
        let e: E = "exp(z)/(exp(z)+1)".parse().unwrap();
        let w = e.eval_wide(c(900.0, 0.3)).unwrap().to_complex().unwrap();
        assert!((w - c(1.0, 0.0)).norm() < 1e-12);
        let e: E = "exp(2*z)*exp(-2*z)".parse().unwrap();
        let w = e.eval_wide(c(600.0, 1.0)).unwrap().to_complex().unwrap();
        assert!((w - c(1.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn f32_threshold_is_below_range() {
        let t = exp_threshold::<f32>();
        assert!(t < 89.0 && t > 80.0);
        let e: Expr<f32> = "exp(z)".parse().unwrap();
        assert!(e.eval(c(88.5, 0.0)).flags.overflow);
    }
}
