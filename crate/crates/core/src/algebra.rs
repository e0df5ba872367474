//! Complex polynomials and rational functions: evaluation on the Riemann
//! sphere, derivatives, logarithmic derivatives and behaviour at infinity.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::scalar::{is_finite_complex, Scalar};

/// Largest polynomial degree accepted from callers.
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("operation undefined for the zero function")]
    ZeroFunction,
    #[error("numerator and denominator vanish identically at the evaluation point")]
    IndeterminateAtPoint,
    #[error("degree {0} exceeds the cap of {MAX_DEGREE}")]
    DegreeTooLarge(usize),
    #[error("non-finite coefficient")]
    NonFiniteCoefficient,
}

impl AlgebraError {
    pub fn name(&self) -> &'static str {
        match self {
            AlgebraError::ZeroDenominator => "ZeroDenominator",
            AlgebraError::ZeroFunction => "ZeroFunction",
            AlgebraError::IndeterminateAtPoint => "IndeterminateAtPoint",
            AlgebraError::DegreeTooLarge(_) => "DegreeTooLarge",
            AlgebraError::NonFiniteCoefficient => "NonFiniteCoefficient",
        }
    }
}

/// A point of the Riemann sphere: a finite complex number or `Infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtendedComplex<T> {
    Finite(Complex<T>),
    Infinity,
}

impl<T: Scalar> ExtendedComplex<T> {
    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedComplex::Infinity)
    }

    pub fn finite(&self) -> Option<Complex<T>> {
        match self {
            ExtendedComplex::Finite(z) => Some(*z),
            ExtendedComplex::Infinity => None,
        }
    }

    /// Wraps `z`, mapping non-finite components to `Infinity`.
    pub fn from_complex(z: Complex<T>) -> Self {
        if is_finite_complex(z) {
            ExtendedComplex::Finite(z)
        } else {
            ExtendedComplex::Infinity
        }
    }
}

impl<T: Scalar> fmt::Display for ExtendedComplex<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedComplex::Finite(z) => write!(f, "{}", z),
            ExtendedComplex::Infinity => write!(f, "Infinity"),
        }
    }
}

/// Dense polynomial with ascending complex coefficients; trailing zero
/// coefficients are always stripped, so the zero polynomial is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> Polynomial<T> {
    /// Builds a polynomial from caller data, enforcing the degree cap.
    pub fn new(coeffs: Vec<Complex<T>>) -> Result<Self, AlgebraError> {
        if coeffs.iter().any(|c| !is_finite_complex(*c)) {
            return Err(AlgebraError::NonFiniteCoefficient);
        }
        let p = Self::from_coeffs(coeffs);
        match p.degree() {
            Some(d) if d > MAX_DEGREE => Err(AlgebraError::DegreeTooLarge(d)),
            _ => Ok(p),
        }
    }

    /// Builds from real coefficients (ascending). Panics past the degree cap.
    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex::new(T::lit(c), T::zero())).collect())
            .expect("real coefficients within the degree cap")
    }

    /// Unchecked construction for results of internal arithmetic.
    pub(crate) fn from_coeffs(mut coeffs: Vec<Complex<T>>) -> Self {
        while coeffs.last().is_some_and(|c| c.re == T::zero() && c.im == T::zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex::new(T::one(), T::zero()))
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Self::from_coeffs(vec![Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero())])
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<Complex<T>> {
        self.coeffs.last().copied()
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.coeffs.iter().rev().fold(Complex::new(T::zero(), T::zero()), |acc, &c| acc * z + c)
    }

    /// `sum |c_k| |z|^k`, the scale against which a computed value is compared
    /// when deciding whether it vanishes.
    fn magnitude_at(&self, z: Complex<T>) -> T {
        let r = z.norm();
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| acc * r + c.norm())
    }

    fn vanishes_at(&self, z: Complex<T>) -> bool {
        if self.is_zero() {
            return true;
        }
        let tol = T::lit(64.0) * T::epsilon() * self.magnitude_at(z);
        self.eval(z).norm() <= tol
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * T::from_usize(k).expect("small integer"))
                .collect(),
        )
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|&c| c * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex::new(T::zero(), T::zero());
        Self::from_coeffs(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(zero) + other.coeffs.get(i).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex::new(-T::one(), T::zero())))
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    /// Synthetic division by `(z - root)`, discarding the remainder.
    pub fn deflate(&self, root: Complex<T>) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::zero();
        }
        let mut quotient = vec![Complex::new(T::zero(), T::zero()); n - 1];
        let mut carry = Complex::new(T::zero(), T::zero());
        for k in (1..n).rev() {
            carry = carry * root + self.coeffs[k];
            quotient[k - 1] = carry;
        }
        Self::from_coeffs(quotient)
    }

    /// `z^d p(1/z)` with `d = deg p`.
    pub fn reversed(&self) -> Self {
        Self::from_coeffs(self.coeffs.iter().rev().copied().collect())
    }
}

/// Quotient of two polynomials with a monic denominator. No gcd reduction is
/// performed; common roots are cancelled at evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunction<T> {
    num: Polynomial<T>,
    den: Polynomial<T>,
}

impl<T: Scalar> RationalFunction<T> {
    pub fn new(num: Polynomial<T>, den: Polynomial<T>) -> Result<Self, AlgebraError> {
        let lead = den.leading().ok_or(AlgebraError::ZeroDenominator)?;
        let inv = Complex::new(T::one(), T::zero()) / lead;
        Ok(RationalFunction { num: num.scale(inv), den: den.scale(inv) })
    }

    pub fn polynomial(p: Polynomial<T>) -> Self {
        RationalFunction { num: p, den: Polynomial::one() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::polynomial(Polynomial::constant(c))
    }

    pub fn zero() -> Self {
        Self::polynomial(Polynomial::zero())
    }

    pub fn num(&self) -> &Polynomial<T> {
        &self.num
    }

    pub fn den(&self) -> &Polynomial<T> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the function is constant as a map (both sides of degree 0 or
    /// a zero numerator). Higher-degree representations of constants, e.g.
    /// `(2z+2)/(z+1)`, are not detected.
    pub fn is_constant(&self) -> bool {
        self.num.degree().unwrap_or(0) == 0 && self.den.degree() == Some(0)
    }

    /// Value at `z` on the Riemann sphere. When numerator and denominator both
    /// vanish, the common linear factor is removed by synthetic division and
    /// the test repeats.
    pub fn eval(&self, z: Complex<T>) -> Result<ExtendedComplex<T>, AlgebraError> {
        if self.num.is_zero() {
            return Ok(ExtendedComplex::Finite(Complex::new(T::zero(), T::zero())));
        }
        let mut num = self.num.clone();
        let mut den = self.den.clone();
        let rounds = den.degree().unwrap_or(0) + 1;
        for _ in 0..rounds {
            if !den.vanishes_at(z) {
                return Ok(ExtendedComplex::from_complex(num.eval(z) / den.eval(z)));
            }
            if !num.vanishes_at(z) {
                return Ok(ExtendedComplex::Infinity);
            }
            num = num.deflate(z);
            den = den.deflate(z);
            if num.is_zero() || den.is_zero() {
                break;
            }
        }
        Err(AlgebraError::IndeterminateAtPoint)
    }

    pub fn value_at_infinity(&self) -> ExtendedComplex<T> {
        let zero = Complex::new(T::zero(), T::zero());
        let Some(dn) = self.num.degree() else {
            return ExtendedComplex::Finite(zero);
        };
        let dd = self.den.degree().expect("denominator is nonzero");
        match dn.cmp(&dd) {
            std::cmp::Ordering::Less => ExtendedComplex::Finite(zero),
            std::cmp::Ordering::Greater => ExtendedComplex::Infinity,
            std::cmp::Ordering::Equal => {
                ExtendedComplex::Finite(self.num.leading().unwrap() / self.den.leading().unwrap())
            }
        }
    }

    /// `R'` by the quotient rule, as `(P'Q - PQ')/Q^2`.
    pub fn derivative(&self) -> Self {
        let top = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        RationalFunction::new(top, self.den.mul(&self.den)).expect("square of a nonzero polynomial")
    }

    /// `R'/R = (P'Q - PQ')/(PQ)`.
    pub fn log_derivative(&self) -> Result<Self, AlgebraError> {
        if self.num.is_zero() {
            return Err(AlgebraError::ZeroFunction);
        }
        let top = self.num.derivative().mul(&self.den).sub(&self.num.mul(&self.den.derivative()));
        RationalFunction::new(top, self.num.mul(&self.den))
    }

    /// `R(1/u)` as a rational function of `u`.
    pub fn at_reciprocal(&self) -> Self {
        let dn = self.num.degree().unwrap_or(0);
        let dd = self.den.degree().unwrap_or(0);
        let mut num = self.num.reversed();
        let mut den = self.den.reversed();
        // num(1/u)/den(1/u) = u^(dd-dn) rev(num)/rev(den)
        if dd >= dn {
            num = num.mul(&monomial(dd - dn));
        } else {
            den = den.mul(&monomial(dn - dd));
        }
        RationalFunction::new(num, den).expect("reversed denominator is nonzero")
    }

    /// Spherical stretch `|R'(w)| (1+|w|^2) / (1+|R(w)|^2)` computed from
    /// `N, D, N', D'` directly, so it is finite at poles of `R`.
    pub fn spherical_stretch(&self, w: Complex<T>) -> T {
        let n = self.num.eval(w);
        let d = self.den.eval(w);
        let dn = self.num.derivative().eval(w);
        let dd = self.den.derivative().eval(w);
        let top = (dn * d - n * dd).norm();
        let bottom = n.norm_sqr() + d.norm_sqr();
        top * (T::one() + w.norm_sqr()) / bottom
    }
}

fn monomial<T: Scalar>(k: usize) -> Polynomial<T> {
    let mut c = vec![Complex::new(T::zero(), T::zero()); k + 1];
    c[k] = Complex::new(T::one(), T::zero());
    Polynomial::from_coeffs(c)
}

#[derive(Serialize, Deserialize)]
struct RationalWire<T> {
    num: Vec<[T; 2]>,
    den: Vec<[T; 2]>,
}

fn to_wire<T: Scalar>(p: &Polynomial<T>) -> Vec<[T; 2]> {
    p.coeffs.iter().map(|c| [c.re, c.im]).collect()
}

impl<T: Scalar> Serialize for RationalFunction<T> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RationalWire { num: to_wire(&self.num), den: to_wire(&self.den) }.serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for RationalFunction<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = RationalWire::<T>::deserialize(d)?;
        let poly = |v: Vec<[T; 2]>| {
            Polynomial::new(v.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
                .map_err(serde::de::Error::custom)
        };
        RationalFunction::new(poly(wire.num)?, poly(wire.den)?).map_err(serde::de::Error::custom)
    }
}
