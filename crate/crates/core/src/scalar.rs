//! Scalar abstraction and a wide-exponent complex number.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point type the library is generic over (`f32` or `f64`).
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal. Values outside the range of `Self` saturate
    /// the way `as` casts do.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(|| if x > 0.0 { Self::infinity() } else { Self::neg_infinity() })
    }

    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn half() -> Self {
        Self::one() / Self::two()
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for building a complex number from `f64` literals.
pub fn c<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub(crate) fn is_finite_complex<T: Scalar>(z: Complex<T>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn ln_1p_exp<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// A complex number stored as `mantissa * e^scale`.
///
/// The mantissa is kept with `max(|re|, |im|) == 1` (or is exactly zero), so
/// products and sums of values such as `e^800` stay representable. The point
/// at infinity is a separate state and only arises from a division by an
/// exact zero or from `exp` of an argument whose real part is itself
/// unrepresentable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WideComplex<T> {
    mant: Complex<T>,
    scale: T,
    infinite: bool,
}

impl<T: Scalar> WideComplex<T> {
    pub fn zero() -> Self {
        WideComplex { mant: Complex::new(T::zero(), T::zero()), scale: T::zero(), infinite: false }
    }

    pub fn one() -> Self {
        Self::from_complex(Complex::new(T::one(), T::zero()))
    }

    pub fn infinity() -> Self {
        WideComplex { mant: Complex::new(T::zero(), T::zero()), scale: T::zero(), infinite: true }
    }

    pub fn from_complex(z: Complex<T>) -> Self {
        if !is_finite_complex(z) {
            return Self::infinity();
        }
        WideComplex { mant: z, scale: T::zero(), infinite: false }.normalized()
    }

    /// `e^w` for a finite complex `w`; never overflows.
    pub fn exp_of(w: Complex<T>) -> Self {
        WideComplex { mant: Complex::new(w.im.cos(), w.im.sin()), scale: w.re, infinite: false }
            .normalized()
    }

    fn normalized(mut self) -> Self {
        if self.infinite {
            return self;
        }
        let m = self.mant.re.abs().max(self.mant.im.abs());
        if m == T::zero() {
            return Self::zero();
        }
        if !self.scale.is_finite() {
            return if self.scale > T::zero() { Self::infinity() } else { Self::zero() };
        }
        self.mant = self.mant.unscale(m);
        self.scale += m.ln();
        if !self.scale.is_finite() {
            return if self.scale > T::zero() { Self::infinity() } else { Self::zero() };
        }
        self
    }

    pub fn is_infinite(&self) -> bool {
        self.infinite
    }

    pub fn is_zero(&self) -> bool {
        !self.infinite && self.mant.re == T::zero() && self.mant.im == T::zero()
    }

    /// `ln|self|`; `-inf` for zero and `+inf` for infinity.
    pub fn ln_abs(&self) -> T {
        if self.infinite {
            T::infinity()
        } else if self.is_zero() {
            T::neg_infinity()
        } else {
            self.mant.norm().ln() + self.scale
        }
    }

    /// Converts back to an ordinary complex number; `None` when the magnitude
    /// does not fit in `T` (or the value is the point at infinity).
    pub fn to_complex(&self) -> Option<Complex<T>> {
        if self.infinite {
            return None;
        }
        if self.is_zero() {
            return Some(self.mant);
        }
        let f = self.scale.exp();
        let z = self.mant.scale(f);
        if is_finite_complex(z) {
            Some(z)
        } else {
            None
        }
    }

    /// Argument of the value (meaningless for zero or infinity).
    pub fn arg(&self) -> T {
        self.mant.arg()
    }

    pub fn mul(self, other: Self) -> Self {
        if self.infinite || other.infinite {
            return Self::infinity();
        }
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        WideComplex { mant: self.mant * other.mant, scale: self.scale + other.scale, infinite: false }
            .normalized()
    }

    /// Division; dividing a nonzero value by an exact zero gives infinity,
    /// and `0/0` gives `None`.
    pub fn div(self, other: Self) -> Option<Self> {
        match (self.infinite, other.infinite) {
            (true, true) => return None,
            (true, false) => return Some(Self::infinity()),
            (false, true) => return Some(Self::zero()),
            _ => {}
        }
        if other.is_zero() {
            return if self.is_zero() { None } else { Some(Self::infinity()) };
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        Some(
            WideComplex { mant: self.mant / other.mant, scale: self.scale - other.scale, infinite: false }
                .normalized(),
        )
    }

    /// Sum; `None` for `inf + inf` (indeterminate on the sphere).
    pub fn add(self, other: Self) -> Option<Self> {
        match (self.infinite, other.infinite) {
            (true, true) => return None,
            (true, false) | (false, true) => return Some(Self::infinity()),
            _ => {}
        }
        if self.is_zero() {
            return Some(other);
        }
        if other.is_zero() {
            return Some(self);
        }
        let (big, small) = if self.scale >= other.scale { (self, other) } else { (other, self) };
        let gap = small.scale - big.scale;
        // e^-80 is far below the relative precision of f64
        if gap < T::lit(-80.0) {
            return Some(big);
        }
        let mant = big.mant + small.mant.scale(gap.exp());
        Some(WideComplex { mant, scale: big.scale, infinite: false }.normalized())
    }

    pub fn neg(self) -> Self {
        WideComplex { mant: -self.mant, ..self }
    }

    pub fn sub(self, other: Self) -> Option<Self> {
        self.add(other.neg())
    }

    pub fn powi(self, n: u32) -> Self {
        if n == 0 {
            return Self::one();
        }
        let mut base = self;
        let mut acc = Self::one();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(base);
            }
        }
        acc
    }

    /// `e^self`. Returns `None` when the argument's imaginary part is too
    /// large to carry a phase, and infinity when its real part overflows
    /// upward.
    pub fn exp(self) -> Option<Self> {
        if self.infinite {
            return None;
        }
        match self.to_complex() {
            Some(w) => Some(Self::exp_of(w)),
            None => {
                if self.mant.im != T::zero() {
                    return None;
                }
                if self.mant.re > T::zero() {
                    Some(Self::infinity())
                } else {
                    Some(Self::zero())
                }
            }
        }
    }

    pub fn scale_by(self, k: T) -> Self {
        self.mul(Self::from_complex(Complex::new(k, T::zero())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_800_times_exp_minus_800_is_one() {
        let a = WideComplex::<f64>::exp_of(c(800.0, 0.0));
        let b = WideComplex::<f64>::exp_of(c(-800.0, 0.0));
        let p = a.mul(b).to_complex().unwrap();
        assert!((p - c(1.0, 0.0)).norm() < 1e-12);
        assert!(a.to_complex().is_none());
        assert!((a.ln_abs() - 800.0).abs() < 1e-12);
    }

    #[test]
    fn addition_aligns_scales() {
        let a = WideComplex::<f64>::from_complex(c(3.0, 4.0));
        let b = WideComplex::<f64>::from_complex(c(-1.0, 0.5));
        let s = a.add(b).unwrap().to_complex().unwrap();
        assert!((s - c(2.0, 4.5)).norm() < 1e-14);
        assert!(a.sub(a).unwrap().is_zero());
    }

    #[test]
    fn division_by_exact_zero() {
        let one = WideComplex::<f64>::one();
        assert!(one.div(WideComplex::zero()).unwrap().is_infinite());
        assert!(WideComplex::<f64>::zero().div(WideComplex::zero()).is_none());
        assert!(one.div(WideComplex::infinity()).unwrap().is_zero());
    }

    #[test]
    fn powers_match_complex_powi() {
        let z = c::<f64>(1.1, -0.7);
        let w = WideComplex::from_complex(z).powi(7).to_complex().unwrap();
        assert!((w - z.powi(7)).norm() < 1e-12 * z.norm().powi(7));
    }

    #[test]
    fn exp_of_huge_real_part() {
        let big = WideComplex::<f64>::exp_of(c(800.0, 0.0));
        assert!(big.exp().unwrap().is_infinite());
        assert!(big.neg().exp().unwrap().is_zero());
    }

    #[test]
    fn ln_1p_exp_is_stable() {
        assert!((ln_1p_exp(1000.0_f64) - 1000.0).abs() < 1e-12);
        assert!((ln_1p_exp(0.0_f64) - 2f64.ln()).abs() < 1e-15);
        assert!(ln_1p_exp(-1000.0_f64) >= 0.0);
    }
}
