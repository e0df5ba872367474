//! Proximity, counting and characteristic functions of entire functions
//! with `f(0) != 0`, and a log-log order estimate.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divisors::Divisor;
use crate::scalar::Scalar;
use crate::spherical::Analytic;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NevanlinnaError {
    #[error("f(0) = 0")]
    ZeroAtOrigin,
    #[error("the circle |z| = {r} passes through a zero of f")]
    ZeroOnCircle { r: f64 },
    #[error("f does not vanish at divisor point {re}{im:+}i (|f| = {modulus:e})")]
    DivisorMismatch { re: f64, im: f64, modulus: f64 },
    #[error("need at least {needed} samples with T > 0, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl NevanlinnaError {
    pub fn name(&self) -> &'static str {
        match self {
            NevanlinnaError::ZeroAtOrigin => "ZeroAtOrigin",
            NevanlinnaError::ZeroOnCircle { .. } => "ZeroOnCircle",
            NevanlinnaError::DivisorMismatch { .. } => "DivisorMismatch",
            NevanlinnaError::InsufficientSamples { .. } => "InsufficientSamples",
            NevanlinnaError::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

/// Whether the proximity integral is divided by `2 pi`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `m(r) = (1/2pi) int log+ 1/|f(re^it)| dt`.
    #[default]
    Standard,
    /// The integral without the `1/2pi` factor.
    Unnormalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NevanlinnaSample<T> {
    pub r: T,
    pub m: T,
    #[serde(rename = "N")]
    pub n: T,
    #[serde(rename = "T")]
    pub t: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NevanlinnaReport<T> {
    pub samples: Vec<NevanlinnaSample<T>>,
    pub normalization: Normalization,
    /// `T` is nondecreasing across the samples (up to rounding).
    pub monotone: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct OrderEstimate<T> {
    pub slope: T,
    pub r_range: (T, T),
    /// Root-mean-square residual of the fit.
    pub residual: T,
}

/// Smallest accepted quadrature size.
pub const MIN_QUAD_POINTS: usize = 64;
/// Bisection depth for intervals where `log+ 1/|f|` jumps by more than 1.
pub const REFINE_LEVELS: u32 = 2;

/// Below this `ln|f|` a sample is treated as a zero of `f`.
fn ln_floor<T: Scalar>() -> T {
    T::lit(1e-300).ln().max(T::min_positive_value().ln())
}

fn log_plus_inv<T: Scalar, F: Analytic<T> + ?Sized>(f: &F, z: Complex<T>, r: T) -> Result<T, NevanlinnaError> {
    let ln = f.jet(z).map(|j| j.value.ln_abs()).unwrap_or(T::nan());
    if ln.is_nan() || ln < ln_floor() {
        return Err(NevanlinnaError::ZeroOnCircle { r: r.to_f64().unwrap_or(f64::NAN) });
    }
    Ok((-ln).max(T::zero()))
}

fn refine<T: Scalar, F: Analytic<T> + ?Sized>(
    f: &F,
    r: T,
    (ta, va): (T, T),
    (tb, vb): (T, T),
    level: u32,
) -> Result<T, NevanlinnaError> {
    if level == REFINE_LEVELS || (va - vb).abs() <= T::one() {
        return Ok((tb - ta) * (va + vb) * T::half());
    }
    let tm = (ta + tb) * T::half();
    let vm = log_plus_inv(f, Complex::from_polar(r, tm), r)?;
    Ok(refine(f, r, (ta, va), (tm, vm), level + 1)? + refine(f, r, (tm, vm), (tb, vb), level + 1)?)
}

/// `m(r)`, the circle integral of `log+ 1/|f|` by the trapezoid rule on
/// `quad_points` equally spaced angles, bisecting intervals (at most twice)
/// where neighbouring samples differ by more than 1.
pub fn proximity<T: Scalar, F: Analytic<T> + ?Sized>(
    f: &F,
    r: T,
    quad_points: usize,
    normalization: Normalization,
) -> Result<T, NevanlinnaError> {
    if quad_points < MIN_QUAD_POINTS {
        return Err(NevanlinnaError::InvalidArgument(format!("quad_points must be at least {MIN_QUAD_POINTS}")));
    }
    if !(r > T::zero()) || !r.is_finite() {
        return Err(NevanlinnaError::InvalidArgument("radius must be positive and finite".into()));
    }
    let origin = f.jet(Complex::new(T::zero(), T::zero())).map(|j| j.value.ln_abs());
    if origin.is_none_or(|ln| ln < ln_floor()) {
        return Err(NevanlinnaError::ZeroAtOrigin);
    }
    let n = T::from_usize(quad_points).expect("quadrature size fits");
    let theta = |j: usize| T::TAU() * T::from_usize(j).expect("index fits") / n;
    let values: Vec<T> = (0..quad_points)
        .into_par_iter()
        .map(|j| log_plus_inv(f, Complex::from_polar(r, theta(j)), r))
        .collect::<Result<_, _>>()?;
    let mut sum = T::zero();
    for j in 0..quad_points {
        let next = (j + 1) % quad_points;
        sum += refine(f, r, (theta(j), values[j]), (theta(j) + T::TAU() / n, values[next]), 0)?;
    }
    Ok(match normalization {
        Normalization::Standard => sum / T::TAU(),
        Normalization::Unnormalized => sum,
    })
}

/// `N(r)` for the zero divisor `d`.
pub fn counting<T: Scalar>(d: &Divisor<T>, r: T) -> T {
    d.counting_n(r)
}

/// `T(r) = m(r) + N(r)` at each radius. `d` must be the zero divisor of `f`
/// inside the largest radius; this is checked by evaluating `f` at each
/// support point there. Radii closer than `1e-6` to the modulus of a zero are
/// rejected, since the trapezoid rule is unreliable on such circles.
pub fn characteristic<T: Scalar, F: Analytic<T> + ?Sized>(
    f: &F,
    d: &Divisor<T>,
    radii: &[T],
    quad_points: usize,
    normalization: Normalization,
) -> Result<NevanlinnaReport<T>, NevanlinnaError> {
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(NevanlinnaError::InvalidArgument("radii must be strictly increasing".into()));
    }
    let rmax = radii.last().copied().unwrap_or(T::zero());
    let tol = T::lit(1e-6);
    for p in d.points().iter().take_while(|p| p.a.norm() < rmax) {
        let ln = f.jet(p.a).map(|j| j.value.ln_abs()).unwrap_or(T::infinity());
        if ln > (tol * (T::one() + p.a.norm())).ln() {
            return Err(NevanlinnaError::DivisorMismatch {
                re: p.a.re.to_f64().unwrap_or(f64::NAN),
                im: p.a.im.to_f64().unwrap_or(f64::NAN),
                modulus: ln.exp().to_f64().unwrap_or(f64::INFINITY),
            });
        }
    }
    let mut samples = Vec::with_capacity(radii.len());
    for &r in radii {
        if d.points().iter().any(|p| (p.a.norm() - r).abs() < tol) {
            return Err(NevanlinnaError::ZeroOnCircle { r: r.to_f64().unwrap_or(f64::NAN) });
        }
        let m = proximity(f, r, quad_points, normalization)?;
        let n = counting(d, r);
        samples.push(NevanlinnaSample { r, m, n, t: m + n });
    }
    let slack = T::lit(1e-9);
    let monotone = samples.windows(2).all(|w| w[1].t >= w[0].t - slack * (T::one() + w[0].t.abs()));
    Ok(NevanlinnaReport { samples, normalization, monotone })
}

/// Minimum number of samples with `T > 0` for [`order_estimate`].
pub const MIN_ORDER_SAMPLES: usize = 8;

/// Least-squares slope of `log T` against `log r` over the upper half of the
/// samples with `T > 0`.
pub fn order_estimate<T: Scalar>(report: &NevanlinnaReport<T>) -> Result<OrderEstimate<T>, NevanlinnaError> {
    let positive: Vec<(T, T)> =
        report.samples.iter().filter(|s| s.t > T::zero()).map(|s| (s.r.ln(), s.t.ln())).collect();
    if positive.len() < MIN_ORDER_SAMPLES {
        return Err(NevanlinnaError::InsufficientSamples { needed: MIN_ORDER_SAMPLES, got: positive.len() });
    }
    let top = &positive[positive.len() / 2..];
    let n = T::from_usize(top.len()).expect("small");
    let mx = top.iter().map(|p| p.0).fold(T::zero(), |a, b| a + b) / n;
    let my = top.iter().map(|p| p.1).fold(T::zero(), |a, b| a + b) / n;
    let sxx = top.iter().map(|p| (p.0 - mx) * (p.0 - mx)).fold(T::zero(), |a, b| a + b);
    let sxy = top.iter().map(|p| (p.0 - mx) * (p.1 - my)).fold(T::zero(), |a, b| a + b);
    let slope = sxy / sxx;
    let sse = top
        .iter()
        .map(|p| {
            let e = p.1 - my - slope * (p.0 - mx);
            e * e
        })
        .fold(T::zero(), |a, b| a + b);
    Ok(OrderEstimate {
        slope,
        r_range: (top[0].0.exp(), top[top.len() - 1].0.exp()),
        residual: (sse / n).sqrt(),
    })
}
