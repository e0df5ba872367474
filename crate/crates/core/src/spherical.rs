//! The spherical derivative `f#(z) = |f'(z)| / (1 + |f(z)|^2)` and numerical
//! searches for its supremum.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::ExtendedComplex;
use crate::expr::Expr;
use crate::scalar::{ln_1p_exp, Scalar, WideComplex};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SphericalError {
    #[error("f and f' both overflow near z = {re}{im:+}i")]
    NumericOverflow { re: f64, im: f64 },
}

impl SphericalError {
    pub fn name(&self) -> &'static str {
        match self {
            SphericalError::NumericOverflow { .. } => "NumericOverflow",
        }
    }
}

/// Value and first derivative at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub value: WideComplex<T>,
    pub derivative: WideComplex<T>,
}

/// A meromorphic function that can report `f` and `f'` at a point.
pub trait Analytic<T: Scalar>: Sync {
    /// `None` when the value cannot be determined at `z` (an indeterminate
    /// form, or `z` is a pole where `f'` is meaningless).
    fn jet(&self, z: Complex<T>) -> Option<Jet<T>>;
}

/// An expression together with its symbolic derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprFunction<T> {
    f: Expr<T>,
    df: Expr<T>,
}

impl<T: Scalar> ExprFunction<T> {
    pub fn new(f: Expr<T>) -> Self {
        let df = f.differentiate();
        ExprFunction { f, df }
    }

    pub fn expr(&self) -> &Expr<T> {
        &self.f
    }

    pub fn derivative(&self) -> &Expr<T> {
        &self.df
    }
}

impl<T: Scalar> Analytic<T> for ExprFunction<T> {
    fn jet(&self, z: Complex<T>) -> Option<Jet<T>> {
        Some(Jet { value: self.f.eval_wide(z)?, derivative: self.df.eval_wide(z)? })
    }
}

/// `h(w) = |w| / (1 + |w|^2)`, extended by 0 at infinity.
pub fn h<T: Scalar>(w: ExtendedComplex<T>) -> T {
    match w {
        ExtendedComplex::Infinity => T::zero(),
        ExtendedComplex::Finite(w) => {
            let r = w.norm();
            if r > T::one() {
                // divide through by r^2 to avoid overflow for huge |w|
                let s = r.recip();
                s / (s * s + T::one())
            } else {
                r / (T::one() + r * r)
            }
        }
    }
}

/// `f#` from a jet, computed as `exp(ln|f'| - ln(1 + |f|^2))`.
fn from_jet<T: Scalar>(jet: &Jet<T>) -> Option<T> {
    if jet.value.is_infinite() || jet.derivative.is_infinite() {
        return None;
    }
    if jet.derivative.is_zero() {
        return Some(T::zero());
    }
    let ln_d = jet.derivative.ln_abs();
    let ln_den = if jet.value.is_zero() { T::zero() } else { ln_1p_exp(T::two() * jet.value.ln_abs()) };
    Some((ln_d - ln_den).exp())
}

/// `f#(z)`. At a pole (or any point where the jet is not available) the value
/// is recovered by continuity from four points at distance `1e-7 (1 + |z|)`,
/// which agrees with `(1/f)#` there.
pub fn sph_deriv_of<T: Scalar, F: Analytic<T> + ?Sized>(f: &F, z: Complex<T>) -> Result<T, SphericalError> {
    if let Some(v) = f.jet(z).as_ref().and_then(from_jet) {
        return Ok(v);
    }
    let delta = T::lit(1e-7) * (T::one() + z.norm());
    let mut sum = T::zero();
    let mut count = 0u32;
    for dir in [Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::one())] {
        for sign in [T::one(), -T::one()] {
            let p = z + dir.scale(delta * sign);
            if let Some(v) = f.jet(p).as_ref().and_then(from_jet) {
                sum += v;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(SphericalError::NumericOverflow {
            re: z.re.to_f64().unwrap_or(f64::NAN),
            im: z.im.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(sum / T::from_u32(count).expect("small integer"))
}

/// `f#(z)` for an expression, differentiating symbolically.
pub fn sph_deriv<T: Scalar>(f: &Expr<T>, z: Complex<T>) -> Result<T, SphericalError> {
    sph_deriv_of(&ExprFunction::new(f.clone()), z)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SupReport<T> {
    pub radius: T,
    pub center: Complex<T>,
    pub samples: u64,
    pub max_value: T,
    pub argmax: Complex<T>,
    /// True when local refinement improved on the best grid sample.
    pub refined: bool,
    /// Samples where `f#` could not be computed.
    pub skipped: u64,
}

const REFINE_SEEDS: usize = 16;
const GRID_SHARE: f64 = 0.7;
const SHRINK: f64 = 0.618;

/// Sup search over `|z| <= radius`.
pub fn sup_search<T: Scalar, F: Analytic<T>>(f: &F, radius: T, budget: u64) -> SupReport<T> {
    sup_search_disk(f, Complex::new(T::zero(), T::zero()), radius, budget)
}

/// Two-phase sup search over the disk `|z - center| <= radius`: a uniform
/// lattice using 70% of the budget, then shrinking-box refinement around the
/// 16 best lattice local maxima. Deterministic regardless of thread count.
pub fn sup_search_disk<T: Scalar, F: Analytic<T>>(
    f: &F,
    center: Complex<T>,
    radius: T,
    budget: u64,
) -> SupReport<T> {
    let r = radius.to_f64().expect("finite radius");
    let grid_budget = (budget as f64 * GRID_SHARE).max(1.0);
    let spacing = r * (std::f64::consts::PI / grid_budget).sqrt();
    let n = (r / spacing).floor() as i64;
    let side = (2 * n + 1) as usize;

    let cells: Vec<(i64, i64)> = (-n..=n)
        .flat_map(|i| (-n..=n).map(move |j| (i, j)))
        .filter(|&(i, j)| ((i * i + j * j) as f64).sqrt() * spacing <= r)
        .collect();
    let to_point = |i: i64, j: i64| center + Complex::new(T::lit(i as f64 * spacing), T::lit(j as f64 * spacing));

    let values: Vec<Option<T>> =
        cells.par_iter().map(|&(i, j)| sph_deriv_of(f, to_point(i, j)).ok()).collect();

    let mut samples = cells.len() as u64;
    let mut skipped = values.iter().filter(|v| v.is_none()).count() as u64;

    let mut lattice = vec![None; side * side];
    let index = |i: i64, j: i64| ((i + n) as usize) * side + (j + n) as usize;
    for (&(i, j), v) in cells.iter().zip(&values) {
        lattice[index(i, j)] = *v;
    }

    let mut best_value = T::neg_infinity();
    let mut best_point = center;
    for (&(i, j), v) in cells.iter().zip(&values) {
        if let Some(v) = *v {
            if v > best_value {
                best_value = v;
                best_point = to_point(i, j);
            }
        }
    }

    // lattice local maxima, strongest first; ties broken by cell order
    let mut peaks: Vec<(T, usize)> = Vec::new();
    for (k, (&(i, j), v)) in cells.iter().zip(&values).enumerate() {
        let Some(v) = *v else { continue };
        let is_peak = (-1..=1).all(|di| {
            (-1..=1).all(|dj| {
                let (a, b) = (i + di, j + dj);
                if (di == 0 && dj == 0) || a.abs() > n || b.abs() > n {
                    return true;
                }
                lattice[index(a, b)].is_none_or(|w| w <= v)
            })
        });
        if is_peak {
            peaks.push((v, k));
        }
    }
    peaks.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite values").then(a.1.cmp(&b.1)));
    peaks.truncate(REFINE_SEEDS);

    let remaining = budget.saturating_sub(samples);
    let per_seed = if peaks.is_empty() { 0 } else { remaining / peaks.len() as u64 };
    let grid_best = best_value;

    let refined: Vec<(T, Complex<T>, u64, u64)> = peaks
        .par_iter()
        .map(|&(v, k)| {
            let (i, j) = cells[k];
            refine(f, center, radius, to_point(i, j), v, T::lit(spacing), per_seed)
        })
        .collect();
    for (v, p, used, bad) in refined {
        samples += used;
        skipped += bad;
        if v > best_value {
            best_value = v;
            best_point = p;
        }
    }

    if best_value == T::neg_infinity() {
        best_value = T::zero();
    }
    SupReport {
        radius,
        center,
        samples,
        max_value: best_value,
        argmax: best_point,
        refined: best_value > grid_best,
        skipped,
    }
}

/// Shrinking `m x m` boxes around `start`; `m` grows with the local value of
/// `f#` times the box size so that fast-moving regions are sampled finer.
fn refine<T: Scalar, F: Analytic<T>>(
    f: &F,
    center: Complex<T>,
    radius: T,
    start: Complex<T>,
    start_value: T,
    spacing: T,
    budget: u64,
) -> (T, Complex<T>, u64, u64) {
    let mut best = (start_value, start);
    let mut half = spacing;
    let mut used = 0u64;
    let mut bad = 0u64;
    let floor = T::lit(1e-12) * (T::one() + radius);
    while half > floor {
        let local = (best.0 * half).to_f64().unwrap_or(0.0).floor().clamp(0.0, 3.0) as u64;
        let m = 3 + 2 * local;
        if used + m * m > budget {
            break;
        }
        let step = T::two() * half / T::from_u64(m - 1).expect("small integer");
        let mut improved = best;
        for a in 0..m {
            for b in 0..m {
                let offset = Complex::new(
                    -half + step * T::from_u64(a).expect("small integer"),
                    -half + step * T::from_u64(b).expect("small integer"),
                );
                let mut p = best.1 + offset;
                let d = p - center;
                if d.norm() > radius {
                    p = center + d.scale(radius / d.norm());
                }
                used += 1;
                match sph_deriv_of(f, p) {
                    Ok(v) if v > improved.0 => improved = (v, p),
                    Ok(_) => {}
                    Err(_) => bad += 1,
                }
            }
        }
        best = improved;
        half *= T::lit(SHRINK);
    }
    (best.0, best.1, used, bad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WitnessPoint<T> {
    pub z: Complex<T>,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct WitnessSequence<T> {
    /// Best local maximum per seed-modulus scale, in increasing order of `f#`.
    pub points: Vec<WitnessPoint<T>>,
    /// Values grow strictly across the three largest scales and the last is
    /// at least twice the first.
    pub monotone: bool,
}

const GROWTH_FACTOR: f64 = 2.0;
// seeds whose moduli agree within this relative tolerance share a scale
const SCALE_TOLERANCE: f64 = 0.05;

/// Compass hill climb on `f#` from `start`: eight directions, initial step
/// 0.25, halved whenever no direction improves.
pub fn hill_climb<T: Scalar, F: Analytic<T> + ?Sized>(f: &F, start: Complex<T>, steps: usize) -> WitnessPoint<T> {
    let mut z = start;
    let mut value = sph_deriv_of(f, z).unwrap_or(T::zero());
    let mut step = T::lit(0.25);
    let dirs: Vec<Complex<T>> = (0..8)
        .map(|k| Complex::from_polar(T::one(), T::lit(k as f64 * std::f64::consts::FRAC_PI_4)))
        .collect();
    for _ in 0..steps {
        let mut moved = false;
        for d in &dirs {
            let p = z + d.scale(step);
            if let Ok(v) = sph_deriv_of(f, p) {
                if v > value {
                    value = v;
                    z = p;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= T::half();
        }
    }
    WitnessPoint { z, value }
}

/// Climbs from every seed and looks for growth of the best local maxima as
/// the seed modulus increases. `None` when nothing grows.
pub fn witness_search<T: Scalar, F: Analytic<T>>(
    f: &F,
    seeds: &[Complex<T>],
    steps: usize,
) -> Option<WitnessSequence<T>> {
    let climbed: Vec<(T, WitnessPoint<T>)> =
        seeds.par_iter().map(|&s| (s.norm(), hill_climb(f, s, steps.max(1)))).collect();
    let mut order: Vec<usize> = (0..climbed.len()).collect();
    order.sort_by(|&a, &b| climbed[a].0.partial_cmp(&climbed[b].0).expect("finite seeds").then(a.cmp(&b)));

    // best point per scale, scales in increasing modulus
    let mut scales: Vec<(T, WitnessPoint<T>)> = Vec::new();
    for k in order {
        let (m, ref p) = climbed[k];
        match scales.last_mut() {
            Some((m0, best)) if m <= *m0 * T::lit(1.0 + SCALE_TOLERANCE) => {
                if p.value > best.value {
                    *best = p.clone();
                }
            }
            _ => scales.push((m, p.clone())),
        }
    }
    let tail: Vec<WitnessPoint<T>> = scales.iter().rev().take(3).rev().map(|(_, p)| p.clone()).collect();
    if tail.len() < 2 {
        return None;
    }
    let increasing = tail.windows(2).all(|w| w[1].value > w[0].value);
    let grows = tail.last().expect("nonempty").value >= T::lit(GROWTH_FACTOR) * tail[0].value;
    if !(increasing && grows) {
        return None;
    }
    let monotone = tail.len() == 3;
    let mut points: Vec<WitnessPoint<T>> = scales.into_iter().map(|(_, p)| p).collect();
    points.sort_by(|a, b| a.value.partial_cmp(&b.value).expect("finite values"));
    Some(WitnessSequence { points, monotone })
}
