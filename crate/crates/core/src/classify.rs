//! Exact Brody verdicts for the families `R(z) e^z + Q(z)` and
//! `e^z + e^{lambda z}`, multiplication by rational functions, and a
//! one-sided heuristic based on the logarithmic derivative.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{ExtendedComplex, RationalFunction};
use crate::expr::Expr;
use crate::scalar::Scalar;
use crate::spherical::{sph_deriv, WitnessPoint};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("lambda = 1: e^z + e^z = 2 e^z has no zeros")]
    LambdaOne,
    #[error("bound not available: {0}")]
    OutOfCase(String),
    #[error("the rational map is constant")]
    ConstantMap,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl ClassifyError {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifyError::LambdaOne => "LambdaOne",
            ClassifyError::OutOfCase(_) => "OutOfCase",
            ClassifyError::ConstantMap => "ConstantMap",
            ClassifyError::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BrodyStatus {
    Brody,
    NotBrody,
    Unknown,
}

/// A zero of `e^z + e^{lambda z}` with the slope there; at a zero `f#` equals
/// `|f'|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ZeroWitness<T> {
    pub k: i64,
    pub z: Complex<T>,
    pub slope: Complex<T>,
    pub sph: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum Evidence<T> {
    None,
    /// An explicit upper bound for `f#` on all of the plane.
    Bound { value: T },
    /// Points where `f#` grows without bound.
    Witness { points: Vec<WitnessPoint<T>> },
    Zeros { zeros: Vec<ZeroWitness<T>> },
    /// Largest sampled `|f'/f|` per annulus, innermost first.
    Annuli { maxima: Vec<T> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BrodyVerdict<T> {
    pub status: BrodyStatus,
    /// Identifier of the rule that produced the verdict.
    pub rule: String,
    /// `rule: explanation`.
    pub reason: String,
    pub evidence: Evidence<T>,
}

impl<T> BrodyVerdict<T> {
    fn new(status: BrodyStatus, rule: &str, text: &str, evidence: Evidence<T>) -> Self {
        BrodyVerdict { status, rule: rule.to_string(), reason: format!("{rule}: {text}"), evidence }
    }
}

const EXP_RATIONAL: &str = "exp-rational";
const TWO_EXP: &str = "two-exp";
const LOG_DERIVATIVE: &str = "log-derivative";

/// Winding indices at which zeros of `R e^z + Q` are tracked for a witness.
pub const WITNESS_WINDINGS: [i64; 3] = [4, 16, 64];

/// `R(z) e^z + Q(z)` is Brody if and only if `R` vanishes identically or `Q`
/// is finite at infinity. A negative verdict carries `f#` at zeros of `f`
/// near `z = 2 pi i k`, which grow with `k`.
pub fn classify_exp_rational<T: Scalar>(r: &RationalFunction<T>, q: &RationalFunction<T>) -> BrodyVerdict<T> {
    if r.is_zero() {
        return BrodyVerdict::new(BrodyStatus::Brody, EXP_RATIONAL, "R is identically zero, f = Q is rational", Evidence::None);
    }
    if let ExtendedComplex::Finite(_) = q.value_at_infinity() {
        return BrodyVerdict::new(BrodyStatus::Brody, EXP_RATIONAL, "Q is finite at infinity", Evidence::None);
    }
    let f = Expr::exp_rational(r, q);
    let points = WITNESS_WINDINGS
        .iter()
        .filter_map(|&k| exp_rational_zero(r, q, k))
        .filter_map(|z| sph_deriv(&f, z).ok().map(|value| WitnessPoint { z, value }))
        .collect();
    BrodyVerdict::new(
        BrodyStatus::NotBrody,
        EXP_RATIONAL,
        "R is not zero and Q has a pole at infinity",
        Evidence::Witness { points },
    )
}

/// The zero of `R e^z + Q` on the branch `z = Log(-Q/R) + 2 pi i k`, found by
/// fixed-point iteration followed by Newton's method. `None` if the
/// iteration does not settle.
pub fn exp_rational_zero<T: Scalar>(r: &RationalFunction<T>, q: &RationalFunction<T>, k: i64) -> Option<Complex<T>> {
    // S = Q/R, zeros of f are zeros of e^z + S away from zeros of R
    let s = RationalFunction::new(q.num().mul(r.den()), q.den().mul(r.num())).ok()?;
    let ds = s.derivative();
    let winding = Complex::new(T::zero(), T::TAU() * T::from_i64(k)?);
    let mut z = winding;
    for _ in 0..60 {
        let v = s.eval(z).ok()?.finite()?;
        if v.norm() == T::zero() {
            return None;
        }
        z = (-v).ln() + winding;
    }
    for _ in 0..30 {
        let v = s.eval(z).ok()?.finite()?;
        let dv = ds.eval(z).ok()?.finite()?;
        let e = z.exp();
        let step = (e + v) / (e + dv);
        z -= step;
        if step.norm() <= T::lit(1e-15) * (T::one() + z.norm()) {
            break;
        }
    }
    let residual = (z.exp() + s.eval(z).ok()?.finite()?).norm();
    let scale = T::one() + z.exp().norm();
    (residual <= T::lit(1e-9) * scale).then_some(z)
}

fn is_one<T: Scalar>(lambda: Complex<T>) -> bool {
    lambda.re == T::one() && lambda.im == T::zero()
}

/// `a_k = (2k + 1) pi i / (1 - lambda)`.
pub fn two_exp_zero<T: Scalar>(lambda: Complex<T>, k: i64) -> Result<Complex<T>, ClassifyError> {
    if is_one(lambda) {
        return Err(ClassifyError::LambdaOne);
    }
    let odd = T::from_i64(2 * k + 1).ok_or_else(|| ClassifyError::InvalidArgument("k too large".into()))?;
    Ok(Complex::new(T::zero(), odd * T::PI()) / (Complex::new(T::one(), T::zero()) - lambda))
}

/// `f'(a_k) = (lambda - 1) exp((2k + 1) pi i lambda / (1 - lambda))`.
pub fn two_exp_slope<T: Scalar>(lambda: Complex<T>, k: i64) -> Result<Complex<T>, ClassifyError> {
    let a = two_exp_zero(lambda, k)?;
    Ok((lambda - T::one()) * (a * lambda).exp())
}

/// `|e^{2 pi i lambda / (1 - lambda)}|`, the ratio of consecutive `|f'(a_k)|`.
pub fn two_exp_slope_ratio<T: Scalar>(lambda: Complex<T>) -> Result<T, ClassifyError> {
    if is_one(lambda) {
        return Err(ClassifyError::LambdaOne);
    }
    let w = Complex::new(T::zero(), T::TAU()) * lambda / (Complex::new(T::one(), T::zero()) - lambda);
    Ok(w.re.exp())
}

/// An explicit bound for `sup f#` when `lambda` is real. For `0 <= lambda < 1`
/// the bound is `max(6 e^{-C}, e^C + lambda e^{lambda C})` with
/// `C = log 2 / (1 - lambda)`; for `-1 <= lambda < 0` it is
/// `max(6 e^{-C}, 6 e^{lambda C}, e^C + |lambda| e^{-lambda C})`; `lambda = 1`
/// gives `1/2`; `|lambda| > 1` reduces to `1/lambda` through
/// `f(z) = g(lambda z)`, which scales the bound by `|lambda|`.
pub fn two_exp_bound<T: Scalar>(lambda: Complex<T>) -> Result<T, ClassifyError> {
    if lambda.im != T::zero() || !lambda.re.is_finite() {
        return Err(ClassifyError::OutOfCase(format!("lambda = {lambda} is not real")));
    }
    let l = lambda.re;
    if l == T::one() {
        return Ok(T::half());
    }
    if l.abs() > T::one() {
        let inner = two_exp_bound(Complex::new(l.recip(), T::zero()))?;
        return Ok(l.abs() * inner);
    }
    let c = T::LN_2() / (T::one() - l);
    let six = T::lit(6.0);
    if l >= T::zero() {
        Ok((six * (-c).exp()).max(c.exp() + l * (l * c).exp()))
    } else {
        Ok((six * (-c).exp()).max(six * (l * c).exp()).max(c.exp() + l.abs() * (-l * c).exp()))
    }
}

/// Number of zeros attached to a negative two-exponential verdict.
pub const TWO_EXP_WITNESS_ZEROS: i64 = 5;

/// `e^z + e^{lambda z}` is Brody if and only if `lambda` is real; the test is
/// exact on the given value.
pub fn classify_two_exponentials<T: Scalar>(lambda: Complex<T>) -> BrodyVerdict<T> {
    if lambda.im == T::zero() {
        let evidence = match two_exp_bound(lambda) {
            Ok(value) if value.is_finite() => Evidence::Bound { value },
            _ => Evidence::None,
        };
        return BrodyVerdict::new(BrodyStatus::Brody, TWO_EXP, "lambda real", evidence);
    }
    // walk k in the direction where |f'(a_k)| grows
    let ratio = two_exp_slope_ratio(lambda).expect("lambda is not 1");
    let dir = if ratio > T::one() { 1 } else { -1 };
    let zeros = (1..=TWO_EXP_WITNESS_ZEROS)
        .map(|j| {
            let k = dir * j;
            let z = two_exp_zero(lambda, k).expect("lambda is not 1");
            let slope = two_exp_slope(lambda, k).expect("lambda is not 1");
            ZeroWitness { k, z, slope, sph: slope.norm() }
        })
        .collect();
    BrodyVerdict::new(BrodyStatus::NotBrody, TWO_EXP, "lambda not real", Evidence::Zeros { zeros })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ProductRule<T> {
    /// `R f` is Brody for every Brody `f`.
    pub preserves: bool,
    pub value_at_infinity: ExtendedComplex<T>,
    pub reason: String,
    /// A Brody `f` for which `R f` is not Brody, when `preserves` is false.
    pub counterexample: Option<String>,
}

/// Whether multiplication by `R` keeps every Brody function Brody, which is
/// the case when `R(inf)` is finite and nonzero.
pub fn preserves_brody_product<T: Scalar>(r: &RationalFunction<T>) -> bool {
    match r.value_at_infinity() {
        ExtendedComplex::Infinity => false,
        ExtendedComplex::Finite(v) => v.norm() != T::zero(),
    }
}

/// [`preserves_brody_product`] with an explanation and, when it fails, a
/// counterexample: `R (e^z + 1)` if `R(inf) = inf`, `R / (e^z + 1)` if
/// `R(inf) = 0`.
pub fn product_rule<T: Scalar>(r: &RationalFunction<T>) -> ProductRule<T> {
    let at_inf = r.value_at_infinity();
    let preserves = preserves_brody_product(r);
    let rexpr = Expr::from_rational(r);
    let (reason, counterexample) = match at_inf {
        _ if preserves => ("product: R is finite and nonzero at infinity".to_string(), None),
        ExtendedComplex::Infinity => (
            "product: R has a pole at infinity".to_string(),
            Some(Expr::mul(rexpr, "exp(z)+1".parse().expect("literal parses")).to_string()),
        ),
        ExtendedComplex::Finite(_) => (
            "product: R vanishes at infinity".to_string(),
            Some(Expr::div(rexpr, "exp(z)+1".parse().expect("literal parses")).to_string()),
        ),
    };
    ProductRule { preserves, value_at_infinity: at_inf, reason, counterexample }
}

/// Numerical sup over the sphere of `|R'(w)| (1 + |w|^2) / (1 + |R(w)|^2)`,
/// the Lipschitz constant of `R` for the chordal metric. Samples a polar grid
/// of the closed unit disk in both charts `w` and `1/w` (the unit circle is
/// always included), then refines the best samples by compass search.
pub fn rational_sphere_lipschitz<T: Scalar>(r: &RationalFunction<T>, budget: u64) -> Result<T, ClassifyError> {
    if r.is_constant() {
        return Err(ClassifyError::ConstantMap);
    }
    if budget < 1000 {
        return Err(ClassifyError::InvalidArgument("budget must be at least 1000".into()));
    }
    let charts = [r.clone(), r.at_reciprocal()];
    let grid_budget = budget * 4 / 5;
    let per_chart = (grid_budget / 2) as f64;
    let rings = (per_chart / 4.0).sqrt().floor().max(2.0) as usize;
    let spokes = ((per_chart / rings as f64).floor() as usize).max(8);

    let mut best: Vec<(T, usize, Complex<T>)> = Vec::new();
    for (chart, map) in charts.iter().enumerate() {
        for i in 0..=rings {
            let rho = T::lit(i as f64 / rings as f64);
            let count = if i == 0 { 1 } else { spokes };
            for j in 0..count {
                let w = Complex::from_polar(rho, T::TAU() * T::lit(j as f64 / count as f64));
                best.push((map.spherical_stretch(w), chart, w));
            }
        }
    }
    let used = best.len() as u64;
    best.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    best.truncate(8);

    let refine_budget = budget.saturating_sub(used) / best.len().max(1) as u64;
    let mut top = best[0].0;
    let step0 = T::lit(1.0 / rings as f64);
    for &(v0, chart, w0) in &best {
        let map = &charts[chart];
        let (mut v, mut w, mut step) = (v0, w0, step0);
        let mut spent = 0;
        while spent + 8 <= refine_budget && step > T::lit(1e-12) {
            let mut moved = false;
            for k in 0..8 {
                let p = w + Complex::from_polar(step, T::FRAC_PI_4() * T::lit(f64::from(k)));
                let s = map.spherical_stretch(p);
                if s > v {
                    v = s;
                    w = p;
                    moved = true;
                }
            }
            spent += 8;
            if !moved {
                step *= T::half();
            }
        }
        top = top.max(v);
    }
    Ok(top)
}

/// Number of annuli sampled by [`log_derivative_brody_rule`].
pub const ANNULI: usize = 6;
/// Largest outer-annulus `|f'/f|` accepted as bounded.
pub const LOG_DERIVATIVE_THRESHOLD: f64 = 1e3;

/// Samples `|f'/f|` on six equal-width annuli filling `|z| <= radius`. If the
/// maxima over the outer three are below 1000 and do not increase outward,
/// the function looks like it has a bounded logarithmic derivative near
/// infinity, which makes it Brody. Otherwise no claim is made: the rule never
/// answers NotBrody.
pub fn log_derivative_brody_rule<T: Scalar>(f: &Expr<T>, radius: T, budget: u64) -> BrodyVerdict<T> {
    let df = f.differentiate();
    let per = (budget / ANNULI as u64).max(64);
    let rings = ((per as f64 / 32.0).sqrt().floor() as usize).max(2);
    let spokes = (per as usize / rings).max(16);
    let width = radius / T::from_usize(ANNULI).expect("small");
    let mut maxima = Vec::with_capacity(ANNULI);
    let mut pole = false;
    for a in 0..ANNULI {
        let inner = width * T::from_usize(a).expect("small");
        let mut m = T::zero();
        for i in 0..=rings {
            let rho = inner + width * T::lit(i as f64 / rings as f64);
            for j in 0..spokes {
                // offset alternate rings by half a spoke
                let shift = if i % 2 == 0 { 0.0 } else { 0.5 };
                let z = Complex::from_polar(rho, T::TAU() * T::lit((j as f64 + shift) / spokes as f64));
                let (Some(v), Some(d)) = (f.eval_wide(z), df.eval_wide(z)) else {
                    m = T::infinity();
                    continue;
                };
                if v.is_infinite() || d.is_infinite() {
                    if a >= ANNULI / 2 {
                        pole = true;
                    }
                    m = T::infinity();
                    continue;
                }
                let q = if d.is_zero() { T::zero() } else { (d.ln_abs() - v.ln_abs()).exp() };
                m = m.max(q);
            }
        }
        maxima.push(m);
    }
    let outer = &maxima[ANNULI - 3..];
    let slack = T::lit(1e-9);
    let bounded = outer[2] < T::lit(LOG_DERIVATIVE_THRESHOLD);
    let settling = outer.windows(2).all(|w| w[1] <= w[0] * (T::one() + slack));
    if pole {
        return BrodyVerdict::new(
            BrodyStatus::Unknown,
            LOG_DERIVATIVE,
            "a pole or zero was hit in the outer annuli",
            Evidence::Annuli { maxima },
        );
    }
    if bounded && settling {
        BrodyVerdict::new(
            BrodyStatus::Brody,
            LOG_DERIVATIVE,
            "bounded |f'/f| on the outer annuli (heuristic)",
            Evidence::Annuli { maxima },
        )
    } else {
        BrodyVerdict::new(
            BrodyStatus::Unknown,
            LOG_DERIVATIVE,
            "|f'/f| not seen to stay bounded; no claim",
            Evidence::Annuli { maxima },
        )
    }
}
