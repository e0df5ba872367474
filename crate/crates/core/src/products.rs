//! Genus-zero canonical products `F(z) = prod (1 - z/a_k)^{m_k}` over a
//! divisor, and the two lower bounds for tails of such products over
//! geometrically separated divisors.
//!
//! Terms are summed in log space. When evaluation stops at index `K`, the
//! omitted factors are replaced by `exp(-z s1 - z^2 s2 / 2)` with `s1`, `s2`
//! the power sums of the omitted points, and the reported bound covers the
//! cubic remainder plus accumulated rounding.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::divisors::{Divisor, DivisorError};
use crate::scalar::{Scalar, WideComplex};
use crate::spherical::{Analytic, Jet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProductError {
    #[error("tolerance {tol} not reachable on this divisor (best bound {bound}, value {re}{im:+}i)")]
    TolUnreachable { tol: f64, bound: f64, re: f64, im: f64 },
    #[error("tolerance must lie in (0, 0.1), got {0}")]
    InvalidTolerance(f64),
    #[error("support point {index} has multiplicity {mult}, expected 1")]
    MultiplicityNotOne { index: usize, mult: u32 },
    #[error("index {index} out of range for a divisor with {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("lambda must exceed 1, got {0}")]
    LambdaNotGreaterOne(f64),
    #[error("separation ratio {ratio} is below lambda = {lambda}")]
    SeparationViolated { ratio: f64, lambda: f64 },
    #[error("no s up to {0} reaches the requested level")]
    NotReached(u64),
    #[error(transparent)]
    Divisor(#[from] DivisorError),
}

impl ProductError {
    pub fn name(&self) -> &'static str {
        match self {
            ProductError::TolUnreachable { .. } => "TolUnreachable",
            ProductError::InvalidTolerance(_) => "InvalidTolerance",
            ProductError::MultiplicityNotOne { .. } => "MultiplicityNotOne",
            ProductError::IndexOutOfRange { .. } => "IndexOutOfRange",
            ProductError::LambdaNotGreaterOne(_) => "LambdaNotGreaterOne",
            ProductError::SeparationViolated { .. } => "SeparationViolated",
            ProductError::NotReached(_) => "NotReached",
            ProductError::Divisor(e) => e.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ProductEval<T> {
    pub value: Complex<T>,
    pub terms_used: usize,
    /// Relative error bound for the truncation and rounding.
    pub tail_bound: T,
}

/// `ln(1 - u)`, accurate both for small `u` and for `u` near 1.
fn ln_one_minus<T: Scalar>(u: Complex<T>) -> Complex<T> {
    if u.norm_sqr() > T::lit(0.25) {
        return (Complex::new(T::one(), T::zero()) - u).ln();
    }
    let w = -u;
    let re = T::half() * (T::two() * w.re + w.norm_sqr()).ln_1p();
    let im = w.im.atan2(T::one() + w.re);
    Complex::new(re, im)
}

fn mult<T: Scalar>(m: u32) -> T {
    T::from_u32(m).expect("multiplicity fits")
}

fn rounding<T: Scalar>(terms: usize) -> T {
    T::lit(8.0) * T::epsilon() * T::from_usize(terms.max(1)).expect("count fits")
}

/// Relative error of replacing the factors from index `k` on by the
/// second-order exponential correction.
fn corrected_tail_bound<T: Scalar>(d: &Divisor<T>, k: usize, r: T) -> T {
    let inv = d.max_inv_from(k);
    let u = r * inv;
    if inv == T::zero() {
        return T::zero();
    }
    if u >= T::half() {
        return T::infinity();
    }
    let cubic = r * r * r * inv * inv * d.abs_suffix(k) / (T::lit(3.0) * (T::one() - u));
    cubic.exp_m1()
}

fn check_tol<T: Scalar>(tol: T) -> Result<(), ProductError> {
    if tol > T::zero() && tol < T::lit(0.1) {
        Ok(())
    } else {
        Err(ProductError::InvalidTolerance(tol.to_f64().unwrap_or(f64::NAN)))
    }
}

fn tail_log<T: Scalar>(d: &Divisor<T>, k: usize, z: Complex<T>) -> Complex<T> {
    -(z * d.s1_suffix(k)) - z * z * d.s2_suffix(k) * T::half()
}

/// `F(z)`, stopping once the corrected tail and rounding bound drops below
/// `tol`. A point of the support gives exactly 0.
pub fn eval_product<T: Scalar>(d: &Divisor<T>, z: Complex<T>, tol: T) -> Result<ProductEval<T>, ProductError> {
    check_tol(tol)?;
    if z.re == T::zero() && z.im == T::zero() {
        return Ok(ProductEval { value: Complex::new(T::one(), T::zero()), terms_used: 0, tail_bound: T::zero() });
    }
    let r = z.norm();
    let mut log_sum = Complex::new(T::zero(), T::zero());
    let mut k = 0;
    loop {
        let bound = corrected_tail_bound(d, k, r) + rounding(k);
        if bound < tol || k == d.len() {
            let value = (log_sum + tail_log(d, k, z)).exp();
            if bound < tol {
                return Ok(ProductEval { value, terms_used: k, tail_bound: bound });
            }
            return Err(ProductError::TolUnreachable {
                tol: tol.to_f64().unwrap_or(f64::NAN),
                bound: bound.to_f64().unwrap_or(f64::INFINITY),
                re: value.re.to_f64().unwrap_or(f64::NAN),
                im: value.im.to_f64().unwrap_or(f64::NAN),
            });
        }
        let p = d.points()[k];
        if p.a == z {
            return Ok(ProductEval { value: Complex::new(T::zero(), T::zero()), terms_used: k + 1, tail_bound: T::zero() });
        }
        log_sum += ln_one_minus(z / p.a).scale(mult(p.mult));
        k += 1;
    }
}

/// `F'(a_n) = -(1/a_n) prod_{k != n} (1 - a_n/a_k)` for a simple support
/// point `a_n` (0-based index into the modulus-sorted support).
pub fn product_derivative_at_support<T: Scalar>(
    d: &Divisor<T>,
    n: usize,
    tol: T,
) -> Result<ProductEval<T>, ProductError> {
    check_tol(tol)?;
    let Some(target) = d.points().get(n) else {
        return Err(ProductError::IndexOutOfRange { index: n, len: d.len() });
    };
    if target.mult != 1 {
        return Err(ProductError::MultiplicityNotOne { index: n, mult: target.mult });
    }
    let z = target.a;
    let r = z.norm();
    let mut log_sum = Complex::new(T::zero(), T::zero());
    let mut k = 0;
    loop {
        let bound = corrected_tail_bound(d, k, r) + rounding(k);
        if (k > n && bound < tol) || k == d.len() {
            let value = -(log_sum + tail_log(d, k, z)).exp() / z;
            if bound < tol {
                return Ok(ProductEval { value, terms_used: k, tail_bound: bound });
            }
            return Err(ProductError::TolUnreachable {
                tol: tol.to_f64().unwrap_or(f64::NAN),
                bound: bound.to_f64().unwrap_or(f64::INFINITY),
                re: value.re.to_f64().unwrap_or(f64::NAN),
                im: value.im.to_f64().unwrap_or(f64::NAN),
            });
        }
        if k != n {
            let p = d.points()[k];
            log_sum += ln_one_minus(z / p.a).scale(mult(p.mult));
        }
        k += 1;
    }
}

/// How the product is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum ProductForm {
    /// `prod (1 - z/a_k)`, equal to 1 at the origin.
    #[default]
    Canonical,
    /// `3 prod (z/a_k - 1)`, a constant multiple of the canonical product
    /// whose modulus stays at least 1 between the zeros of a sparse divisor.
    ShiftedScaled,
}

/// A canonical product as an analytic function.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalProduct<T> {
    divisor: Divisor<T>,
    form: ProductForm,
    factor: Complex<T>,
}

impl<T: Scalar> CanonicalProduct<T> {
    pub fn new(divisor: Divisor<T>) -> Self {
        Self::with_form(divisor, ProductForm::Canonical)
    }

    pub fn with_form(divisor: Divisor<T>, form: ProductForm) -> Self {
        let factor = match form {
            ProductForm::Canonical => T::one(),
            ProductForm::ShiftedScaled => {
                let sign = if divisor.total_multiplicity().is_multiple_of(2) { T::one() } else { -T::one() };
                T::lit(3.0) * sign
            }
        };
        CanonicalProduct { divisor, form, factor: Complex::new(factor, T::zero()) }
    }

    pub fn divisor(&self) -> &Divisor<T> {
        &self.divisor
    }

    pub fn form(&self) -> ProductForm {
        self.form
    }

    /// Value and derivative in wide arithmetic. The support point nearest to
    /// `z` is factored out so that `F'` stays accurate next to a zero.
    pub fn wide_jet(&self, z: Complex<T>) -> Jet<T> {
        let d = &self.divisor;
        let r = z.norm();
        let target = T::epsilon();

        let mut stop = 0;
        while stop < d.len() && !(corrected_tail_bound(d, stop, r) < target) {
            stop += 1;
        }
        let nearest = (0..stop).min_by(|&i, &j| {
            let di = (z - d.points()[i].a).norm();
            let dj = (z - d.points()[j].a).norm();
            di.partial_cmp(&dj).expect("finite distances").then(i.cmp(&j))
        });

        let mut log_sum = tail_log(d, stop, z);
        let mut slope = -d.s1_suffix(stop) - z * d.s2_suffix(stop);
        for (k, p) in d.points()[..stop].iter().enumerate() {
            if Some(k) == nearest {
                continue;
            }
            let m = mult::<T>(p.mult);
            log_sum += ln_one_minus(z / p.a).scale(m);
            slope += (z - p.a).inv().scale(m);
        }
        let g = WideComplex::exp_of(log_sum);
        let scale = WideComplex::from_complex(self.factor);
        let (value, derivative) = match nearest {
            None => (g, g.mul(WideComplex::from_complex(slope))),
            Some(j) => {
                let p = d.points()[j];
                let t = Complex::new(T::one(), T::zero()) - z / p.a;
                let tw = WideComplex::from_complex(t);
                let m = mult::<T>(p.mult);
                let value = g.mul(tw.powi(p.mult));
                let bracket = -(p.a.inv().scale(m)) + t * slope;
                let derivative = g.mul(tw.powi(p.mult - 1)).mul(WideComplex::from_complex(bracket));
                (value, derivative)
            }
        };
        Jet { value: value.mul(scale), derivative: derivative.mul(scale) }
    }
}

impl<T: Scalar> Analytic<T> for CanonicalProduct<T> {
    fn jet(&self, z: Complex<T>) -> Option<Jet<T>> {
        Some(self.wide_jet(z))
    }
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<(), ProductError> {
    if lambda > T::one() && lambda.is_finite() {
        Ok(())
    } else {
        Err(ProductError::LambdaNotGreaterOne(lambda.to_f64().unwrap_or(f64::NAN)))
    }
}

const CLAIM1_MAX_TERMS: usize = 1_000_000;

/// `C(lambda) = prod_{l >= 0} (1 - lambda^{-(l + 1/2)})`, multiplied out until
/// the next factor differs from 1 by less than `1e-12`. If that takes more
/// than a million factors the rest is replaced by a lower bound, so the
/// returned value never exceeds the true constant by more than rounding.
pub fn claim1_constant<T: Scalar>(lambda: T) -> Result<T, ProductError> {
    check_lambda(lambda)?;
    let inv = lambda.recip();
    let mut x = inv.sqrt();
    let mut product = T::one();
    let mut l = 0;
    while x >= T::lit(1e-12) && l < CLAIM1_MAX_TERMS {
        product *= T::one() - x;
        x *= inv;
        l += 1;
    }
    if x >= T::lit(1e-12) {
        // remaining factors: ln(1 - y) >= -y / (1 - x) for y <= x
        let rest = x / (T::one() - inv);
        product *= (-rest / (T::one() - x)).exp();
    }
    Ok(product)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Claim1Report<T> {
    pub passed: bool,
    pub trials: usize,
    pub constant: T,
    /// Smallest tail-product modulus seen.
    pub min_observed: T,
    pub worst_index: usize,
}

/// Samples `n` and `p` with `|p| sqrt(lambda) < |a_n|` and checks
/// `|prod_{k >= n} (1 - p/a_k)| >= C(lambda)`.
pub fn claim1_check<T: Scalar>(
    d: &Divisor<T>,
    lambda: T,
    trials: usize,
    seed: u64,
) -> Result<Claim1Report<T>, ProductError> {
    check_lambda(lambda)?;
    let ratio = d.separation_ratio()?;
    if d.is_empty() || ratio < lambda * (T::one() - T::lit(1e-12)) {
        return Err(ProductError::SeparationViolated {
            ratio: ratio.to_f64().unwrap_or(f64::NAN),
            lambda: lambda.to_f64().unwrap_or(f64::NAN),
        });
    }
    let constant = claim1_constant(lambda)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_observed = T::infinity();
    let mut worst_index = 0;
    let root = lambda.sqrt();
    for _ in 0..trials {
        let n = rng.gen_range(0..d.len());
        let reach = d.points()[n].a.norm() / root;
        let radius = reach * T::lit(rng.gen::<f64>().sqrt());
        let angle = T::TAU() * T::lit(rng.gen::<f64>());
        let p = Complex::from_polar(radius, angle);
        let mut log_sum = tail_log(d, d.len(), p);
        for q in &d.points()[n..] {
            log_sum += ln_one_minus(p / q.a);
        }
        let modulus = log_sum.re.exp();
        if modulus < min_observed {
            min_observed = modulus;
            worst_index = n;
        }
    }
    let passed = trials == 0 || min_observed >= constant * (T::one() - T::lit(1e-12));
    Ok(Claim1Report { passed, trials, constant, min_observed, worst_index })
}

/// `prod_{l=0}^{s} (lambda^{1/2 + l} - 1)`.
pub fn claim2_minorant<T: Scalar>(lambda: T, s: u64) -> Result<T, ProductError> {
    check_lambda(lambda)?;
    let mut power = lambda.sqrt();
    let mut product = T::one();
    for _ in 0..=s {
        product *= power - T::one();
        power *= lambda;
    }
    Ok(product)
}

/// Smallest `s` with `claim2_minorant(lambda, s) >= level`.
pub fn claim2_threshold<T: Scalar>(lambda: T, level: T) -> Result<u64, ProductError> {
    check_lambda(lambda)?;
    const MAX_S: u64 = 1_000_000;
    let mut power = lambda.sqrt();
    let mut product = T::one();
    for s in 0..=MAX_S {
        product *= power - T::one();
        if product >= level {
            return Ok(s);
        }
        power *= lambda;
        if !power.is_finite() {
            break;
        }
    }
    Err(ProductError::NotReached(MAX_S))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;
    use crate::spherical::sph_deriv_of;

    /// sin(pi sqrt z) / (pi sqrt z), the closed form of prod (1 - z/k^2).
    fn sinc_oracle(z: Complex<f64>) -> Complex<f64> {
        let w = z.sqrt() * std::f64::consts::PI;
        w.sin() / w
    }

    #[test]
    fn squares_at_origin_and_known_points() {
        let d = Divisor::<f64>::squares(10_000);
        let e = eval_product(&d, c(0.0, 0.0), 1e-6).unwrap();
        assert_eq!(e.value, c(1.0, 0.0));
        assert_eq!(e.terms_used, 0);
        let e = eval_product(&d, c(0.25, 0.0), 1e-6).unwrap();
        assert!((e.value - c(2.0 / std::f64::consts::PI, 0.0)).norm() < 1e-6);
        let e = eval_product(&d, c(-1.0, 0.0), 1e-6).unwrap();
        let oracle = std::f64::consts::PI.sinh() / std::f64::consts::PI;
        assert!((e.value.re - oracle).abs() < 1e-6 * oracle);
    }

    #[test]
    fn support_point_gives_exact_zero() {
        let d = Divisor::<f64>::squares(100);
        let e = eval_product(&d, c(9.0, 0.0), 1e-6).unwrap();
        assert_eq!(e.value, c(0.0, 0.0));
        assert_eq!(e.terms_used, 3);
    }

    #[test]
    fn squares_match_closed_form_off_axis() {
        let d = Divisor::<f64>::squares(10_000);
        for z in [c(3.0, 4.0), c(-20.0, 7.0), c(49.0, 0.5), c(0.1, -30.0)] {
            let e = eval_product(&d, z, 1e-9).unwrap();
            let o = sinc_oracle(z);
            assert!((e.value - o).norm() <= 2e-9 * o.norm(), "z = {z}");
        }
    }

    #[test]
    fn finite_divisor_is_exact_product() {
        let d = Divisor::<f64>::simple(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]).unwrap();
        let z = c(0.5, 0.5);
        let e = eval_product(&d, z, 1e-9).unwrap();
        let one = c::<f64>(1.0, 0.0);
        let direct = (one - z) * (one - z / 2.0) * (one - z / 3.0);
        assert!((e.value - direct).norm() < 1e-14);
        assert_eq!(e.terms_used, 3);
    }

    #[test]
    fn unreachable_tolerance_is_reported() {
        let d = Divisor::<f64>::squares(10);
        let err = eval_product(&d, c(500.0, 0.0), 1e-6).unwrap_err();
        assert_eq!(err.name(), "TolUnreachable");
        assert_eq!(eval_product(&d, c(1.0, 0.0), 0.5).unwrap_err().name(), "InvalidTolerance");
    }

    #[test]
    fn derivative_at_squares() {
        // |F'(k^2)| = 1 / (2 k^2); sign (-1)^k from the closed form
        let d = Divisor::<f64>::squares(10_000);
        for k in [1usize, 3] {
            let e = product_derivative_at_support(&d, k - 1, 1e-8).unwrap();
            let kk = (k * k) as f64;
            let expected = if k % 2 == 0 { 1.0 } else { -1.0 } / (2.0 * kk);
            assert!((e.value.re - expected).abs() < 1e-6 * expected.abs(), "k = {k}: {}", e.value);
            assert!(e.value.im.abs() < 1e-12);
        }
        assert!((product_derivative_at_support(&d, 0, 1e-8).unwrap().value.norm() - 0.5).abs() < 1e-7);
        let third = product_derivative_at_support(&d, 2, 1e-8).unwrap().value.norm();
        assert!((third - 0.055556).abs() < 1e-6);
    }

    #[test]
    fn derivative_matches_finite_difference_on_geometric() {
        let d = Divisor::<f64>::geometric(4.0, c(1.0, 0.0), 30).unwrap();
        let n = 5;
        let a = d.points()[n].a;
        let fp = product_derivative_at_support(&d, n, 1e-10).unwrap().value;
        let h = 1e-6 * a.norm();
        let fd = (eval_product(&d, a + h, 1e-10).unwrap().value - eval_product(&d, a - h, 1e-10).unwrap().value)
            / (2.0 * h);
        assert!((fp - fd).norm() < 1e-5 * fp.norm(), "{fp} vs {fd}");
        // jet agrees too
        let jet = CanonicalProduct::new(d.clone()).wide_jet(a);
        assert!(jet.value.is_zero() || jet.value.to_complex().unwrap().norm() < 1e-12);
        assert!((jet.derivative.to_complex().unwrap() - fp).norm() < 1e-9 * fp.norm());
    }

    #[test]
    fn multiplicity_and_index_errors() {
        let d = Divisor::<f64>::new(vec![(c(1.0, 0.0), 2), (c(5.0, 0.0), 1)]).unwrap();
        assert_eq!(product_derivative_at_support(&d, 0, 1e-6).unwrap_err().name(), "MultiplicityNotOne");
        assert_eq!(product_derivative_at_support(&d, 7, 1e-6).unwrap_err().name(), "IndexOutOfRange");
    }

    #[test]
    fn jet_matches_eval_and_closed_form() {
        let p = CanonicalProduct::new(Divisor::<f64>::squares(10_000));
        for z in [c(2.0, 1.0), c(-5.0, 3.0), c(8.9, 0.01), c(1e-3, 0.0)] {
            let jet = p.wide_jet(z);
            let v = jet.value.to_complex().unwrap();
            assert!((v - sinc_oracle(z)).norm() < 1e-9 * (1.0 + v.norm()), "z = {z}");
            let h = 1e-5;
            let fd = (sinc_oracle(z + h) - sinc_oracle(z - h)) / (2.0 * h);
            let d = jet.derivative.to_complex().unwrap();
            assert!((d - fd).norm() < 1e-6 * (1.0 + d.norm()), "z = {z}: {d} vs {fd}");
        }
    }

    #[test]
    fn shifted_scaled_form() {
        let d = Divisor::<f64>::simple(&[c(16.0, 0.0), c(64.0, 0.0)]).unwrap();
        let p = CanonicalProduct::with_form(d, ProductForm::ShiftedScaled);
        let z = c(1.0, 2.0);
        let v = p.wide_jet(z).value.to_complex().unwrap();
        let direct = 3.0 * (z / 16.0 - 1.0) * (z / 64.0 - 1.0);
        assert!((v - direct).norm() < 1e-13);
        let fsharp = sph_deriv_of(&p, z).unwrap();
        assert!(fsharp > 0.0);
    }

    #[test]
    fn claim1_constants() {
        // oracle: direct partial products to 200 factors
        let oracle = |lam: f64| (0..200).map(|l| 1.0 - lam.powf(-(l as f64 + 0.5))).product::<f64>();
        for lam in [2.0, 4.0, 10.0] {
            assert!((claim1_constant(lam).unwrap() - oracle(lam)).abs() < 1e-11);
        }
        assert!((claim1_constant(4.0f64).unwrap() - 0.419422).abs() < 1e-6);
        assert!(claim1_constant(4.0f64).unwrap() >= 1.0 / 3.0);
        assert!((claim1_constant(2.0f64).unwrap() - 0.129898).abs() < 1e-6);
        assert!((claim1_constant(10.0f64).unwrap() - 0.659824).abs() < 1e-6);
        assert!(claim1_constant(1e6_f64).unwrap() > claim1_constant(1e3_f64).unwrap());
        assert!(claim1_constant(1e12_f64).unwrap() > 0.999);
        assert_eq!(claim1_constant(1.0f64).unwrap_err().name(), "LambdaNotGreaterOne");
        // slow convergence path stays a lower bound
        let slow = claim1_constant(1.00001f64).unwrap();
        assert!((0.0..1e-10).contains(&slow));
    }

    #[test]
    fn claim1_on_geometric_divisors() {
        for lam in [4.0, 10.0] {
            let d = Divisor::<f64>::geometric(lam, c(1.0, 0.0), 30).unwrap();
            let rep = claim1_check(&d, lam, 1000, 0).unwrap();
            assert!(rep.passed, "{rep:?}");
            assert!(rep.min_observed >= rep.constant);
        }
        let sq = Divisor::<f64>::squares(100);
        assert_eq!(claim1_check(&sq, 2.0, 10, 0).unwrap_err().name(), "SeparationViolated");
    }

    #[test]
    fn claim2_values() {
        assert_eq!(claim2_minorant(4.0f64, 0).unwrap(), 1.0);
        assert_eq!(claim2_minorant(4.0f64, 2).unwrap(), 217.0);
        assert_eq!(claim2_minorant(4.0f64, 3).unwrap(), 27_559.0);
        assert_eq!(claim2_minorant(4.0f64, 4).unwrap(), 14_082_649.0);
        assert_eq!(claim2_threshold(4.0f64, 1e6).unwrap(), 4);
        assert_eq!(claim2_minorant(0.5f64, 1).unwrap_err().name(), "LambdaNotGreaterOne");
    }
}
