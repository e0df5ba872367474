//! Property suites shared by the property tests and the acceptance run.
//! Each suite runs `CASES` random cases from a runner seeded with zeros.

#![allow(dead_code)]

use brody_core::divisors::Divisor;
use brody_core::expr::Expr;
use brody_core::products::claim1_check;
use brody_core::spherical::{h, sph_deriv};
use brody_core::ExtendedComplex;
use num_complex::Complex;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const CASES: u32 = 1000;

pub fn runner() -> TestRunner {
    let config = Config { cases: CASES, failure_persistence: None, max_global_rejects: 20_000, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[0; 32]))
}

fn run<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

fn point(max_modulus: f64) -> impl Strategy<Value = Complex<f64>> {
    (0.0..1.0f64, 0.0..std::f64::consts::TAU).prop_map(move |(u, t)| Complex::from_polar(max_modulus * u.sqrt(), t))
}

/// Points with log-uniform modulus in `[1e-4, 1e4]`.
fn wide_point() -> impl Strategy<Value = Complex<f64>> {
    (-4.0..4.0f64, 0.0..std::f64::consts::TAU).prop_map(|(e, t)| Complex::from_polar(10f64.powf(e), t))
}

fn constant() -> impl Strategy<Value = Expr<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Expr::Const(Complex::new(re, im)))
}

/// Expression trees of depth at most 4 over `z`, constants, the four
/// operations, small powers and `exp`.
pub fn expression() -> impl Strategy<Value = Expr<f64>> {
    let leaf = prop_oneof![Just(Expr::Z), constant()];
    leaf.prop_recursive(4, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::div(a, b)),
            (inner.clone(), 2u32..=3).prop_map(|(a, n)| Expr::pow(a, n)),
            inner.prop_map(Expr::exp),
        ]
    })
}

/// `0 <= h(w) <= 1/2`, with equality exactly when `|w| = 1`.
pub fn h_bounded() -> Result<(), String> {
    run((wide_point(), 0.0..std::f64::consts::TAU), |(w, t)| {
        let v = h(ExtendedComplex::Finite(w));
        prop_assert!((0.0..=0.5).contains(&v), "h({w}) = {v}");
        if v == 0.5 {
            prop_assert!((w.norm() - 1.0).abs() < 1e-7, "h({w}) = 1/2 off the unit circle");
        }
        let on_circle = h(ExtendedComplex::Finite(Complex::from_polar(1.0, t)));
        prop_assert!((on_circle - 0.5).abs() <= 1e-15, "h = {on_circle} on the unit circle");
        Ok(())
    })
}

/// `h(lambda w) <= lambda h(w)` for `lambda > 1`.
pub fn h_scaling() -> Result<(), String> {
    run((wide_point(), 1.0..=10.0f64), |(w, lambda)| {
        prop_assume!(lambda > 1.0);
        let lhs = h(ExtendedComplex::Finite(w * lambda));
        let rhs = lambda * h(ExtendedComplex::Finite(w));
        prop_assert!(lhs <= rhs * (1.0 + 4.0 * f64::EPSILON), "w={w} lambda={lambda}: {lhs} > {rhs}");
        Ok(())
    })
}

/// `(1/f)# = f#`, for `exp(z) + 1` and for random expressions.
pub fn chordal_symmetry() -> Result<(), String> {
    let f: Expr<f64> = "exp(z)+1".parse().unwrap();
    let g = f.reciprocal();
    run(point(5.0), |z| {
        let (a, b) = (sph_deriv(&f, z).unwrap(), sph_deriv(&g, z).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-300), "z={z}: {a} vs {b}");
        Ok(())
    })?;
    run((expression(), point(2.0)), |(f, z)| {
        let v = f.eval(z).value.finite();
        prop_assume!(v.is_some_and(|v| v.norm() > 1e-6 && v.norm() < 1e6));
        let (a, b) = (sph_deriv(&f, z), sph_deriv(&f.reciprocal(), z));
        prop_assume!(a.is_ok() && b.is_ok());
        let (a, b) = (a.unwrap(), b.unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1e-300), "f={f} z={z}: {a} vs {b}");
        Ok(())
    })
}

fn value(f: &Expr<f64>, z: Complex<f64>) -> Option<Complex<f64>> {
    let e = f.eval(z);
    e.value.finite().filter(|_| !e.flags.overflow && !e.flags.indeterminate)
}

/// Symbolic derivative against a fourth-order central difference, within
/// `1e-4` relative.
pub fn derivative_vs_difference() -> Result<(), String> {
    run((expression(), point(2.0)), |(f, z)| {
        let df = f.differentiate();
        let step = 1e-3;
        let at = |k: f64| value(&f, z + Complex::new(k * step, 0.0));
        let samples = [at(-2.0), at(-1.0), at(1.0), at(2.0)];
        let f0 = value(&f, z);
        prop_assume!(f0.is_some_and(|v| v.norm() < 1e6) && samples.iter().all(Option::is_some));
        let [m2, m1, p1, p2] = samples.map(Option::unwrap);
        let fd = (8.0 * (p1 - m1) - (p2 - m2)) / (12.0 * step);
        let exact = value(&df, z);
        prop_assume!(exact.is_some());
        let exact = exact.unwrap();
        // near a pole the difference quotient itself is unreliable
        prop_assume!(exact.norm() < 1e4);
        let scale = exact.norm().max(1.0);
        prop_assert!((fd - exact).norm() <= 1e-4 * scale, "f={f} f'={df} z={z}: {exact} vs {fd}");
        Ok(())
    })
}

/// The tail-product lower bound on geometric divisors with ratio
/// `lambda in {2, 4, 10}`; each ratio gets `CASES` samples.
pub fn claim1_lower_bound() -> Result<(), String> {
    for (lambda, count) in [(2.0f64, 60usize), (4.0, 40), (10.0, 30)] {
        let turn = Complex::from_polar(1.0, 0.7);
        let d = Divisor::geometric(lambda, turn, count).map_err(|e| e.to_string())?;
        let report = claim1_check(&d, lambda, CASES as usize, 0).map_err(|e| e.to_string())?;
        if !report.passed {
            return Err(format!("lambda={lambda}: min {} below C = {}", report.min_observed, report.constant));
        }
    }
    Ok(())
}
