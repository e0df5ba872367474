//! End-to-end scenarios, each writing one report.

use brody_core::classify::{self, BrodyStatus};
use brody_core::divisors::construct_slow;
use brody_core::nevanlinna::{self, Normalization};
use brody_core::products::{eval_product, product_derivative_at_support};
use brody_core::spherical::sup_search;
use brody_core::{CanonicalProduct, Complex64, Divisor, GrowthBound, Polynomial, ProductForm, RationalFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::output::{csv_table, Output};
use crate::CliError;

pub const NAMES: [&str; 6] =
    ["case1-table", "two-exp-scan", "k2-divisor", "slow-divisor", "growth-theorem", "discussion-families"];

pub fn run(name: &str, seed: u64) -> Result<Output, CliError> {
    match name {
        "case1-table" => Ok(case1_table()),
        "two-exp-scan" => two_exp_scan(),
        "k2-divisor" => k2_divisor(seed),
        "slow-divisor" => slow_divisor(),
        "growth-theorem" => growth_theorem(),
        "discussion-families" => Ok(discussion_families()),
        other => Err(CliError::usage(
            "UnknownExperiment",
            format!("unknown experiment '{other}'; expected one of {}", NAMES.join(", ")),
        )),
    }
}

fn poly(coeffs: &[f64]) -> RationalFunction {
    RationalFunction::polynomial(Polynomial::from_real(coeffs))
}

fn ratio(num: &[f64], den: &[f64]) -> RationalFunction {
    RationalFunction::new(Polynomial::from_real(num), Polynomial::from_real(den)).expect("nonzero denominator")
}

fn status(s: BrodyStatus) -> &'static str {
    match s {
        BrodyStatus::Brody => "Brody",
        BrodyStatus::NotBrody => "NotBrody",
        BrodyStatus::Unknown => "Unknown",
    }
}

/// `(R, Q)` pairs for `R e^z + Q`.
pub fn case1_pairs() -> Vec<(RationalFunction, RationalFunction)> {
    vec![
        (poly(&[1.0]), poly(&[0.0, 1.0])),
        (poly(&[0.0, 1.0]), poly(&[0.0, 1.0])),
        (poly(&[0.0, 1.0]), RationalFunction::zero()),
        (poly(&[1.0]), poly(&[1.0])),
        (RationalFunction::zero(), poly(&[0.0, 0.0, 0.0, 1.0])),
        (RationalFunction::zero(), ratio(&[1.0], &[0.0, 1.0])),
        (poly(&[1.0]), ratio(&[0.0, 1.0], &[1.0, 1.0])),
        (poly(&[1.0]), ratio(&[0.0, 1.0], &[1.0, -2.0])),
        (poly(&[0.0, 0.0, 1.0]), ratio(&[1.0, 0.0, 1.0], &[-3.0, 1.0])),
        (ratio(&[1.0], &[-1.0, 1.0]), poly(&[0.0, 0.0, 1.0])),
        (poly(&[1.0, 1.0]), poly(&[1.0, 0.0, 1.0])),
        (poly(&[2.0]), ratio(&[0.0, 0.0, 1.0], &[-3.0, 1.0])),
    ]
}

fn case1_table() -> Output {
    let rows: Vec<_> = case1_pairs()
        .iter()
        .map(|(r, q)| {
            let v = classify::classify_exp_rational(r, q);
            let f = brody_core::Expr::exp_rational(r, q).to_string();
            (f, status(v.status), v.reason)
        })
        .collect();
    let text = csv_table(&["f", "status", "reason"], rows.iter().map(|(f, s, r)| vec![f.clone(), s.to_string(), r.clone()]));
    let json: Vec<_> = rows.iter().map(|(f, s, r)| json!({"f": f, "status": s, "reason": r})).collect();
    Output::with_text(json, text)
}

pub fn two_exp_lambdas() -> Vec<Complex64> {
    [(2.0, 0.0), (-2.0, 0.0), (1.0, 0.0), (-1.0, 0.0), (0.5, 0.0), (-0.5, 0.0), (0.0, 1.0), (0.0, -1.0), (1.0, 1.0), (1.0, -1.0), (0.0, 2.0)]
        .iter()
        .map(|&(re, im)| Complex64::new(re, im))
        .collect()
}

fn two_exp_scan() -> Result<Output, CliError> {
    let mut rows = Vec::new();
    for lambda in two_exp_lambdas() {
        let v = classify::classify_two_exponentials(lambda);
        let bound = classify::two_exp_bound(lambda).ok();
        let growth = classify::two_exp_slope_ratio(lambda).ok();
        rows.push((lambda, status(v.status), bound, growth));
    }
    let fmt = |x: Option<f64>| x.map_or(String::new(), |x| x.to_string());
    let text = csv_table(
        &["lambda_re", "lambda_im", "status", "bound", "slope_ratio"],
        rows.iter().map(|(l, s, b, g)| vec![l.re.to_string(), l.im.to_string(), s.to_string(), fmt(*b), fmt(*g)]),
    );
    let json: Vec<_> = rows
        .iter()
        .map(|(l, s, b, g)| json!({"lambda": [l.re, l.im], "status": s, "bound": b, "slope_ratio": g}))
        .collect();
    Ok(Output::with_text(json, text))
}

fn sinc_sqrt(z: Complex64) -> Complex64 {
    let w = z.sqrt() * std::f64::consts::PI;
    w.sin() / w
}

pub const K2_SUPPORT: usize = 4000;
/// Explicit support for the sup search; the power-sum tail keeps the
/// truncation error near `1e-8` at `|z| = 800`.
pub const K2_SUP_SUPPORT: usize = 1000;
pub const K2_SUP_BUDGET: u64 = 30_000;
pub const K2_RADII: [f64; 3] = [50.0, 200.0, 800.0];

fn k2_divisor(seed: u64) -> Result<Output, CliError> {
    let d = Divisor::squares(K2_SUPPORT);
    let mut fprime = Vec::new();
    for k in 1..=20usize {
        let e = product_derivative_at_support(&d, k - 1, 1e-9)?;
        let closed = 1.0 / (2.0 * (k * k) as f64);
        fprime.push((k, e.value.re, closed, (e.value.norm() - closed).abs() / closed));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let z = Complex64::from_polar(50.0 * rng.gen::<f64>().sqrt(), std::f64::consts::TAU * rng.gen::<f64>());
        let v = eval_product(&d, z, 1e-9)?.value;
        let c = sinc_sqrt(z);
        worst = worst.max((v - c).norm() / c.norm());
    }
    let f = CanonicalProduct::new(Divisor::squares(K2_SUP_SUPPORT));
    let sups: Vec<_> = K2_RADII.iter().map(|&r| sup_search(&f, r, K2_SUP_BUDGET)).collect();
    let mut text = csv_table(
        &["k", "fprime", "closed_form", "rel_err"],
        fprime.iter().map(|(k, v, c, e)| vec![k.to_string(), v.to_string(), c.to_string(), e.to_string()]),
    );
    text.push('\n');
    text.push_str(&csv_table(
        &["radius", "max_sph", "argmax_re", "argmax_im"],
        sups.iter().map(|s| vec![s.radius.to_string(), s.max_value.to_string(), s.argmax.re.to_string(), s.argmax.im.to_string()]),
    ));
    let json = json!({
        "fprime": fprime.iter().map(|(k, v, c, e)| json!({"k": k, "fprime": v, "closed_form": c, "rel_err": e})).collect::<Vec<_>>(),
        "product_vs_closed_form_max_rel_err": worst,
        "seed": seed,
        "sup": sups,
    });
    Ok(Output::with_text(json, text))
}

fn log_radii(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn slow_divisor() -> Result<Output, CliError> {
    let rho = GrowthBound::LogSquared { c: 1.0 };
    let d = construct_slow(&rho, 30, 1e12)?;
    let verdict = d.theorem_verdict(0.5, 0.3)?;
    let f = CanonicalProduct::with_form(d.clone(), ProductForm::ShiftedScaled);
    let report = nevanlinna::characteristic(&f, &d, &log_radii(1.0, 1e6, 200), 256, Normalization::Standard)?;
    let rows: Vec<_> = report.samples.iter().map(|s| (s.r, s.m, s.n, s.t, rho.eval(s.r))).collect();
    let text = csv_table(
        &["r", "m", "N", "T", "rho", "ok"],
        rows.iter().map(|(r, m, n, t, p)| {
            vec![r.to_string(), m.to_string(), n.to_string(), t.to_string(), p.to_string(), (t <= p).to_string()]
        }),
    );
    let json = json!({
        "divisor": d.points().iter().map(|p| [p.a.re, p.a.im]).collect::<Vec<_>>(),
        "verdict": verdict,
        "samples": rows.iter().map(|(r, m, n, t, p)| json!({"r": r, "m": m, "N": n, "T": t, "rho": p})).collect::<Vec<_>>(),
        "all_below_rho": rows.iter().all(|(_, _, _, t, p)| t <= p),
    });
    Ok(Output::with_text(json, text))
}

fn growth_theorem() -> Result<Output, CliError> {
    let rho = GrowthBound::Log { c: 2.0 };
    let precondition = match construct_slow(&rho, 3, 1e12) {
        Ok(_) => "passed".to_string(),
        Err(e) => format!("{}: {e}", e.name()),
    };
    let zeros: Vec<Complex64> =
        (0..3).map(|k| Complex64::from_polar(2.0, std::f64::consts::TAU * k as f64 / 3.0)).collect();
    let d = Divisor::simple(&zeros)?;
    let f = CanonicalProduct::new(d.clone());
    let report = nevanlinna::characteristic(&f, &d, &log_radii(1.0, 1e4, 100), 256, Normalization::Standard)?;
    let rows: Vec<_> = report.samples.iter().map(|s| (s.r, s.t, rho.eval(s.r))).collect();
    let first_violation = rows.iter().find(|(_, t, p)| t > p).map(|r| r.0);
    let last_violation = rows.iter().rev().find(|(_, t, p)| t > p).map(|r| r.0);
    let text = csv_table(
        &["r", "T", "rho", "violated"],
        rows.iter().map(|(r, t, p)| vec![r.to_string(), t.to_string(), p.to_string(), (t > p).to_string()]),
    );
    let json = json!({
        "precondition": precondition,
        "samples": rows.iter().map(|(r, t, p)| json!({"r": r, "T": t, "rho": p})).collect::<Vec<_>>(),
        "first_violation": first_violation,
        "last_violation": last_violation,
    });
    Ok(Output::with_text(json, text))
}

pub const FAMILY_GRID: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

fn discussion_families() -> Output {
    let mut rows = Vec::new();
    for &s in &FAMILY_GRID {
        for &t in &FAMILY_GRID {
            let r = poly(&[s]);
            let q = ratio(&[0.0, 1.0], &[-1.0, t]);
            let v = classify::classify_exp_rational(&r, &q);
            let expected = s == 0.0 || t != 0.0;
            rows.push((s, t, status(v.status), expected == (v.status == BrodyStatus::Brody)));
        }
    }
    let text = csv_table(
        &["s", "t", "status", "matches_rule"],
        rows.iter().map(|(s, t, v, m)| vec![s.to_string(), t.to_string(), v.to_string(), m.to_string()]),
    );
    let json: Vec<_> = rows.iter().map(|(s, t, v, m)| json!({"s": s, "t": t, "status": v, "matches_rule": m})).collect();
    Output::with_text(json, text)
}
