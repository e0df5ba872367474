//! One function per subcommand.

use brody_core::classify::{self, Evidence};
use brody_core::divisors::construct_slow;
use brody_core::nevanlinna::{self, Normalization};
use brody_core::products::{eval_product, product_derivative_at_support};
use brody_core::spherical::{sph_deriv, sup_search_disk, witness_search};
use brody_core::{CanonicalProduct, Divisor, ExprFunction, ExtendedComplex, ProductForm};
use serde_json::{json, Value};

use crate::output::{csv_table, Output};
use crate::{input, CliError};

fn ext(v: ExtendedComplex<f64>) -> Value {
    match v {
        ExtendedComplex::Finite(z) => json!([z.re, z.im]),
        ExtendedComplex::Infinity => json!("inf"),
    }
}

pub fn eval(src: &str, z: &str) -> Result<Output, CliError> {
    let f = input::expr(src)?;
    let z = input::complex(z)?;
    let df = f.differentiate();
    let e = f.eval(z);
    let d = df.eval(z);
    let sph = sph_deriv(&f, z)?;
    Ok(Output::from_value(json!({
        "expr": f.to_string(),
        "derivative": df.to_string(),
        "z": [z.re, z.im],
        "value": ext(e.value),
        "derivative_value": ext(d.value),
        "sph": sph,
        "overflow": e.flags.overflow || d.flags.overflow,
        "indeterminate": e.flags.indeterminate || d.flags.indeterminate,
    })))
}

pub fn sup(src: &str, radius: f64, budget: u64, center: &str) -> Result<Output, CliError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::usage("InvalidArgument", "radius must be positive and finite"));
    }
    if budget < 1000 {
        return Err(CliError::usage("InvalidArgument", "budget must be at least 1000"));
    }
    let f = ExprFunction::new(input::expr(src)?);
    let center = input::complex(center)?;
    Ok(Output::from_value(sup_search_disk(&f, center, radius, budget)))
}

pub fn witness(src: &str, seeds: &str, steps: usize) -> Result<Output, CliError> {
    if steps == 0 {
        return Err(CliError::usage("InvalidArgument", "steps must be at least 1"));
    }
    let f = ExprFunction::new(input::expr(src)?);
    let seeds = input::points_csv(seeds)?;
    let found = witness_search(&f, &seeds, steps);
    let text = match &found {
        Some(seq) => csv_table(
            &["re", "im", "sph"],
            seq.points.iter().map(|p| vec![p.z.re.to_string(), p.z.im.to_string(), p.value.to_string()]),
        ),
        None => "no growth detected\n".to_string(),
    };
    Ok(Output::with_text(json!({ "found": found.is_some(), "sequence": found }), text))
}

pub fn classify_exp_rational(r: &str, q: &str) -> Result<Output, CliError> {
    let (r, q) = (input::rational(r)?, input::rational(q)?);
    Ok(verdict_output(classify::classify_exp_rational(&r, &q)))
}

pub fn classify_two_exp(lambda: &str) -> Result<Output, CliError> {
    Ok(verdict_output(classify::classify_two_exponentials(input::complex(lambda)?)))
}

pub fn classify_log_derivative(src: &str, radius: f64, budget: u64) -> Result<Output, CliError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CliError::usage("InvalidArgument", "radius must be positive and finite"));
    }
    Ok(verdict_output(classify::log_derivative_brody_rule(&input::expr(src)?, radius, budget)))
}

fn verdict_output(v: brody_core::BrodyVerdict) -> Output {
    let mut text = format!("status: {:?}\nreason: {}\n", v.status, v.reason);
    match &v.evidence {
        Evidence::None => {}
        Evidence::Bound { value } => text.push_str(&format!("bound: {value}\n")),
        Evidence::Witness { points } => {
            for p in points {
                text.push_str(&format!("witness: z={} sph={}\n", p.z, p.value));
            }
        }
        Evidence::Zeros { zeros } => {
            for w in zeros {
                text.push_str(&format!("zero: k={} z={} |f'|={}\n", w.k, w.z, w.sph));
            }
        }
        Evidence::Annuli { maxima } => {
            let m: Vec<String> = maxima.iter().map(|x| x.to_string()).collect();
            text.push_str(&format!("annulus maxima: {}\n", m.join(",")));
        }
    }
    Output::with_text(v, text)
}

pub fn classify_product(r: &str, lipschitz_budget: Option<u64>) -> Result<Output, CliError> {
    let r = input::rational(r)?;
    let rule = classify::product_rule(&r);
    let lipschitz = match lipschitz_budget {
        Some(b) => Some(classify::rational_sphere_lipschitz(&r, b)?),
        None => None,
    };
    let mut value = serde_json::to_value(&rule).expect("serializes");
    value["value_at_infinity"] = ext(rule.value_at_infinity);
    value["lipschitz"] = json!(lipschitz);
    Ok(Output::from_value(value))
}

pub fn product_eval(divisor: &str, z: &str, tol: f64) -> Result<Output, CliError> {
    let d = input::divisor(divisor)?;
    let z = input::complex(z)?;
    let e = eval_product(&d, z, tol)?;
    Ok(Output::from_value(json!({
        "z": [z.re, z.im],
        "value": [e.value.re, e.value.im],
        "terms_used": e.terms_used,
        "tail_bound": e.tail_bound,
    })))
}

pub fn product_fprime(divisor: &str, index: usize, tol: f64) -> Result<Output, CliError> {
    let d = input::divisor(divisor)?;
    let e = product_derivative_at_support(&d, index, tol)?;
    let a = d.points()[index].a;
    Ok(Output::from_value(json!({
        "index": index,
        "a": [a.re, a.im],
        "value": [e.value.re, e.value.im],
        "modulus": e.value.norm(),
        "terms_used": e.terms_used,
        "tail_bound": e.tail_bound,
    })))
}

pub fn divisor_check(file: &str, tail: f64, eps: f64) -> Result<Output, CliError> {
    if !(tail > 0.0 && tail <= 1.0) || !(eps > 0.0 && eps < std::f64::consts::PI) {
        return Err(CliError::usage("InvalidArgument", "need 0 < tail <= 1 and 0 < eps < pi"));
    }
    let d = input::divisor(file)?;
    let v = d.theorem_verdict(tail, eps)?;
    let mut value = serde_json::to_value(&v).expect("serializes");
    value["points"] = json!(d.len());
    Ok(Output::from_value(value))
}

pub fn divisor_construct(rho: &str, count: usize, horizon: f64) -> Result<Output, CliError> {
    let rho = input::growth(rho)?;
    let d = construct_slow(&rho, count, horizon)?;
    let points: Vec<Value> = d.points().iter().map(|p| json!([p.a.re, p.a.im, p.mult])).collect();
    Ok(Output::with_text(json!({ "rho": rho.to_string(), "count": count, "points": points }), d.to_csv_string()))
}

pub fn form(name: &str) -> Result<ProductForm, CliError> {
    match name {
        "canonical" => Ok(ProductForm::Canonical),
        "shifted-scaled" => Ok(ProductForm::ShiftedScaled),
        other => Err(CliError::usage("InvalidArgument", format!("unknown product form '{other}'"))),
    }
}

pub fn nevanlinna_table(report: &brody_core::NevanlinnaReport) -> String {
    csv_table(
        &["r", "m", "N", "T"],
        report.samples.iter().map(|s| vec![s.r.to_string(), s.m.to_string(), s.n.to_string(), s.t.to_string()]),
    )
}

pub fn nevanlinna(
    expr: Option<&str>,
    zeros: Option<&str>,
    divisor: Option<&str>,
    form_name: &str,
    radii: &str,
    paper_normalization: bool,
    quad: usize,
) -> Result<Output, CliError> {
    let radii = input::real_list(radii)?;
    let normalization = if paper_normalization { Normalization::Unnormalized } else { Normalization::Standard };
    let report = match (expr, divisor) {
        (Some(src), None) => {
            let f = ExprFunction::new(input::expr(src)?);
            let d = match zeros {
                Some(path) => input::divisor(path)?,
                None => Divisor::simple(&[]).expect("empty divisor"),
            };
            nevanlinna::characteristic(&f, &d, &radii, quad, normalization)?
        }
        (None, Some(path)) => {
            let d = input::divisor(path)?;
            let f = CanonicalProduct::with_form(d.clone(), form(form_name)?);
            nevanlinna::characteristic(&f, &d, &radii, quad, normalization)?
        }
        _ => return Err(CliError::usage("InvalidArgument", "give exactly one of --expr or --divisor")),
    };
    let order = nevanlinna::order_estimate(&report).ok();
    let text = nevanlinna_table(&report);
    let mut value = serde_json::to_value(&report).expect("serializes");
    value["order"] = json!(order);
    Ok(Output::with_text(value, text))
}
