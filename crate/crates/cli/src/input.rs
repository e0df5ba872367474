//! Parsers for command-line values.

use std::path::Path;

use brody_core::divisors::Divisor as GenericDivisor;
use brody_core::expr::Expr as GenericExpr;
use brody_core::{Complex64, Divisor, Expr, GrowthBound, RationalFunction};

use crate::CliError;

pub fn expr(src: &str) -> Result<Expr, CliError> {
    src.parse::<Expr>().map_err(|e| CliError::usage("SyntaxError", e.to_string()))
}

fn mentions_z(e: &Expr) -> bool {
    match e {
        GenericExpr::Const(_) => false,
        GenericExpr::Z => true,
        GenericExpr::Add(a, b) | GenericExpr::Sub(a, b) | GenericExpr::Mul(a, b) | GenericExpr::Div(a, b) => {
            mentions_z(a) || mentions_z(b)
        }
        GenericExpr::Neg(a) | GenericExpr::Pow(a, _) | GenericExpr::Exp(a) => mentions_z(a),
    }
}

/// `a+bi`, `-2`, `1i`, `1e12` and so on: any constant expression or a plain
/// float.
pub fn complex(src: &str) -> Result<Complex64, CliError> {
    if let Ok(x) = src.trim().parse::<f64>() {
        return Ok(Complex64::new(x, 0.0));
    }
    let bad = || CliError::usage("InvalidArgument", format!("'{src}' is not a complex constant"));
    let e = expr(src)?;
    if mentions_z(&e) {
        return Err(bad());
    }
    e.eval(Complex64::new(0.0, 0.0)).value.finite().ok_or_else(bad)
}

pub fn rational(src: &str) -> Result<RationalFunction, CliError> {
    serde_json::from_str(src).map_err(|e| CliError::usage("InvalidArgument", format!("rational function JSON: {e}")))
}

/// `squares:N`, `geometric:RATIO:COUNT`, or the path of a `re,im,mult` CSV.
pub fn divisor(src: &str) -> Result<Divisor, CliError> {
    let bad = || CliError::usage("InvalidArgument", format!("unrecognised divisor '{src}'"));
    if let Some(n) = src.strip_prefix("squares:") {
        let n: usize = n.parse().map_err(|_| bad())?;
        return Ok(GenericDivisor::squares(n));
    }
    if let Some(rest) = src.strip_prefix("geometric:") {
        let (ratio, count) = rest.split_once(':').ok_or_else(bad)?;
        let ratio: f64 = ratio.parse().map_err(|_| bad())?;
        let count: usize = count.parse().map_err(|_| bad())?;
        return GenericDivisor::geometric(ratio, Complex64::new(1.0, 0.0), count).map_err(CliError::input);
    }
    GenericDivisor::from_csv_path(Path::new(src)).map_err(CliError::input)
}

pub fn growth(src: &str) -> Result<GrowthBound, CliError> {
    src.parse::<GrowthBound>().map_err(CliError::input)
}

/// Comma-separated reals.
pub fn real_list(src: &str) -> Result<Vec<f64>, CliError> {
    src.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| CliError::usage("InvalidArgument", format!("'{s}' is not a number")))
        })
        .collect()
}

/// Points from a CSV with header `re,im`.
pub fn points_csv(path: &str) -> Result<Vec<Complex64>, CliError> {
    #[derive(serde::Deserialize)]
    struct Row {
        re: f64,
        im: f64,
    }
    let io = |e: csv::Error| CliError::usage("MalformedInput", format!("{path}: {e}"));
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path).map_err(io)?;
    rdr.deserialize::<Row>().map(|r| r.map(|r| Complex64::new(r.re, r.im)).map_err(io)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(complex("0+1i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(complex("1-2i").unwrap(), Complex64::new(1.0, -2.0));
        assert_eq!(complex("-0.5").unwrap(), Complex64::new(-0.5, 0.0));
        assert_eq!(complex("1e12").unwrap(), Complex64::new(1e12, 0.0));
        assert_eq!(complex("z+1").unwrap_err().name, "InvalidArgument");
        assert_eq!(complex("1+").unwrap_err().name, "SyntaxError");
    }

    #[test]
    fn divisor_specs() {
        assert_eq!(divisor("squares:10").unwrap().len(), 10);
        assert_eq!(divisor("geometric:2:5").unwrap().len(), 5);
        assert_eq!(divisor("cubes:3").unwrap_err().exit, 2);
    }
}
