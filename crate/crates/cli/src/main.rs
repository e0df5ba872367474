use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

mod commands;
mod experiments;
mod input;
mod output;

use output::Output;

/// Spherical derivatives, Brody verdicts, canonical products and Nevanlinna
/// characteristics.
#[derive(Parser, Debug)]
#[command(name = "brody", version)]
struct Cli {
    /// Print JSON instead of text or CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for randomised steps.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Value, derivative and f# of an expression at a point.
    Eval {
        #[arg(long)]
        expr: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
    },
    /// Numerical supremum of f# over a disk.
    Sup {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        center: String,
    },
    /// Hill-climb f# from seed points (CSV with header re,im) looking for growth.
    Witness {
        #[arg(long)]
        expr: String,
        #[arg(long)]
        seeds: String,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Decide the Brody property for a known family.
    #[command(subcommand)]
    Classify(ClassifyCommand),
    /// Canonical products over a divisor.
    #[command(subcommand)]
    Product(ProductCommand),
    /// Check or construct zero divisors.
    #[command(subcommand)]
    Divisor(DivisorCommand),
    /// Proximity, counting and characteristic functions.
    Nevanlinna(NevanlinnaArgs),
    /// Reproduce a named scenario end to end.
    Experiments {
        /// case1-table, two-exp-scan, k2-divisor, slow-divisor, growth-theorem or discussion-families.
        name: String,
    },
}

#[derive(Subcommand, Debug)]
enum ClassifyCommand {
    /// R(z) e^z + Q(z), with R and Q as {"num":[[re,im],..],"den":[..]}.
    ExpRational {
        #[arg(long = "R")]
        r: String,
        #[arg(long = "Q")]
        q: String,
    },
    /// e^z + e^(lambda z).
    TwoExp {
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
    },
    /// Whether multiplying by R preserves the Brody property.
    Product {
        #[arg(long = "R")]
        r: String,
        /// Also estimate the chordal Lipschitz constant of R with this budget.
        #[arg(long)]
        lipschitz_budget: Option<u64>,
    },
    /// Bounded-log-derivative heuristic for an arbitrary expression.
    LogDerivative {
        #[arg(long)]
        expr: String,
        #[arg(long, default_value_t = 30.0)]
        radius: f64,
        #[arg(long, default_value_t = 12_000)]
        budget: u64,
    },
}

#[derive(Subcommand, Debug)]
enum ProductCommand {
    /// F(z) to a relative tolerance.
    Eval {
        /// squares:N, geometric:RATIO:COUNT or a re,im,mult CSV file.
        #[arg(long)]
        divisor: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// F'(a_n) at a support point (0-based index in modulus order).
    Fprime {
        #[arg(long)]
        divisor: String,
        #[arg(long)]
        index: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Subcommand, Debug)]
enum DivisorCommand {
    /// Separation and direction hypotheses on a truncated divisor.
    Check {
        #[arg(long)]
        file: String,
        #[arg(long, default_value_t = 0.5)]
        tail: f64,
        #[arg(long, default_value_t = 0.3)]
        eps: f64,
    },
    /// Build a sparse divisor whose counting function stays below rho.
    Construct {
        /// logsq:C, pow:C:ALPHA, log:C or table:FILE.
        #[arg(long)]
        rho: String,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 1e12)]
        horizon: f64,
    },
}

#[derive(Args, Debug)]
struct NevanlinnaArgs {
    /// An entire function; its zeros inside the radii go in --zeros.
    #[arg(long, conflicts_with = "divisor")]
    expr: Option<String>,
    /// Zero divisor of --expr (re,im,mult CSV).
    #[arg(long, requires = "expr")]
    zeros: Option<String>,
    /// Use the canonical product over this divisor as f.
    #[arg(long)]
    divisor: Option<String>,
    /// Product normalisation for --divisor: canonical or shifted-scaled.
    #[arg(long, default_value = "canonical")]
    form: String,
    #[arg(long)]
    radii: String,
    /// Omit the 1/(2 pi) in the proximity function.
    #[arg(long, visible_alias = "unnormalized")]
    paper_normalization: bool,
    #[arg(long, default_value_t = 512)]
    quad: usize,
}

/// An error with a stable name and the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub name: &'static str,
    pub message: String,
    pub exit: u8,
}

const VALIDATION: &[&str] = &[
    "SyntaxError",
    "InvalidArgument",
    "InvalidTolerance",
    "MalformedDivisor",
    "MalformedInput",
    "Io",
    "ZeroInSupport",
    "InvalidMultiplicity",
    "NonFinite",
    "NotUnitModulus",
    "MultiplicityNotOne",
    "IndexOutOfRange",
    "LambdaNotGreaterOne",
    "ZeroDenominator",
    "ZeroFunction",
    "NonFiniteCoefficient",
    "DegreeTooLarge",
    "UnknownExperiment",
];

impl CliError {
    pub fn usage(name: &'static str, message: impl Into<String>) -> Self {
        CliError { name, message: message.into(), exit: 2 }
    }

    pub fn numeric(name: &'static str, message: impl Into<String>) -> Self {
        CliError { name, message: message.into(), exit: 3 }
    }

    /// A library error raised while reading input; always a validation error.
    pub fn input(e: impl Into<brody_core::Error>) -> Self {
        let e = e.into();
        CliError::usage(e.name(), e.to_string())
    }
}

impl From<brody_core::Error> for CliError {
    fn from(e: brody_core::Error) -> Self {
        let name = e.name();
        let exit = if VALIDATION.contains(&name) { 2 } else { 3 };
        CliError { name, message: e.to_string(), exit }
    }
}

macro_rules! from_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                brody_core::Error::from(e).into()
            }
        }
    )*};
}

from_core!(
    brody_core::SyntaxError,
    brody_core::AlgebraError,
    brody_core::SphericalError,
    brody_core::ClassifyError,
    brody_core::ProductError,
    brody_core::DivisorError,
    brody_core::NevanlinnaError
);

fn run(cli: &Cli) -> Result<Output, CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Eval { expr, z } => commands::eval(expr, z),
        Command::Sup { expr, radius, budget, center } => commands::sup(expr, *radius, *budget, center),
        Command::Witness { expr, seeds, steps } => commands::witness(expr, seeds, *steps),
        Command::Classify(c) => match c {
            ClassifyCommand::ExpRational { r, q } => commands::classify_exp_rational(r, q),
            ClassifyCommand::TwoExp { lambda } => commands::classify_two_exp(lambda),
            ClassifyCommand::Product { r, lipschitz_budget } => commands::classify_product(r, *lipschitz_budget),
            ClassifyCommand::LogDerivative { expr, radius, budget } => {
                commands::classify_log_derivative(expr, *radius, *budget)
            }
        },
        Command::Product(p) => match p {
            ProductCommand::Eval { divisor, z, tol } => commands::product_eval(divisor, z, *tol),
            ProductCommand::Fprime { divisor, index, tol } => commands::product_fprime(divisor, *index, *tol),
        },
        Command::Divisor(d) => match d {
            DivisorCommand::Check { file, tail, eps } => commands::divisor_check(file, *tail, *eps),
            DivisorCommand::Construct { rho, count, horizon } => commands::divisor_construct(rho, *count, *horizon),
        },
        Command::Nevanlinna(a) => commands::nevanlinna(
            a.expr.as_deref(),
            a.zeros.as_deref(),
            a.divisor.as_deref(),
            &a.form,
            &a.radii,
            a.paper_normalization,
            a.quad,
        ),
        Command::Experiments { name } => experiments::run(name, seed),
    }
}

fn emit(cli: &Cli, text: &str) -> std::io::Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            let text = if cli.json { out.json_text() } else { out.text };
            match emit(&cli, &text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("{}", json!({"error": "Io", "message": e.to_string()}));
                    ExitCode::from(2)
                }
            }
        }
        Err(e) => {
            let body = json!({"error": e.name, "message": e.message});
            if cli.json {
                println!("{body}");
            } else {
                eprintln!("{body}");
            }
            ExitCode::from(e.exit)
        }
    }
}
