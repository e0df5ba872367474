//! Zero divisors: finite ordered support with multiplicities, growth
//! functions, the separation and direction hypotheses, and a generator for
//! slowly growing divisors with dense directions.

use std::cmp::Ordering;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{is_finite_complex, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DivisorError {
    #[error("support point at the origin")]
    ZeroInSupport,
    #[error("multiplicity must be at least 1 (row {index})")]
    InvalidMultiplicity { index: usize },
    #[error("non-finite support point (row {index})")]
    NonFinite { index: usize },
    #[error("support point {index} has multiplicity {mult}; only simple zeros are allowed here")]
    MultiplicityNotOne { index: usize, mult: u32 },
    #[error("direction {index} has modulus {modulus}, not 1")]
    NotUnitModulus { index: usize, modulus: f64 },
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed divisor file: {0}")]
    Csv(String),
    #[error("{0}")]
    Io(String),
}

impl DivisorError {
    pub fn name(&self) -> &'static str {
        match self {
            DivisorError::ZeroInSupport => "ZeroInSupport",
            DivisorError::InvalidMultiplicity { .. } => "InvalidMultiplicity",
            DivisorError::NonFinite { .. } => "NonFinite",
            DivisorError::MultiplicityNotOne { .. } => "MultiplicityNotOne",
            DivisorError::NotUnitModulus { .. } => "NotUnitModulus",
            DivisorError::PreconditionFailed(_) => "PreconditionFailed",
            DivisorError::InvalidArgument(_) => "InvalidArgument",
            DivisorError::Csv(_) => "MalformedDivisor",
            DivisorError::Io(_) => "Io",
        }
    }
}

impl From<csv::Error> for DivisorError {
    fn from(e: csv::Error) -> Self {
        DivisorError::Csv(e.to_string())
    }
}

impl From<std::io::Error> for DivisorError {
    fn from(e: std::io::Error) -> Self {
        DivisorError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SupportPoint<T> {
    pub a: Complex<T>,
    pub mult: u32,
}

/// What is known about the support beyond the stored truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel<T> {
    /// The divisor is exactly the stored points.
    Finite,
    /// Sums over the omitted points: `s1 = sum 1/a`, `s2 = sum 1/a^2`,
    /// `abs_sum = sum 1/|a|`, and `max_inv = max 1/|a|`.
    PowerSums { s1: Complex<T>, s2: Complex<T>, abs_sum: T, max_inv: T },
}

/// A finite divisor sorted by modulus (ties by argument), optionally carrying
/// power sums of an infinite continuation.
#[derive(Debug, Clone, PartialEq)]
pub struct Divisor<T> {
    points: Vec<SupportPoint<T>>,
    tail: TailModel<T>,
    // suffix sums over points[k..] plus the tail, length len + 1
    abs_suffix: Vec<T>,
    s1_suffix: Vec<Complex<T>>,
    s2_suffix: Vec<Complex<T>>,
}

fn cmp_points<T: Scalar>(a: &Complex<T>, b: &Complex<T>) -> Ordering {
    a.norm()
        .partial_cmp(&b.norm())
        .unwrap_or(Ordering::Equal)
        .then(a.arg().partial_cmp(&b.arg()).unwrap_or(Ordering::Equal))
}

impl<T: Scalar> Divisor<T> {
    pub fn new(points: Vec<(Complex<T>, u32)>) -> Result<Self, DivisorError> {
        for (index, &(a, mult)) in points.iter().enumerate() {
            if !is_finite_complex(a) {
                return Err(DivisorError::NonFinite { index });
            }
            if a.re == T::zero() && a.im == T::zero() {
                return Err(DivisorError::ZeroInSupport);
            }
            if mult == 0 {
                return Err(DivisorError::InvalidMultiplicity { index });
            }
        }
        let mut points: Vec<SupportPoint<T>> = points.into_iter().map(|(a, mult)| SupportPoint { a, mult }).collect();
        points.sort_by(|p, q| cmp_points(&p.a, &q.a));
        Ok(Self::from_sorted(points, TailModel::Finite))
    }

    /// All multiplicities one.
    pub fn simple(points: &[Complex<T>]) -> Result<Self, DivisorError> {
        Self::new(points.iter().map(|&a| (a, 1)).collect())
    }

    fn from_sorted(points: Vec<SupportPoint<T>>, tail: TailModel<T>) -> Self {
        let n = points.len();
        let zero = Complex::new(T::zero(), T::zero());
        let (abs0, s10, s20) = match tail {
            TailModel::Finite => (T::zero(), zero, zero),
            TailModel::PowerSums { s1, s2, abs_sum, .. } => (abs_sum, s1, s2),
        };
        let mut abs_suffix = vec![T::zero(); n + 1];
        let mut s1_suffix = vec![zero; n + 1];
        let mut s2_suffix = vec![zero; n + 1];
        abs_suffix[n] = abs0;
        s1_suffix[n] = s10;
        s2_suffix[n] = s20;
        for k in (0..n).rev() {
            let m = T::from_u32(points[k].mult).expect("multiplicity fits");
            let inv = points[k].a.inv();
            abs_suffix[k] = abs_suffix[k + 1] + m * inv.norm();
            s1_suffix[k] = s1_suffix[k + 1] + inv.scale(m);
            s2_suffix[k] = s2_suffix[k + 1] + (inv * inv).scale(m);
        }
        Divisor { points, tail, abs_suffix, s1_suffix, s2_suffix }
    }

    /// Replaces the tail model.
    pub fn with_tail(self, tail: TailModel<T>) -> Self {
        Self::from_sorted(self.points, tail)
    }

    pub fn points(&self) -> &[SupportPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tail(&self) -> &TailModel<T> {
        &self.tail
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.points.iter().map(|p| u64::from(p.mult)).sum()
    }

    /// `sum_{j >= k} mult_j / |a_j|`, tail included.
    pub fn abs_suffix(&self, k: usize) -> T {
        self.abs_suffix[k]
    }

    /// `sum_{j >= k} mult_j / a_j`, tail included.
    pub fn s1_suffix(&self, k: usize) -> Complex<T> {
        self.s1_suffix[k]
    }

    /// `sum_{j >= k} mult_j / a_j^2`, tail included.
    pub fn s2_suffix(&self, k: usize) -> Complex<T> {
        self.s2_suffix[k]
    }

    /// Largest `1/|a_j|` over `j >= k`, tail included.
    pub fn max_inv_from(&self, k: usize) -> T {
        match (self.points.get(k), self.tail) {
            (Some(p), _) => p.a.norm().recip(),
            (None, TailModel::PowerSums { max_inv, .. }) => max_inv,
            (None, TailModel::Finite) => T::zero(),
        }
    }

    /// `{k^2 : k = 1..=n}` with the power sums of `k > n` attached.
    pub fn squares(n: usize) -> Self {
        let points = (1..=n)
            .map(|k| {
                let k = T::from_usize(k).expect("index fits");
                SupportPoint { a: Complex::new(k * k, T::zero()), mult: 1 }
            })
            .collect();
        let s1 = T::lit(power_tail(n, 2));
        let s2 = T::lit(power_tail(n, 4));
        let next = T::from_usize(n + 1).expect("index fits");
        let tail = TailModel::PowerSums {
            s1: Complex::new(s1, T::zero()),
            s2: Complex::new(s2, T::zero()),
            abs_sum: s1,
            max_inv: (next * next).recip(),
        };
        Self::from_sorted(points, tail)
    }

    /// `{q^k : k = 1..=count}` with `q = ratio * turn` (`turn` on the unit
    /// circle), with the exact geometric tail sums attached.
    pub fn geometric(ratio: T, turn: Complex<T>, count: usize) -> Result<Self, DivisorError> {
        if !(ratio > T::one()) {
            return Err(DivisorError::InvalidArgument(format!("ratio must exceed 1, got {ratio}")));
        }
        if (turn.norm() - T::one()).abs() > T::lit(1e-9) {
            return Err(DivisorError::InvalidArgument("turn must have modulus 1".into()));
        }
        let q = turn.scale(ratio);
        let mut points = Vec::with_capacity(count);
        let mut a = Complex::new(T::one(), T::zero());
        for index in 0..count {
            a *= q;
            if !is_finite_complex(a) {
                return Err(DivisorError::NonFinite { index });
            }
            points.push(SupportPoint { a, mult: 1 });
        }
        let n = i32::try_from(count).map_err(|_| DivisorError::InvalidArgument("count too large".into()))?;
        let w = q.inv();
        let w2 = w * w;
        let one = Complex::new(T::one(), T::zero());
        let r = ratio.recip();
        let tail = TailModel::PowerSums {
            s1: w.powi(n + 1) / (one - w),
            s2: w2.powi(n + 1) / (one - w2),
            abs_sum: r.powi(n + 1) / (T::one() - r),
            max_inv: r.powi(n + 1),
        };
        Ok(Self::from_sorted(points, tail))
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self, DivisorError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["re", "im", "mult"] {
            return Err(DivisorError::Csv(format!("expected header re,im,mult, found {}", headers.iter().collect::<Vec<_>>().join(","))));
        }
        let mut points = Vec::new();
        for row in rdr.deserialize() {
            let row: CsvRow = row?;
            points.push((Complex::new(T::lit(row.re), T::lit(row.im)), row.mult));
        }
        Self::new(points)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, DivisorError> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| DivisorError::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DivisorError> {
        let mut wtr = csv::Writer::from_writer(writer);
        for p in &self.points {
            wtr.serialize(CsvRow {
                re: p.a.re.to_f64().unwrap_or(f64::NAN),
                im: p.a.im.to_f64().unwrap_or(f64::NAN),
                mult: p.mult,
            })?;
        }
        if self.points.is_empty() {
            wtr.write_record(["re", "im", "mult"])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    fn require_simple(&self) -> Result<(), DivisorError> {
        match self.points.iter().position(|p| p.mult != 1) {
            Some(index) => Err(DivisorError::MultiplicityNotOne { index, mult: self.points[index].mult }),
            None => Ok(()),
        }
    }

    /// `N(r) = sum mult * log+(r / |a|)` over the stored support.
    pub fn counting_n(&self, r: T) -> T {
        let mut sum = T::zero();
        for p in &self.points {
            let m = p.a.norm();
            if m >= r {
                break;
            }
            sum += T::from_u32(p.mult).expect("multiplicity fits") * (r / m).ln();
        }
        sum
    }

    /// Total multiplicity of support points with `|a| < r`.
    pub fn deg_restricted(&self, r: T) -> u64 {
        self.points.iter().take_while(|p| p.a.norm() < r).map(|p| u64::from(p.mult)).sum()
    }

    /// `min |a_{k+1}| / |a_k|`; infinite for fewer than two points.
    pub fn separation_ratio(&self) -> Result<T, DivisorError> {
        self.require_simple()?;
        Ok(self
            .points
            .windows(2)
            .map(|w| w[1].a.norm() / w[0].a.norm())
            .fold(T::infinity(), T::min))
    }

    /// Greedy angular clustering of `a/|a|` over the last
    /// `ceil(tail_fraction * n)` points. Each cluster is centred on the first
    /// direction that opened it; centres are returned by increasing angle in
    /// `[0, 2 pi)`.
    pub fn direction_accumulation(&self, tail_fraction: T, eps: T) -> Result<Vec<Complex<T>>, DivisorError> {
        if !(tail_fraction > T::zero() && tail_fraction <= T::one()) {
            return Err(DivisorError::InvalidArgument("tail fraction must lie in (0, 1]".into()));
        }
        if !(eps > T::zero() && eps < T::FRAC_PI_4()) {
            return Err(DivisorError::InvalidArgument("eps must lie in (0, pi/4)".into()));
        }
        let n = self.points.len();
        let take = (tail_fraction * T::from_usize(n).expect("length fits")).ceil().to_usize().unwrap_or(n).min(n);
        let mut centres: Vec<Complex<T>> = Vec::new();
        for p in &self.points[n - take..] {
            let u = p.a.unscale(p.a.norm());
            if !centres.iter().any(|c| angular_distance(*c, u) <= eps) {
                centres.push(u);
            }
        }
        centres.sort_by(|a, b| positive_angle(*a).partial_cmp(&positive_angle(*b)).unwrap_or(Ordering::Equal));
        Ok(centres)
    }

    /// Combines the separation and direction hypotheses on this truncation.
    pub fn theorem_verdict(&self, tail_fraction: T, eps: T) -> Result<DivisorVerdict<T>, DivisorError> {
        self.require_simple()?;
        let separation_lambda = if self.points.len() >= 2 { Some(self.separation_ratio()?) } else { None };
        let directions = self.direction_accumulation(tail_fraction, eps)?;
        let hull_ok = hull_contains_origin(&directions)?;
        let separated = separation_lambda.is_some_and(|l| l > T::one());
        let mut notes = Vec::new();
        match separation_lambda {
            None => notes.push("fewer than two support points".to_string()),
            Some(l) if !separated => notes.push(format!("moduli not geometrically separated (min ratio {l})")),
            Some(_) => {}
        }
        if !hull_ok {
            notes.push(format!("origin not interior to hull of {} direction cluster(s)", directions.len()));
        }
        if notes.is_empty() {
            notes.push("both hypotheses hold on the truncation".into());
        }
        Ok(DivisorVerdict {
            separation_lambda,
            directions,
            hull_ok,
            non_realizable: separated && hull_ok,
            notes: notes.join("; "),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    re: f64,
    im: f64,
    mult: u32,
}

/// `sum_{k > n} k^-p` for `p >= 2`: exact terms up to 100, Euler-Maclaurin
/// beyond.
fn power_tail(n: usize, p: i32) -> f64 {
    const DIRECT: usize = 100;
    let mut sum = 0.0;
    let mut start = n;
    if n < DIRECT {
        sum += ((n + 1)..=DIRECT).map(|k| (k as f64).powi(-p)).sum::<f64>();
        start = DIRECT;
    }
    let m = start as f64;
    let pf = f64::from(p);
    sum + m.powf(1.0 - pf) / (pf - 1.0) - m.powi(-p) / 2.0 + pf * m.powi(-p - 1) / 12.0
        - pf * (pf + 1.0) * (pf + 2.0) * m.powi(-p - 3) / 720.0
}

fn angular_distance<T: Scalar>(a: Complex<T>, b: Complex<T>) -> T {
    (b * a.conj()).arg().abs()
}

fn positive_angle<T: Scalar>(u: Complex<T>) -> T {
    let t = u.arg();
    if t < T::zero() {
        t + T::TAU()
    } else {
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DivisorVerdict<T> {
    pub separation_lambda: Option<T>,
    pub directions: Vec<Complex<T>>,
    pub hull_ok: bool,
    pub non_realizable: bool,
    pub notes: String,
}

/// Whether the origin is interior to the convex hull of unit vectors: the
/// largest circular gap between consecutive directions must be below pi.
pub fn hull_contains_origin<T: Scalar>(dirs: &[Complex<T>]) -> Result<bool, DivisorError> {
    for (index, u) in dirs.iter().enumerate() {
        let modulus = u.norm();
        if (modulus - T::one()).abs() > T::lit(1e-9) {
            return Err(DivisorError::NotUnitModulus { index, modulus: modulus.to_f64().unwrap_or(f64::NAN) });
        }
    }
    if dirs.len() < 3 {
        // two points span at best a segment, which has empty interior
        return Ok(false);
    }
    let mut angles: Vec<T> = dirs.iter().map(|&u| positive_angle(u)).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let mut gap = angles[0] + T::TAU() - angles[angles.len() - 1];
    for w in angles.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    Ok(gap < T::PI() - T::lit(1e-12))
}

/// A growth function `rho` on `[1, inf)`.
#[derive(Debug, Clone, PartialEq)]
pub enum GrowthBound<T> {
    /// `c (log t)^2`
    LogSquared { c: T },
    /// `c t^alpha`
    Power { c: T, alpha: T },
    /// `c log t`
    Log { c: T },
    /// Piecewise linear through strictly increasing `(t, rho)` pairs, constant
    /// beyond the last pair.
    Table(Vec<(T, T)>),
}

impl<T: Scalar> GrowthBound<T> {
    pub fn eval(&self, t: T) -> T {
        match self {
            GrowthBound::LogSquared { c } => {
                let l = t.ln();
                *c * l * l
            }
            GrowthBound::Power { c, alpha } => *c * t.powf(*alpha),
            GrowthBound::Log { c } => *c * t.ln(),
            GrowthBound::Table(rows) => {
                let k = rows.partition_point(|&(x, _)| x <= t);
                if k == 0 {
                    return rows[0].1;
                }
                if k == rows.len() {
                    return rows[k - 1].1;
                }
                let (x0, y0) = rows[k - 1];
                let (x1, y1) = rows[k];
                y0 + (y1 - y0) * (t - x0) / (x1 - x0)
            }
        }
    }

    pub fn table(rows: Vec<(T, T)>) -> Result<Self, DivisorError> {
        if rows.len() < 2 {
            return Err(DivisorError::InvalidArgument("growth table needs at least two rows".into()));
        }
        if rows[0].0 < T::one() {
            return Err(DivisorError::InvalidArgument("growth table must start at t >= 1".into()));
        }
        if rows.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
            return Err(DivisorError::InvalidArgument("growth table must be strictly increasing".into()));
        }
        Ok(GrowthBound::Table(rows))
    }

    /// Reads a CSV with header `t,rho`.
    pub fn table_from_csv<R: Read>(reader: R) -> Result<Self, DivisorError> {
        #[derive(Deserialize)]
        struct Row {
            t: f64,
            rho: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for row in rdr.deserialize() {
            let row: Row = row?;
            rows.push((T::lit(row.t), T::lit(row.rho)));
        }
        Self::table(rows)
    }
}

impl<T: Scalar> fmt::Display for GrowthBound<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthBound::LogSquared { c } => write!(f, "logsq:{c}"),
            GrowthBound::Power { c, alpha } => write!(f, "pow:{c}:{alpha}"),
            GrowthBound::Log { c } => write!(f, "log:{c}"),
            GrowthBound::Table(rows) => write!(f, "table({} rows)", rows.len()),
        }
    }
}

/// Parses `logsq:c`, `pow:c:alpha`, `log:c` or `table:path`.
impl<T: Scalar> FromStr for GrowthBound<T> {
    type Err = DivisorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || DivisorError::InvalidArgument(format!("unrecognised growth bound '{s}'"));
        let num = |x: &str| -> Result<T, DivisorError> {
            let v: f64 = x.trim().parse().map_err(|_| bad())?;
            if v.is_finite() && v > 0.0 {
                Ok(T::lit(v))
            } else {
                Err(DivisorError::InvalidArgument(format!("growth parameter must be positive, got '{x}'")))
            }
        };
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "logsq" => Ok(GrowthBound::LogSquared { c: num(rest)? }),
            "log" => Ok(GrowthBound::Log { c: num(rest)? }),
            "pow" => {
                let (c, alpha) = rest.split_once(':').ok_or_else(bad)?;
                Ok(GrowthBound::Power { c: num(c)?, alpha: num(alpha)? })
            }
            "table" => {
                let file = std::fs::File::open(rest).map_err(|e| DivisorError::Io(format!("{rest}: {e}")))?;
                Self::table_from_csv(file)
            }
            _ => Err(bad()),
        }
    }
}

pub const MAX_CONSTRUCT_COUNT: usize = 1000;
const SCAN_SAMPLES: usize = 512;
// rho(t)/log t must grow by this factor from sqrt(horizon) to horizon
const LIMINF_GROWTH: f64 = 1.25;

/// Smallest power of two `r0 >= start` with `k log(4r) <= rho(r)` at log-spaced
/// samples of `[r0, max(horizon, 1000 r0)]`.
pub fn scan_threshold<T: Scalar>(rho: &GrowthBound<T>, k: usize, start: T, horizon: T) -> Option<T> {
    let kf = T::from_usize(k).expect("count fits");
    let four = T::lit(4.0);
    let holds = |r0: T| {
        let top = horizon.max(r0 * T::lit(1e3));
        let (a, b) = (r0.ln(), top.ln());
        (0..=SCAN_SAMPLES).all(|i| {
            let r = (a + (b - a) * T::from_usize(i).expect("small") / T::from_usize(SCAN_SAMPLES).expect("small")).exp();
            kf * (four * r).ln() <= rho.eval(r)
        })
    };
    let mut r0 = T::one();
    while r0 < start {
        r0 *= T::two();
    }
    while r0.is_finite() && r0 < T::max_value() / T::lit(1e4) {
        if holds(r0) {
            return Some(r0);
        }
        r0 *= T::two();
    }
    None
}

/// Sampled check that `rho(t) / log t` keeps growing: the ratio at `horizon`
/// must be at least 1.25 times the ratio at `sqrt(horizon)`.
pub fn liminf_sanity<T: Scalar>(rho: &GrowthBound<T>, horizon: T) -> bool {
    let mid = horizon.sqrt();
    let ratio = |t: T| rho.eval(t) / t.ln();
    ratio(horizon) >= T::lit(LIMINF_GROWTH) * ratio(mid)
}

/// Builds `c_1, ..., c_count` with `|c_1| >= max(1, 2 R_1)`,
/// `|c_k| >= 4 |c_{k-1}|`, `2 |c_{k-1}| >= R_k`, and arguments
/// `2 pi frac(k phi)` with `phi` the golden ratio conjugate.
pub fn construct_slow<T: Scalar>(rho: &GrowthBound<T>, count: usize, horizon: T) -> Result<Divisor<T>, DivisorError> {
    if count == 0 || count > MAX_CONSTRUCT_COUNT {
        return Err(DivisorError::InvalidArgument(format!("count must be in 1..={MAX_CONSTRUCT_COUNT}")));
    }
    if !(horizon.is_finite() && horizon > T::lit(16.0)) {
        return Err(DivisorError::InvalidArgument("horizon must be finite and above 16".into()));
    }
    if !liminf_sanity(rho, horizon) {
        return Err(DivisorError::PreconditionFailed(format!(
            "rho(t)/log t does not appear to tend to infinity (sampled up to {horizon}); functions with T <= rho are polynomials"
        )));
    }
    let mut thresholds = Vec::with_capacity(count);
    let mut start = T::one();
    for k in 1..=count {
        let r = scan_threshold(rho, k, start, horizon).ok_or_else(|| {
            DivisorError::PreconditionFailed(format!("no threshold R_{k} with {k} log(4r) <= rho(r) in range"))
        })?;
        thresholds.push(r);
        start = r;
    }
    let phi = (T::lit(5.0).sqrt() - T::one()) / T::two();
    let mut points = Vec::with_capacity(count);
    let mut modulus = T::zero();
    for k in 1..=count {
        let next_need = thresholds.get(k).map_or(T::zero(), |&r| r / T::two());
        modulus = if k == 1 {
            T::one().max(T::two() * thresholds[0]).max(next_need)
        } else {
            (T::lit(4.0) * modulus).max(next_need)
        };
        let kf = T::from_usize(k).expect("count fits");
        let theta = T::TAU() * (kf * phi).fract();
        let c = Complex::from_polar(modulus, theta);
        if !is_finite_complex(c) || !modulus.is_finite() {
            return Err(DivisorError::PreconditionFailed(format!("|c_{k}| overflows the scalar type")));
        }
        points.push(c);
    }
    Divisor::simple(&points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    fn d(points: &[(f64, f64)]) -> Divisor<f64> {
        Divisor::simple(&points.iter().map(|&(x, y)| c(x, y)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn counting_examples() {
        assert!((d(&[(1.0, 0.0)]).counting_n(std::f64::consts::E) - 1.0).abs() < 1e-15);
        let sq = Divisor::<f64>::squares(100);
        let oracle = 10f64.ln() + 2.5f64.ln() + (10.0f64 / 9.0).ln();
        assert!((sq.counting_n(10.0) - oracle).abs() < 1e-12);
        assert!((sq.counting_n(10.0) - 3.3243).abs() < 1e-4);
        assert_eq!(sq.counting_n(0.5), 0.0);
    }

    #[test]
    fn deg_restricted_is_strict() {
        assert_eq!(Divisor::<f64>::squares(100).deg_restricted(10.0), 3);
        let g = Divisor::<f64>::geometric(4.0, c(1.0, 0.0), 30).unwrap();
        assert_eq!(g.deg_restricted(4.0), 0);
        assert_eq!(g.deg_restricted(100.0), 3);
    }

    #[test]
    fn separation_examples() {
        let g = Divisor::<f64>::geometric(4.0, c(1.0, 0.0), 30).unwrap();
        assert!((g.separation_ratio().unwrap() - 4.0).abs() < 1e-12);
        let sq = Divisor::<f64>::squares(100);
        assert!((sq.separation_ratio().unwrap() - (100.0f64 / 99.0).powi(2)).abs() < 1e-12);
        let spiral = Divisor::<f64>::geometric(2.0, c(0.0, 1.0), 20).unwrap();
        assert!((spiral.separation_ratio().unwrap() - 2.0).abs() < 1e-12);
        let double = Divisor::<f64>::new(vec![(c(1.0, 0.0), 2)]).unwrap();
        assert_eq!(double.separation_ratio().unwrap_err().name(), "MultiplicityNotOne");
    }

    #[test]
    fn direction_examples() {
        let g = Divisor::<f64>::geometric(4.0, c(1.0, 0.0), 30).unwrap();
        let dirs = g.direction_accumulation(0.5, 0.3).unwrap();
        assert_eq!(dirs.len(), 1);
        assert!((dirs[0] - c(1.0, 0.0)).norm() < 1e-12);

        let g = Divisor::<f64>::geometric(4.0, c(0.0, 1.0), 30).unwrap();
        let dirs = g.direction_accumulation(0.5, 0.3).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        assert_eq!(dirs.len(), 4);
        for (u, e) in dirs.iter().zip(expected) {
            assert!((u - e).norm() < 1e-9);
        }
    }

    #[test]
    fn golden_angle_directions_spread() {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let pts: Vec<Complex<f64>> = (1..=200)
            .map(|k| Complex::from_polar(4f64.powf(k as f64 / 40.0), std::f64::consts::TAU * (k as f64 * phi).fract()))
            .collect();
        let dirs = Divisor::simple(&pts).unwrap().direction_accumulation(1.0, 0.2).unwrap();
        assert!(dirs.len() >= 20, "{} clusters", dirs.len());
        assert!(hull_contains_origin(&dirs).unwrap());
    }

    #[test]
    fn hull_examples() {
        let quad = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        assert!(hull_contains_origin::<f64>(&quad).unwrap());
        assert!(!hull_contains_origin::<f64>(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap());
        assert!(!hull_contains_origin::<f64>(&[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap());
        // three points, one gap exactly pi
        assert!(!hull_contains_origin::<f64>(&[c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]).unwrap());
        let err = hull_contains_origin::<f64>(&[c(2.0, 0.0)]).unwrap_err();
        assert_eq!(err.name(), "NotUnitModulus");
    }

    #[test]
    fn verdict_examples() {
        let sq = Divisor::<f64>::squares(100).theorem_verdict(0.5, 0.3).unwrap();
        assert!(!sq.non_realizable);
        let g = Divisor::<f64>::geometric(4.0, c(1.0, 0.0), 30).unwrap().theorem_verdict(0.5, 0.3).unwrap();
        assert!(!g.hull_ok && !g.non_realizable);
    }

    #[test]
    fn csv_round_trip() {
        let div = Divisor::new(vec![(c(1.5, -2.0), 1), (c(0.25, 0.0), 3)]).unwrap();
        let text = div.to_csv_string();
        assert_eq!(text, "re,im,mult\n0.25,0.0,3\n1.5,-2.0,1\n");
        let back = Divisor::<f64>::from_csv_reader(text.as_bytes()).unwrap();
        assert_eq!(back, div);
        let bad = Divisor::<f64>::from_csv_reader("x,y\n1,2\n".as_bytes()).unwrap_err();
        assert_eq!(bad.name(), "MalformedDivisor");
        let zero = Divisor::<f64>::from_csv_reader("re,im,mult\n0,0,1\n".as_bytes()).unwrap_err();
        assert_eq!(zero, DivisorError::ZeroInSupport);
    }

    #[test]
    fn power_tail_matches_brute_force() {
        // brute force to 2e6 plus the integral remainder 1/(2e6)
        let brute: f64 = (11..=2_000_000).map(|k| 1.0 / (k as f64).powi(2)).sum::<f64>() + 1.0 / 2_000_000.5;
        assert!((power_tail(10, 2) - brute).abs() < 1e-12);
        let brute4: f64 = (1001..=200_000).map(|k| 1.0 / (k as f64).powi(4)).sum();
        assert!((power_tail(1000, 4) - brute4).abs() < 1e-16);
        // zeta(2) - sum_{k<=n} 1/k^2
        let head: f64 = (1..=10_000).map(|k| 1.0 / (k as f64).powi(2)).sum();
        assert!((power_tail(10_000, 2) - (std::f64::consts::PI.powi(2) / 6.0 - head)).abs() < 1e-13);
    }

    #[test]
    fn geometric_tail_is_exact() {
        let g = Divisor::<f64>::geometric(2.0, c(1.0, 0.0), 5).unwrap();
        match g.tail() {
            TailModel::PowerSums { s1, abs_sum, .. } => {
                assert!((s1.re - 1.0 / 32.0).abs() < 1e-15);
                assert!((abs_sum - 1.0 / 32.0).abs() < 1e-15);
            }
            TailModel::Finite => panic!("expected power sums"),
        }
        assert!((g.abs_suffix(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn growth_bound_parsing() {
        assert_eq!("logsq:1".parse::<GrowthBound<f64>>().unwrap(), GrowthBound::LogSquared { c: 1.0 });
        assert_eq!("pow:1:0.5".parse::<GrowthBound<f64>>().unwrap(), GrowthBound::Power { c: 1.0, alpha: 0.5 });
        assert_eq!("log:2".parse::<GrowthBound<f64>>().unwrap(), GrowthBound::Log { c: 2.0 });
        assert!("logsq:-1".parse::<GrowthBound<f64>>().is_err());
        assert!("sq:1".parse::<GrowthBound<f64>>().is_err());
        let t = GrowthBound::<f64>::table(vec![(1.0, 1.0), (10.0, 3.0)]).unwrap();
        assert!((t.eval(5.5) - 2.0).abs() < 1e-15);
        assert!(GrowthBound::table(vec![(1.0, 1.0), (10.0, 1.0)]).is_err());
    }

    #[test]
    fn liminf_sanity_examples() {
        assert!(liminf_sanity(&GrowthBound::LogSquared { c: 1.0 }, 1e12));
        assert!(liminf_sanity(&GrowthBound::Power { c: 1.0, alpha: 0.5 }, 1e12));
        assert!(!liminf_sanity(&GrowthBound::Log { c: 2.0 }, 1e12));
    }

    #[test]
    fn construct_logsq() {
        let rho = GrowthBound::LogSquared { c: 1.0 };
        let div = construct_slow(&rho, 20, 1e12).unwrap();
        assert_eq!(div.len(), 20);
        assert!(div.separation_ratio().unwrap() >= 4.0 - 1e-12);
        assert!(div.points()[0].a.norm() >= 1.0);
        let v = div.theorem_verdict(0.5, 0.3).unwrap();
        assert!(v.non_realizable, "{v:?}");
    }

    #[test]
    fn construct_sqrt_has_small_thresholds() {
        let rho = GrowthBound::Power { c: 1.0, alpha: 0.5 };
        let div = construct_slow(&rho, 20, 1e12).unwrap();
        assert_eq!(div.len(), 20);
        // R_1: log(4r) <= sqrt(r) from r = 64 on (sampled); |c_1| = max(1, 2 R_1, R_2/2)
        let r1 = scan_threshold(&rho, 1, 1.0, 1e12).unwrap();
        assert!(r1 <= 64.0);
    }

    #[test]
    fn construct_rejects_log_growth() {
        let err = construct_slow(&GrowthBound::Log { c: 2.0 }, 20, 1e12).unwrap_err();
        assert_eq!(err.name(), "PreconditionFailed");
    }

    #[test]
    fn construct_rejects_overflowing_count() {
        let err = construct_slow(&GrowthBound::LogSquared { c: 1.0 }, 1000, 1e12).unwrap_err();
        assert_eq!(err.name(), "PreconditionFailed");
        assert_eq!(construct_slow(&GrowthBound::LogSquared { c: 1.0 }, 1001, 1e12).unwrap_err().name(), "InvalidArgument");
    }
}
