//! Closed-form expected runtimes and Monte Carlo validators built on them.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    derive_seed, ea_lehmer_run, ea_multivalued_run, rls_run, RunOptions, StoppingCondition,
};
use crate::benchmarks::{Benchmark, LLeadingZeros, LOneMax, NVal};
use crate::error::{Error, Result};
use crate::lehmer::{LabelSelection, StepOperator};

/// Largest `n` for which harmonic numbers are kept as exact fractions.
pub const HARMONIC_EXACT_MAX: u64 = 30;

/// `H_n`, exact for small `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Harmonic {
    Exact(Ratio<i128>),
    Approx(f64),
}

impl Harmonic {
    pub fn value(self) -> f64 {
        match self {
            Harmonic::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Harmonic::Approx(v) => v,
        }
    }
}

pub fn harmonic_number(n: u64) -> Harmonic {
    if n <= HARMONIC_EXACT_MAX {
        let h = (1..=n as i128).fold(Ratio::from_integer(0), |acc, k| acc + Ratio::new(1, k));
        Harmonic::Exact(h)
    } else {
        // smallest terms first
        Harmonic::Approx((1..=n).rev().map(|k| 1.0 / k as f64).sum())
    }
}

/// Runtime statements with a validator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// RLS uniform/uniform on L-OneMax, band `[0.8(n-1)² ln n, (n-1)² ln n + (n-1)²]`.
    #[serde(rename = "thm1-band")]
    Thm1Band,
    /// RLS uniform/uniform on L-LeadingZeros, exact.
    #[serde(rename = "thm2")]
    Thm2,
    /// RLS uniform/proportional on L-LeadingZeros, exact.
    #[serde(rename = "thm4")]
    Thm4,
    /// RLS unit/uniform on L-LeadingZeros, exact.
    #[serde(rename = "thm6")]
    Thm6,
    /// (1+1)-EA uniform on L-LeadingZeros, leading terms (a lower estimate).
    #[serde(rename = "thm11-lead")]
    Thm11Lead,
    /// (1+1)-EA unit on L-LeadingZeros, leading terms.
    #[serde(rename = "thm15-lead")]
    Thm15Lead,
}

impl Theorem {
    pub const ALL: [Theorem; 6] = [
        Theorem::Thm1Band,
        Theorem::Thm2,
        Theorem::Thm4,
        Theorem::Thm6,
        Theorem::Thm11Lead,
        Theorem::Thm15Lead,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Theorem::Thm1Band => "thm1-band",
            Theorem::Thm2 => "thm2",
            Theorem::Thm4 => "thm4",
            Theorem::Thm6 => "thm6",
            Theorem::Thm11Lead => "thm11-lead",
            Theorem::Thm15Lead => "thm15-lead",
        }
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.id() == s)
            .ok_or_else(|| Error::invalid(format!("unknown theorem `{s}`")))
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

fn exact_poly(n: u64, f: impl Fn(Ratio<i128>, Ratio<i128>) -> Ratio<i128>) -> Option<f64> {
    match harmonic_number(n) {
        Harmonic::Exact(h) => {
            let r = f(Ratio::from_integer(n as i128), h);
            Some(*r.numer() as f64 / *r.denom() as f64)
        }
        Harmonic::Approx(_) => None,
    }
}

/// Expected optimization time (evaluations after the initial sample).
///
/// Identifiers: `thm2`, `thm4`, `thm6`, `thm11-lead`, `thm15-lead`; the band
/// statement `thm1-band` has no point value.
pub fn closed_form(theorem: Theorem, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("closed forms need n ≥ 2, got {n}")));
    }
    let h = harmonic_number(n).value();
    let x = n as f64;
    let half = |v: i128| Ratio::new(v, 2);
    let value = match theorem {
        Theorem::Thm1Band => {
            return Err(Error::invalid("thm1-band is a band, not a point value"));
        }
        Theorem::Thm2 => exact_poly(n, |n, h| {
            n * n * n * half(1) - n * n * 2 + n * h + n * half(3) - h
        })
        .unwrap_or(x * x * x / 2.0 - 2.0 * x * x + x * h + 1.5 * x - h),
        Theorem::Thm4 => exact_poly(n, |n, h| {
            n * n * n * half(1) - n * n * h * half(1) - n * n * half(1) + n * h * half(1)
        })
        .unwrap_or(x * x * x / 2.0 - x * x * h / 2.0 - x * x / 2.0 + x * h / 2.0),
        Theorem::Thm6 => exact_poly(n, |n, _| {
            n * n * n * n * Ratio::new(2, 9) - n * n * n * Ratio::new(7, 18)
                + n * n * Ratio::new(1, 9)
                + n * Ratio::new(1, 18)
        })
        .unwrap_or(2.0 * x.powi(4) / 9.0 - 7.0 * x.powi(3) / 18.0 + x * x / 9.0 + x / 18.0),
        Theorem::Thm11Lead => {
            let e = std::f64::consts::E;
            let m = x - 1.0;
            (e - 2.0) * m.powi(3) + (3.0 - 1.5 * e) * m * m
        }
        Theorem::Thm15Lead => {
            let s = std::f64::consts::E.sqrt();
            let m = x - 1.0;
            (32.0 * s - 52.0) / 3.0 * m.powi(4) + (28.0 - 16.0 * s) / 3.0 * m.powi(3)
        }
    };
    Ok(value)
}

/// `[lower, upper]` for `thm1-band`.
pub fn thm1_band(n: u64) -> (f64, f64) {
    let m = (n - 1) as f64;
    let ln = (n as f64).ln();
    (0.8 * m * m * ln, m * m * ln + m * m)
}

/// Mean and standard error of a sample.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub n: u64,
    pub runs: u64,
    pub failed_runs: u64,
    pub mean: f64,
    pub std_error: f64,
    /// Point value, absent for bands.
    pub expected: Option<f64>,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} n={} runs={}: mean {:.2} ± {:.2} (se), ",
            self.theorem, self.n, self.runs, self.mean, self.std_error
        )?;
        if let Some(e) = self.expected {
            write!(f, "expected {e:.2}, ")?;
        }
        write!(
            f,
            "accept [{:.2}, {:.2}] → {}",
            self.lower,
            self.upper,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Budget generous enough that a validation run practically always ends at
/// the optimum; failures are reported, never silently dropped.
fn validation_budget(scale: f64) -> u64 {
    (1000.0 * scale).max(1e6) as u64
}

/// Optimization times of `runs` runs on L-LeadingZeros or L-OneMax for the
/// pairing behind `theorem`.
fn simulate(theorem: Theorem, n: u64, runs: u64, master_seed: u64, scale: f64) -> Result<Vec<Option<u64>>> {
    let nn = n as usize;
    let budget = validation_budget(scale);
    let lz = StoppingCondition::new(Some(Benchmark::LLeadingzeros.optimum(nn)), budget)?;
    let om = StoppingCondition::new(Some(Benchmark::LOnemax.optimum(nn)), budget)?;
    (0..runs)
        .into_par_iter()
        .map(|r| {
            let opts = RunOptions::seeded(derive_seed(master_seed, r));
            let record = match theorem {
                Theorem::Thm1Band => rls_run(&LOneMax, nn, StepOperator::Uniform, LabelSelection::Uniform, &om, &opts),
                Theorem::Thm2 => rls_run(&LLeadingZeros, nn, StepOperator::Uniform, LabelSelection::Uniform, &lz, &opts),
                Theorem::Thm4 => rls_run(&LLeadingZeros, nn, StepOperator::Uniform, LabelSelection::Proportional, &lz, &opts),
                Theorem::Thm6 => rls_run(&LLeadingZeros, nn, StepOperator::Unit, LabelSelection::Uniform, &lz, &opts),
                Theorem::Thm11Lead => ea_lehmer_run(&LLeadingZeros, nn, StepOperator::Uniform, &lz, &opts),
                Theorem::Thm15Lead => ea_lehmer_run(&LLeadingZeros, nn, StepOperator::Unit, &lz, &opts),
            }?;
            Ok(record.success.then(|| record.optimization_time()))
        })
        .collect()
}

/// Runs the pairing behind `theorem` and compares the mean optimization time
/// with its closed form.
///
/// Acceptance: `thm2`, `thm4`, `thm6`, `thm15-lead` within `±tolerance`
/// relative; `thm11-lead` within `[1, 1 + tolerance]` of the leading terms
/// (the omitted remainder is positive); `thm1-band` inside its band
/// (`tolerance` unused). Every run must reach the optimum.
pub fn validate_theorem(theorem: Theorem, n: u64, runs: u64, tolerance: f64, master_seed: u64) -> Result<TheoremReport> {
    if runs < 2 {
        return Err(Error::invalid("validation needs at least 2 runs"));
    }
    if n < 2 {
        return Err(Error::invalid(format!("validation needs n ≥ 2, got {n}")));
    }
    if !(tolerance >= 0.0) {
        return Err(Error::invalid("tolerance must be non-negative"));
    }
    let (expected, lower, upper) = match theorem {
        Theorem::Thm1Band => {
            let (lo, hi) = thm1_band(n);
            (None, lo, hi)
        }
        Theorem::Thm11Lead => {
            let cf = closed_form(theorem, n)?;
            (Some(cf), cf, cf * (1.0 + tolerance))
        }
        _ => {
            let cf = closed_form(theorem, n)?;
            (Some(cf), cf * (1.0 - tolerance), cf * (1.0 + tolerance))
        }
    };
    let times = simulate(theorem, n, runs, master_seed, upper)?;
    let failed_runs = times.iter().filter(|t| t.is_none()).count() as u64;
    let values: Vec<f64> = times.iter().flatten().map(|&t| t as f64).collect();
    let (mean, std_error) = if values.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        mean_and_se(&values)
    };
    let pass = failed_runs == 0 && mean >= lower && mean <= upper;
    Ok(TheoremReport {
        theorem,
        n,
        runs,
        failed_runs,
        mean,
        std_error,
        expected,
        lower,
        upper,
        pass,
    })
}

/// Growth-rate statements checked through a log-log slope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlopeCheck {
    /// RLS unit/uniform on L-OneMax, Θ(n²).
    #[serde(rename = "rls-unit-onemax")]
    RlsUnitOneMax,
    /// (1+1)-EA unit on L-OneMax, Θ(n²).
    #[serde(rename = "ea-unit-onemax")]
    EaUnitOneMax,
    /// (1+1)-EA uniform on L-OneMax, Θ(n² log n).
    #[serde(rename = "ea-uniform-onemax")]
    EaUniformOneMax,
    /// (1+1)-EA on NVal over `[n]^n`, Θ(n² log n).
    #[serde(rename = "ea-nval")]
    EaNVal,
}

impl SlopeCheck {
    pub const ALL: [SlopeCheck; 4] = [
        SlopeCheck::RlsUnitOneMax,
        SlopeCheck::EaUnitOneMax,
        SlopeCheck::EaUniformOneMax,
        SlopeCheck::EaNVal,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SlopeCheck::RlsUnitOneMax => "rls-unit-onemax",
            SlopeCheck::EaUnitOneMax => "ea-unit-onemax",
            SlopeCheck::EaUniformOneMax => "ea-uniform-onemax",
            SlopeCheck::EaNVal => "ea-nval",
        }
    }

    /// Accepted slope window.
    pub fn window(self) -> (f64, f64) {
        match self {
            SlopeCheck::RlsUnitOneMax | SlopeCheck::EaUnitOneMax => (1.85, 2.15),
            SlopeCheck::EaUniformOneMax | SlopeCheck::EaNVal => (2.0, 2.3),
        }
    }

    fn run_once(self, n: usize, seed: u64) -> Result<crate::algorithms::RunRecord> {
        let budget = 1_000_000_000;
        let opts = RunOptions::seeded(seed);
        match self {
            SlopeCheck::RlsUnitOneMax => rls_run(
                &LOneMax,
                n,
                StepOperator::Unit,
                LabelSelection::Uniform,
                &StoppingCondition::new(Some(Benchmark::LOnemax.optimum(n)), budget)?,
                &opts,
            ),
            SlopeCheck::EaUnitOneMax | SlopeCheck::EaUniformOneMax => {
                let step = if self == SlopeCheck::EaUnitOneMax {
                    StepOperator::Unit
                } else {
                    StepOperator::Uniform
                };
                ea_lehmer_run(
                    &LOneMax,
                    n,
                    step,
                    &StoppingCondition::new(Some(Benchmark::LOnemax.optimum(n)), budget)?,
                    &opts,
                )
            }
            SlopeCheck::EaNVal => ea_multivalued_run(
                &NVal,
                n,
                n as u32,
                &StoppingCondition::new(Some(Benchmark::Nval.optimum(n)), budget)?,
                &RunOptions::seeded(seed),
            ),
        }
    }
}

impl FromStr for SlopeCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SlopeCheck::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| Error::invalid(format!("unknown slope check `{s}`")))
    }
}

impl fmt::Display for SlopeCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeReport {
    pub check: SlopeCheck,
    pub runs: u64,
    /// `(n, mean optimization time)`.
    pub points: Vec<(u64, f64)>,
    pub slope: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
}

impl fmt::Display for SlopeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} runs={}:", self.check, self.runs)?;
        for (n, m) in &self.points {
            write!(f, " n={n}→{m:.0}")?;
        }
        write!(
            f,
            "; slope {:.3}, accept [{:.2}, {:.2}] → {}",
            self.slope,
            self.lower,
            self.upper,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(u64, f64)]) -> f64 {
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Fits the mean optimization time over `sizes` and checks the slope window.
pub fn validate_slope(check: SlopeCheck, sizes: &[u64], runs: u64, master_seed: u64) -> Result<SlopeReport> {
    if sizes.len() < 2 || sizes.iter().any(|&n| n < 2) {
        return Err(Error::invalid("slope fit needs at least two sizes, each ≥ 2"));
    }
    if runs == 0 {
        return Err(Error::invalid("slope fit needs at least one run per size"));
    }
    let mut points = Vec::with_capacity(sizes.len());
    for (k, &n) in sizes.iter().enumerate() {
        let stream = derive_seed(master_seed, k as u64);
        let times: Vec<Option<u64>> = (0..runs)
            .into_par_iter()
            .map(|r| {
                let rec = check.run_once(n as usize, derive_seed(stream, r))?;
                Ok(rec.success.then(|| rec.optimization_time()))
            })
            .collect::<Result<_>>()?;
        if times.iter().any(Option::is_none) {
            return Err(Error::Unsupported(format!("{check}: a run at n={n} exhausted its budget")));
        }
        let sum: u64 = times.iter().flatten().sum();
        points.push((n, sum as f64 / runs as f64));
    }
    let slope = loglog_slope(&points);
    let (lower, upper) = check.window();
    Ok(SlopeReport {
        check,
        runs,
        pass: slope >= lower && slope <= upper,
        points,
        slope,
        lower,
        upper,
    })
}

/// Steps until a fair walk on `[0..i-1]` started at `x0` is absorbed at 0.
/// From `i - 1` the walk stays or moves down with probability 1/2 each.
pub fn walk_hitting_time<R: Rng + ?Sized>(i: u32, x0: u32, rng: &mut R) -> u64 {
    let top = i - 1;
    let mut x = x0;
    let mut t = 0;
    while x > 0 {
        t += 1;
        if rng.gen::<bool>() {
            x -= 1;
        } else if x < top {
            x += 1;
        }
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkReport {
    pub i: u32,
    pub samples: u64,
    pub mean: f64,
    pub std_error: f64,
    pub expected: f64,
    pub pass: bool,
}

/// Compares the mean hitting time from a uniform start with
/// `(i-1)(2i-1)/3`, accepting within three standard errors.
pub fn random_walk_hitting_check<R: Rng + ?Sized>(i: u32, samples: u64, rng: &mut R) -> Result<WalkReport> {
    if i < 2 {
        return Err(Error::invalid(format!("walk needs i ≥ 2, got {i}")));
    }
    if samples < 2 {
        return Err(Error::invalid("walk check needs at least 2 samples"));
    }
    let times: Vec<f64> = (0..samples)
        .map(|_| {
            let x0 = rng.gen_range(0..i);
            walk_hitting_time(i, x0, rng) as f64
        })
        .collect();
    let (mean, std_error) = mean_and_se(&times);
    let expected = ((i - 1) * (2 * i - 1)) as f64 / 3.0;
    Ok(WalkReport {
        i,
        samples,
        mean,
        std_error,
        expected,
        pass: (mean - expected).abs() <= 3.0 * std_error,
    })
}
