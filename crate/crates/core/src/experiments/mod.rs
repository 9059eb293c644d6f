//! Experiment configuration, fixed-target and fixed-budget runners, metrics,
//! and result files.

pub mod stats;
pub mod theory;

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algorithms::{
    derive_seed, ea_lehmer_run, ea_multivalued_run, ea_perm_run, rls_run, RunOptions, RunRecord,
    StoppingCondition,
};
use crate::benchmarks::{Benchmark, Direction, FitnessValue, Objective, Space, ViaDecode};
use crate::error::{Error, Result};
use crate::lehmer::{encode, BoundedIntVector, LabelSelection, LehmerCode, StepOperator};
use crate::perm::{MoveScheme, Permutation};
use crate::problems::{exhaustive_optimum, load_lolib, load_qaplib, ProblemInstance, EXHAUSTIVE_MAX_N};

pub use stats::{wilcoxon_bh, AlgorithmRank, Annotation, MetricTable};
pub use theory::{
    closed_form, harmonic_number, random_walk_hitting_check, validate_slope, validate_theorem,
    Harmonic, SlopeCheck, SlopeReport, Theorem, TheoremReport, WalkReport,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AlgorithmSpec {
    Rls {
        step: StepOperator,
        labels: LabelSelection,
    },
    EaLehmer {
        step: StepOperator,
    },
    EaPerm {
        scheme: MoveScheme,
        #[serde(default)]
        poisson_offset: u64,
    },
    EaMultivalued,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    Benchmark {
        name: Benchmark,
        n: usize,
    },
    /// LOLIB file, optionally restricted to a random principal submatrix.
    Lop {
        path: PathBuf,
        #[serde(default)]
        subsample: Option<usize>,
    },
    /// QAPLIB file, optionally subsampled.
    Qap {
        path: PathBuf,
        #[serde(default)]
        subsample: Option<usize>,
    },
    /// An instance embedded in the configuration.
    Inline {
        instance: ProblemInstance,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    #[default]
    FixedTarget,
    FixedBudget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmSpec,
    pub problem: ProblemSpec,
    pub runs: u64,
    pub budget: u64,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub target: Option<FitnessValue>,
    pub master_seed: u64,
    /// Defaults to true on benchmarks and false on LOP/QAP instances.
    #[serde(default)]
    pub count_noop_evals: Option<bool>,
    /// Concurrent runs; all available cores when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub record_trajectory: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::invalid("runs must be at least 1"));
        }
        if self.budget == 0 {
            return Err(Error::invalid("budget must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers must be at least 1"));
        }
        Ok(())
    }

    /// Short SHA-256 of the fields that determine the results; the output
    /// path and worker count are excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = None;
        canonical.workers = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// A problem ready to be searched.
#[derive(Clone, Debug)]
pub enum ResolvedProblem {
    Benchmark { benchmark: Benchmark, n: usize },
    Instance(ProblemInstance),
}

impl ResolvedProblem {
    pub fn n(&self) -> usize {
        match self {
            ResolvedProblem::Benchmark { n, .. } => *n,
            ResolvedProblem::Instance(i) => i.n(),
        }
    }

    pub fn direction(&self) -> Direction {
        match self {
            ResolvedProblem::Benchmark { benchmark, .. } => benchmark.direction(),
            ResolvedProblem::Instance(_) => Direction::Minimize,
        }
    }

    /// Known optimum: benchmark optimum, or exhaustive search for small
    /// instances.
    pub fn optimum(&self) -> Result<Option<FitnessValue>> {
        Ok(match self {
            ResolvedProblem::Benchmark { benchmark, n } => Some(benchmark.optimum(*n)),
            ResolvedProblem::Instance(i) if i.n() <= EXHAUSTIVE_MAX_N => {
                Some(FitnessValue::Scalar(exhaustive_optimum(i)?.0))
            }
            ResolvedProblem::Instance(_) => None,
        })
    }
}

/// Loads instance files and draws the subsample, if any, from a stream
/// derived from the master seed.
pub fn resolve_problem(spec: &ProblemSpec, master_seed: u64) -> Result<ResolvedProblem> {
    let subsample = |inst: ProblemInstance, m: &Option<usize>| -> Result<ProblemInstance> {
        match m {
            Some(m) => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, u64::MAX));
                inst.subsample(*m, &mut rng)
            }
            None => Ok(inst),
        }
    };
    match spec {
        ProblemSpec::Benchmark { name, n } => {
            let min = if name.space() == Space::MultiValued { 1 } else { 2 };
            if *n < min {
                return Err(Error::invalid(format!("{name} needs n ≥ {min}, got {n}")));
            }
            Ok(ResolvedProblem::Benchmark {
                benchmark: *name,
                n: *n,
            })
        }
        ProblemSpec::Lop { path, subsample: m } => Ok(ResolvedProblem::Instance(subsample(
            ProblemInstance::Lop(load_lolib(path)?),
            m,
        )?)),
        ProblemSpec::Qap { path, subsample: m } => Ok(ResolvedProblem::Instance(subsample(
            ProblemInstance::Qap(load_qaplib(path)?),
            m,
        )?)),
        ProblemSpec::Inline { instance } => Ok(ResolvedProblem::Instance(instance.clone())),
    }
}

/// A Lehmer-space objective evaluated on permutations through `encode`.
struct ViaEncode(Benchmark);

impl Objective<Permutation> for ViaEncode {
    fn direction(&self) -> Direction {
        self.0.direction()
    }

    fn evaluate(&self, x: &Permutation) -> FitnessValue {
        self.0.evaluate_code(&encode(x)).expect("benchmark matches the space")
    }
}

/// A benchmark evaluated in its own space (Lehmer or permutation).
struct Native(Benchmark);

impl Objective<LehmerCode> for Native {
    fn direction(&self) -> Direction {
        self.0.direction()
    }

    fn evaluate(&self, x: &LehmerCode) -> FitnessValue {
        self.0.evaluate_code(x).expect("benchmark matches the space")
    }
}

impl Objective<Permutation> for Native {
    fn direction(&self) -> Direction {
        self.0.direction()
    }

    fn evaluate(&self, x: &Permutation) -> FitnessValue {
        self.0.evaluate_permutation(x).expect("benchmark matches the space")
    }
}

fn run_lehmer<O: Objective<LehmerCode>>(
    algorithm: &AlgorithmSpec,
    objective: &O,
    n: usize,
    stop: &StoppingCondition,
    opts: &RunOptions<LehmerCode>,
) -> Result<RunRecord> {
    match algorithm {
        AlgorithmSpec::Rls { step, labels } => rls_run(objective, n, *step, *labels, stop, opts),
        AlgorithmSpec::EaLehmer { step } => ea_lehmer_run(objective, n, *step, stop, opts),
        _ => unreachable!("dispatched on the algorithm space"),
    }
}

/// Executes run `index` of a configuration.
pub fn run_single(
    algorithm: &AlgorithmSpec,
    problem: &ResolvedProblem,
    stop: &StoppingCondition,
    seed: u64,
    count_noop_evals: bool,
    record_trajectory: bool,
) -> Result<RunRecord> {
    let n = problem.n();
    let mismatch = || {
        Error::unsupported(format!(
            "algorithm {} cannot search this problem",
            serde_json::to_string(algorithm).unwrap_or_default()
        ))
    };
    macro_rules! opts {
        () => {{
            let mut o = RunOptions::seeded(seed).with_noop_evals(count_noop_evals);
            o.record_trajectory = record_trajectory;
            o
        }};
    }
    match (algorithm, problem) {
        (AlgorithmSpec::EaMultivalued, ResolvedProblem::Benchmark { benchmark: Benchmark::Nval, n }) => {
            let opts: RunOptions<BoundedIntVector> = opts!();
            ea_multivalued_run(&crate::benchmarks::NVal, *n, *n as u32, stop, &opts)
        }
        (AlgorithmSpec::EaMultivalued, _) | (_, ResolvedProblem::Benchmark { benchmark: Benchmark::Nval, .. }) => {
            Err(mismatch())
        }
        (AlgorithmSpec::EaPerm { scheme, poisson_offset }, _) => {
            let opts: RunOptions<Permutation> = opts!();
            match problem {
                ResolvedProblem::Benchmark { benchmark, .. } if benchmark.space() == Space::Lehmer => {
                    ea_perm_run(&ViaEncode(*benchmark), n, *scheme, *poisson_offset, stop, &opts)
                }
                ResolvedProblem::Benchmark { benchmark, .. } => {
                    ea_perm_run(&Native(*benchmark), n, *scheme, *poisson_offset, stop, &opts)
                }
                ResolvedProblem::Instance(inst) => ea_perm_run(inst, n, *scheme, *poisson_offset, stop, &opts),
            }
        }
        (_, ResolvedProblem::Benchmark { benchmark, .. }) => {
            let opts: RunOptions<LehmerCode> = opts!();
            if benchmark.space() == Space::Lehmer {
                run_lehmer(algorithm, &Native(*benchmark), n, stop, &opts)
            } else {
                run_lehmer(algorithm, &ViaDecode(Native(*benchmark)), n, stop, &opts)
            }
        }
        (_, ResolvedProblem::Instance(inst)) => {
            let opts: RunOptions<LehmerCode> = opts!();
            run_lehmer(algorithm, &ViaDecode(inst), n, stop, &opts)
        }
    }
}

/// Mean, sample standard deviation, minimum and maximum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub min: u64,
    pub max: u64,
}

impl Summary {
    /// From exact integer sums, so the result does not depend on order.
    pub fn of(values: &[u64]) -> Summary {
        let k = values.len() as u128;
        let sum: u128 = values.iter().map(|&v| v as u128).sum();
        let sq: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
        let mean = sum as f64 / k as f64;
        let sd = if k > 1 {
            // k·Σv² − (Σv)² is exact in integers
            let num = k * sq - sum * sum;
            (num as f64 / (k * (k - 1)) as f64).sqrt()
        } else {
            0.0
        };
        Summary {
            mean,
            sd,
            min: values.iter().copied().min().unwrap_or(0),
            max: values.iter().copied().max().unwrap_or(0),
        }
    }
}

/// Serializes non-finite floats as the strings "inf" / "nan".
mod lenient_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                other => Err(serde::de::Error::custom(format!("invalid number `{other}`"))),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub config_hash: String,
    pub mode: Mode,
    pub budget: u64,
    pub target: Option<FitnessValue>,
    pub records: Vec<RunRecord>,
    pub runs: u64,
    pub successes: u64,
    pub success_rate: f64,
    /// Runtime per run: evaluations when successful, the budget otherwise.
    pub runtime: Summary,
    pub mean_runtime: f64,
    #[serde(with = "lenient_float")]
    pub ert: f64,
    /// Reference for RPD: best value seen across the suite.
    pub best_known: Option<FitnessValue>,
    /// Per-run RPD, aligned with `records`.
    pub rpd: Vec<Option<f64>>,
    pub mean_rpd: Option<f64>,
}

/// Mean runtime divided by success rate; infinite without successes.
pub fn ert(mean_runtime: f64, success_rate: f64) -> f64 {
    if success_rate <= 0.0 {
        f64::INFINITY
    } else {
        mean_runtime / success_rate
    }
}

/// `100·|val − best| / |best|`; undefined for a zero or non-scalar best.
pub fn rpd(value: &FitnessValue, best: &FitnessValue) -> Option<f64> {
    let v = value.as_scalar()?;
    let b = best.as_scalar()?;
    if b == 0 {
        return None;
    }
    let diff = (v as i128 - b as i128).unsigned_abs() as f64;
    Some(100.0 * diff / (b as i128).unsigned_abs() as f64)
}

/// Aggregates run records; `best_known` enables RPD.
pub fn aggregate(
    config_hash: String,
    mode: Mode,
    budget: u64,
    target: Option<FitnessValue>,
    records: Vec<RunRecord>,
    best_known: Option<FitnessValue>,
) -> AggregateResult {
    let runs = records.len() as u64;
    let successes = records.iter().filter(|r| r.success).count() as u64;
    let runtimes: Vec<u64> = records
        .iter()
        .map(|r| if r.success { r.evaluations_used } else { budget })
        .collect();
    let runtime = Summary::of(&runtimes);
    let success_rate = successes as f64 / runs as f64;
    let rpd_values: Vec<Option<f64>> = records
        .iter()
        .map(|r| best_known.as_ref().and_then(|b| rpd(&r.best_fitness, b)))
        .collect();
    let mean_rpd = if !rpd_values.is_empty() && rpd_values.iter().all(Option::is_some) {
        // summed in sorted order so the mean does not depend on record order
        let mut sorted: Vec<f64> = rpd_values.iter().flatten().copied().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Some(sorted.iter().sum::<f64>() / sorted.len() as f64)
    } else {
        None
    };
    AggregateResult {
        config_hash,
        mode,
        budget,
        target,
        records,
        runs,
        successes,
        success_rate,
        mean_runtime: runtime.mean,
        ert: ert(runtime.mean, success_rate),
        runtime,
        best_known,
        rpd: rpd_values,
        mean_rpd,
    }
}

fn with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn execute(cfg: &ExperimentConfig, problem: &ResolvedProblem, target: Option<FitnessValue>) -> Result<Vec<RunRecord>> {
    let stop = StoppingCondition::new(target, cfg.budget)?;
    let count_noop = cfg
        .count_noop_evals
        .unwrap_or(matches!(problem, ResolvedProblem::Benchmark { .. }));
    with_workers(cfg.workers, || {
        (0..cfg.runs)
            .into_par_iter()
            .map(|r| {
                run_single(
                    &cfg.algorithm,
                    problem,
                    &stop,
                    derive_seed(cfg.master_seed, r),
                    count_noop,
                    cfg.record_trajectory,
                )
            })
            .collect::<Result<Vec<_>>>()
    })?
}

/// Runs until the target (given, or the known optimum) or the budget.
pub fn run_fixed_target(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    cfg.validate()?;
    let problem = resolve_problem(&cfg.problem, cfg.master_seed)?;
    let target = match &cfg.target {
        Some(t) => t.clone(),
        None => problem.optimum()?.ok_or_else(|| {
            Error::invalid("fixed-target mode needs a target for instances beyond exhaustive size")
        })?,
    };
    let records = execute(cfg, &problem, Some(target.clone()))?;
    Ok(aggregate(cfg.hash(), Mode::FixedTarget, cfg.budget, Some(target), records, None))
}

/// Runs every configuration of a fixed-budget suite; RPD is measured against
/// the best value any configuration reached on the same problem.
pub fn run_fixed_budget_suite(cfgs: &[ExperimentConfig]) -> Result<Vec<AggregateResult>> {
    let mut outcomes = Vec::with_capacity(cfgs.len());
    for cfg in cfgs {
        cfg.validate()?;
        let problem = resolve_problem(&cfg.problem, cfg.master_seed)?;
        let records = execute(cfg, &problem, cfg.target.clone())?;
        // problems are grouped by their canonical description
        let key = match &problem {
            ResolvedProblem::Benchmark { benchmark, n } => format!("{benchmark}/{n}"),
            ResolvedProblem::Instance(i) => serde_json::to_string(i).expect("instance serializes"),
        };
        outcomes.push((cfg, problem.direction(), key, records));
    }
    let mut best: HashMap<&str, FitnessValue> = HashMap::new();
    for (_, direction, key, records) in &outcomes {
        for r in records {
            best.entry(key.as_str())
                .and_modify(|b| {
                    if direction.better(&r.best_fitness, b) {
                        *b = r.best_fitness.clone();
                    }
                })
                .or_insert_with(|| r.best_fitness.clone());
        }
    }
    Ok(outcomes
        .iter()
        .map(|(cfg, _, key, records)| {
            aggregate(
                cfg.hash(),
                Mode::FixedBudget,
                cfg.budget,
                cfg.target.clone(),
                records.clone(),
                best.get(key.as_str()).cloned(),
            )
        })
        .collect())
}

pub fn run_fixed_budget(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    Ok(run_fixed_budget_suite(std::slice::from_ref(cfg))?.remove(0))
}

/// Run `index` of a configuration alone, with its improvement trajectory.
pub fn run_one(cfg: &ExperimentConfig, index: u64) -> Result<RunRecord> {
    cfg.validate()?;
    let problem = resolve_problem(&cfg.problem, cfg.master_seed)?;
    let target = match (cfg.mode, &cfg.target) {
        (_, Some(t)) => Some(t.clone()),
        (Mode::FixedTarget, None) => problem.optimum()?,
        (Mode::FixedBudget, None) => None,
    };
    let stop = StoppingCondition::new(target, cfg.budget)?;
    let count_noop = cfg
        .count_noop_evals
        .unwrap_or(matches!(problem, ResolvedProblem::Benchmark { .. }));
    run_single(&cfg.algorithm, &problem, &stop, derive_seed(cfg.master_seed, index), count_noop, true)
}

/// Dispatches on `cfg.mode`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    match cfg.mode {
        Mode::FixedTarget => run_fixed_target(cfg),
        Mode::FixedBudget => run_fixed_budget(cfg),
    }
}

pub const CSV_HEADER: &str = "config_hash,run,seed,evaluations_used,best_fitness,success,rpd";

/// One row per run; RPD with six decimals, empty when undefined.
pub fn write_csv<W: Write>(result: &AggregateResult, mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (k, (r, rpd)) in result.records.iter().zip(&result.rpd).enumerate() {
        let rpd = rpd.map(|v| format!("{v:.6}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            result.config_hash, k, r.seed, r.evaluations_used, r.best_fitness, r.success, rpd
        )?;
    }
    Ok(())
}

pub fn csv_string(result: &AggregateResult) -> String {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Summary JSON without the per-run records (those live in the CSV).
pub fn summary_json(result: &AggregateResult) -> String {
    let mut value = serde_json::to_value(result).expect("result serializes");
    if let Some(map) = value.as_object_mut() {
        map.remove("records");
        map.remove("rpd");
    }
    serde_json::to_string_pretty(&value).expect("summary serializes")
}

/// Writes `<stem>.csv` and `<stem>.json` next to `output`.
pub fn write_outputs(result: &AggregateResult, output: &Path) -> Result<(PathBuf, PathBuf)> {
    let csv_path = output.with_extension("csv");
    let json_path = output.with_extension("json");
    std::fs::write(&csv_path, csv_string(result))?;
    std::fs::write(&json_path, summary_json(result) + "\n")?;
    Ok((csv_path, json_path))
}
