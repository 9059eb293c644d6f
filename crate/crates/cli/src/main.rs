//! `lehmer-ea` command-line harness.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lehmer_ea::experiments::{
    run_experiment, run_one, summary_json, validate_slope, validate_theorem, wilcoxon_bh, write_csv,
    write_outputs, ExperimentConfig, MetricTable, SlopeCheck, Theorem,
};
use lehmer_ea::lehmer::BoundedIntVector;
use lehmer_ea::problems::{exhaustive_optimum, load_lolib, load_qaplib, ProblemInstance};
use lehmer_ea::benchmarks::Space;
use lehmer_ea::{decode, encode, Benchmark, LehmerCode, Permutation};

#[derive(Parser)]
#[command(name = "lehmer-ea", version, about = "Lehmer-code search heuristics and experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Permutation literal (e.g. 3,1,2) to its Lehmer code.
    Encode { permutation: String },
    /// Lehmer code literal (entries for labels n..2) to its permutation.
    Decode { code: String },
    /// Objective value of a point.
    Eval(EvalArgs),
    /// Exact optimum of a small LOP/QAP instance (n ≤ 11).
    Exhaustive(InstanceArgs),
    /// One run of an experiment configuration, printed as JSON.
    Run {
        config: PathBuf,
        /// Run index; selects the derived seed.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// All runs of a configuration.
    ///
    /// Writes <stem>.csv (columns: config_hash, run, seed, evaluations_used,
    /// best_fitness, success, rpd with 6 decimals) and <stem>.json (aggregate
    /// summary). Without an output path the CSV goes to stdout.
    Experiment {
        config: PathBuf,
        /// Output stem; overrides the config's `output`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo check of a runtime statement.
    ///
    /// Theorems: thm1-band, thm2, thm4, thm6, thm11-lead, thm15-lead.
    /// Slope checks: rls-unit-onemax, ea-unit-onemax, ea-uniform-onemax, ea-nval.
    Validate {
        id: String,
        #[arg(long, default_value_t = 50)]
        n: u64,
        /// Sizes for slope checks.
        #[arg(long, value_delimiter = ',', default_value = "50,100,150,200")]
        sizes: Vec<u64>,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        #[arg(long, default_value_t = 0.03)]
        tolerance: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Rank table with signed-rank/BH annotations from a metric CSV
    /// (header `instance,<alg1>,<alg2>,…`; lower values are better).
    Stats { metrics: PathBuf },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct InstanceArgs {
    #[arg(long)]
    lop: Option<PathBuf>,
    #[arg(long)]
    qap: Option<PathBuf>,
}

impl InstanceArgs {
    fn load(&self) -> Result<ProblemInstance> {
        Ok(match (&self.lop, &self.qap) {
            (Some(p), _) => ProblemInstance::Lop(load_lolib(p).with_context(|| format!("reading {}", p.display()))?),
            (_, Some(p)) => ProblemInstance::Qap(load_qaplib(p).with_context(|| format!("reading {}", p.display()))?),
            _ => unreachable!("clap enforces one instance source"),
        })
    }
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, conflicts_with_all = ["lop", "qap"])]
    benchmark: Option<Benchmark>,
    #[arg(long)]
    lop: Option<PathBuf>,
    #[arg(long)]
    qap: Option<PathBuf>,
    #[arg(long, conflicts_with_all = ["code", "vector"])]
    perm: Option<String>,
    #[arg(long, conflicts_with = "vector")]
    code: Option<String>,
    /// NVal point x_1,…,x_n with entries in [0..n-1].
    #[arg(long)]
    vector: Option<String>,
}

fn eval(args: &EvalArgs) -> Result<String> {
    let point_perm = || -> Result<Permutation> {
        match (&args.perm, &args.code) {
            (Some(p), _) => Ok(p.parse()?),
            (_, Some(c)) => Ok(decode(&c.parse::<LehmerCode>()?)),
            _ => bail!("give --perm or --code"),
        }
    };
    if let Some(b) = args.benchmark {
        if b == Benchmark::Nval {
            let Some(v) = &args.vector else { bail!("nval needs --vector") };
            let entries = v
                .split(',')
                .map(|t| t.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .context("vector entries must be non-negative integers")?;
            let x = BoundedIntVector::new(entries.len() as u32, entries)?;
            return Ok(b.evaluate_vector(&x)?.to_string());
        }
        // either point form is accepted; convert to the benchmark's own space
        let value = match (b.space(), &args.code) {
            (Space::Lehmer, Some(c)) => b.evaluate_code(&c.parse()?)?,
            (Space::Lehmer, None) => b.evaluate_code(&encode(&point_perm()?))?,
            _ => b.evaluate_permutation(&point_perm()?)?,
        };
        return Ok(value.to_string());
    }
    let inst = InstanceArgs {
        lop: args.lop.clone(),
        qap: args.qap.clone(),
    };
    if inst.lop.is_none() && inst.qap.is_none() {
        bail!("give --benchmark, --lop or --qap");
    }
    Ok(inst.load()?.eval(&point_perm()?)?.to_string())
}

fn stats(path: &PathBuf) -> Result<String> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = reader.headers()?.clone();
    if header.len() < 3 {
        bail!("metric CSV needs an instance column and at least two algorithm columns");
    }
    let algorithms: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
    let mut instances = Vec::new();
    let mut values = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        instances.push(row.get(0).unwrap_or_default().to_owned());
        let parsed = row
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("non-numeric metric on data row {}", line + 1))?;
        values.push(parsed);
    }
    let table = MetricTable::new(algorithms, instances, values)?;
    let mut out = String::from("algorithm,average_rank,p_value,adjusted_p,annotation\n");
    for r in wilcoxon_bh(&table)? {
        let fmt = |p: Option<f64>| p.map(|v| format!("{v:.6}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{:.6},{},{},{}\n",
            r.algorithm,
            r.average_rank,
            fmt(r.p_value),
            fmt(r.adjusted_p),
            r.annotation
        ));
    }
    Ok(out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` reports a failed validation.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Encode { permutation } => {
            println!("{}", encode(&permutation.parse()?));
        }
        Command::Decode { code } => {
            println!("{}", decode(&code.parse()?));
        }
        Command::Eval(args) => println!("{}", eval(&args)?),
        Command::Exhaustive(args) => {
            let (value, sigma) = exhaustive_optimum(&args.load()?)?;
            println!("{value} {sigma}");
        }
        Command::Run { config, index } => {
            let cfg = ExperimentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            println!("{}", serde_json::to_string_pretty(&run_one(&cfg, index)?)?);
        }
        Command::Experiment { config, output } => {
            let cfg = ExperimentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
            let result = run_experiment(&cfg)?;
            match output.or(cfg.output) {
                Some(stem) => {
                    let (csv, json) = write_outputs(&result, &stem)?;
                    eprintln!("wrote {} and {}", csv.display(), json.display());
                }
                None => {
                    let stdout = std::io::stdout();
                    write_csv(&result, stdout.lock())?;
                    eprintln!("{}", summary_json(&result));
                }
            }
        }
        Command::Validate {
            id,
            n,
            sizes,
            runs,
            tolerance,
            seed,
        } => {
            if let Ok(theorem) = id.parse::<Theorem>() {
                let report = validate_theorem(theorem, n, runs, tolerance, seed)?;
                println!("{report}");
                return Ok(report.pass);
            }
            let check: SlopeCheck = id
                .parse()
                .map_err(|_| anyhow::anyhow!("unknown validation id `{id}`"))?;
            let report = validate_slope(check, &sizes, runs, seed)?;
            println!("{report}");
            return Ok(report.pass);
        }
        Command::Stats { metrics } => {
            let table = stats(&metrics)?;
            std::io::stdout().write_all(table.as_bytes())?;
        }
    }
    Ok(true)
}
