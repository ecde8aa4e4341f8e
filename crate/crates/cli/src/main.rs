use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use thrifty_shadows::ensemble::{EnsembleKind, EnsembleSpec};
use thrifty_shadows::harness::{
    emit, run_experiment, EstimateParams, Experiment, ExperimentConfig, Format, HomeopathicScanParams, MatrixKind,
    MomentTableParams, OptimalReuseParams, TailParams, VarianceScanParams, WeingartenParams, SCHEMA_VERSION,
};
use thrifty_shadows::moments::{Group, TCountConstants};
use thrifty_shadows::shadow::{acquire, write_records, PreparedState};
use thrifty_shadows::tableau::StabilizerTableau;
use thrifty_shadows::tails::TailOptions;

/// Thrifty classical shadow experiments.
#[derive(Parser, Debug)]
#[command(name = "thrifty", version)]
struct Cli {
    /// Seed; overrides the seed of a config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON experiment config; must match the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json; defaults to csv for tables and json for summaries.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    #[arg(long, default_value = "clifford")]
    ensemble: EnsembleKind,
    #[arg(short, long, default_value_t = 6)]
    n: usize,
    /// T count of homeopathic circuits.
    #[arg(short, long, default_value_t = 0)]
    k: usize,
}

impl EnsembleArgs {
    fn spec(&self) -> EnsembleSpec {
        EnsembleSpec { kind: self.ensemble, n: self.n, k: self.k }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Median-of-means shadow estimate for |0^n> and |0^n><0^n| - I/2^n (or a Pauli string).
    Estimate {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long = "N", default_value_t = 10_000)]
        total: usize,
        #[arg(long = "R", default_value_t = 1)]
        reuse: usize,
        #[arg(long = "K", default_value_t = 1)]
        batches: usize,
        #[arg(long)]
        pauli: Option<String>,
        /// Also write the acquired shadow records as JSON lines.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Thrifty variance V_R for a list of R against V/R + (R-1)/R V_*.
    VarianceScan {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long = "N", default_value_t = 200_000)]
        total: usize,
        #[arg(long = "R", value_delimiter = ',', default_value = "1,2,8,64")]
        reuse: Vec<usize>,
        #[arg(long = "K", default_value_t = 1)]
        batches: usize,
        #[arg(long, default_value_t = 10_000)]
        vstar_circuits: usize,
    },
    /// V_* of Clifford circuits with k interleaved T gates.
    HomeopathicScan {
        #[arg(short, long, default_value_t = 6)]
        n: usize,
        #[arg(short, long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6,7,8")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        circuits: usize,
    },
    /// Exact Clifford shadow moments E(X^m) and their large-n limits.
    MomentTable {
        #[arg(short, long, value_delimiter = ',', default_value = "1,2,3,4,5,6,8,10")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        max_m: usize,
        #[arg(long)]
        no_limit: bool,
    },
    /// Empirical moments, exceedances and mean vs median-of-means MSE.
    TailExperiment {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        #[arg(long, default_value_t = 1_000_000)]
        samples: usize,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long = "K", default_value_t = 40)]
        batches: usize,
        #[arg(long, default_value_t = 100)]
        replications: usize,
    },
    /// Exact Gram and Weingarten matrices.
    Weingarten {
        #[arg(short, long, default_value_t = 4)]
        t: usize,
        #[arg(short, long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value = "clifford")]
        group: Group,
        #[arg(long, default_value = "both")]
        matrix: String,
    },
    /// Circuit reuse minimising the variance at fixed cost.
    OptimalReuse {
        #[arg(long, default_value_t = 100.0)]
        alpha: f64,
        #[arg(long, default_value_t = 1e6)]
        budget: f64,
        #[arg(short, long, default_value_t = 0)]
        k: usize,
        #[arg(long = "K", default_value_t = 10)]
        batches: usize,
        #[arg(long, default_value_t = 1000)]
        max_reuse: usize,
        #[arg(long, default_value_t = 3.0)]
        v1: f64,
        #[arg(long, default_value_t = 0.1)]
        vstar: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Estimate { .. } => "estimate",
            Command::VarianceScan { .. } => "variance-scan",
            Command::HomeopathicScan { .. } => "homeopathic-scan",
            Command::MomentTable { .. } => "moment-table",
            Command::TailExperiment { .. } => "tail-experiment",
            Command::Weingarten { .. } => "weingarten",
            Command::OptimalReuse { .. } => "optimal-reuse",
        }
    }

    fn experiment(&self) -> Result<Experiment> {
        Ok(match self {
            Command::Estimate { ensemble, total, reuse, batches, pauli, .. } => Experiment::Estimate(EstimateParams {
                ensemble: ensemble.spec(),
                total: *total,
                reuse: *reuse,
                batches: *batches,
                pauli: pauli.clone(),
            }),
            Command::VarianceScan { ensemble, total, reuse, batches, vstar_circuits } => {
                Experiment::VarianceScan(VarianceScanParams {
                    ensemble: ensemble.spec(),
                    total: *total,
                    reuse: reuse.clone(),
                    batches: *batches,
                    vstar_circuits: *vstar_circuits,
                })
            }
            Command::HomeopathicScan { n, k, circuits } => Experiment::HomeopathicScan(HomeopathicScanParams {
                n: *n,
                k: k.clone(),
                circuits: *circuits,
                constants: TCountConstants::default(),
            }),
            Command::MomentTable { n, max_m, no_limit } => {
                Experiment::MomentTable(MomentTableParams { n: n.clone(), max_m: *max_m, limit: !no_limit })
            }
            Command::TailExperiment { ensemble, samples, budget, batches, replications } => {
                Experiment::TailExperiment(TailParams {
                    ensemble: ensemble.spec(),
                    samples: *samples,
                    options: TailOptions {
                        budget: *budget,
                        batches: *batches,
                        replications: *replications,
                        extra_thresholds: Vec::new(),
                    },
                })
            }
            Command::Weingarten { t, n, group, matrix } => Experiment::Weingarten(WeingartenParams {
                t: *t,
                n: *n,
                group: *group,
                matrix: match matrix.as_str() {
                    "gram" => MatrixKind::Gram,
                    "weingarten" => MatrixKind::Weingarten,
                    "both" => MatrixKind::Both,
                    other => bail!("unknown matrix {other:?}; expected gram, weingarten or both"),
                },
            }),
            Command::OptimalReuse { alpha, budget, k, batches, max_reuse, v1, vstar } => {
                Experiment::OptimalReuse(OptimalReuseParams {
                    alpha: *alpha,
                    budget: *budget,
                    k: *k,
                    batches: *batches,
                    max_reuse: *max_reuse,
                    v1: *v1,
                    vstar: *vstar,
                })
            }
        })
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg: ExperimentConfig =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if cfg.experiment.name() != cli.command.name() {
                bail!("config describes a {} experiment, not {}", cfg.experiment.name(), cli.command.name());
            }
            cfg
        }
        None => ExperimentConfig { schema: SCHEMA_VERSION, seed: 0, experiment: cli.command.experiment()? },
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn output(cli: &Cli) -> Result<Box<dyn Write>> {
    Ok(match &cli.out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
        }
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = load_config(cli)?;
    if let (Command::Estimate { records: Some(path), .. }, Experiment::Estimate(p)) = (&cli.command, &cfg.experiment) {
        let state = PreparedState::Stabilizer(StabilizerTableau::zero_state(p.ensemble.n)?);
        let run =
            thrifty_shadows::shadow::RunConfig { total: p.total, reuse: p.reuse, batches: p.batches, seed: cfg.seed };
        let records = acquire(&p.ensemble, &state, &run)?;
        let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        write_records(&mut w, &records)?;
        w.flush()?;
    }
    let result = run_experiment(&cfg)?;
    let format = cli.format.unwrap_or_else(|| result.default_format());
    let mut w = output(cli)?;
    emit(&result, format, &mut w)?;
    w.flush()?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads.is_some_and(|t| t != 1) {
        bail!("built without the parallel feature; only --threads 1 is available");
    }
    run(&cli)
}
