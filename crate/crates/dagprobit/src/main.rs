use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dagprobit::commands::{self, Grid};
use dagprobit::config::RunConfig;
use dagprobit::{CliError, Result};
use dagprobit_core::simulate::{ScoringMode, SimConfig};

#[derive(Parser)]
#[command(name = "dagprobit", version, about = "Bayesian structure learning and causal effects for DAG-probit models")]
struct Cli {
    /// Worker threads for replicate-level parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate replicate datasets from random DAG-probit models.
    Simulate(SimulateArgs),
    /// Run the sampler on a data file, or on every rep_* directory of a folder.
    Fit(FitArgs),
    /// Model-averaged causal effects from a finished run.
    Effects(EffectsArgs),
    /// Score runs against simulated truth.
    Evaluate(EvaluateArgs),
    /// Compare the causal effects of two independent chains.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of variables including the response (default 10, or 40 with --full).
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Number of replicates (default 10, or 40 with --full).
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Edge probability of the random DAGs (default min(3/(2q-2), 1/2)).
    #[arg(long)]
    edge_prob: Option<f64>,
    /// Threshold of the latent response.
    #[arg(long, default_value_t = 0.0)]
    theta0: f64,
    /// Large-study defaults: 40 variables and 40 replicates.
    #[arg(long)]
    full: bool,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    thin: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    sigma0_sq: Option<f64>,
    /// Centre and scale covariates before fitting.
    #[arg(long, overrides_with = "no_standardize")]
    standardize: bool,
    #[arg(long)]
    no_standardize: bool,
    /// Edge-list file of a DAG to hold fixed.
    #[arg(long)]
    fixed_dag: Option<PathBuf>,
    #[arg(long)]
    max_edges: Option<usize>,
    /// Credible level of reported intervals.
    #[arg(long)]
    level: Option<f64>,
    /// Long run (120000 iterations) unless set elsewhere.
    #[arg(long)]
    full: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let base = if self.full { RunConfig::full() } else { RunConfig::default() };
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path, base)?,
            None => base,
        };
        if let Some(v) = self.iterations {
            cfg.iterations = v;
        }
        if self.burn_in.is_some() {
            cfg.burn_in = self.burn_in;
        }
        if let Some(v) = self.thin {
            cfg.thin = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if self.a.is_some() {
            cfg.a = self.a;
        }
        if self.g.is_some() {
            cfg.g = self.g;
        }
        if self.pi.is_some() {
            cfg.pi = self.pi;
        }
        if let Some(v) = self.sigma0_sq {
            cfg.sigma0_sq = v;
        }
        if self.standardize {
            cfg.standardize = true;
        }
        if self.no_standardize {
            cfg.standardize = false;
        }
        if self.fixed_dag.is_some() {
            cfg.fixed_dag = self.fixed_dag.clone();
        }
        if self.max_edges.is_some() {
            cfg.max_edges = self.max_edges;
        }
        if let Some(v) = self.level {
            cfg.level = v;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct FitArgs {
    /// Data CSV, or a directory of rep_* fixtures.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct EffectsArgs {
    /// Run directory written by `fit`.
    #[arg(long)]
    run: PathBuf,
    /// Intervened nodes as 1-based labels, comma separated (default: all covariates).
    #[arg(long, value_delimiter = ',')]
    nodes: Vec<usize>,
    /// Evaluation grid lo:hi:points (default: the observed values).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    level: Option<f64>,
    /// Data file for observed values (default: the file the run was fitted on).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output file (default: causal_effects.csv in the run directory).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Directed,
    Skeleton,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Truth fixture directory, or a folder of rep_* fixtures.
    #[arg(long)]
    truth: PathBuf,
    /// Run directory, or a folder of rep_* runs matching the fixtures.
    #[arg(long)]
    run: PathBuf,
    #[arg(long, value_enum, default_value = "directed")]
    mode: Mode,
    /// Threshold for counting recovered parents of the response.
    #[arg(long, default_value_t = 0.5)]
    k_star: f64,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, short)]
    out: PathBuf,
    /// Iterations of the second chain (default: same as the first).
    #[arg(long)]
    t2: Option<usize>,
    /// Run both chains on the same random stream.
    #[arg(long)]
    same_stream: bool,
    #[command(flatten)]
    run: RunArgs,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let default_q = if a.full { 40 } else { 10 };
            let default_reps = if a.full { 40 } else { 10 };
            let mut cfg = SimConfig::new(a.q.unwrap_or(default_q), a.n, a.reps.unwrap_or(default_reps), a.seed);
            if cfg.q < 2 {
                return Err(CliError::Usage(format!(
                    "q = {} leaves no covariate; need q >= 2 (the response plus at least one covariate)",
                    cfg.q
                )));
            }
            if let Some(p) = a.edge_prob {
                cfg.edge_prob = p;
            }
            cfg.theta0_true = a.theta0;
            let dirs = commands::with_jobs(cli.jobs, || commands::simulate(&cfg, &a.out))??;
            println!("wrote {} replicate(s) to {}", dirs.len(), a.out.display());
        }
        Command::Fit(a) => {
            let run = a.run.resolve()?;
            if a.data.is_dir() {
                let dirs = commands::with_jobs(cli.jobs, || commands::fit_batch(&a.data, &run, &a.out))??;
                println!("fitted {} replicate(s) into {}", dirs.len(), a.out.display());
            } else {
                let chain = commands::with_jobs(cli.jobs, || commands::fit(&a.data, &run, &a.out, 0))??;
                println!(
                    "{} samples written to {} (DAG acceptance {:.3})",
                    chain.len(),
                    a.out.display(),
                    chain.dag_moves.rate()
                );
            }
        }
        Command::Effects(a) => {
            let grid = match &a.grid {
                Some(text) => Grid::parse(text)?,
                None => Grid::Observed,
            };
            let out = a.out.clone().unwrap_or_else(|| a.run.join(dagprobit::io::CAUSAL_EFFECTS));
            commands::effects(&a.run, &a.nodes, &grid, a.level, a.data.as_deref(), &out)?;
            println!("wrote {}", out.display());
        }
        Command::Evaluate(a) => {
            let mode = match a.mode {
                Mode::Directed => ScoringMode::Directed,
                Mode::Skeleton => ScoringMode::Skeleton,
            };
            if is_batch(&a.truth)? {
                commands::with_jobs(cli.jobs, || commands::evaluate_batch(&a.truth, &a.run, mode, a.k_star))??;
                println!("wrote averaged reports to {}", a.run.display());
            } else {
                let (report, pstar, _) = commands::evaluate(&a.truth, &a.run, mode, a.k_star, &a.run)?;
                println!("AUC {:.4}, p* {:.4}", report.auc, pstar);
            }
        }
        Command::Diagnose(a) => {
            let run = a.run.resolve()?;
            let s = commands::diagnose(&a.data, &run, a.t2, a.same_stream, &a.out)?;
            println!("largest absolute difference between chains: {:.4}", s.overall_max);
        }
    }
    Ok(())
}

fn is_batch(dir: &Path) -> Result<bool> {
    Ok(!dir.join(dagprobit::io::TRUTH_DAG).exists() && !dagprobit::io::replicate_dirs(dir)?.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
