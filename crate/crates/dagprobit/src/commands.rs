//! The `simulate`, `fit`, `effects`, `evaluate` and `diagnose` commands.

use std::fs;
use std::path::{Path, PathBuf};

use dagprobit_core::causal::{edge_probs, InterventionDraws};
use dagprobit_core::mcmc::{run_chain, ChainConfig, ChainOutput, Dataset};
use dagprobit_core::simulate::{
    average_roc, default_k_grid, mae, predictor_recovery, simulate_replicate, structure_metrics,
    two_chain_diagnostic, EvalReport, ScoringMode, SimConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{self, ConfigEcho, TruthParams};

/// Runs `f` on a pool of at most `jobs` threads (0 = all cores).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} worker threads: {e}")))?;
    Ok(pool.install(f))
}

fn check_finite(what: &str, values: impl IntoIterator<Item = f64>) -> Result<()> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("{what} contains non-finite values")))
    }
}

/// Writes `reps` replicate fixture directories under `out`.
pub fn simulate(cfg: &SimConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    (0..cfg.reps)
        .into_par_iter()
        .map(|r| {
            let (data, truth) = simulate_replicate(cfg, r)?;
            let dir = out.join(io::replicate_name(r));
            io::write_dataset(&dir.join(io::DATA), &data)?;
            io::write_square(&dir.join(io::TRUTH_DAG), &io::adjacency(truth.dag.as_digraph()))?;
            io::write_true_effects(&dir.join(io::TRUE_EFFECTS), &data, &truth.effects)?;
            io::write_json(&dir.join(io::TRUTH_PARAMS), &TruthParams::new(truth.theta0, &truth.chol))?;
            Ok(dir)
        })
        .collect()
}

fn prepare(data_path: &Path, run: &RunConfig) -> Result<Dataset> {
    let data = io::read_dataset(data_path)?;
    if run.standardize {
        Ok(data.standardized()?)
    } else {
        Ok(data)
    }
}

/// Fits one data file and writes the run directory.
pub fn fit(data_path: &Path, run: &RunConfig, out: &Path, stream: u64) -> Result<ChainOutput> {
    let data = prepare(data_path, run)?;
    let hp = run.hyperparameters(data.q(), data.n())?;
    let cfg = run.chain_config(data.q(), stream)?;
    let chain = run_chain(&data, &hp, &cfg)?;
    check_finite("threshold trace", chain.theta0_trace.iter().copied())?;
    let summary = edge_probs(&chain)?;
    let echo = ConfigEcho {
        data: data_path.to_path_buf(),
        n: data.n(),
        q: data.q(),
        standardize: run.standardize,
        level: run.level,
        hyperparameters: hp,
        chain: cfg,
    };
    io::save_run(out, &chain, &echo)?;
    io::write_edge_probs(&out.join(io::EDGE_PROBS), &summary)?;
    Ok(chain)
}

/// Fits every `rep_*/data.csv` under `root`, replicate `r` on stream `r`.
pub fn fit_batch(root: &Path, run: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let reps = io::replicate_dirs(root)?;
    if reps.is_empty() {
        return Err(CliError::input(root, "no rep_* directories found"));
    }
    reps.par_iter()
        .enumerate()
        .map(|(r, dir)| {
            let dest = out.join(dir.file_name().expect("replicate directories have names"));
            fit(&dir.join(io::DATA), run, &dest, r as u64)?;
            Ok(dest)
        })
        .collect()
}

/// Where causal effects are evaluated.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    /// Distinct observed values of the intervened covariate.
    Observed,
    /// `points` equally spaced values from `lo` to `hi`.
    Uniform { lo: f64, hi: f64, points: usize },
}

impl Grid {
    /// Parses `lo:hi:points`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || CliError::Usage(format!("grid must look like lo:hi:points, got {text:?}"));
        let parts: Vec<&str> = text.split(':').collect();
        let [lo, hi, m] = parts[..] else { return Err(bad()) };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let points: usize = m.trim().parse().map_err(|_| bad())?;
        if points == 0 || !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(bad());
        }
        Ok(Grid::Uniform { lo, hi, points })
    }

    fn values(&self, observed: impl Iterator<Item = f64>) -> Vec<f64> {
        match *self {
            Grid::Observed => {
                let mut v: Vec<f64> = observed.collect();
                v.sort_by(f64::total_cmp);
                v.dedup();
                v
            }
            Grid::Uniform { lo, points: 1, .. } => vec![lo],
            Grid::Uniform { lo, hi, points } => (0..points)
                .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .collect(),
        }
    }
}

/// Model-averaged effects of intervening on each of `nodes` (1-based
/// labels; all covariates when empty), written to `out`.
pub fn effects(run_dir: &Path, nodes: &[usize], grid: &Grid, level: Option<f64>, data: Option<&Path>, out: &Path) -> Result<()> {
    let (chain, echo) = io::load_run(run_dir)?;
    let q = echo.q;
    for &s in nodes {
        if s < 2 || s > q {
            return Err(CliError::Usage(format!(
                "unknown node {s}: intervened nodes are covariates labelled 2 to {q}"
            )));
        }
    }
    let nodes: Vec<usize> = if nodes.is_empty() { (2..=q).collect() } else { nodes.to_vec() };
    let observed = match grid {
        Grid::Observed => {
            let path = data.unwrap_or(&echo.data);
            let run = RunConfig {
                standardize: echo.standardize,
                ..RunConfig::default()
            };
            let d = prepare(path, &run)?;
            if d.q() != q {
                return Err(dagprobit_core::Error::DimensionMismatch {
                    what: "data columns",
                    expected: q,
                    found: d.q(),
                }
                .into());
            }
            Some(d)
        }
        Grid::Uniform { .. } => None,
    };
    let draws = InterventionDraws::from_chain(&chain)?;
    let level = level.unwrap_or(echo.level);
    let tables = nodes
        .iter()
        .map(|&s| {
            let xs = grid.values(observed.iter().flat_map(|d| d.covariates().column(s - 2).iter().copied().collect::<Vec<_>>()));
            draws.table(s - 1, &xs, level)
        })
        .collect::<dagprobit_core::Result<Vec<_>>>()?;
    for t in &tables {
        check_finite("causal effects", t.bma.iter().chain(&t.lower).chain(&t.upper).copied())?;
    }
    io::write_effects(out, &tables)
}

#[derive(Clone, Debug, Serialize)]
pub struct AucReport {
    pub mode: ScoringMode,
    pub auc: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PstarReport {
    pub k_star: f64,
    pub pstar: f64,
}

/// Scores one run against one truth fixture and writes the reports into
/// `out`. Returns the ROC report, `p*` and the per-covariate MAE (when the
/// truth carries effects and the run stored its Cholesky samples).
pub fn evaluate(truth_dir: &Path, run_dir: &Path, mode: ScoringMode, k_star: f64, out: &Path) -> Result<(EvalReport, f64, Vec<f64>)> {
    let truth = io::read_truth_dag(&truth_dir.join(io::TRUTH_DAG))?;
    let summary = io::read_edge_probs(&run_dir.join(io::EDGE_PROBS))?;
    let report = structure_metrics(&truth, &summary, &default_k_grid(), mode)?;
    let pstar = predictor_recovery(&truth, &summary, k_star)?;

    let mut errors = Vec::new();
    let effects_path = truth_dir.join(io::TRUE_EFFECTS);
    let echo_path = run_dir.join(io::CONFIG_ECHO);
    if effects_path.exists() && echo_path.exists() {
        let (chain, echo) = io::load_run(run_dir)?;
        if echo.q != truth.q() {
            return Err(dagprobit_core::Error::DimensionMismatch {
                what: "run vertices",
                expected: truth.q(),
                found: echo.q,
            }
            .into());
        }
        if echo.standardize {
            return Err(CliError::Usage(
                "effect errors need a run fitted on the original scale (standardize = false)".into(),
            ));
        }
        if !chain.chol_samples.is_empty() {
            let draws = InterventionDraws::from_chain(&chain)?;
            for (k, (xs, true_eff)) in io::read_true_effects(&effects_path, truth.q())?.into_iter().enumerate() {
                let table = draws.table(k + 1, &xs, echo.level)?;
                errors.push(mae(&true_eff, &table.bma)?);
            }
        }
    }

    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    io::write_roc(&out.join(io::ROC), &report)?;
    io::write_json(&out.join(io::AUC), &AucReport { mode, auc: report.auc })?;
    io::write_json(&out.join(io::PSTAR), &PstarReport { k_star, pstar })?;
    if !errors.is_empty() {
        write_mae(&out.join(io::MAE), errors.iter().enumerate().map(|(k, &e)| (None, k + 2, e)))?;
    }
    Ok((report, pstar, errors))
}

fn write_mae(path: &Path, rows: impl Iterator<Item = (Option<String>, usize, f64)>) -> Result<()> {
    #[derive(Serialize)]
    struct Row {
        #[serde(skip_serializing_if = "Option::is_none")]
        rep: Option<String>,
        s: usize,
        mae: f64,
    }
    let mut w = io::csv_writer(path)?;
    for (rep, s, mae) in rows {
        w.serialize(Row { rep, s, mae }).map_err(|e| CliError::input(path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Clone, Debug, Serialize)]
struct BatchAuc {
    mode: ScoringMode,
    mean: f64,
    per_replicate: Vec<(String, f64)>,
}

#[derive(Clone, Debug, Serialize)]
struct BatchPstar {
    k_star: f64,
    mean: f64,
    per_replicate: Vec<(String, f64)>,
}

/// Evaluates every replicate present under both roots and writes the
/// averaged ROC (with its percentile band) and summaries into `run_root`.
pub fn evaluate_batch(truth_root: &Path, run_root: &Path, mode: ScoringMode, k_star: f64) -> Result<()> {
    let reps = io::replicate_dirs(truth_root)?;
    if reps.is_empty() {
        return Err(CliError::input(truth_root, "no rep_* directories found"));
    }
    let results = reps
        .par_iter()
        .map(|truth| {
            let name = truth.file_name().expect("replicate directories have names").to_string_lossy().into_owned();
            let run = run_root.join(&name);
            let r = evaluate(truth, &run, mode, k_star, &run)?;
            Ok((name, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<EvalReport> = results.iter().map(|(_, r)| r.0.clone()).collect();
    io::write_averaged_roc(&run_root.join(io::ROC), &average_roc(&reports)?)?;
    let mean = |v: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = v.collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    io::write_json(
        &run_root.join(io::AUC),
        &BatchAuc {
            mode,
            mean: mean(&mut results.iter().map(|(_, r)| r.0.auc)),
            per_replicate: results.iter().map(|(n, r)| (n.clone(), r.0.auc)).collect(),
        },
    )?;
    io::write_json(
        &run_root.join(io::PSTAR),
        &BatchPstar {
            k_star,
            mean: mean(&mut results.iter().map(|(_, r)| r.1)),
            per_replicate: results.iter().map(|(n, r)| (n.clone(), r.1)).collect(),
        },
    )?;
    if results.iter().any(|(_, r)| !r.2.is_empty()) {
        write_mae(
            &run_root.join(io::MAE),
            results
                .iter()
                .flat_map(|(n, r)| r.2.iter().enumerate().map(move |(k, &e)| (Some(n.clone()), k + 2, e))),
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticSummary {
    pub iterations: (usize, usize),
    pub streams: (u64, u64),
    /// Per covariate label, the largest absolute difference between the
    /// two chains' model-averaged effects.
    pub max_abs_diff: Vec<(usize, f64)>,
    pub overall_max: f64,
}

/// Runs two chains on `data_path` and compares their model-averaged
/// effects at the observed covariate values.
pub fn diagnose(data_path: &Path, run: &RunConfig, t2: Option<usize>, same_stream: bool, out: &Path) -> Result<DiagnosticSummary> {
    let data = prepare(data_path, run)?;
    let hp = run.hyperparameters(data.q(), data.n())?;
    let cfg: ChainConfig = run.chain_config(data.q(), 0)?;
    let t2 = t2.unwrap_or(cfg.iterations);
    let report = if same_stream {
        let mut b = cfg.clone();
        b.iterations = t2;
        dagprobit_core::simulate::compare_chains(&data, &hp, &cfg, &b)?
    } else {
        two_chain_diagnostic(&data, &hp, &cfg, cfg.iterations, t2)?
    };
    check_finite("diagnostic", report.pairs.iter().flat_map(|p| [p.2, p.3]))?;

    let path = out.join(io::DIAGNOSTIC_PAIRS);
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut w = io::csv_writer(&path)?;
    w.write_record(["s", "x_tilde", "bma_chain1", "bma_chain2"])
        .map_err(|e| CliError::input(&path, e.to_string()))?;
    for &(s, x, a, b) in &report.pairs {
        w.write_record([(s + 1).to_string(), x.to_string(), a.to_string(), b.to_string()])
            .map_err(|e| CliError::input(&path, e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let summary = DiagnosticSummary {
        iterations: (cfg.iterations, t2),
        streams: (cfg.stream, if same_stream { cfg.stream } else { cfg.stream + 1 }),
        max_abs_diff: report.max_abs_diff.iter().enumerate().map(|(k, &d)| (k + 2, d)).collect(),
        overall_max: report.overall_max(),
    };
    io::write_json(&out.join(io::DIAGNOSTIC), &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(
            Grid::parse("-1:1:5").unwrap(),
            Grid::Uniform { lo: -1.0, hi: 1.0, points: 5 }
        );
        assert_eq!(Grid::parse("0.5:0.5:1").unwrap().values(std::iter::empty()), vec![0.5]);
        assert_eq!(
            Grid::parse("-1:1:3").unwrap().values(std::iter::empty()),
            vec![-1.0, 0.0, 1.0]
        );
        for bad in ["1:0:3", "a:1:2", "0:1", "0:1:0"] {
            assert!(Grid::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn observed_grid_is_sorted_and_distinct() {
        let v = Grid::Observed.values([2.0, -1.0, 2.0, 0.5].into_iter());
        assert_eq!(v, vec![-1.0, 0.5, 2.0]);
    }
}
