//! CSV, JSON and JSONL formats. Vertex labels in files are 1-based; label 1
//! is the response.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use dagprobit_core::causal::{CausalEffectTable, PosteriorSummary};
use dagprobit_core::gauss::CholeskyFactor;
use dagprobit_core::mcmc::{AcceptCounter, ChainConfig, ChainOutput, Dataset};
use dagprobit_core::simulate::{AveragedRocPoint, EvalReport};
use dagprobit_core::{Dag, Digraph, Hyperparameters};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DATA: &str = "data.csv";
pub const TRUTH_DAG: &str = "truth_dag.csv";
pub const TRUE_EFFECTS: &str = "true_effects.csv";
pub const TRUTH_PARAMS: &str = "truth_params.json";
pub const THETA0_TRACE: &str = "theta0_trace.csv";
pub const DAG_SAMPLES: &str = "dag_samples.jsonl";
pub const CHOL_SAMPLES: &str = "chol_samples.jsonl";
pub const ACCEPT_RATES: &str = "accept_rates.json";
pub const CONFIG_ECHO: &str = "config_echo.json";
pub const EDGE_PROBS: &str = "edge_probs.csv";
pub const CAUSAL_EFFECTS: &str = "causal_effects.csv";
pub const ROC: &str = "roc.csv";
pub const AUC: &str = "auc.json";
pub const MAE: &str = "mae.csv";
pub const PSTAR: &str = "pstar.json";
pub const DIAGNOSTIC_PAIRS: &str = "diagnostic_pairs.csv";
pub const DIAGNOSTIC: &str = "diagnostic.json";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(create(path)?))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    match e.position() {
        Some(pos) => CliError::input(path, format!("line {}: {e}", pos.line())),
        None => CliError::input(path, e.to_string()),
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::input(path, e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(io_err(path))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| CliError::input(path, e.to_string()))
}

fn parse_f64(path: &Path, line: u64, column: &str, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::input(path, format!("line {line}, column {column:?}: cannot parse {field:?} as a finite number")))
}

/// Reads a data file: a header row whose first column is `y` (values 0 or
/// 1), followed by one column per covariate.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut reader = csv_reader(path)?;
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.get(0) != Some("y") {
        return Err(CliError::input(path, "line 1: the first column must be named \"y\""));
    }
    if header.len() < 2 {
        return Err(CliError::Usage(format!(
            "{}: need at least one covariate column besides \"y\"",
            path.display()
        )));
    }
    let q = header.len();
    let mut y = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let yv = parse_f64(path, line, "y", &record[0])?;
        y.push(match yv {
            0.0 => false,
            1.0 => true,
            _ => {
                return Err(CliError::input(
                    path,
                    format!("line {line}, column \"y\": expected 0 or 1, found {:?}", &record[0]),
                ))
            }
        });
        for k in 1..q {
            values.push(parse_f64(path, line, &header[k], &record[k])?);
        }
    }
    if y.is_empty() {
        return Err(CliError::input(path, "no data rows"));
    }
    let x = DMatrix::from_row_slice(y.len(), q - 1, &values);
    Ok(Dataset::new(y, x)?)
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = csv_writer(path)?;
    let q = data.q();
    let header: Vec<String> = std::iter::once("y".to_string())
        .chain((2..=q).map(|j| format!("x{j}")))
        .collect();
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    let x = data.covariates();
    for (i, &yi) in data.y().iter().enumerate() {
        let row: Vec<String> = std::iter::once(if yi { "1".to_string() } else { "0".to_string() })
            .chain((0..q - 1).map(|k| x[(i, k)].to_string()))
            .collect();
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes a `q × q` matrix with a header of vertex labels; row `u`, column
/// `v` refers to the pair `u → v`.
pub fn write_square(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv_writer(path)?;
    let header: Vec<String> = (1..=m.ncols()).map(|j| format!("x{j}")).collect();
    w.write_record(&header).map_err(|e| csv_err(path, e))?;
    for i in 0..m.nrows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string())).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_square(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv_reader(path)?;
    let q = reader.headers().map_err(|e| csv_err(path, e))?.len();
    let header = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let mut values = Vec::with_capacity(q * q);
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        for (k, field) in record.iter().enumerate() {
            values.push(parse_f64(path, line, &header[k], field)?);
        }
        rows += 1;
    }
    if rows != q {
        return Err(CliError::input(path, format!("expected {q} rows for a {q} × {q} matrix, found {rows}")));
    }
    Ok(DMatrix::from_row_slice(q, q, &values))
}

pub fn adjacency(graph: &Digraph) -> DMatrix<f64> {
    let q = graph.q();
    DMatrix::from_fn(q, q, |u, v| if graph.has_edge(u, v) { 1.0 } else { 0.0 })
}

pub fn read_truth_dag(path: &Path) -> Result<Dag> {
    let m = read_square(path)?;
    let q = m.nrows();
    let mut edges = Vec::new();
    for u in 0..q {
        for v in 0..q {
            match m[(u, v)] {
                0.0 => {}
                1.0 => edges.push((u, v)),
                other => {
                    return Err(CliError::input(path, format!("entry ({}, {}) is {other}, expected 0 or 1", u + 1, v + 1)))
                }
            }
        }
    }
    Dag::from_edges(q, edges).map_err(|e| CliError::input(path, e.to_string()))
}

pub fn write_edge_probs(path: &Path, summary: &PosteriorSummary) -> Result<()> {
    write_square(path, &summary.probs)
}

pub fn read_edge_probs(path: &Path) -> Result<PosteriorSummary> {
    Ok(PosteriorSummary::from_matrix(read_square(path)?)?)
}

/// Effects of setting covariate `s` (1-based label) to each `x_tilde`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrueEffectRow {
    pub s: usize,
    pub x_tilde: f64,
    pub effect: f64,
}

/// Writes one row per covariate and observation, in observation order.
/// `effects[s]` holds the effects of vertex `s` (0-based); `effects[0]` is
/// ignored.
pub fn write_true_effects(path: &Path, data: &Dataset, effects: &[Vec<f64>]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (s, col) in effects.iter().enumerate().skip(1) {
        for (i, &effect) in col.iter().enumerate() {
            w.serialize(TrueEffectRow {
                s: s + 1,
                x_tilde: data.covariates()[(i, s - 1)],
                effect,
            })
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(io_err(path))
}

/// Per covariate (index `s − 2`): the evaluation points and true effects.
pub fn read_true_effects(path: &Path, q: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let mut out = vec![(Vec::new(), Vec::new()); q - 1];
    for row in csv_reader(path)?.deserialize::<TrueEffectRow>() {
        let row = row.map_err(|e| csv_err(path, e))?;
        if row.s < 2 || row.s > q {
            return Err(CliError::input(path, format!("covariate label {} outside 2..={q}", row.s)));
        }
        out[row.s - 2].0.push(row.x_tilde);
        out[row.s - 2].1.push(row.effect);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectRow {
    pub s: usize,
    pub x_tilde: f64,
    pub bma: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Tables carry 0-based vertices; the file uses 1-based labels.
pub fn write_effects(path: &Path, tables: &[CausalEffectTable]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for t in tables {
        for i in 0..t.x_values.len() {
            w.serialize(EffectRow {
                s: t.s + 1,
                x_tilde: t.x_values[i],
                bma: t.bma[i],
                lo: t.lower[i],
                hi: t.upper[i],
            })
            .map_err(|e| csv_err(path, e))?;
        }
    }
    w.flush().map_err(io_err(path))
}

pub fn read_effects(path: &Path) -> Result<Vec<EffectRow>> {
    csv_reader(path)?
        .deserialize()
        .map(|r| r.map_err(|e| csv_err(path, e)))
        .collect()
}

/// Parameters of a simulated model, for reproducing its effects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthParams {
    pub theta0: f64,
    pub sigma2: Vec<f64>,
    /// Coefficients of each vertex, aligned with its parents in increasing
    /// label order.
    pub coeffs: Vec<Vec<f64>>,
}

impl TruthParams {
    pub fn new(theta0: f64, chol: &CholeskyFactor) -> Self {
        TruthParams {
            theta0,
            sigma2: chol.sigma2().to_vec(),
            coeffs: (0..chol.q()).map(|j| chol.coeffs(j).to_vec()).collect(),
        }
    }
}

/// Settings a run directory was produced with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub data: PathBuf,
    pub n: usize,
    pub q: usize,
    pub standardize: bool,
    pub level: f64,
    pub hyperparameters: Hyperparameters,
    pub chain: ChainConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RateRecord {
    proposed: u64,
    accepted: u64,
    rate: f64,
}

impl From<AcceptCounter> for RateRecord {
    fn from(c: AcceptCounter) -> Self {
        RateRecord {
            proposed: c.proposed,
            accepted: c.accepted,
            rate: c.rate(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct AcceptRates {
    dag: RateRecord,
    theta0: RateRecord,
}

/// Edge toggles (1-based) taking sample `t − 1` to sample `t`; sample 0 is
/// the empty graph.
#[derive(Serialize, Deserialize)]
struct DagRecord {
    t: usize,
    toggle: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct CholRecord {
    t: usize,
    sigma2: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

fn write_lines<T: Serialize>(path: &Path, items: impl Iterator<Item = T>) -> Result<()> {
    let mut w = create(path)?;
    for item in items {
        serde_json::to_writer(&mut w, &item).map_err(|e| CliError::input(path, e.to_string()))?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CliError::input(path, format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

/// Writes the chain artifacts into `dir`.
pub fn save_run(dir: &Path, chain: &ChainOutput, echo: &ConfigEcho) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(THETA0_TRACE);
    let mut w = csv_writer(&path)?;
    w.write_record(["t", "theta0"]).map_err(|e| csv_err(&path, e))?;
    for (t, th) in chain.theta0_trace.iter().enumerate() {
        w.write_record([(t + 1).to_string(), th.to_string()]).map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(io_err(&path))?;

    write_lines(
        &dir.join(DAG_SAMPLES),
        chain.dag_deltas.iter().enumerate().map(|(t, d)| DagRecord {
            t: t + 1,
            toggle: d.iter().map(|&(u, v)| (u + 1, v + 1)).collect(),
        }),
    )?;
    write_lines(
        &dir.join(CHOL_SAMPLES),
        chain.chol_samples.iter().enumerate().map(|(t, c)| CholRecord {
            t: t + 1,
            sigma2: c.sigma2().to_vec(),
            coeffs: (0..c.q()).map(|j| c.coeffs(j).to_vec()).collect(),
        }),
    )?;
    write_json(
        &dir.join(ACCEPT_RATES),
        &AcceptRates {
            dag: chain.dag_moves.into(),
            theta0: chain.theta0_moves.into(),
        },
    )?;
    write_json(&dir.join(CONFIG_ECHO), echo)
}

/// Reads the artifacts written by [`save_run`].
pub fn load_run(dir: &Path) -> Result<(ChainOutput, ConfigEcho)> {
    let echo: ConfigEcho = read_json(&dir.join(CONFIG_ECHO))?;
    let q = echo.q;
    let dag_path = dir.join(DAG_SAMPLES);
    let records: Vec<DagRecord> = read_lines(&dag_path)?;
    let mut graph = Digraph::new(q);
    let mut dags = Vec::with_capacity(records.len());
    let mut deltas = Vec::with_capacity(records.len());
    for (i, r) in records.into_iter().enumerate() {
        if r.t != i + 1 {
            return Err(CliError::input(&dag_path, format!("record {} has t = {}", i + 1, r.t)));
        }
        let mut delta = Vec::with_capacity(r.toggle.len());
        for (u, v) in r.toggle {
            if u == 0 || v == 0 {
                return Err(CliError::input(&dag_path, format!("record {}: labels are 1-based", i + 1)));
            }
            graph.toggle(u - 1, v - 1).map_err(|e| CliError::input(&dag_path, format!("record {}: {e}", i + 1)))?;
            delta.push((u - 1, v - 1));
        }
        dags.push(Dag::try_from_digraph(graph.clone()).map_err(|e| CliError::input(&dag_path, format!("record {}: {e}", i + 1)))?);
        deltas.push(delta);
    }

    let chol_path = dir.join(CHOL_SAMPLES);
    let mut chols = Vec::new();
    if chol_path.exists() {
        let records: Vec<CholRecord> = read_lines(&chol_path)?;
        if !records.is_empty() && records.len() != dags.len() {
            return Err(CliError::input(
                &chol_path,
                format!("{} records for {} DAG samples", records.len(), dags.len()),
            ));
        }
        for (r, dag) in records.into_iter().zip(&dags) {
            chols.push(CholeskyFactor::new(dag, r.sigma2, r.coeffs).map_err(|e| CliError::input(&chol_path, format!("record {}: {e}", r.t)))?);
        }
    }

    let trace_path = dir.join(THETA0_TRACE);
    let mut theta0 = Vec::with_capacity(dags.len());
    let mut reader = csv_reader(&trace_path)?;
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(&trace_path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        theta0.push(parse_f64(&trace_path, line, "theta0", record.get(1).unwrap_or(""))?);
    }

    let rates: AcceptRates = read_json(&dir.join(ACCEPT_RATES))?;
    let mut chain = ChainOutput::from_samples(q, &dags, chols, theta0, echo.chain.clone())?;
    chain.dag_deltas = deltas;
    chain.dag_moves = AcceptCounter {
        proposed: rates.dag.proposed,
        accepted: rates.dag.accepted,
    };
    chain.theta0_moves = AcceptCounter {
        proposed: rates.theta0.proposed,
        accepted: rates.theta0.accepted,
    };
    Ok((chain, echo))
}

pub fn write_roc(path: &Path, report: &EvalReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["k", "tp", "fp", "tn", "fn", "sen", "spe"]).map_err(|e| csv_err(path, e))?;
    for p in &report.points {
        let c = p.confusion;
        w.write_record([
            p.k.to_string(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.tn.to_string(),
            c.fn_.to_string(),
            p.sen.to_string(),
            p.spe.to_string(),
        ])
        .map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn write_averaged_roc(path: &Path, points: &[AveragedRocPoint]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for p in points {
        w.serialize(p).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

/// Replicate subdirectories (`rep_*`) of `dir`, sorted by name.
pub fn replicate_dirs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let is_rep = entry.file_name().to_str().is_some_and(|s| s.starts_with("rep_"));
        if is_rep && entry.path().is_dir() {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}

/// Name of replicate `r` (0-based) as a directory.
pub fn replicate_name(r: usize) -> String {
    format!("rep_{:03}", r + 1)
}
