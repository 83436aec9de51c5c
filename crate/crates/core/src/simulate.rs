//! Synthetic DAG-probit data, structure-recovery and effect-estimation
//! metrics, the fixed star-DAG baseline and a two-chain convergence check.
//!
//! Replicate `r` of a [`SimConfig`] draws its DAG and structural
//! coefficients from stream `2r` of the master seed and its observations
//! from stream `2r + 1`, so the same replicate index yields the same model
//! at every sample size.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::causal::{causal_effect, post_intervention, quantile_sorted, CausalEffectTable, InterventionDraws, PosteriorSummary};
use crate::error::{Error, Result};
use crate::gauss::{sigma_from_cholesky, CholeskyFactor};
use crate::graph::{Dag, RESPONSE};
use crate::mcmc::{run_chain, ChainConfig, ChainOutput, Dataset};
use crate::prior::{default_edge_prob, Hyperparameters};
use crate::rng::chain_rng;

/// Redraws allowed when a generated response has a single class.
pub const MAX_RESPONSE_RETRIES: usize = 100;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimConfig {
    pub q: usize,
    pub n: usize,
    pub reps: usize,
    /// Probability of each edge in the generating DAG.
    pub edge_prob: f64,
    /// Coefficient magnitudes are uniform on this interval, with a random sign.
    pub coeff_range: (f64, f64),
    pub theta0_true: f64,
    pub seed: u64,
}

impl SimConfig {
    /// Defaults: `p = 3/(2q − 2)`, magnitudes on `[1, 2]`, `θ₀ = 0`.
    pub fn new(q: usize, n: usize, reps: usize, seed: u64) -> Self {
        SimConfig {
            q,
            n,
            reps,
            edge_prob: default_edge_prob(q.max(2)),
            coeff_range: (1.0, 2.0),
            theta0_true: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::InvalidConfig(alloc::format!(
                "need at least one covariate (q >= 2), got q = {}",
                self.q
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig("need at least two observations".into()));
        }
        if !(self.edge_prob > 0.0 && self.edge_prob < 1.0) {
            return Err(Error::InvalidConfig(alloc::format!(
                "edge probability {} must lie in (0, 1)",
                self.edge_prob
            )));
        }
        let (lo, hi) = self.coeff_range;
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidConfig(alloc::format!(
                "coefficient range ({lo}, {hi}) must be a non-negative interval of positive length"
            )));
        }
        if !self.theta0_true.is_finite() {
            return Err(Error::InvalidConfig("threshold must be finite".into()));
        }
        Ok(())
    }
}

/// Each pair `u > v` becomes the edge `u → v` with probability `p`.
pub fn random_dag<R: Rng + ?Sized>(q: usize, p: f64, rng: &mut R) -> Result<Dag> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(alloc::format!("edge probability {p} outside [0, 1]")));
    }
    let mut edges = Vec::new();
    for u in 1..q {
        for v in 0..u {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Dag::from_edges(q, edges)
}

/// Unit conditional variances and coefficients with magnitude uniform on
/// `range` and a random sign.
pub fn random_coefficients<R: Rng + ?Sized>(dag: &Dag, range: (f64, f64), rng: &mut R) -> CholeskyFactor {
    let coeffs = (0..dag.q())
        .map(|j| {
            dag.parents(j)
                .iter()
                .map(|_| {
                    let m = range.0 + (range.1 - range.0) * rng.random::<f64>();
                    if rng.random::<bool>() {
                        m
                    } else {
                        -m
                    }
                })
                .collect()
        })
        .collect();
    CholeskyFactor::from_parts_unchecked(vec![1.0; dag.q()], coeffs)
}

/// The generating model and its exact intervention effects.
#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub dag: Dag,
    pub chol: CholeskyFactor,
    pub sigma: DMatrix<f64>,
    pub theta0: f64,
    /// `effects[s][i]` is `P(Y = 1 | do(X_s = x_{i,s}))`; `effects[0]` is empty.
    pub effects: Vec<Vec<f64>>,
}

/// Draws `n` observations from the structural equations of `(dag, chol)`
/// and thresholds the response at `theta0`. Noise is redrawn when `y` has
/// a single class.
pub fn sample_dataset<R: Rng + ?Sized>(
    dag: &Dag,
    chol: &CholeskyFactor,
    n: usize,
    theta0: f64,
    rng: &mut R,
) -> Result<(Dataset, Truth)> {
    chol.check_consistent(dag)?;
    let q = dag.q();
    let order = dag.topological_order();
    let sd: Vec<f64> = chol.sigma2().iter().map(|&s| libm::sqrt(s)).collect();
    for _ in 0..MAX_RESPONSE_RETRIES {
        let mut x = DMatrix::<f64>::zeros(n, q);
        for i in 0..n {
            for &j in &order {
                let mut v = sd[j] * rng.sample::<f64, _>(StandardNormal);
                for (&u, &c) in dag.parents(j).iter().zip(chol.coeffs(j)) {
                    v -= c * x[(i, u)];
                }
                x[(i, j)] = v;
            }
        }
        let y: Vec<bool> = x.column(RESPONSE).iter().map(|&v| v > theta0).collect();
        let covariates = x.columns(1, q - 1).into_owned();
        let data = match Dataset::new(y, covariates) {
            Ok(d) => d,
            Err(Error::SingleClassResponse { .. }) => continue,
            Err(e) => return Err(e),
        };
        let truth = true_effects(dag, chol, theta0, &data)?;
        return Ok((data, truth));
    }
    Err(Error::DegenerateResponse {
        attempts: MAX_RESPONSE_RETRIES,
    })
}

/// Exact effects of the model at the observed covariate values.
pub fn true_effects(dag: &Dag, chol: &CholeskyFactor, theta0: f64, data: &Dataset) -> Result<Truth> {
    let sigma = sigma_from_cholesky(dag, chol)?;
    let q = dag.q();
    let mut effects = vec![Vec::new(); q];
    for s in 1..q {
        let p = post_intervention(&sigma, s, dag.parents(s))?;
        effects[s] = data
            .covariates()
            .column(s - 1)
            .iter()
            .map(|&x| causal_effect(&p, theta0, x))
            .collect();
    }
    Ok(Truth {
        dag: dag.clone(),
        chol: chol.clone(),
        sigma,
        theta0,
        effects,
    })
}

/// Random coefficients on `dag` followed by [`sample_dataset`].
pub fn generate_dataset<R: Rng + ?Sized>(dag: &Dag, cfg: &SimConfig, rng: &mut R) -> Result<(Dataset, Truth)> {
    cfg.validate()?;
    let chol = random_coefficients(dag, cfg.coeff_range, rng);
    sample_dataset(dag, &chol, cfg.n, cfg.theta0_true, rng)
}

/// Replicate `r` of the configuration (see the module docs for streams).
pub fn simulate_replicate(cfg: &SimConfig, r: usize) -> Result<(Dataset, Truth)> {
    cfg.validate()?;
    let mut model_rng = chain_rng(cfg.seed, 2 * r as u64);
    let dag = random_dag(cfg.q, cfg.edge_prob, &mut model_rng)?;
    let chol = random_coefficients(&dag, cfg.coeff_range, &mut model_rng);
    let mut data_rng = chain_rng(cfg.seed, 2 * r as u64 + 1);
    sample_dataset(&dag, &chol, cfg.n, cfg.theta0_true, &mut data_rng)
}

/// Whether edges are compared with their direction or as skeleton pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ScoringMode {
    #[default]
    Directed,
    Skeleton,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Confusion {
    /// `TP / (TP + FN)`; 1 when there are no true edges.
    pub fn sensitivity(&self) -> f64 {
        ratio_or_one(self.tp, self.tp + self.fn_)
    }

    /// `TN / (TN + FP)`; 1 when there are no absent edges.
    pub fn specificity(&self) -> f64 {
        ratio_or_one(self.tn, self.tn + self.fp)
    }
}

fn ratio_or_one(a: usize, b: usize) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RocPoint {
    pub k: f64,
    pub confusion: Confusion,
    pub sen: f64,
    pub spe: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Thresholds `0, 0.01, …, 1`.
pub fn default_k_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

// (score, truth) for every candidate edge. Edges out of the response can
// never occur and are not scored.
fn scored_pairs(truth: &Dag, summary: &PosteriorSummary, mode: ScoringMode) -> Result<Vec<(f64, bool)>> {
    let q = truth.q();
    if summary.q() != q {
        return Err(Error::DimensionMismatch {
            what: "edge probability matrix",
            expected: q,
            found: summary.q(),
        });
    }
    let mut out = Vec::new();
    match mode {
        ScoringMode::Directed => {
            for u in 1..q {
                for v in 0..q {
                    if u != v {
                        out.push((summary.prob(u, v), truth.has_edge(u, v)));
                    }
                }
            }
        }
        ScoringMode::Skeleton => {
            for u in 1..q {
                for v in 0..u {
                    let p = (summary.prob(u, v) + summary.prob(v, u)).min(1.0);
                    out.push((p, truth.has_edge(u, v) || truth.has_edge(v, u)));
                }
            }
        }
    }
    Ok(out)
}

fn confusion_at(pairs: &[(f64, bool)], k: f64) -> Confusion {
    let mut c = Confusion::default();
    for &(p, t) in pairs {
        match (p >= k, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    c
}

/// SEN/SPE over `k_grid` and the area under the full ROC curve.
///
/// The AUC uses every distinct score as a threshold, so it depends only on
/// the ranking of the probabilities.
pub fn structure_metrics(truth: &Dag, summary: &PosteriorSummary, k_grid: &[f64], mode: ScoringMode) -> Result<EvalReport> {
    let pairs = scored_pairs(truth, summary, mode)?;
    let points = k_grid
        .iter()
        .map(|&k| {
            let c = confusion_at(&pairs, k);
            RocPoint {
                k,
                confusion: c,
                sen: c.sensitivity(),
                spe: c.specificity(),
            }
        })
        .collect();
    Ok(EvalReport {
        points,
        auc: exact_auc(&pairs),
    })
}

fn exact_auc(pairs: &[(f64, bool)]) -> f64 {
    let mut scores: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    scores.sort_by(|a, b| b.total_cmp(a));
    scores.dedup();
    // Curve from (0, 0) through each threshold, highest first, to (1, 1).
    let mut curve = vec![(0.0, 0.0)];
    for &k in &scores {
        let c = confusion_at(pairs, k);
        curve.push((1.0 - c.specificity(), c.sensitivity()));
    }
    curve.push((1.0, 1.0));
    curve
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) * 0.5)
        .sum()
}

/// Per-threshold mean of `(1 − SPE, SEN)` across replicates with a
/// percentile band.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AveragedRocPoint {
    pub k: f64,
    pub fpr: f64,
    pub tpr: f64,
    pub fpr_lo: f64,
    pub fpr_hi: f64,
    pub tpr_lo: f64,
    pub tpr_hi: f64,
}

/// Averages reports computed on the same threshold grid; the band spans
/// the 5th to 95th percentiles.
pub fn average_roc(reports: &[EvalReport]) -> Result<Vec<AveragedRocPoint>> {
    let first = reports
        .first()
        .ok_or_else(|| Error::InvalidData("no reports to average".into()))?;
    let m = first.points.len();
    if reports.iter().any(|r| r.points.len() != m) {
        return Err(Error::InvalidData("reports use different threshold grids".into()));
    }
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let k = first.points[i].k;
        if reports.iter().any(|r| r.points[i].k != k) {
            return Err(Error::InvalidData("reports use different threshold grids".into()));
        }
        let mut fpr: Vec<f64> = reports.iter().map(|r| 1.0 - r.points[i].spe).collect();
        let mut tpr: Vec<f64> = reports.iter().map(|r| r.points[i].sen).collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (fm, tm) = (mean(&fpr), mean(&tpr));
        fpr.sort_by(f64::total_cmp);
        tpr.sort_by(f64::total_cmp);
        out.push(AveragedRocPoint {
            k,
            fpr: fm,
            tpr: tm,
            fpr_lo: quantile_sorted(&fpr, 0.05),
            fpr_hi: quantile_sorted(&fpr, 0.95),
            tpr_lo: quantile_sorted(&tpr, 0.05),
            tpr_hi: quantile_sorted(&tpr, 0.95),
        });
    }
    Ok(out)
}

/// Share of covariates whose edge into the response is classified
/// correctly at threshold `k_star`.
pub fn predictor_recovery(truth: &Dag, summary: &PosteriorSummary, k_star: f64) -> Result<f64> {
    let q = truth.q();
    if q < 2 || summary.q() != q {
        return Err(Error::DimensionMismatch {
            what: "edge probability matrix",
            expected: q,
            found: summary.q(),
        });
    }
    let correct = (1..q)
        .filter(|&u| (summary.prob(u, RESPONSE) >= k_star) == truth.has_edge(u, RESPONSE))
        .count();
    Ok(correct as f64 / (q - 1) as f64)
}

/// Mean absolute difference.
pub fn mae(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::DimensionMismatch {
            what: "effect vectors",
            expected: truth.len(),
            found: estimate.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::InvalidData("empty effect vectors".into()));
    }
    Ok(truth.iter().zip(estimate).map(|(a, b)| (a - b).abs()).sum::<f64>() / truth.len() as f64)
}

/// Effect tables for every covariate, each evaluated at its observed values.
pub fn effects_at_observed(chain: &ChainOutput, data: &Dataset, level: f64) -> Result<Vec<CausalEffectTable>> {
    let draws = InterventionDraws::from_chain(chain)?;
    (1..data.q())
        .map(|s| {
            let xs: Vec<f64> = data.covariates().column(s - 1).iter().copied().collect();
            draws.table(s, &xs, level)
        })
        .collect()
}

/// Per-covariate MAE between true and model-averaged effects.
pub fn effect_errors(truth: &Truth, tables: &[CausalEffectTable]) -> Result<Vec<f64>> {
    tables.iter().map(|t| mae(&truth.effects[t.s], &t.bma)).collect()
}

/// Runs the chain with the DAG fixed to the star graph (every covariate a
/// parent of the response, nothing else) and returns its effect tables.
pub fn naive_baseline(data: &Dataset, hp: &Hyperparameters, cfg: &ChainConfig, level: f64) -> Result<Vec<CausalEffectTable>> {
    let mut cfg = cfg.clone();
    cfg.fixed_dag = Some(Dag::star(data.q())?);
    cfg.store_cholesky = true;
    let chain = run_chain(data, hp, &cfg)?;
    effects_at_observed(&chain, data, level)
}

/// Agreement of model-averaged effects between two chains.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiagnosticReport {
    /// Largest absolute difference per covariate (index `s − 1`).
    pub max_abs_diff: Vec<f64>,
    /// `(s, x̃, bma_a, bma_b)` for every covariate and observed level.
    pub pairs: Vec<(usize, f64, f64, f64)>,
}

impl DiagnosticReport {
    pub fn overall_max(&self) -> f64 {
        self.max_abs_diff.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs two chains with the given configurations and compares their
/// effect estimates at the observed covariate values.
pub fn compare_chains(data: &Dataset, hp: &Hyperparameters, a: &ChainConfig, b: &ChainConfig) -> Result<DiagnosticReport> {
    let ta = effects_at_observed(&run_chain(data, hp, a)?, data, 0.95)?;
    let tb = effects_at_observed(&run_chain(data, hp, b)?, data, 0.95)?;
    let mut report = DiagnosticReport {
        max_abs_diff: Vec::with_capacity(ta.len()),
        pairs: Vec::new(),
    };
    for (x, y) in ta.iter().zip(&tb) {
        let mut worst: f64 = 0.0;
        for ((&xv, &ea), &eb) in x.x_values.iter().zip(&x.bma).zip(&y.bma) {
            worst = worst.max((ea - eb).abs());
            report.pairs.push((x.s, xv, ea, eb));
        }
        report.max_abs_diff.push(worst);
    }
    Ok(report)
}

/// Two independent chains of lengths `t1` and `t2` on streams `stream` and
/// `stream + 1` of the configured seed.
pub fn two_chain_diagnostic(data: &Dataset, hp: &Hyperparameters, cfg: &ChainConfig, t1: usize, t2: usize) -> Result<DiagnosticReport> {
    let mut a = cfg.clone();
    a.iterations = t1;
    a.store_cholesky = true;
    let mut b = a.clone();
    b.iterations = t2;
    b.stream = cfg.stream + 1;
    compare_chains(data, hp, &a, &b)
}
