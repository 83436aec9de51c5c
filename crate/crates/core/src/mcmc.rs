//! Reversible-jump sampler over DAGs, Cholesky parameters, the latent
//! response and the probit threshold.
//!
//! Each iteration runs, in order:
//!
//! 1. a DAG move: one insert, delete or reverse operator drawn uniformly
//!    from the valid set, accepted on the ratio of node marginal
//!    likelihoods (parameters integrated out), the prior ratio and the
//!    ratio of neighbourhood sizes;
//! 2. an exact draw of `(D, L)` from its conjugate full conditional;
//! 3. a truncated-normal draw of every latent value;
//! 4. a random-walk Metropolis step on the threshold `θ₀`, with the latent
//!    values integrated out of the acceptance ratio. On acceptance the
//!    latent column is redrawn under the new threshold, so the pair moves
//!    as a block and the thresholding stays consistent.
//!
//! The response variance is fixed to 1 throughout.

use alloc::vec;
use alloc::vec::Vec;

use libm::lgamma;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gauss::{ln_det, sample_inverse_gamma, sample_mvn_from_precision, CholeskyFactor, TruncatedNormal};
use crate::graph::{Dag, DagOperator, Digraph, RESPONSE};
use crate::normal;
use crate::prior::{log_prior_dag, node_shape, Hyperparameters};
use crate::rng::{chain_rng, ChainRng};

const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Observed data: a binary response and `q − 1` covariates.
///
/// Column `k` of the covariate matrix holds vertex `k + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    y: Vec<bool>,
    x: DMatrix<f64>,
}

impl Dataset {
    /// Validates shapes, finiteness and the presence of both response classes.
    pub fn new(y: Vec<bool>, covariates: DMatrix<f64>) -> Result<Self> {
        if covariates.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                what: "covariate rows",
                expected: y.len(),
                found: covariates.nrows(),
            });
        }
        if covariates.ncols() == 0 {
            return Err(Error::InvalidData("at least one covariate is required".into()));
        }
        if covariates.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("covariates contain non-finite values".into()));
        }
        let ones = y.iter().filter(|&&b| b).count();
        let zeros = y.len() - ones;
        if ones == 0 || zeros == 0 {
            return Err(Error::SingleClassResponse { zeros, ones });
        }
        Ok(Dataset { y, x: covariates })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of vertices including the latent response.
    pub fn q(&self) -> usize {
        self.x.ncols() + 1
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn covariates(&self) -> &DMatrix<f64> {
        &self.x
    }

    /// Centres each covariate and scales it to unit sample standard deviation.
    pub fn standardized(&self) -> Result<Self> {
        let n = self.n();
        if n < 2 {
            return Err(Error::InvalidData("standardizing needs at least two rows".into()));
        }
        let mut x = self.x.clone();
        for k in 0..x.ncols() {
            let mut col = x.column_mut(k);
            let mean = col.sum() / n as f64;
            col.add_scalar_mut(-mean);
            let sd = libm::sqrt(col.norm_squared() / (n - 1) as f64);
            if !(sd > 0.0) {
                return Err(Error::InvalidData(alloc::format!(
                    "covariate column {} is constant and cannot be standardized",
                    k + 1
                )));
            }
            col /= sd;
        }
        Ok(Dataset { y: self.y.clone(), x })
    }
}

/// The `n × q` data matrix with the latent response in column 0, together
/// with its Gram matrix `XᵀX`.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedData {
    x: DMatrix<f64>,
    gram: DMatrix<f64>,
}

impl AugmentedData {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        if x.ncols() == 0 {
            return Err(Error::InvalidData("data matrix has no columns".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("data matrix contains non-finite values".into()));
        }
        let gram = x.tr_mul(&x);
        Ok(AugmentedData { x, gram })
    }

    pub fn from_dataset(data: &Dataset, latent: &[f64]) -> Result<Self> {
        if latent.len() != data.n() {
            return Err(Error::DimensionMismatch {
                what: "latent vector",
                expected: data.n(),
                found: latent.len(),
            });
        }
        let mut x = DMatrix::zeros(data.n(), data.q());
        x.column_mut(0).copy_from_slice(latent);
        x.columns_mut(1, data.q() - 1).copy_from(&data.x);
        AugmentedData::new(x)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn q(&self) -> usize {
        self.x.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn latent(&self) -> &[f64] {
        &self.x.as_slice()[..self.n()]
    }

    /// Replaces column 0 and refreshes the affected row and column of the
    /// Gram matrix.
    pub fn set_latent(&mut self, latent: &[f64]) {
        assert_eq!(latent.len(), self.n(), "latent vector length");
        self.x.column_mut(0).copy_from_slice(latent);
        for k in 0..self.q() {
            let v = self.x.column(0).dot(&self.x.column(k));
            self.gram[(0, k)] = v;
            self.gram[(k, 0)] = v;
        }
    }
}

/// Conjugate summaries of the regression of vertex `j` on its parents.
#[derive(Clone, Debug)]
pub struct NodeSuffStats {
    n: usize,
    g: f64,
    tbar: Cholesky<f64, Dyn>,
    lhat: DVector<f64>,
    quad: f64,
}

impl NodeSuffStats {
    pub fn new(j: usize, pa: &[usize], data: &AugmentedData, g: f64) -> Result<Self> {
        let q = data.q();
        if j >= q {
            return Err(Error::VertexOutOfRange { vertex: j, q });
        }
        for &u in pa {
            if u >= q {
                return Err(Error::VertexOutOfRange { vertex: u, q });
            }
            if u == j || u == RESPONSE {
                return Err(Error::InvalidEdge {
                    from: u,
                    to: j,
                    reason: "not an admissible parent",
                });
            }
        }
        let gram = &data.gram;
        let k = pa.len();
        let t = DMatrix::from_fn(k, k, |a, b| {
            gram[(pa[a], pa[b])] + if a == b { g } else { 0.0 }
        });
        let b = DVector::from_fn(k, |a, _| gram[(pa[a], j)]);
        let tbar = Cholesky::new(t).ok_or(Error::NotPositiveDefinite("posterior precision"))?;
        let lhat = tbar.solve(&b);
        let quad = gram[(j, j)] - b.dot(&lhat);
        Ok(NodeSuffStats {
            n: data.n(),
            g,
            tbar,
            lhat,
            quad,
        })
    }

    pub fn n_parents(&self) -> usize {
        self.lhat.len()
    }

    /// `T̄ = g·I + X_paᵀ X_pa`.
    pub fn tbar(&self) -> DMatrix<f64> {
        self.tbar.l() * self.tbar.l().transpose()
    }

    /// `L̂ = T̄⁻¹ X_paᵀ X_j`; the posterior mean of the coefficients is `−L̂`.
    pub fn lhat(&self) -> &DVector<f64> {
        &self.lhat
    }

    /// `X_jᵀX_j − L̂ᵀ T̄ L̂`.
    pub fn residual_quad(&self) -> f64 {
        self.quad
    }

    // ½ log|g·I| − ½ log|T̄|
    fn ln_det_ratio(&self) -> f64 {
        0.5 * (self.n_parents() as f64 * libm::log(self.g) - ln_det(&self.tbar))
    }
}

/// Log marginal likelihood of column `j` given its parent columns, with the
/// node's Cholesky parameters integrated against their prior. For the
/// response the variance is fixed to 1.
pub fn log_marginal_node(j: usize, pa: &[usize], data: &AugmentedData, hp: &Hyperparameters) -> Result<f64> {
    let stats = NodeSuffStats::new(j, pa, data, hp.g)?;
    log_marginal_from_stats(j, &stats, data.q(), hp)
}

fn log_marginal_from_stats(j: usize, s: &NodeSuffStats, q: usize, hp: &Hyperparameters) -> Result<f64> {
    let n = s.n as f64;
    if j == RESPONSE {
        return Ok(-0.5 * n * LN_2PI + s.ln_det_ratio() - 0.5 * s.quad);
    }
    let shape = node_shape(hp, q, s.n_parents())?;
    let post_shape = shape + 0.5 * n;
    let rate = 0.5 * (hp.g + s.quad.max(0.0));
    Ok(-0.5 * n * LN_2PI + s.ln_det_ratio() + lgamma(post_shape) - lgamma(shape)
        + shape * libm::log(0.5 * hp.g)
        - post_shape * libm::log(rate))
}

/// Sum of node log marginal likelihoods over the vertices whose parent sets
/// differ between `dag` and its image under `op`, for both DAGs.
fn affected_scores(dag: &Dag, next: &Dag, op: &DagOperator, data: &AugmentedData, hp: &Hyperparameters) -> Result<(f64, f64)> {
    let (nodes, count) = op.affected_nodes();
    let mut old = 0.0;
    let mut new = 0.0;
    for &v in &nodes[..count] {
        old += log_marginal_node(v, dag.parents(v), data, hp)?;
        new += log_marginal_node(v, next.parents(v), data, hp)?;
    }
    Ok((old, new))
}

/// Log acceptance ratio of moving from `dag` by `op` (which must be valid).
pub fn log_acceptance_ratio(
    dag: &Dag,
    op: &DagOperator,
    data: &AugmentedData,
    hp: &Hyperparameters,
    max_edges: Option<usize>,
) -> Result<f64> {
    let next = dag.apply(op)?;
    let (old, new) = affected_scores(dag, &next, op, data, hp)?;
    let forward = dag.count_valid_operators(max_edges) as f64;
    let backward = next.count_valid_operators(max_edges) as f64;
    Ok(new - old + log_prior_dag(&next, hp) - log_prior_dag(dag, hp) + libm::log(forward) - libm::log(backward))
}

/// One reversible-jump DAG update. Returns the new DAG and whether the
/// proposal was accepted.
pub fn dag_move<R: Rng + ?Sized>(
    dag: &Dag,
    data: &AugmentedData,
    hp: &Hyperparameters,
    max_edges: Option<usize>,
    rng: &mut R,
) -> Result<(Dag, bool)> {
    let ops = dag.valid_operators_capped(max_edges);
    if ops.is_empty() {
        return Ok((dag.clone(), false));
    }
    let op = ops[rng.random_range(0..ops.len())];
    let next = dag.apply(&op)?;
    let (old, new) = affected_scores(dag, &next, &op, data, hp)?;
    let log_alpha = new - old + log_prior_dag(&next, hp) - log_prior_dag(dag, hp)
        + libm::log(ops.len() as f64)
        - libm::log(next.count_valid_operators(max_edges) as f64);
    let u: f64 = rng.random();
    if log_alpha >= 0.0 || libm::log(u) < log_alpha {
        Ok((next, true))
    } else {
        Ok((dag.clone(), false))
    }
}

/// Exact draw of `(D, L)` given the DAG and the augmented data.
pub fn sample_chol_posterior<R: Rng + ?Sized>(
    dag: &Dag,
    data: &AugmentedData,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<CholeskyFactor> {
    let q = dag.q();
    if data.q() != q {
        return Err(Error::DimensionMismatch {
            what: "data columns",
            expected: q,
            found: data.q(),
        });
    }
    let n = data.n() as f64;
    let mut sigma2 = Vec::with_capacity(q);
    let mut coeffs = Vec::with_capacity(q);
    for j in 0..q {
        let s = NodeSuffStats::new(j, dag.parents(j), data, hp.g)?;
        let s2 = if j == RESPONSE {
            1.0
        } else {
            let shape = node_shape(hp, q, s.n_parents())? + 0.5 * n;
            sample_inverse_gamma(shape, 0.5 * (hp.g + s.quad.max(0.0)), rng)?
        };
        let mean = -&s.lhat;
        let l = sample_mvn_from_precision(&mean, &s.tbar, s2, rng);
        sigma2.push(s2);
        coeffs.push(l.iter().copied().collect());
    }
    Ok(CholeskyFactor::from_parts_unchecked(sigma2, coeffs))
}

/// Conditional means `μ_i = −L_{pa(0),0}ᵀ x_{i,pa(0)}` of the latent values.
pub fn latent_means(dag: &Dag, chol: &CholeskyFactor, x: &DMatrix<f64>) -> Vec<f64> {
    let mut mu = vec![0.0; x.nrows()];
    for (&h, &l) in dag.parents(RESPONSE).iter().zip(chol.coeffs(RESPONSE)) {
        for (m, v) in mu.iter_mut().zip(x.column(h).iter()) {
            *m -= l * v;
        }
    }
    mu
}

/// Draws every latent value from `N(μ_i, 1)` truncated to `(θ₀, ∞)` when
/// `y_i = 1` and to `(−∞, θ₀]` when `y_i = 0`.
pub fn update_latent<R: Rng + ?Sized>(y: &[bool], mu: &[f64], theta0: f64, rng: &mut R) -> Result<Vec<f64>> {
    y.iter()
        .zip(mu)
        .map(|(&yi, &m)| {
            let (lo, hi) = if yi {
                (theta0, f64::INFINITY)
            } else {
                (f64::NEG_INFINITY, theta0)
            };
            Ok(TruncatedNormal::new(m, 1.0, lo, hi)?.sample(rng))
        })
        .collect()
}

/// `ln r` for moving the threshold from `theta0` to `g0`, with the latent
/// values integrated out.
pub fn log_theta0_ratio(y: &[bool], mu: &[f64], theta0: f64, g0: f64) -> f64 {
    y.iter()
        .zip(mu)
        .map(|(&yi, &m)| {
            if yi {
                normal::ln_sf(g0 - m) - normal::ln_sf(theta0 - m)
            } else {
                normal::ln_cdf(g0 - m) - normal::ln_cdf(theta0 - m)
            }
        })
        .sum()
}

/// Random-walk Metropolis step for the threshold under a flat prior.
pub fn update_theta0<R: Rng + ?Sized>(
    y: &[bool],
    mu: &[f64],
    theta0: f64,
    hp: &Hyperparameters,
    rng: &mut R,
) -> (f64, bool) {
    let g0 = theta0 + libm::sqrt(hp.sigma0_sq) * rng.sample::<f64, _>(StandardNormal);
    let log_r = log_theta0_ratio(y, mu, theta0, g0);
    let u: f64 = rng.random();
    if log_r >= 0.0 || libm::log(u) < log_r {
        (g0, true)
    } else {
        (theta0, false)
    }
}

/// Which updates run each iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Moves {
    pub dag: bool,
    pub cholesky: bool,
    pub latent: bool,
    pub theta0: bool,
}

impl Default for Moves {
    fn default() -> Self {
        Moves {
            dag: true,
            cholesky: true,
            latent: true,
            theta0: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainConfig {
    /// Total number of iterations `T`, burn-in included.
    pub iterations: usize,
    /// Discarded leading iterations; `None` means `T / 5`.
    pub burn_in: Option<usize>,
    pub thin: usize,
    pub seed: u64,
    /// Stream index of the chain's generator.
    pub stream: u64,
    /// Keep the DAG fixed at this graph instead of sampling it.
    pub fixed_dag: Option<Dag>,
    /// Optional cap on the number of edges.
    pub max_edges: Option<usize>,
    pub moves: Moves,
    /// Store `(D, L)` for every retained sample (needed for causal effects).
    pub store_cholesky: bool,
}

impl ChainConfig {
    pub fn new(iterations: usize, seed: u64) -> Self {
        ChainConfig {
            iterations,
            burn_in: None,
            thin: 1,
            seed,
            stream: 0,
            fixed_dag: None,
            max_edges: None,
            moves: Moves::default(),
            store_cholesky: true,
        }
    }

    pub fn effective_burn_in(&self) -> usize {
        self.burn_in.unwrap_or(self.iterations / 5)
    }

    pub fn validate(&self, q: usize) -> Result<()> {
        let burn = self.effective_burn_in();
        if self.iterations == 0 || burn >= self.iterations {
            return Err(Error::InvalidConfig(alloc::format!(
                "need iterations > burn-in, got T = {} and burn-in = {burn}",
                self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thinning interval must be at least 1".into()));
        }
        if let Some(d) = &self.fixed_dag {
            if d.q() != q {
                return Err(Error::DimensionMismatch {
                    what: "fixed DAG vertices",
                    expected: q,
                    found: d.q(),
                });
            }
        }
        Ok(())
    }

    /// Number of samples a chain with this configuration retains.
    pub fn n_samples(&self) -> usize {
        (self.iterations - self.effective_burn_in()) / self.thin
    }
}

/// The sampler's current position.
#[derive(Clone, Debug, PartialEq)]
pub struct McmcState {
    pub dag: Dag,
    pub chol: CholeskyFactor,
    pub theta0: f64,
    /// Latent response values.
    pub x1: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AcceptCounter {
    pub proposed: u64,
    pub accepted: u64,
}

impl AcceptCounter {
    fn record(&mut self, accepted: bool) {
        self.proposed += 1;
        self.accepted += accepted as u64;
    }

    pub fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Retained draws of a chain.
///
/// DAGs are stored as edge toggles relative to the previous retained
/// sample; the first record is relative to the empty graph.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainOutput {
    pub q: usize,
    pub dag_deltas: Vec<Vec<(usize, usize)>>,
    pub chol_samples: Vec<CholeskyFactor>,
    pub theta0_trace: Vec<f64>,
    pub dag_moves: AcceptCounter,
    pub theta0_moves: AcceptCounter,
    pub config: ChainConfig,
}

impl ChainOutput {
    /// Assembles an output from explicit DAG samples.
    pub fn from_samples(
        q: usize,
        dags: &[Dag],
        chol_samples: Vec<CholeskyFactor>,
        theta0_trace: Vec<f64>,
        config: ChainConfig,
    ) -> Result<Self> {
        if !chol_samples.is_empty() && chol_samples.len() != dags.len() {
            return Err(Error::DimensionMismatch {
                what: "Cholesky samples",
                expected: dags.len(),
                found: chol_samples.len(),
            });
        }
        if theta0_trace.len() != dags.len() {
            return Err(Error::DimensionMismatch {
                what: "threshold trace",
                expected: dags.len(),
                found: theta0_trace.len(),
            });
        }
        let mut prev = Digraph::new(q);
        let mut deltas = Vec::with_capacity(dags.len());
        for (t, d) in dags.iter().enumerate() {
            if d.q() != q {
                return Err(Error::DimensionMismatch {
                    what: "DAG sample vertices",
                    expected: q,
                    found: d.q(),
                });
            }
            if let Some(c) = chol_samples.get(t) {
                c.check_consistent(d)?;
            }
            deltas.push(prev.symmetric_difference(d.as_digraph()));
            prev = d.as_digraph().clone();
        }
        Ok(ChainOutput {
            q,
            dag_deltas: deltas,
            chol_samples,
            theta0_trace,
            dag_moves: AcceptCounter::default(),
            theta0_moves: AcceptCounter::default(),
            config,
        })
    }

    pub fn len(&self) -> usize {
        self.dag_deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dag_deltas.is_empty()
    }

    /// Replays the stored DAGs as edge sets.
    pub fn digraphs(&self) -> impl Iterator<Item = Digraph> + '_ {
        let mut g = Digraph::new(self.q);
        self.dag_deltas.iter().map(move |delta| {
            for &(u, v) in delta {
                if g.has_edge(u, v) {
                    g.remove(u, v);
                } else {
                    g.insert(u, v).expect("stored edges are valid");
                }
            }
            g.clone()
        })
    }

    /// Replays the stored DAGs.
    pub fn dags(&self) -> impl Iterator<Item = Dag> + '_ {
        self.digraphs()
            .map(|g| Dag::try_from_digraph(g).expect("stored samples are valid DAGs"))
    }
}

/// Step-by-step driver of the chain.
pub struct Sampler {
    data: AugmentedData,
    y: Option<Vec<bool>>,
    hp: Hyperparameters,
    cfg: ChainConfig,
    moves: Moves,
    state: McmcState,
    rng: ChainRng,
    iteration: usize,
    dag_moves: AcceptCounter,
    theta0_moves: AcceptCounter,
}

impl Sampler {
    /// Sampler for the probit model.
    pub fn new(data: &Dataset, hp: &Hyperparameters, cfg: &ChainConfig) -> Result<Self> {
        let q = data.q();
        hp.validate(q)?;
        cfg.validate(q)?;
        let mut rng = chain_rng(cfg.seed, cfg.stream);
        let theta0 = 0.0;
        let zeros = vec![0.0; data.n()];
        let x1 = update_latent(data.y(), &zeros, theta0, &mut rng)?;
        let aug = AugmentedData::from_dataset(data, &x1)?;
        Self::build(aug, Some(data.y().to_vec()), hp, cfg, cfg.moves, rng, theta0)
    }

    /// Sampler for a fully observed Gaussian DAG model: column 0 is data and
    /// the latent and threshold updates are switched off.
    pub fn observed(x: DMatrix<f64>, hp: &Hyperparameters, cfg: &ChainConfig) -> Result<Self> {
        let aug = AugmentedData::new(x)?;
        let q = aug.q();
        hp.validate(q)?;
        cfg.validate(q)?;
        let rng = chain_rng(cfg.seed, cfg.stream);
        let moves = Moves {
            latent: false,
            theta0: false,
            ..cfg.moves
        };
        Self::build(aug, None, hp, cfg, moves, rng, 0.0)
    }

    fn build(
        data: AugmentedData,
        y: Option<Vec<bool>>,
        hp: &Hyperparameters,
        cfg: &ChainConfig,
        moves: Moves,
        rng: ChainRng,
        theta0: f64,
    ) -> Result<Self> {
        let dag = match &cfg.fixed_dag {
            Some(d) => d.clone(),
            None => Dag::empty(data.q())?,
        };
        let chol = CholeskyFactor::identity(&dag);
        let x1 = data.latent().to_vec();
        Ok(Sampler {
            data,
            y,
            hp: *hp,
            cfg: cfg.clone(),
            moves,
            state: McmcState { dag, chol, theta0, x1 },
            rng,
            iteration: 0,
            dag_moves: AcceptCounter::default(),
            theta0_moves: AcceptCounter::default(),
        })
    }

    pub fn state(&self) -> &McmcState {
        &self.state
    }

    pub fn data(&self) -> &AugmentedData {
        &self.data
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Runs one full iteration.
    pub fn step(&mut self) -> Result<()> {
        let hp = &self.hp;
        let rng = &mut self.rng;
        if self.moves.dag && self.cfg.fixed_dag.is_none() {
            let (dag, accepted) = dag_move(&self.state.dag, &self.data, hp, self.cfg.max_edges, rng)?;
            self.dag_moves.record(accepted);
            self.state.dag = dag;
        }
        if self.moves.cholesky {
            self.state.chol = sample_chol_posterior(&self.state.dag, &self.data, hp, rng)?;
        } else if self.state.chol.check_consistent(&self.state.dag).is_err() {
            self.state.chol = CholeskyFactor::identity(&self.state.dag);
        }
        if let Some(y) = &self.y {
            let mu = latent_means(&self.state.dag, &self.state.chol, self.data.matrix());
            if self.moves.latent {
                self.state.x1 = update_latent(y, &mu, self.state.theta0, rng)?;
                self.data.set_latent(&self.state.x1);
            }
            if self.moves.theta0 {
                let (theta0, accepted) = update_theta0(y, &mu, self.state.theta0, hp, rng);
                self.theta0_moves.record(accepted);
                if accepted {
                    self.state.theta0 = theta0;
                    self.state.x1 = update_latent(y, &mu, theta0, rng)?;
                    self.data.set_latent(&self.state.x1);
                }
            }
        }
        self.iteration += 1;
        Ok(())
    }

    /// Runs the configured number of iterations and collects the retained
    /// samples.
    pub fn run(mut self) -> Result<ChainOutput> {
        let q = self.data.q();
        let burn = self.cfg.effective_burn_in();
        let keep = self.cfg.n_samples();
        let mut deltas = Vec::with_capacity(keep);
        let mut chols = Vec::with_capacity(if self.cfg.store_cholesky { keep } else { 0 });
        let mut thetas = Vec::with_capacity(keep);
        let mut prev = Digraph::new(q);
        for t in 1..=self.cfg.iterations {
            self.step()?;
            if t > burn && (t - burn) % self.cfg.thin == 0 {
                let g = self.state.dag.as_digraph();
                deltas.push(prev.symmetric_difference(g));
                prev = g.clone();
                if self.cfg.store_cholesky {
                    chols.push(self.state.chol.clone());
                }
                thetas.push(self.state.theta0);
            }
        }
        Ok(ChainOutput {
            q,
            dag_deltas: deltas,
            chol_samples: chols,
            theta0_trace: thetas,
            dag_moves: self.dag_moves,
            theta0_moves: self.theta0_moves,
            config: self.cfg,
        })
    }
}

/// Runs the probit-model chain.
pub fn run_chain(data: &Dataset, hp: &Hyperparameters, cfg: &ChainConfig) -> Result<ChainOutput> {
    Sampler::new(data, hp, cfg)?.run()
}

/// Runs the chain on fully observed Gaussian data (`n × q`, column 0 being
/// the response vertex).
pub fn run_chain_observed(x: DMatrix<f64>, hp: &Hyperparameters, cfg: &ChainConfig) -> Result<ChainOutput> {
    Sampler::observed(x, hp, cfg)?.run()
}
