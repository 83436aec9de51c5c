//! Intervention effects on the binary response and posterior summaries.
//!
//! Under `do(X_s = x̃)` the latent response is Gaussian with mean `γ_s·x̃`
//! and variance `τ²`, where `(γ_s, γ)` regress the response on `s` and its
//! parents and `τ² = δ² + γᵀ Σ_{pa,pa} γ` adds back the variability of the
//! parents (back-door adjustment). The effect on `Y` is
//! `P(Y = 1 | do(X_s = x̃)) = 1 − Φ((θ₀ − γ_s x̃)/τ)`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gauss::{check_square, sigma_from_cholesky, submatrix};
use crate::graph::{Digraph, RESPONSE};
use crate::mcmc::ChainOutput;
use crate::normal;

/// Parameters of the post-intervention law of the latent response.
#[derive(Clone, Debug, PartialEq)]
pub struct InterventionParams {
    /// Coefficient of the intervened vertex.
    pub gamma_s: f64,
    /// Coefficients of the parents of the intervened vertex.
    pub gamma: Vec<f64>,
    /// Residual variance of the response given `s` and its parents.
    pub delta_sq: f64,
    /// `Σ_{pa,pa}⁻¹ + γγᵀ/δ²`.
    pub t: DMatrix<f64>,
    /// Post-intervention variance of the response.
    pub tau_sq: f64,
}

/// Post-intervention parameters for `do(X_s = x̃)` with `pa_s` the parents
/// of `s`.
pub fn post_intervention(sigma: &DMatrix<f64>, s: usize, pa_s: &[usize]) -> Result<InterventionParams> {
    let q = sigma.nrows();
    check_square(sigma, q, "covariance matrix")?;
    if s == RESPONSE || s >= q {
        return Err(Error::VertexOutOfRange { vertex: s, q });
    }
    for &u in pa_s {
        if u >= q {
            return Err(Error::VertexOutOfRange { vertex: u, q });
        }
        if u == RESPONSE || u == s {
            return Err(Error::InvalidEdge {
                from: u,
                to: s,
                reason: "not an admissible parent of an intervened vertex",
            });
        }
    }
    let mut fa = Vec::with_capacity(pa_s.len() + 1);
    fa.push(s);
    fa.extend_from_slice(pa_s);
    let s_ff = submatrix(sigma, &fa, &fa);
    let s_f0 = DVector::from_iterator(fa.len(), fa.iter().map(|&u| sigma[(u, RESPONSE)]));
    let chol = Cholesky::new(s_ff).ok_or(Error::NotPositiveDefinite("family covariance block"))?;
    let coef = chol.solve(&s_f0);
    let delta_sq = sigma[(RESPONSE, RESPONSE)] - coef.dot(&s_f0);
    if !(delta_sq > 0.0) {
        return Err(Error::NotPositiveDefinite("covariance matrix"));
    }
    let gamma: Vec<f64> = coef.iter().skip(1).copied().collect();
    let k = gamma.len();
    let s_pp = submatrix(sigma, pa_s, pa_s);
    let g = DVector::from_column_slice(&gamma);
    let spg = &s_pp * &g;
    let tau_sq = delta_sq + g.dot(&spg);
    let t = if k == 0 {
        DMatrix::zeros(0, 0)
    } else {
        let inv = Cholesky::new(s_pp)
            .ok_or(Error::NotPositiveDefinite("parent covariance block"))?
            .inverse();
        inv + &g * g.transpose() / delta_sq
    };
    Ok(InterventionParams {
        gamma_s: coef[0],
        gamma,
        delta_sq,
        t,
        tau_sq,
    })
}

/// `P(Y = 1 | do(X_s = x̃)) = 1 − Φ((θ₀ − γ_s x̃)/τ)`.
pub fn causal_effect(params: &InterventionParams, theta0: f64, x_tilde: f64) -> f64 {
    effect(params.gamma_s, libm::sqrt(params.tau_sq), theta0, x_tilde)
}

fn effect(gamma_s: f64, tau: f64, theta0: f64, x: f64) -> f64 {
    normal::sf((theta0 - gamma_s * x) / tau)
}

/// Posterior edge-inclusion probabilities; entry `(u, v)` is for `u → v`.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorSummary {
    pub probs: DMatrix<f64>,
}

impl PosteriorSummary {
    pub fn from_matrix(probs: DMatrix<f64>) -> Result<Self> {
        let q = probs.nrows();
        check_square(&probs, q, "edge probability matrix")?;
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidData("edge probabilities must lie in [0, 1]".into()));
        }
        if (0..q).any(|i| probs[(i, i)] != 0.0) {
            return Err(Error::InvalidData("edge probability matrix must have a zero diagonal".into()));
        }
        Ok(PosteriorSummary { probs })
    }

    pub fn q(&self) -> usize {
        self.probs.nrows()
    }

    pub fn prob(&self, u: usize, v: usize) -> f64 {
        self.probs[(u, v)]
    }
}

/// Fraction of retained samples containing each edge.
pub fn edge_probs(chain: &ChainOutput) -> Result<PosteriorSummary> {
    if chain.is_empty() {
        return Err(Error::InvalidData("chain has no retained samples".into()));
    }
    let q = chain.q;
    let mut counts = DMatrix::<f64>::zeros(q, q);
    for g in chain.digraphs() {
        for (u, v) in g.edges() {
            counts[(u, v)] += 1.0;
        }
    }
    Ok(PosteriorSummary {
        probs: counts / chain.len() as f64,
    })
}

/// Median-probability style estimate: every edge with `p̂ ≥ k` (and
/// `p̂ > 0`). The result is not forced to be acyclic.
pub fn dag_model_selection(summary: &PosteriorSummary, k: f64) -> Digraph {
    let q = summary.q();
    let mut g = Digraph::new(q);
    for u in 0..q {
        for v in 0..q {
            let p = summary.probs[(u, v)];
            if u != v && p > 0.0 && p >= k {
                g.insert(u, v).expect("indices are in range");
            }
        }
    }
    g
}

/// Per-sample `(γ_s, τ)` for every intervened vertex, plus the threshold
/// trace. Effects at any level `x̃` follow without touching the chain again.
#[derive(Clone, Debug, PartialEq)]
pub struct InterventionDraws {
    q: usize,
    theta0: Vec<f64>,
    // Indexed [s][t]; s = 0 is unused.
    gamma_s: Vec<Vec<f64>>,
    tau: Vec<Vec<f64>>,
}

impl InterventionDraws {
    /// Reconstructs `Σ` for each retained sample and solves every
    /// intervention on it.
    pub fn from_chain(chain: &ChainOutput) -> Result<Self> {
        if chain.is_empty() {
            return Err(Error::InvalidData("chain has no retained samples".into()));
        }
        if chain.chol_samples.len() != chain.len() {
            return Err(Error::InvalidData(
                "chain does not store Cholesky samples; rerun with Cholesky storage enabled".into(),
            ));
        }
        let q = chain.q;
        let n = chain.len();
        let mut gamma_s = vec![Vec::with_capacity(n); q];
        let mut tau = vec![Vec::with_capacity(n); q];
        gamma_s[RESPONSE] = Vec::new();
        tau[RESPONSE] = Vec::new();
        for (dag, chol) in chain.dags().zip(&chain.chol_samples) {
            let sigma = sigma_from_cholesky(&dag, chol)?;
            for s in 1..q {
                let p = post_intervention(&sigma, s, dag.parents(s))?;
                gamma_s[s].push(p.gamma_s);
                tau[s].push(libm::sqrt(p.tau_sq));
            }
        }
        Ok(InterventionDraws {
            q,
            theta0: chain.theta0_trace.clone(),
            gamma_s,
            tau,
        })
    }

    /// Builds draws from explicit per-sample values (`[s][t]` layout, with
    /// an empty entry for the response).
    pub fn from_parts(theta0: Vec<f64>, gamma_s: Vec<Vec<f64>>, tau: Vec<Vec<f64>>) -> Result<Self> {
        let q = gamma_s.len();
        if tau.len() != q || q == 0 {
            return Err(Error::DimensionMismatch {
                what: "intervention draws",
                expected: q,
                found: tau.len(),
            });
        }
        for s in 1..q {
            if gamma_s[s].len() != theta0.len() || tau[s].len() != theta0.len() {
                return Err(Error::DimensionMismatch {
                    what: "intervention draws per vertex",
                    expected: theta0.len(),
                    found: gamma_s[s].len().min(tau[s].len()),
                });
            }
        }
        Ok(InterventionDraws { q, theta0, gamma_s, tau })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.theta0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta0.is_empty()
    }

    /// Appends the samples of another set of draws over the same vertices.
    pub fn concat(&self, other: &InterventionDraws) -> Result<Self> {
        if self.q != other.q {
            return Err(Error::DimensionMismatch {
                what: "intervention draws",
                expected: self.q,
                found: other.q,
            });
        }
        let join = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> {
            a.iter().zip(b).map(|(x, y)| [&x[..], &y[..]].concat()).collect()
        };
        Ok(InterventionDraws {
            q: self.q,
            theta0: [&self.theta0[..], &other.theta0[..]].concat(),
            gamma_s: join(&self.gamma_s, &other.gamma_s),
            tau: join(&self.tau, &other.tau),
        })
    }

    fn check_vertex(&self, s: usize) -> Result<()> {
        if s == RESPONSE || s >= self.q {
            return Err(Error::VertexOutOfRange { vertex: s, q: self.q });
        }
        Ok(())
    }

    /// Per-sample effects `β_s⁽ᵗ⁾(x̃)`.
    pub fn effects(&self, s: usize, x_tilde: f64) -> Result<Vec<f64>> {
        self.check_vertex(s)?;
        Ok(self
            .theta0
            .iter()
            .zip(&self.gamma_s[s])
            .zip(&self.tau[s])
            .map(|((&t0, &gs), &tau)| effect(gs, tau, t0, x_tilde))
            .collect())
    }

    /// Model-averaged effect with equal-tailed credible bounds at `level`.
    pub fn table(&self, s: usize, x_values: &[f64], level: f64) -> Result<CausalEffectTable> {
        self.check_vertex(s)?;
        check_level(level)?;
        if self.is_empty() {
            return Err(Error::InvalidData("no posterior samples".into()));
        }
        let mut bma = Vec::with_capacity(x_values.len());
        let mut lower = Vec::with_capacity(x_values.len());
        let mut upper = Vec::with_capacity(x_values.len());
        for &x in x_values {
            let mut e = self.effects(s, x)?;
            let (m, lo, hi) = summarize(&mut e, level);
            bma.push(m);
            lower.push(lo);
            upper.push(hi);
        }
        Ok(CausalEffectTable {
            s,
            x_values: x_values.to_vec(),
            bma,
            lower,
            upper,
            level,
            n_samples: self.len(),
        })
    }
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidConfig(alloc::format!(
            "credible level must lie in (0, 1), got {level}"
        )));
    }
    Ok(())
}

// Mean and the (1−level)/2, (1+level)/2 quantiles; sorts `v`.
fn summarize(v: &mut [f64], level: f64) -> (f64, f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - level);
    (mean, quantile_sorted(v, tail), quantile_sorted(v, 1.0 - tail))
}

/// Linear-interpolation quantile of sorted data (the common "type 7" rule).
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of an empty sample");
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Model-averaged effects of `do(X_s = x̃)` over a set of levels.
#[derive(Clone, Debug, PartialEq)]
pub struct CausalEffectTable {
    pub s: usize,
    pub x_values: Vec<f64>,
    pub bma: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub level: f64,
    pub n_samples: usize,
}

impl CausalEffectTable {
    /// Summarizes per-sample effects; `draws[i]` holds the samples at
    /// `x_values[i]`.
    pub fn from_draws(s: usize, x_values: &[f64], draws: &[Vec<f64>], level: f64) -> Result<Self> {
        check_level(level)?;
        if draws.len() != x_values.len() {
            return Err(Error::DimensionMismatch {
                what: "effect draws",
                expected: x_values.len(),
                found: draws.len(),
            });
        }
        let n_samples = draws.first().map_or(0, Vec::len);
        if n_samples == 0 || draws.iter().any(|d| d.len() != n_samples) {
            return Err(Error::InvalidData("effect draws must be non-empty and of equal length".into()));
        }
        let mut table = CausalEffectTable {
            s,
            x_values: x_values.to_vec(),
            bma: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            level,
            n_samples,
        };
        for d in draws {
            let mut v = d.clone();
            let (m, lo, hi) = summarize(&mut v, level);
            table.bma.push(m);
            table.lower.push(lo);
            table.upper.push(hi);
        }
        Ok(table)
    }
}

/// Model-averaged effects for vertex `s` straight from a chain.
pub fn bma_effects(chain: &ChainOutput, s: usize, x_values: &[f64], level: f64) -> Result<CausalEffectTable> {
    InterventionDraws::from_chain(chain)?.table(s, x_values, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::CholeskyFactor;
    use crate::graph::Dag;
    use crate::mcmc::ChainConfig;
    use crate::rng::chain_rng;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;
    use std::vec;

    fn random_model(q: usize, seed: u64) -> (Dag, CholeskyFactor) {
        let mut rng = chain_rng(seed, 0);
        let mut edges = std::vec::Vec::new();
        for u in 1..q {
            for v in 0..u {
                if rng.random::<f64>() < 0.6 {
                    edges.push((u, v));
                }
            }
        }
        let dag = Dag::from_edges(q, edges).unwrap();
        let sigma2 = (0..q).map(|j| if j == 0 { 1.0 } else { rng.random_range(0.5..2.0) }).collect();
        let coeffs = (0..q)
            .map(|j| dag.parents(j).iter().map(|_| rng.random_range(-1.5..1.5)).collect())
            .collect();
        let chol = CholeskyFactor::new(&dag, sigma2, coeffs).unwrap();
        (dag, chol)
    }

    #[test]
    fn diagonal_covariance_has_no_effect() {
        let sigma = DMatrix::from_diagonal(&DVector::from_vec(vec![1.3, 2.0, 0.5, 1.0]));
        let p = post_intervention(&sigma, 2, &[3]).unwrap();
        assert_eq!(p.gamma_s, 0.0);
        assert_eq!(p.gamma, vec![0.0]);
        assert_relative_eq!(p.tau_sq, 1.3);
        for x in [-3.0, 0.0, 5.0] {
            assert_relative_eq!(causal_effect(&p, 0.0, x), 0.5);
        }
    }

    #[test]
    fn parentless_intervention_is_a_bivariate_regression() {
        let sigma = DMatrix::from_row_slice(3, 3, &[2.0, 0.6, 0.3, 0.6, 1.5, 0.2, 0.3, 0.2, 1.0]);
        let p = post_intervention(&sigma, 1, &[]).unwrap();
        assert_relative_eq!(p.gamma_s, 0.6 / 1.5, max_relative = 1e-14);
        assert_relative_eq!(p.delta_sq, 2.0 - 0.36 / 1.5, max_relative = 1e-14);
        assert_eq!(p.tau_sq, p.delta_sq);
        assert!(p.gamma.is_empty());
    }

    #[test]
    fn effect_examples() {
        let p = InterventionParams {
            gamma_s: 1.0,
            gamma: vec![],
            delta_sq: 1.0,
            t: DMatrix::zeros(0, 0),
            tau_sq: 1.0,
        };
        assert_relative_eq!(causal_effect(&p, 0.0, 1.0), 0.841_344_746_068_542_9, max_relative = 1e-12);
        assert!(causal_effect(&p, 0.0, 1e6) == 1.0);
        assert!(causal_effect(&p, 0.0, -1e6) == 0.0);
    }

    #[test]
    fn rejects_bad_vertices() {
        let sigma = DMatrix::<f64>::identity(3, 3);
        assert!(post_intervention(&sigma, 0, &[]).is_err());
        assert!(post_intervention(&sigma, 3, &[]).is_err());
        assert!(post_intervention(&sigma, 1, &[0]).is_err());
        assert!(post_intervention(&sigma, 1, &[1]).is_err());
    }

    #[test]
    fn block_diagonal_sigma_decouples_response() {
        let mut sigma = DMatrix::<f64>::identity(4, 4);
        sigma[(1, 2)] = 0.5;
        sigma[(2, 1)] = 0.5;
        sigma[(0, 3)] = 0.4;
        sigma[(3, 0)] = 0.4;
        let p = post_intervention(&sigma, 2, &[1]).unwrap();
        assert_relative_eq!(p.gamma_s, 0.0, epsilon = 1e-15);
        assert_relative_eq!(p.tau_sq, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn interventional_simulation_matches_closed_form() {
        // Forward-simulate the mutilated SEM and compare the response law.
        let q = 5;
        let (dag, chol) = random_model(q, 31);
        let sigma = sigma_from_cholesky(&dag, &chol).unwrap();
        let s = 3;
        let x_tilde = 1.5;
        let p = post_intervention(&sigma, s, dag.parents(s)).unwrap();
        let order = dag.topological_order();
        let mut rng = chain_rng(32, 0);
        let draws = 200_000;
        let (mut sum, mut sum2, mut hits) = (0.0, 0.0, 0usize);
        let theta0 = 0.3;
        let mut x = vec![0.0; q];
        for _ in 0..draws {
            for &j in &order {
                if j == s {
                    x[j] = x_tilde;
                    continue;
                }
                let mut v = chol.sigma2()[j].sqrt() * rng.sample::<f64, _>(StandardNormal);
                for (&u, &c) in dag.parents(j).iter().zip(chol.coeffs(j)) {
                    v -= c * x[u];
                }
                x[j] = v;
            }
            sum += x[0];
            sum2 += x[0] * x[0];
            hits += (x[0] >= theta0) as usize;
        }
        let n = draws as f64;
        let mean = sum / n;
        let var = sum2 / n - mean * mean;
        assert!((mean - p.gamma_s * x_tilde).abs() < 4.0 * (var / n).sqrt());
        assert!((var / p.tau_sq - 1.0).abs() < 4.0 * (2.0 / n).sqrt());
        assert!((hits as f64 / n - causal_effect(&p, theta0, x_tilde)).abs() < 0.005);
    }

    fn chain_from(dags: &[Dag], chols: std::vec::Vec<CholeskyFactor>, theta: std::vec::Vec<f64>) -> ChainOutput {
        ChainOutput::from_samples(dags[0].q(), dags, chols, theta, ChainConfig::new(1, 0)).unwrap()
    }

    #[test]
    fn edge_probabilities_count_visits() {
        let a = Dag::from_edges(3, [(1, 0)]).unwrap();
        let b = Dag::from_edges(3, [(1, 0), (2, 1)]).unwrap();
        let chain = chain_from(&[a.clone(), b.clone(), a, b], vec![], vec![0.0; 4]);
        let sum = edge_probs(&chain).unwrap();
        assert_eq!(sum.prob(1, 0), 1.0);
        assert_eq!(sum.prob(2, 1), 0.5);
        assert_eq!(sum.prob(2, 0), 0.0);
        assert_eq!(sum.prob(0, 0), 0.0);
    }

    #[test]
    fn model_selection_thresholds() {
        let probs = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.9, 0.0, 0.2, 0.4, 0.5, 0.0]);
        let s = PosteriorSummary::from_matrix(probs).unwrap();
        let pick = |k| dag_model_selection(&s, k).edges().collect::<std::vec::Vec<_>>();
        assert_eq!(pick(0.5), vec![(1, 0), (2, 1)]);
        assert_eq!(pick(0.0), vec![(1, 0), (1, 2), (2, 0), (2, 1)]);
        assert!(pick(0.95).is_empty());
    }

    #[test]
    fn single_sample_table_collapses() {
        let (dag, chol) = random_model(4, 40);
        let chain = chain_from(core::slice::from_ref(&dag), vec![chol.clone()], vec![0.2]);
        let table = bma_effects(&chain, 2, &[-1.0, 0.5], 0.95).unwrap();
        let sigma = sigma_from_cholesky(&dag, &chol).unwrap();
        let p = post_intervention(&sigma, 2, dag.parents(2)).unwrap();
        for (i, &x) in [-1.0, 0.5].iter().enumerate() {
            let want = causal_effect(&p, 0.2, x);
            assert_relative_eq!(table.bma[i], want, max_relative = 1e-12);
            assert_eq!(table.lower[i], table.bma[i]);
            assert_eq!(table.upper[i], table.bma[i]);
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_relative_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_relative_eq!(quantile_sorted(&v, 0.25), 1.75);
    }

    #[test]
    fn table_requires_stored_cholesky() {
        let dag = Dag::empty(3).unwrap();
        let chain = chain_from(&[dag], vec![], vec![0.0]);
        assert!(bma_effects(&chain, 1, &[0.0], 0.95).is_err());
    }

    fn random_draws(q: usize, t: usize, seed: u64) -> InterventionDraws {
        let mut rng = chain_rng(seed, 0);
        let theta0 = (0..t).map(|_| rng.random_range(-0.5..0.5)).collect();
        let mut gs = vec![vec![]];
        let mut tau = vec![vec![]];
        for _ in 1..q {
            gs.push((0..t).map(|_| rng.random_range(-2.0..2.0)).collect());
            tau.push((0..t).map(|_| rng.random_range(0.5..2.0)).collect());
        }
        InterventionDraws::from_parts(theta0, gs, tau).unwrap()
    }

    #[test]
    fn bma_is_linear_under_concatenation() {
        let a = random_draws(4, 37, 1);
        let b = random_draws(4, 90, 2);
        let xs = [-1.0, 0.0, 2.5];
        let ta = a.table(3, &xs, 0.9).unwrap();
        let tb = b.table(3, &xs, 0.9).unwrap();
        let tab = a.concat(&b).unwrap().table(3, &xs, 0.9).unwrap();
        for i in 0..xs.len() {
            let want = (37.0 * ta.bma[i] + 90.0 * tb.bma[i]) / 127.0;
            assert_relative_eq!(tab.bma[i], want, max_relative = 1e-12);
        }
        let draws: std::vec::Vec<_> = xs.iter().map(|&x| a.effects(3, x).unwrap()).collect();
        assert_eq!(CausalEffectTable::from_draws(3, &xs, &draws, 0.9).unwrap(), ta);
    }

    proptest! {
        #[test]
        fn tau_matches_the_conditional_variance_form(seed in any::<u64>(), s in 1usize..6) {
            let (dag, chol) = random_model(6, seed);
            let sigma = sigma_from_cholesky(&dag, &chol).unwrap();
            let p = post_intervention(&sigma, s, dag.parents(s)).unwrap();
            if !p.gamma.is_empty() {
                let g = DVector::from_column_slice(&p.gamma);
                let t_inv = p.t.clone().try_inverse().unwrap();
                let ratio = g.dot(&(t_inv * &g)) / p.delta_sq;
                let tau_prop = p.delta_sq / (1.0 - ratio);
                prop_assert!((tau_prop / p.tau_sq - 1.0).abs() < 1e-8);
            }
            prop_assert!(p.tau_sq >= p.delta_sq * (1.0 - 1e-12));
        }

        #[test]
        fn effects_are_probabilities_and_monotone(gs in -5.0f64..5.0, tau in 0.1f64..5.0, t0 in -3.0f64..3.0, x in -10.0f64..10.0) {
            let e1 = effect(gs, tau, t0, x);
            let e2 = effect(gs, tau, t0, x + 0.5);
            prop_assert!((0.0..=1.0).contains(&e1));
            if gs > 0.0 { prop_assert!(e2 >= e1); }
            if gs < 0.0 { prop_assert!(e2 <= e1); }
        }
    }
}
