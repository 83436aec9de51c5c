//! DAG-Wishart prior on the Cholesky parameters and the Bernoulli prior on
//! DAG skeletons.
//!
//! The node priors come from a single Wishart `W_q(a, g·I)` on the precision
//! of a complete DAG: each vertex borrows the law of the vertex with the
//! same number of parents in a complete DAG. With `U = g·I` this gives
//!
//! ```text
//! σ_j² ~ I-Ga(a_j*, g/2),   a_j* = (a + |pa(j)| − q + 3)/2 − 1
//! L_{pa(j),j} | σ_j² ~ N(0, σ_j²/g · I)
//! ```
//!
//! which depends on the parent set only through its size. The response has
//! `σ² = 1` fixed and `L_{pa(0),0} ~ N(0, I/g)`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::lgamma;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::gauss::{sample_inverse_gamma, CholeskyFactor};
use crate::graph::{Dag, RESPONSE};

/// Prior and proposal hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hyperparameters {
    /// Wishart shape, `a > q − 1`.
    pub a: f64,
    /// Wishart scale multiplier, `U = g·I`.
    pub g: f64,
    /// Prior probability of each skeleton edge.
    pub pi: f64,
    /// Variance of the random-walk proposal for the threshold.
    pub sigma0_sq: f64,
}

impl Hyperparameters {
    /// `a = q + 1`, `g = 1/n`, `π = 3/(2q − 2)` and `σ₀² = 0.25`.
    pub fn defaults(q: usize, n: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidHyperparameter(format!(
                "default edge probability needs q >= 2, got q = {q}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidHyperparameter(
                "default g = 1/n needs at least one observation".into(),
            ));
        }
        Ok(Hyperparameters {
            a: q as f64 + 1.0,
            g: 1.0 / n as f64,
            pi: default_edge_prob(q),
            sigma0_sq: 0.25,
        })
    }

    pub fn validate(&self, q: usize) -> Result<()> {
        if !(self.a > q as f64 - 1.0 && self.a.is_finite()) {
            return Err(Error::InvalidHyperparameter(format!(
                "Wishart shape a = {} must exceed q - 1 = {}",
                self.a,
                q as f64 - 1.0
            )));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidHyperparameter(format!(
                "scale g = {} must be positive",
                self.g
            )));
        }
        if !(self.pi > 0.0 && self.pi < 1.0) {
            return Err(Error::InvalidHyperparameter(format!(
                "edge probability pi = {} must lie in (0, 1)",
                self.pi
            )));
        }
        if !(self.sigma0_sq > 0.0 && self.sigma0_sq.is_finite()) {
            return Err(Error::InvalidHyperparameter(format!(
                "threshold proposal variance {} must be positive",
                self.sigma0_sq
            )));
        }
        Ok(())
    }
}

/// `3 / (2q − 2)`, an expected degree of about 1.5 per vertex, capped at
/// 0.5 for very small graphs.
pub fn default_edge_prob(q: usize) -> f64 {
    (3.0 / (2.0 * q as f64 - 2.0)).min(0.5)
}

/// Inverse-gamma shape `a_j*` of a vertex with `npa` parents.
pub fn node_shape(hp: &Hyperparameters, q: usize, npa: usize) -> Result<f64> {
    let shape = 0.5 * (hp.a + npa as f64 - q as f64 + 3.0) - 1.0;
    if shape > 0.0 {
        Ok(shape)
    } else {
        Err(Error::InvalidHyperparameter(format!(
            "non-positive inverse-gamma shape {shape} for a vertex with {npa} parents (a = {}, q = {q})",
            hp.a
        )))
    }
}

/// Draws `(D, L)` from the prior, with the response variance fixed to 1.
pub fn sample_prior_cholesky<R: Rng + ?Sized>(
    dag: &Dag,
    hp: &Hyperparameters,
    rng: &mut R,
) -> Result<CholeskyFactor> {
    sample_prior_cholesky_with(dag, hp, true, rng)
}

/// Prior draw; with `pin_response == false` the response variance is drawn
/// like any other vertex (the unconstrained DAG-Wishart law).
pub fn sample_prior_cholesky_with<R: Rng + ?Sized>(
    dag: &Dag,
    hp: &Hyperparameters,
    pin_response: bool,
    rng: &mut R,
) -> Result<CholeskyFactor> {
    let q = dag.q();
    hp.validate(q)?;
    let mut sigma2 = Vec::with_capacity(q);
    let mut coeffs = Vec::with_capacity(q);
    for j in 0..q {
        let npa = dag.parents(j).len();
        let s2 = if j == RESPONSE && pin_response {
            1.0
        } else {
            sample_inverse_gamma(node_shape(hp, q, npa)?, 0.5 * hp.g, rng)?
        };
        let sd = libm::sqrt(s2 / hp.g);
        coeffs.push(
            (0..npa)
                .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
                .collect(),
        );
        sigma2.push(s2);
    }
    Ok(CholeskyFactor::from_parts_unchecked(sigma2, coeffs))
}

/// Log prior density of `(D, L)` given the DAG. The response variance is
/// treated as fixed and does not contribute.
pub fn log_prior_cholesky(dag: &Dag, hp: &Hyperparameters, chol: &CholeskyFactor) -> Result<f64> {
    let q = dag.q();
    hp.validate(q)?;
    chol.check_consistent(dag)?;
    let mut total = 0.0;
    for j in 0..q {
        let coeffs = chol.coeffs(j);
        if j == RESPONSE {
            total += ln_iso_normal(coeffs, 1.0 / hp.g);
            continue;
        }
        let s2 = chol.sigma2()[j];
        let shape = node_shape(hp, q, coeffs.len())?;
        let rate = 0.5 * hp.g;
        total += shape * libm::log(rate) - lgamma(shape) - (shape + 1.0) * libm::log(s2) - rate / s2;
        total += ln_iso_normal(coeffs, s2 / hp.g);
    }
    Ok(total)
}

// ln N(x | 0, v·I)
fn ln_iso_normal(x: &[f64], v: f64) -> f64 {
    let k = x.len() as f64;
    let ss: f64 = x.iter().map(|c| c * c).sum();
    -0.5 * k * libm::log(2.0 * PI * v) - 0.5 * ss / v
}

/// `|A|·ln π + (q(q−1)/2 − |A|)·ln(1 − π)` where `|A|` counts skeleton
/// edges. Unnormalized over DAG space.
pub fn log_prior_dag(dag: &Dag, hp: &Hyperparameters) -> f64 {
    let q = dag.q() as f64;
    let edges = dag.n_edges() as f64;
    edges * libm::log(hp.pi) + (0.5 * q * (q - 1.0) - edges) * libm::log(1.0 - hp.pi)
}
