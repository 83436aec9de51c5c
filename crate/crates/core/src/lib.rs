//! Bayesian structure learning and causal inference for a binary response
//! linked to Gaussian covariates through a latent probit variable.
//!
//! The joint law of the latent response and the covariates is a Gaussian
//! DAG model parametrized by its modified Cholesky decomposition. Vertex 0
//! ([`graph::RESPONSE`]) is the latent variable; it may receive edges but
//! never sends them. A reversible-jump sampler ([`mcmc`]) explores DAGs,
//! Cholesky parameters, the latent data and the probit threshold, and
//! [`causal`] turns the draws into edge probabilities and model-averaged
//! intervention effects.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod causal;
pub mod error;
pub mod gauss;
pub mod graph;
pub mod mcmc;
pub mod normal;
pub mod prior;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
pub use graph::{Dag, DagOperator, Digraph, OpKind, RESPONSE};
pub use prior::Hyperparameters;
