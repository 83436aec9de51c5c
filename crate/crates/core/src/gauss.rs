//! Modified Cholesky parameterization of DAG-constrained Gaussian models,
//! conversions between `(D, L)`, `Ω` and `Σ`, and the elementary samplers
//! used by the chain.
//!
//! For a DAG with parent sets `pa(j)`, the structural equations read
//! `x_j = −L_{pa(j),j}ᵀ x_{pa(j)} + ε_j` with `ε_j ~ N(0, σ_j²)`, so that
//! `Ω = L D⁻¹ Lᵀ` where `L` is unit-diagonal with off-diagonal support on the
//! edges and `D = diag(σ²)`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::normal;

/// Per-node conditional variances and edge coefficients.
///
/// `coeffs[j]` is aligned with `dag.parents(j)` (ascending vertex order).
/// Models fitted by the chain additionally pin `σ²` of the response to 1;
/// this type does not enforce that so it can also describe unconstrained
/// Gaussian DAG models.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CholeskyFactor {
    sigma2: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
}

impl CholeskyFactor {
    pub fn new(dag: &Dag, sigma2: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        let chol = CholeskyFactor { sigma2, coeffs };
        chol.check_consistent(dag)?;
        Ok(chol)
    }

    /// Unit variances and zero coefficients.
    pub fn identity(dag: &Dag) -> Self {
        let q = dag.q();
        CholeskyFactor {
            sigma2: vec![1.0; q],
            coeffs: (0..q).map(|j| vec![0.0; dag.parents(j).len()]).collect(),
        }
    }

    pub(crate) fn from_parts_unchecked(sigma2: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Self {
        CholeskyFactor { sigma2, coeffs }
    }

    pub fn q(&self) -> usize {
        self.sigma2.len()
    }

    pub fn sigma2(&self) -> &[f64] {
        &self.sigma2
    }

    pub fn coeffs(&self, j: usize) -> &[f64] {
        &self.coeffs[j]
    }

    pub fn check_consistent(&self, dag: &Dag) -> Result<()> {
        let q = dag.q();
        if self.sigma2.len() != q || self.coeffs.len() != q {
            return Err(Error::DimensionMismatch {
                what: "Cholesky factor vertex count",
                expected: q,
                found: self.sigma2.len().min(self.coeffs.len()),
            });
        }
        for j in 0..q {
            if !(self.sigma2[j] > 0.0 && self.sigma2[j].is_finite()) {
                return Err(Error::InvalidData(alloc::format!(
                    "conditional variance of vertex {} must be positive and finite, got {}",
                    j,
                    self.sigma2[j]
                )));
            }
            if self.coeffs[j].len() != dag.parents(j).len() {
                return Err(Error::DimensionMismatch {
                    what: "edge coefficients of a vertex",
                    expected: dag.parents(j).len(),
                    found: self.coeffs[j].len(),
                });
            }
        }
        Ok(())
    }

    /// The dense `q × q` matrix `L` with unit diagonal and `L[u, j]` set
    /// for every edge `u -> j`.
    pub fn unit_lower(&self, dag: &Dag) -> DMatrix<f64> {
        let q = dag.q();
        let mut l = DMatrix::identity(q, q);
        for j in 0..q {
            for (&u, &c) in dag.parents(j).iter().zip(&self.coeffs[j]) {
                l[(u, j)] = c;
            }
        }
        l
    }
}

/// `Ω = L D⁻¹ Lᵀ`.
pub fn omega_from_cholesky(dag: &Dag, chol: &CholeskyFactor) -> Result<DMatrix<f64>> {
    chol.check_consistent(dag)?;
    let l = chol.unit_lower(dag);
    let mut scaled = l.clone();
    for j in 0..dag.q() {
        let inv = 1.0 / chol.sigma2[j];
        scaled.column_mut(j).scale_mut(inv);
    }
    Ok(symmetrize(&scaled * l.transpose()))
}

/// `Σ = Ω⁻¹`, computed by propagating the structural equations in
/// topological order instead of inverting `Ω`.
pub fn sigma_from_cholesky(dag: &Dag, chol: &CholeskyFactor) -> Result<DMatrix<f64>> {
    chol.check_consistent(dag)?;
    let q = dag.q();
    // Row j of `m` expresses x_j in terms of the noise terms: x = M ε.
    let mut m = DMatrix::<f64>::zeros(q, q);
    for j in dag.topological_order() {
        m[(j, j)] = 1.0;
        for (&u, &c) in dag.parents(j).iter().zip(&chol.coeffs[j]) {
            for k in 0..q {
                let add = -c * m[(u, k)];
                m[(j, k)] += add;
            }
        }
    }
    let mut md = m.clone();
    for k in 0..q {
        md.column_mut(k).scale_mut(chol.sigma2[k]);
    }
    Ok(symmetrize(&md * m.transpose()))
}

/// Regression parameters of each vertex on its parents:
/// `L_{pa(j),j} = −Σ_{pa,pa}⁻¹ Σ_{pa,j}` and `σ_j² = Σ_{jj|pa(j)}`.
pub fn cholesky_from_sigma(dag: &Dag, sigma: &DMatrix<f64>) -> Result<CholeskyFactor> {
    let q = dag.q();
    check_square(sigma, q, "covariance matrix")?;
    if Cholesky::new(sigma.clone()).is_none() {
        return Err(Error::NotPositiveDefinite("covariance matrix"));
    }
    let mut sigma2 = Vec::with_capacity(q);
    let mut coeffs = Vec::with_capacity(q);
    for j in 0..q {
        let pa = dag.parents(j);
        if pa.is_empty() {
            sigma2.push(sigma[(j, j)]);
            coeffs.push(Vec::new());
            continue;
        }
        let s_pp = submatrix(sigma, pa, pa);
        let s_pj = DVector::from_iterator(pa.len(), pa.iter().map(|&u| sigma[(u, j)]));
        let chol = Cholesky::new(s_pp).ok_or(Error::NotPositiveDefinite("parent block"))?;
        let beta = chol.solve(&s_pj);
        sigma2.push(sigma[(j, j)] - beta.dot(&s_pj));
        coeffs.push(beta.iter().map(|b| -b).collect());
    }
    Ok(CholeskyFactor { sigma2, coeffs })
}

/// A normal law restricted to the half-open interval `(lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedNormal {
    mean: f64,
    sd: f64,
    lower: f64,
    upper: f64,
}

/// Standardized bounds beyond which inverse-CDF sampling is replaced by
/// exponential rejection.
const TAIL_SWITCH: f64 = 6.0;

impl TruncatedNormal {
    pub fn new(mean: f64, variance: f64, lower: f64, upper: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) || !mean.is_finite() {
            return Err(Error::InvalidData(alloc::format!(
                "truncated normal needs a finite mean and positive variance, got ({mean}, {variance})"
            )));
        }
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidData(alloc::format!(
                "truncation interval ({lower}, {upper}] is empty"
            )));
        }
        Ok(TruncatedNormal {
            mean,
            sd: libm::sqrt(variance),
            lower,
            upper,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let a = (self.lower - self.mean) / self.sd;
        let b = (self.upper - self.mean) / self.sd;
        let z = standard_truncated(a, b, rng);
        let x = self.mean + self.sd * z;
        // Rounding in the affine map can land on a closed boundary.
        if x <= self.lower {
            self.lower.next_up().min(self.upper)
        } else if x > self.upper {
            self.upper
        } else {
            x
        }
    }
}

impl Distribution<f64> for TruncatedNormal {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        TruncatedNormal::sample(self, rng)
    }
}

/// Draw from N(0, 1) restricted to (a, b].
fn standard_truncated<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::INFINITY {
        return rng.sample(StandardNormal);
    }
    if b <= 0.0 {
        return -standard_truncated(-b, -a, rng);
    }
    if a >= 0.0 {
        if a > TAIL_SWITCH {
            return tail_rejection(a, b, rng);
        }
        let (qa, qb) = (normal::sf(a), normal::sf(b));
        if qa - qb > 1e-300 {
            let u: f64 = rng.sample(Open01);
            return normal::isf(qb + u * (qa - qb));
        }
        return uniform_rejection(a, b, rng);
    }
    // a < 0 < b
    let (pa, pb) = (normal::cdf(a), normal::cdf(b));
    if pb - pa < 1e-12 {
        return uniform_rejection(a, b, rng);
    }
    let u: f64 = rng.sample(Open01);
    normal::ppf(pa + u * (pb - pa))
}

// Exponential proposal with the optimal rate for the one-sided tail (a, ∞),
// or a uniform proposal when the interval is narrow relative to that rate.
fn tail_rejection<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let rate = 0.5 * (a + libm::sqrt(a * a + 4.0));
    if b - a < 1.0 / rate {
        return uniform_rejection(a, b, rng);
    }
    let exp = Exp::new(rate).expect("positive rate");
    loop {
        let z = a + exp.sample(rng);
        if z > b {
            continue;
        }
        let u: f64 = rng.random();
        let d = z - rate;
        if u <= libm::exp(-0.5 * d * d) {
            return z;
        }
    }
}

fn uniform_rejection<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let closest = if a > 0.0 {
        a
    } else if b < 0.0 {
        b
    } else {
        0.0
    };
    loop {
        let u: f64 = rng.random();
        let z = a + (b - a) * u;
        if z <= a {
            continue;
        }
        let v: f64 = rng.random();
        if v <= libm::exp(0.5 * (closest * closest - z * z)) {
            return z;
        }
    }
}

/// Draw `x ~ N(mean, cov)`.
pub fn sample_mvn<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    rng: &mut R,
) -> Result<DVector<f64>> {
    let d = mean.len();
    check_square(cov, d, "covariance matrix")?;
    let chol = Cholesky::new(cov.clone()).ok_or(Error::NotPositiveDefinite("covariance matrix"))?;
    let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok(mean + chol.l() * z)
}

/// Draw `x ~ N(mean, scale · P⁻¹)` given the Cholesky factor of the
/// precision `P`, without forming the inverse.
pub(crate) fn sample_mvn_from_precision<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    precision: &Cholesky<f64, Dyn>,
    scale: f64,
    rng: &mut R,
) -> DVector<f64> {
    let d = mean.len();
    let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
    // P = R Rᵀ, so Rᵀ⁻¹ z has covariance P⁻¹.
    let w = precision
        .l()
        .transpose()
        .solve_upper_triangular(&z)
        .expect("Cholesky factor has a positive diagonal");
    mean + w * libm::sqrt(scale)
}

/// Draw from the inverse-gamma law with the given shape and rate (mean
/// `rate / (shape − 1)` for `shape > 1`).
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite() && rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidData(alloc::format!(
            "inverse-gamma needs positive finite shape and rate, got ({shape}, {rate})"
        )));
    }
    let gamma = Gamma::new(shape, 1.0 / rate).map_err(|_| {
        Error::InvalidData(alloc::format!("invalid gamma parameters ({shape}, {rate})"))
    })?;
    loop {
        let g: f64 = gamma.sample(rng);
        if g > 0.0 {
            return Ok(1.0 / g);
        }
    }
}

pub(crate) fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, k| m[(rows[i], cols[k])])
}

pub(crate) fn check_square(m: &DMatrix<f64>, n: usize, what: &'static str) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            what,
            expected: n,
            found: if m.nrows() != n { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

/// Logarithm of the determinant of an s.p.d. matrix from its Cholesky factor.
pub(crate) fn ln_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l_dirty().diagonal().iter().map(|&d| libm::log(d)).sum::<f64>()
}
