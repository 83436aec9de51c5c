//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::Instant;

use common::{
    all_response_sink_dags, integrate_half_line, integrate_real_line, ks_critical_01, ks_distance, mean_and_se,
    median,
};
use dagprobit_core::causal::{causal_effect, edge_probs, post_intervention};
use dagprobit_core::gauss::{sample_inverse_gamma, sample_mvn, sigma_from_cholesky, TruncatedNormal};
use dagprobit_core::mcmc::{log_marginal_node, run_chain, run_chain_observed, AugmentedData, ChainConfig, Moves, Sampler};
use dagprobit_core::prior::{log_prior_dag, Hyperparameters};
use dagprobit_core::rng::chain_rng;
use dagprobit_core::simulate::{
    effect_errors, effects_at_observed, naive_baseline, predictor_recovery, random_coefficients, random_dag,
    sample_dataset, simulate_replicate, structure_metrics, ScoringMode, SimConfig,
};
use dagprobit_core::{Dag, RESPONSE};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Criterion = (&'static str, &'static str, fn() -> Outcome);

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("1", "node marginal likelihoods agree with quadrature", criterion_1),
        ("2", "DAG visit frequencies match exhaustive enumeration", criterion_2),
        ("3", "post-intervention law agrees with interventional simulation", criterion_3),
        ("4-6", "simulation study: AUC, effect MAE, predictor recovery", criteria_4_5_6),
        ("7", "sampler laws: truncated normal, inverse gamma, multivariate normal", criterion_7),
        ("8", "structural invariants and determinism over a full fit", criterion_8),
        ("9", "prior recovery without data", criterion_9),
        ("10", "full method beats the star-DAG baseline under confounding", criterion_10),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let t0 = Instant::now();
        let out = f();
        let secs = t0.elapsed().as_secs_f64();
        let status = if out.pass { "PASS" } else { "FAIL" };
        // Bank results carry their own per-criterion lines.
        for line in out.detail.lines() {
            if let Some(rest) = line.strip_prefix("criterion ") {
                println!("criterion {rest}");
            } else {
                println!("criterion {id:>4} [{status}] {name}: {line} ({secs:.1}s)");
            }
        }
        if !out.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criterion group(s) failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}

fn ln_normal(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * (x - mean).powi(2) / var
}

fn ln_inv_gamma(x: f64, shape: f64, rate: f64) -> f64 {
    shape * rate.ln() - ln_gamma(shape) - (shape + 1.0) * x.ln() - rate / x
}

fn criterion_1() -> Outcome {
    let q = 4;
    let mut rng = chain_rng(101, 0);
    let (mut worst_cov, mut worst_resp) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = rng.random_range(1..=5);
        let npa = rng.random_range(0..=1usize);
        let g = rng.random_range(0.1..2.0);
        let a = q as f64 - 1.0 + rng.random_range(0.5..4.0);
        let scale = rng.random_range(0.5..2.0);
        let x = DMatrix::from_fn(n, q, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        let data = AugmentedData::new(x.clone()).unwrap();
        let hp = Hyperparameters { a, g, pi: 0.3, sigma0_sq: 0.25 };
        let j = rng.random_range(1..q);
        let h = loop {
            let h = rng.random_range(1..q);
            if h != j {
                break h;
            }
        };
        let pa: Vec<usize> = if npa == 1 { vec![h] } else { vec![] };

        // Covariate vertex: ∫∫ N(X_j | −X_h L, σ²I) N(L | 0, σ²/g) IG(σ² | a*, g/2).
        let shape = 0.5 * (a + npa as f64 - q as f64 + 3.0) - 1.0;
        let xj: Vec<f64> = x.column(j).iter().copied().collect();
        let xh: Vec<f64> = x.column(h).iter().copied().collect();
        let sxx: f64 = xh.iter().map(|v| v * v).sum();
        let sxy: f64 = xh.iter().zip(&xj).map(|(a, b)| a * b).sum();
        let syy: f64 = xj.iter().map(|v| v * v).sum();
        let center = if npa == 1 { -sxy / (sxx + g) } else { 0.0 };
        let s2_ref = (g + syy) / (2.0 * shape + n as f64);
        let log_lik = |l: f64, s2: f64| -> f64 {
            xj.iter()
                .zip(&xh)
                .map(|(&y, &z)| if npa == 1 { ln_normal(y, -z * l, s2) } else { ln_normal(y, 0.0, s2) })
                .sum()
        };
        let log_f = |l: f64, s2: f64| -> f64 {
            let prior_l = if npa == 1 { ln_normal(l, 0.0, s2 / g) } else { 0.0 };
            log_lik(l, s2) + prior_l + ln_inv_gamma(s2, shape, 0.5 * g)
        };
        let reference = log_f(center, s2_ref);
        let integral = integrate_half_line(
            |s2| {
                if npa == 1 {
                    let sd = (s2 / (sxx + g)).sqrt();
                    integrate_real_line(|l| (log_f(l, s2) - reference).exp(), center, sd, 1e-11)
                } else {
                    (log_f(0.0, s2) - reference).exp()
                }
            },
            s2_ref,
            1e-10,
        );
        let oracle = reference + integral.ln();
        let code = log_marginal_node(j, &pa, &data, &hp).unwrap();
        worst_cov = worst_cov.max(((code - oracle).exp() - 1.0).abs());

        // Response with σ² = 1: ∫ N(X_0 | −X_h L, I) N(L | 0, 1/g).
        let x0: Vec<f64> = x.column(0).iter().copied().collect();
        let s0h: f64 = xh.iter().zip(&x0).map(|(a, b)| a * b).sum();
        let c0 = if npa == 1 { -s0h / (sxx + g) } else { 0.0 };
        let log_f0 = |l: f64| -> f64 {
            let lik: f64 = x0.iter().zip(&xh).map(|(&y, &z)| ln_normal(y, -z * l * npa as f64, 1.0)).sum();
            lik + if npa == 1 { ln_normal(l, 0.0, 1.0 / g) } else { 0.0 }
        };
        let ref0 = log_f0(c0);
        let oracle0 = if npa == 1 {
            ref0 + integrate_real_line(|l| (log_f0(l) - ref0).exp(), c0, 1.0 / (sxx + g).sqrt(), 1e-12).ln()
        } else {
            ref0
        };
        let code0 = log_marginal_node(RESPONSE, &pa, &data, &hp).unwrap();
        worst_resp = worst_resp.max(((code0 - oracle0).exp() - 1.0).abs());
    }
    outcome(
        worst_cov < 1e-4 && worst_resp < 1e-6,
        format!("max relative error {worst_cov:.2e} (covariates, tol 1e-4), {worst_resp:.2e} (response, tol 1e-6)"),
    )
}

fn criterion_2() -> Outcome {
    let q = 3;
    let n = 40;
    let mut rng = chain_rng(202, 0);
    let mut x = DMatrix::<f64>::zeros(n, q);
    for i in 0..n {
        let x2: f64 = rng.sample(StandardNormal);
        let x1 = 0.4 * x2 + rng.sample::<f64, _>(StandardNormal);
        let x0 = 0.5 * x1 + rng.sample::<f64, _>(StandardNormal);
        x[(i, 0)] = x0;
        x[(i, 1)] = x1;
        x[(i, 2)] = x2;
    }
    let hp = Hyperparameters::defaults(q, n).unwrap();
    let data = AugmentedData::new(x.clone()).unwrap();
    let dags = all_response_sink_dags(q);
    let logs: Vec<f64> = dags
        .iter()
        .map(|d| {
            (0..q).map(|j| log_marginal_node(j, d.parents(j), &data, &hp).unwrap()).sum::<f64>() + log_prior_dag(d, &hp)
        })
        .collect();
    let mx = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|l| (l - mx).exp()).sum();
    let exact: Vec<f64> = logs.iter().map(|l| (l - mx).exp() / z).collect();

    let mut cfg = ChainConfig::new(200_000, 203);
    cfg.store_cholesky = false;
    cfg.moves.cholesky = false;
    let out = run_chain_observed(x, &hp, &cfg).unwrap();
    let mut counts = vec![0usize; dags.len()];
    for d in out.dags() {
        counts[dags.iter().position(|e| *e == d).unwrap()] += 1;
    }
    let tv = 0.5
        * counts
            .iter()
            .zip(&exact)
            .map(|(&c, &p)| (c as f64 / out.len() as f64 - p).abs())
            .sum::<f64>();
    outcome(
        tv < 0.02 && dags.len() == 12,
        format!("{} DAGs, total variation {tv:.4} over {} samples (tol 0.02)", dags.len(), out.len()),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = chain_rng(303, 0);
    let draws = 1_000_000;
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    let mut pass = true;
    for _ in 0..10 {
        let q = rng.random_range(3..=6);
        let dag = random_dag(q, 0.6, &mut rng).unwrap();
        let chol = random_coefficients(&dag, (0.3, 1.5), &mut rng);
        let sigma = sigma_from_cholesky(&dag, &chol).unwrap();
        let s = rng.random_range(1..q);
        let x_tilde = rng.random_range(-2.0..2.0);
        let theta0 = rng.random_range(-1.0..1.0);
        let p = post_intervention(&sigma, s, dag.parents(s)).unwrap();
        let order = dag.topological_order();
        let mut x = vec![0.0; q];
        let (mut s1, mut s2, mut hits) = (0.0, 0.0, 0usize);
        let mut resp = Vec::with_capacity(draws);
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
            s1 += x[0];
            s2 += x[0] * x[0];
            hits += (x[0] >= theta0) as usize;
            resp.push(x[0]);
        }
        let nf = draws as f64;
        let mean = s1 / nf;
        let var = s2 / nf - mean * mean;
        let m4 = resp.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
        let z_mean = (mean - p.gamma_s * x_tilde).abs() / (var / nf).sqrt();
        let z_var = (var - p.tau_sq).abs() / ((m4 - var * var) / nf).sqrt();
        let dp = (hits as f64 / nf - causal_effect(&p, theta0, x_tilde)).abs();
        worst = (worst.0.max(z_mean), worst.1.max(z_var), worst.2.max(dp));
        pass &= z_mean <= 3.0 && z_var <= 3.0 && dp <= 0.005;
    }
    outcome(
        pass,
        format!(
            "worst |z| mean {:.2}, variance {:.2} (tol 3 s.e.); worst probability gap {:.4} (tol 0.005)",
            worst.0, worst.1, worst.2
        ),
    )
}

struct BankCell {
    auc: Vec<f64>,
    pstar: Vec<f64>,
    mae: Vec<f64>,
}

fn criteria_4_5_6() -> Outcome {
    let q = 10;
    let reps = 10;
    let sizes = [10usize, 20, 40, 100, 200, 500];
    let mut bank = Vec::new();
    for &n in &sizes {
        let t0 = Instant::now();
        let sim = SimConfig::new(q, n, reps, 404);
        let mut cell = BankCell { auc: vec![], pstar: vec![], mae: vec![] };
        for r in 0..reps {
            let (data, truth) = simulate_replicate(&sim, r).unwrap();
            let hp = Hyperparameters::defaults(q, n).unwrap();
            let mut cfg = ChainConfig::new(10_000, 405);
            cfg.stream = r as u64;
            let chain = run_chain(&data, &hp, &cfg).unwrap();
            let summary = edge_probs(&chain).unwrap();
            cell.auc.push(structure_metrics(&truth.dag, &summary, &[], ScoringMode::Directed).unwrap().auc);
            cell.pstar.push(predictor_recovery(&truth.dag, &summary, 0.5).unwrap());
            let tables = effects_at_observed(&chain, &data, 0.95).unwrap();
            cell.mae.extend(effect_errors(&truth, &tables).unwrap());
        }
        eprintln!(
            "  n = {n:>3}: mean AUC {:.3}, median p* {:.3}, median MAE {:.4} ({:.1}s)",
            cell.auc.iter().sum::<f64>() / reps as f64,
            median(&cell.pstar),
            median(&cell.mae),
            t0.elapsed().as_secs_f64()
        );
        bank.push(cell);
    }
    let at = |n: usize| &bank[sizes.iter().position(|&m| m == n).unwrap()];
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;

    let auc100 = mean(&at(100).auc);
    let auc500 = mean(&at(500).auc);
    let c4 = auc100 >= 0.85 && auc500 >= 0.90;

    let med: Vec<f64> = sizes.iter().map(|&n| median(&at(n).mae)).collect();
    let m = |n: usize| med[sizes.iter().position(|&s| s == n).unwrap()];
    let mono_large = m(100) >= m(200) && m(200) >= m(500);
    let mono_small = m(10) >= m(20) && m(20) >= m(40);
    let c5 = m(500) <= 0.05 && mono_large && mono_small;

    let p100 = median(&at(100).pstar);
    let p500 = median(&at(500).pstar);
    let c6 = p100 >= 0.8 && p500 >= 0.95;

    let tag = |b: bool| if b { "PASS" } else { "FAIL" };
    let detail = format!(
        "criterion    4 [{}] scaled AUC study: mean AUC {auc100:.3} at n=100 (>= 0.85), {auc500:.3} at n=500 (>= 0.90)\n\
         criterion    5 [{}] scaled effect study: median MAE {:.4} at n=500 (<= 0.05); medians n=10,20,40: {:.4}, {:.4}, {:.4}; n=100,200,500: {:.4}, {:.4}, {:.4} (nonincreasing)\n\
         criterion    6 [{}] scaled predictor study: median p* {p100:.3} at n=100 (>= 0.8), {p500:.3} at n=500 (>= 0.95)",
        tag(c4),
        tag(c5),
        m(500),
        m(10),
        m(20),
        m(40),
        m(100),
        m(200),
        m(500),
        tag(c6),
    );
    outcome(c4 && c5 && c6, detail)
}

fn criterion_7() -> Outcome {
    let n = 100_000;
    let std_normal = Normal::new(0.0, 1.0).unwrap();
    // (mean, variance, lower, upper)
    let configs = [
        (0.0, 1.0, 0.0, f64::INFINITY),
        (0.5, 2.0, -1.0, 2.0),
        (0.0, 1.0, 6.0, f64::INFINITY),
        (1.0, 0.25, f64::NEG_INFINITY, -2.5),
        (3.0, 4.0, 0.5, 0.52),
    ];
    let mut rng = chain_rng(707, 0);
    let mut ratios = Vec::new();
    for &(mu, var, lo, hi) in &configs {
        let tn = TruncatedNormal::new(mu, var, lo, hi).unwrap();
        let mut xs: Vec<f64> = (0..n).map(|_| tn.sample(&mut rng)).collect();
        if xs.iter().any(|&x| !(x > lo && x <= hi)) {
            return outcome(false, format!("draw outside ({lo}, {hi}]"));
        }
        let sd = var.sqrt();
        let (a, b) = ((lo - mu) / sd, (hi - mu) / sd);
        // Work on whichever tail keeps the normalizer well conditioned.
        let upper = a > 0.0;
        let cdf = |x: f64| {
            let z = (x - mu) / sd;
            if upper {
                (std_normal.sf(a) - std_normal.sf(z)) / (std_normal.sf(a) - std_normal.sf(b))
            } else {
                (std_normal.cdf(z) - std_normal.cdf(a)) / (std_normal.cdf(b) - std_normal.cdf(a))
            }
        };
        let d = ks_distance(&mut xs, cdf);
        ratios.push(d / ks_critical_01(n));
    }

    // Inverse gamma: shape 5, rate 3, mean 0.75, variance 0.1875.
    let ig: Vec<f64> = (0..n).map(|_| sample_inverse_gamma(5.0, 3.0, &mut rng).unwrap()).collect();
    let (m, se) = mean_and_se(&ig);
    let z_ig_mean = (m - 0.75).abs() / se;
    let sq: Vec<f64> = ig.iter().map(|v| (v - 0.75).powi(2)).collect();
    let (v, se_v) = mean_and_se(&sq);
    let z_ig_var = (v - 0.1875).abs() / se_v;

    // Multivariate normal: mean and covariance entries.
    let mean = DVector::from_vec(vec![1.0, -2.0, 0.5]);
    let cov = DMatrix::from_row_slice(3, 3, &[2.0, 0.6, -0.3, 0.6, 1.0, 0.2, -0.3, 0.2, 0.5]);
    let draws: Vec<DVector<f64>> = (0..n).map(|_| sample_mvn(&mean, &cov, &mut rng).unwrap()).collect();
    let mut z_mvn = 0.0f64;
    for i in 0..3 {
        let xi: Vec<f64> = draws.iter().map(|d| d[i]).collect();
        let (m, se) = mean_and_se(&xi);
        z_mvn = z_mvn.max((m - mean[i]).abs() / se);
        for k in i..3 {
            let prod: Vec<f64> = draws.iter().map(|d| (d[i] - mean[i]) * (d[k] - mean[k])).collect();
            let (c, se) = mean_and_se(&prod);
            z_mvn = z_mvn.max((c - cov[(i, k)]).abs() / se);
        }
    }
    let worst_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let ratios: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    outcome(
        worst_ratio < 1.0 && z_ig_mean <= 3.0 && z_ig_var <= 3.0 && z_mvn <= 3.0,
        format!(
            "KS D / D_crit(0.01) per interval [{}]; inverse gamma |z| {z_ig_mean:.2} (mean), {z_ig_var:.2} (variance); MVN worst |z| {z_mvn:.2}",
            ratios.join(", ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let sim = SimConfig::new(10, 200, 1, 808);
    let (data, _) = simulate_replicate(&sim, 0).unwrap();
    let hp = Hyperparameters::defaults(10, 200).unwrap();
    let cfg = ChainConfig::new(10_000, 809);
    let mut sampler = Sampler::new(&data, &hp, &cfg).unwrap();
    let mut violations = 0usize;
    for _ in 0..cfg.iterations {
        sampler.step().unwrap();
        let st = sampler.state();
        let dag_ok = st.dag.as_digraph().is_acyclic() && st.dag.children(RESPONSE).unwrap().is_empty();
        let thresh_ok = data.y().iter().zip(&st.x1).all(|(&y, &x)| y == (x > st.theta0));
        if !dag_ok || !thresh_ok || st.chol.sigma2()[RESPONSE] != 1.0 {
            violations += 1;
        }
    }
    let a = run_chain(&data, &hp, &cfg).unwrap();
    let b = run_chain(&data, &hp, &cfg).unwrap();
    let stored_ok = a.dags().all(|d| d.children(RESPONSE).unwrap().is_empty());
    let identical = a == b;
    let rate = a.dag_moves.rate();
    outcome(
        violations == 0 && stored_ok && identical && rate > 0.0 && rate < 1.0,
        format!(
            "{violations} invariant violations in {} iterations; same-seed outputs identical: {identical}; DAG acceptance rate {rate:.3}",
            cfg.iterations
        ),
    )
}

fn criterion_9() -> Outcome {
    let q = 5;
    let hp = Hyperparameters { a: q as f64 + 1.0, g: 1.0, pi: 3.0 / (2.0 * q as f64 - 2.0), sigma0_sq: 0.25 };
    let mut cfg = ChainConfig::new(100_000, 909);
    cfg.burn_in = Some(1_000);
    cfg.store_cholesky = false;
    cfg.moves = Moves { dag: true, cholesky: false, latent: false, theta0: false };
    let out = run_chain_observed(DMatrix::zeros(0, q), &hp, &cfg).unwrap();
    let summary = edge_probs(&out).unwrap();

    // Exact prior inclusion of each skeleton pair under p(D) ∝ π^|A| (1 − π)^(M − |A|).
    let dags = all_response_sink_dags(q);
    let weights: Vec<f64> = dags.iter().map(|d| log_prior_dag(d, &hp).exp()).collect();
    let z: f64 = weights.iter().sum();
    let mut worst_resp = 0.0f64;
    let mut worst_exact = 0.0f64;
    let mut cov_pairs = Vec::new();
    for u in 1..q {
        for v in 0..u {
            let freq = summary.prob(u, v) + summary.prob(v, u);
            let exact: f64 = dags
                .iter()
                .zip(&weights)
                .filter(|(d, _)| d.has_edge(u, v) || d.has_edge(v, u))
                .map(|(_, w)| w)
                .sum::<f64>()
                / z;
            worst_exact = worst_exact.max((freq - exact).abs());
            if v == RESPONSE {
                worst_resp = worst_resp.max((freq - hp.pi).abs());
            } else {
                cov_pairs.push((freq, exact));
            }
        }
    }
    let (cf, ce): (Vec<f64>, Vec<f64>) = cov_pairs.into_iter().unzip();
    outcome(
        worst_resp <= 0.02 && worst_exact <= 0.02,
        format!(
            "edges into the response: worst |freq - pi| {worst_resp:.4} (pi = {:.3}, tol 0.02); all pairs vs exact prior marginals: worst gap {worst_exact:.4} (tol 0.02); covariate pairs mean freq {:.3}, exact {:.3}",
            hp.pi,
            cf.iter().sum::<f64>() / cf.len() as f64,
            ce.iter().sum::<f64>() / ce.len() as f64
        ),
    )
}

fn criterion_10() -> Outcome {
    // Identifiable confounded model: 3 → 2 ← 4, 2 → 1, and every covariate
    // a parent of the response. The star DAG ignores the confounding of 1
    // by 2 and of 2 by 3 and 4.
    let q = 5;
    let dag = Dag::from_edges(q, [(3, 2), (4, 2), (2, 1), (1, 0), (2, 0), (3, 0), (4, 0)]).unwrap();
    let n = 500;
    let hp = Hyperparameters::defaults(q, n).unwrap();
    let mut wins = 0;
    let mut rows = Vec::new();
    for r in 0..10u64 {
        let mut model_rng = chain_rng(1010, 2 * r);
        let chol = random_coefficients(&dag, (1.0, 2.0), &mut model_rng);
        let mut data_rng = chain_rng(1010, 2 * r + 1);
        let (data, truth) = sample_dataset(&dag, &chol, n, 0.0, &mut data_rng).unwrap();
        let mut cfg = ChainConfig::new(10_000, 1011);
        cfg.stream = r;
        let chain = run_chain(&data, &hp, &cfg).unwrap();
        let full = median(&effect_errors(&truth, &effects_at_observed(&chain, &data, 0.95).unwrap()).unwrap());
        let naive = median(&effect_errors(&truth, &naive_baseline(&data, &hp, &cfg, 0.95).unwrap()).unwrap());
        if full < naive {
            wins += 1;
        }
        rows.push(format!("{full:.3}/{naive:.3}"));
    }
    outcome(
        wins >= 8,
        format!("full < naive median MAE in {wins}/10 replicates (need >= 8); full/naive: {}", rows.join(" ")),
    )
}
