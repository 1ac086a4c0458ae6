//! One-factor linear-Gaussian model on logit rates, fitted by EM.
//!
//! y_ij = mu_j + lambda_j * theta_i + e_ij,  theta_i ~ N(0, 1),  e_ij ~ N(0, sigma2_j)

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::evidence::TrainingCorpus;
use super::lexicon::EvidenceLexicon;
use super::model::{ItemParams, TraitParams};
use super::TraitError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmOptions {
    /// Stop once the per-user log-likelihood gains less than this in one iteration.
    pub tol: f64,
    pub max_iter: usize,
    pub sigma2_floor: f64,
}

impl Default for EmOptions {
    fn default() -> Self {
        EmOptions { tol: 1e-8, max_iter: 500, sigma2_floor: 1e-8 }
    }
}

/// Observations as a dense row-major users x items matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix");
            data.extend_from_slice(r);
        }
        Matrix { rows: rows.len(), cols, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.rows).map(move |i| self.data[i * self.cols + j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorParams {
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub sigma2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorFit {
    pub params: FactorParams,
    /// Per-user marginal log-likelihood before the first and after every iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Marginal log-likelihood of the logit observations, averaged over users.
pub fn mean_loglik(y: &Matrix, p: &FactorParams) -> f64 {
    let mut precision = 1.0;
    let mut log_det_psi = 0.0;
    for j in 0..y.cols {
        precision += p.lambda[j] * p.lambda[j] / p.sigma2[j];
        log_det_psi += libm::log(p.sigma2[j]);
    }
    let log_det = log_det_psi + libm::log(precision);
    let mut quad_sum = 0.0;
    for i in 0..y.rows {
        let row = y.row(i);
        let mut q = 0.0;
        let mut s = 0.0;
        for j in 0..y.cols {
            let r = row[j] - p.mu[j];
            q += r * r / p.sigma2[j];
            s += p.lambda[j] * r / p.sigma2[j];
        }
        quad_sum += q - s * s / precision;
    }
    -0.5 * (y.cols as f64 * libm::log(2.0 * PI) + log_det) - 0.5 * quad_sum / y.rows as f64
}

fn column_moments(y: &Matrix) -> (Vec<f64>, Vec<f64>) {
    let n = y.rows as f64;
    let mean: Vec<f64> = (0..y.cols).map(|j| y.column(j).sum::<f64>() / n).collect();
    let var = (0..y.cols).map(|j| y.column(j).map(|v| (v - mean[j]) * (v - mean[j])).sum::<f64>() / n).collect();
    (mean, var)
}

/// Means, leading principal component scaled to its eigenvalue, residual variances.
pub fn pca_init(y: &Matrix, floor: f64) -> FactorParams {
    let (mu, var) = column_moments(y);
    let j = y.cols;
    let n = y.rows as f64;
    let mut cov = vec![0.0; j * j];
    for i in 0..y.rows {
        let row = y.row(i);
        for a in 0..j {
            let ra = row[a] - mu[a];
            for b in a..j {
                cov[a * j + b] += ra * (row[b] - mu[b]);
            }
        }
    }
    for a in 0..j {
        for b in a..j {
            cov[a * j + b] /= n;
            cov[b * j + a] = cov[a * j + b];
        }
    }
    let mut v = vec![1.0 / libm::sqrt(j as f64); j];
    let mut eig = 0.0;
    for _ in 0..500 {
        let mut w = vec![0.0; j];
        for a in 0..j {
            w[a] = (0..j).map(|b| cov[a * j + b] * v[b]).sum();
        }
        let norm = libm::sqrt(w.iter().map(|x| x * x).sum::<f64>());
        if norm == 0.0 {
            break;
        }
        let delta: f64 = w.iter().zip(&v).map(|(a, b)| (a / norm - b).abs()).sum();
        for a in 0..j {
            v[a] = w[a] / norm;
        }
        eig = norm;
        if delta < 1e-13 {
            break;
        }
    }
    let scale = libm::sqrt(eig);
    let lambda: Vec<f64> = v.iter().map(|x| x * scale).collect();
    let sigma2 = (0..j).map(|a| (var[a] - lambda[a] * lambda[a]).max(0.05 * var[a]).max(floor)).collect();
    FactorParams { mu, lambda, sigma2 }
}

/// Runs EM from `init`. Assumes at least two users and no constant columns.
pub fn fit_factor(y: &Matrix, init: FactorParams, opts: &EmOptions) -> FactorFit {
    let (n, j) = (y.rows, y.cols);
    let nf = n as f64;
    let mut p = init;
    let mut trace = vec![mean_loglik(y, &p)];
    let mut m = vec![0.0; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        // E-step: posterior mean per user, shared posterior variance
        let precision = 1.0 + (0..j).map(|k| p.lambda[k] * p.lambda[k] / p.sigma2[k]).sum::<f64>();
        let v = 1.0 / precision;
        for (i, mi) in m.iter_mut().enumerate() {
            let row = y.row(i);
            *mi = (0..j).map(|k| p.lambda[k] * (row[k] - p.mu[k]) / p.sigma2[k]).sum::<f64>() * v;
        }
        let sm: f64 = m.iter().sum();
        let smm: f64 = m.iter().map(|x| x * x).sum::<f64>() + nf * v;
        let det = nf * smm - sm * sm;
        // Expanded M-step: theta is given a free mean and variance, each item is a
        // least-squares fit of y on (1, theta), then theta is mapped back to N(0, 1).
        let shift = sm / nf;
        let scale = libm::sqrt((smm / nf - shift * shift).max(0.0));
        for k in 0..j {
            let mut sy = 0.0;
            let mut sym = 0.0;
            for (i, mi) in m.iter().enumerate() {
                let yk = y.data[i * j + k];
                sy += yk;
                sym += yk * mi;
            }
            let mu = (smm * sy - sm * sym) / det;
            let lambda = (nf * sym - sm * sy) / det;
            let mut s2 = 0.0;
            for (i, mi) in m.iter().enumerate() {
                let r = y.data[i * j + k] - mu;
                s2 += r * r - 2.0 * lambda * r * mi;
            }
            s2 += lambda * lambda * smm;
            let sigma2 = (s2 / nf).max(opts.sigma2_floor);
            p.mu[k] = mu + lambda * shift;
            p.lambda[k] = lambda * scale;
            p.sigma2[k] = sigma2;
        }
        iterations += 1;
        let ll = mean_loglik(y, &p);
        let gain = ll - trace[trace.len() - 1];
        trace.push(ll);
        if gain < opts.tol {
            converged = true;
            break;
        }
    }
    if p.lambda.iter().sum::<f64>() < 0.0 {
        for l in p.lambda.iter_mut() {
            *l = -*l;
        }
    }
    FactorFit { params: p, trace, iterations, converged }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub trait_id: String,
    /// Evidence ids left out because their logit rate never varied.
    pub dropped: Vec<String>,
    /// False with fewer than three informative items, where loadings are not identified.
    pub identifiable: bool,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

/// Fits the items of one trait. Constant columns are dropped and reported.
pub fn fit_trait(
    corpus: &TrainingCorpus,
    lexicon: &EvidenceLexicon,
    trait_id: &str,
    opts: &EmOptions,
) -> Result<(TraitParams, FitReport), TraitError> {
    if corpus.users.len() < 2 {
        return Err(TraitError::TooFewUsers(corpus.users.len()));
    }
    let items = lexicon.items_for(trait_id);
    let logits: Vec<Vec<f64>> = corpus.users.iter().map(|u| u.logits()).collect();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for &it in &items {
        let first = logits[0][it];
        if logits.iter().all(|row| (row[it] - first).abs() < 1e-12) {
            dropped.push(lexicon.entries()[it].evidence_id.clone());
        } else {
            kept.push(it);
        }
    }
    let mut report =
        FitReport { trait_id: trait_id.into(), dropped, identifiable: kept.len() >= 3, iterations: 0, converged: true, trace: Vec::new() };
    if kept.is_empty() {
        return Ok((TraitParams { trait_id: trait_id.into(), items: Vec::new() }, report));
    }
    let y = Matrix::from_rows(&logits.iter().map(|row| kept.iter().map(|&k| row[k]).collect()).collect::<Vec<_>>());
    let params = if kept.len() == 1 {
        // a single item carries no covariance: sample moments, zero loading
        let (mu, var) = column_moments(&y);
        FactorParams { mu, lambda: vec![0.0], sigma2: var }
    } else {
        let fit = fit_factor(&y, pca_init(&y, opts.sigma2_floor), opts);
        report.iterations = fit.iterations;
        report.converged = fit.converged;
        report.trace = fit.trace;
        fit.params
    };
    let items = kept
        .iter()
        .enumerate()
        .map(|(k, &item)| ItemParams { item, mu: params.mu[k], lambda: params.lambda[k], sigma2: params.sigma2[k] })
        .collect();
    Ok((TraitParams { trait_id: trait_id.into(), items }, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::loglik_gradient;
    use crate::personality::evidence::EvidenceVector;
    use crate::personality::synth::{correlation, GeneratorSpec, SyntheticGenerator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(seed: u64, users: usize, items: usize) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> =
            (0..users).map(|_| (0..items).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        Matrix::from_rows(&rows)
    }

    /// Log density of a zero-mean normal with dense covariance, by Cholesky.
    fn mvn_logpdf(x: &[f64], cov: &[f64], n: usize) -> f64 {
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = cov[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
                l[i * n + j] = if i == j { libm::sqrt(s) } else { s / l[j * n + j] };
            }
        }
        let mut z = vec![0.0; n];
        for i in 0..n {
            z[i] = (x[i] - (0..i).map(|k| l[i * n + k] * z[k]).sum::<f64>()) / l[i * n + i];
        }
        let log_det: f64 = (0..n).map(|i| 2.0 * libm::log(l[i * n + i])).sum();
        -0.5 * (n as f64 * libm::log(2.0 * PI) + log_det + z.iter().map(|v| v * v).sum::<f64>())
    }

    #[test]
    fn loglik_matches_dense_density() {
        let y = noise(1, 7, 3);
        let p = FactorParams { mu: vec![0.1, -0.3, 0.2], lambda: vec![0.8, -0.4, 1.1], sigma2: vec![0.5, 1.2, 0.3] };
        let mut cov = vec![0.0; 9];
        for a in 0..3 {
            for b in 0..3 {
                cov[a * 3 + b] = p.lambda[a] * p.lambda[b] + if a == b { p.sigma2[a] } else { 0.0 };
            }
        }
        let direct: f64 = (0..7)
            .map(|i| {
                let r: Vec<f64> = y.row(i).iter().zip(&p.mu).map(|(v, m)| v - m).collect();
                mvn_logpdf(&r, &cov, 3)
            })
            .sum::<f64>()
            / 7.0;
        assert!((mean_loglik(&y, &p) - direct).abs() < 1e-12);
    }

    fn strong_fit(seed: u64) -> (SyntheticGenerator, TrainingCorpus, TraitParams, FitReport) {
        let mut spec = GeneratorSpec::strong(&["trust"], 50);
        spec.lambda = (0.1, 1.0);
        let g = SyntheticGenerator::random(&spec, seed).unwrap();
        let corpus = g.generate(500, 2000, seed + 1, false).corpus;
        let (params, report) = fit_trait(&corpus, &g.lexicon, "trust", &EmOptions::default()).unwrap();
        (g, corpus, params, report)
    }

    #[test]
    fn recovers_generating_loadings() {
        let (g, _, params, report) = strong_fit(4);
        assert!(report.converged && report.identifiable && report.dropped.is_empty());
        assert!(report.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        let truth = &g.model.trait_params("trust").unwrap().items;
        let a: Vec<f64> = truth.iter().map(|p| p.lambda).collect();
        let b: Vec<f64> = params.items.iter().map(|p| p.lambda).collect();
        assert!(correlation(&a, &b).abs() >= 0.95);
        assert!(b.iter().sum::<f64>() >= 0.0);
    }

    #[test]
    fn scores_track_true_trait() {
        let (_, corpus, params, _) = strong_fit(8);
        let ti = crate::personality::trait_index("trust").unwrap();
        let truth: Vec<f64> = corpus.theta.as_ref().unwrap().iter().map(|t| t[ti]).collect();
        let est: Vec<f64> = corpus.users.iter().map(|u| crate::personality::infer_theta(&params, u).theta).collect();
        assert!(correlation(&truth, &est) >= 0.9);
    }

    #[test]
    fn gradient_vanishes_at_convergence() {
        let (_, corpus, params, _) = strong_fit(12);
        let y = Matrix::from_rows(&corpus.users.iter().map(|u| u.logits()).collect::<Vec<_>>());
        let p = FactorParams {
            mu: params.items.iter().map(|p| p.mu).collect(),
            lambda: params.items.iter().map(|p| p.lambda).collect(),
            sigma2: params.items.iter().map(|p| p.sigma2).collect(),
        };
        assert!(loglik_gradient(&y, &p, 1e-5).iter().all(|g| g.abs() < 1e-4));
    }

    #[test]
    fn noise_gives_no_significant_factor() {
        // on pure noise the likelihood is flat toward a one-item solution, so the
        // check is the likelihood ratio against the no-factor model
        for seed in 0..10 {
            let y = noise(seed, 500, 6);
            let fit = fit_factor(&y, pca_init(&y, 1e-8), &EmOptions::default());
            let (mu, var) = column_moments(&y);
            let null = FactorParams { mu, lambda: vec![0.0; 6], sigma2: var };
            let lr = 2.0 * 500.0 * (mean_loglik(&y, &fit.params) - mean_loglik(&y, &null));
            // 0.999 quantile of chi-square with 6 degrees of freedom
            assert!((-1e-6..22.46).contains(&lr), "seed {seed}: {lr}");
            assert!(fit.trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        }
    }

    fn lexicon(n: usize) -> EvidenceLexicon {
        EvidenceLexicon::new(
            (0..n)
                .map(|j| crate::personality::EvidenceEntry {
                    evidence_id: alloc::format!("e{j}"),
                    trait_id: "trust".into(),
                    pattern_id: alloc::format!("p{j}"),
                    cue: alloc::format!("w{j}"),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_item_uses_sample_moments() {
        let users: Vec<EvidenceVector> = [3u32, 7, 1, 0].iter().map(|&c| EvidenceVector::from_counts(vec![c], 100)).collect();
        let ys: Vec<f64> = users.iter().map(|u| u.logits()[0]).collect();
        let corpus = TrainingCorpus { users, theta: None };
        let (params, report) = fit_trait(&corpus, &lexicon(1), "trust", &EmOptions::default()).unwrap();
        assert!(!report.identifiable);
        let mean = ys.iter().sum::<f64>() / 4.0;
        let var = ys.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0;
        let p = params.items[0];
        assert_eq!(p.lambda, 0.0);
        assert!((p.mu - mean).abs() < 1e-12 && (p.sigma2 - var).abs() < 1e-12);
    }

    #[test]
    fn constant_columns_are_dropped() {
        let users: Vec<EvidenceVector> =
            (0..20u32).map(|i| EvidenceVector::from_counts(vec![i % 5, 2, (i * 7) % 4, i % 3], 200)).collect();
        let corpus = TrainingCorpus { users, theta: None };
        let (params, report) = fit_trait(&corpus, &lexicon(4), "trust", &EmOptions::default()).unwrap();
        assert_eq!(report.dropped, vec![String::from("e1")]);
        assert_eq!(params.items.iter().map(|p| p.item).collect::<Vec<_>>(), vec![0, 2, 3]);
        assert!(params.items.iter().all(|p| p.sigma2 > 0.0 && p.lambda.is_finite()));
    }

    #[test]
    fn needs_two_users() {
        let corpus = TrainingCorpus { users: vec![EvidenceVector::from_counts(vec![1], 10)], theta: None };
        assert_eq!(fit_trait(&corpus, &lexicon(1), "trust", &EmOptions::default()), Err(TraitError::TooFewUsers(1)));
    }
}
