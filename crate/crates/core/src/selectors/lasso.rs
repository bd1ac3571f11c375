//! One-vs-rest Lasso ranking by cyclic coordinate descent with
//! soft-thresholding.

use super::SelectionMask;
use crate::dataset::{FeatureMatrix, LabelVec, Standardizer};
use crate::error::{Error, Result};

pub const LASSO_TOL: f64 = 1e-8;
pub const LASSO_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub coefficients: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Minimizes `½‖t − Xβ‖² + λ‖β‖₁` (no intercept) over the n×d row-major `x`.
/// Works on the Gram matrix; stops when a sweep moves no coefficient by more
/// than [`LASSO_TOL`] or after [`LASSO_MAX_SWEEPS`] sweeps.
pub fn lasso_coordinate_descent(x: &[f64], n: usize, d: usize, target: &[f64], lambda: f64) -> Result<LassoFit> {
    if x.len() != n * d || target.len() != n {
        return Err(Error::DimensionMismatch { expected: n * d, got: x.len() });
    }
    if !(lambda >= 0.0) {
        return Err(Error::InvalidConfig(format!("lasso lambda must be >= 0, got {lambda}")));
    }
    let mut gram = vec![0.0; d * d];
    let mut xt = vec![0.0; d];
    for (row, &t) in x.chunks(d.max(1)).zip(target) {
        for a in 0..d {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            xt[a] += ra * t;
            for b in 0..=a {
                gram[a * d + b] += ra * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            gram[b * d + a] = gram[a * d + b];
        }
    }
    Ok(coordinate_descent_gram(&gram, &xt, d, lambda))
}

fn coordinate_descent_gram(gram: &[f64], xt: &[f64], d: usize, lambda: f64) -> LassoFit {
    let mut beta = vec![0.0; d];
    // q = G β
    let mut q = vec![0.0; d];
    for sweep in 1..=LASSO_MAX_SWEEPS {
        let mut max_change = 0.0f64;
        for j in 0..d {
            let gjj = gram[j * d + j];
            if gjj <= 0.0 {
                continue;
            }
            let rho = xt[j] - q[j] + gjj * beta[j];
            let new = soft_threshold(rho, lambda) / gjj;
            let delta = new - beta[j];
            if delta != 0.0 {
                beta[j] = new;
                for (qk, g) in q.iter_mut().zip(&gram[j * d..(j + 1) * d]) {
                    *qk += delta * g;
                }
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < LASSO_TOL {
            return LassoFit { coefficients: beta, sweeps: sweep, converged: true };
        }
    }
    LassoFit { coefficients: beta, sweeps: LASSO_MAX_SWEEPS, converged: false }
}

/// Per-feature importance: the largest |coefficient| over the one-vs-rest
/// problems, plus the absolute label correlation used to fill in when too
/// few coefficients survive.
pub(crate) struct LassoScores {
    score: Vec<f64>,
    correlation: Vec<f64>,
}

/// Columns are z-scored and each ±1 target centered; the penalty is scaled by
/// n so `lambda` acts on the per-sample objective.
pub(crate) fn lasso_scores(features: &FeatureMatrix, labels: &LabelVec, lambda: f64) -> Result<LassoScores> {
    let (n, d) = (features.n_samples(), features.n_features());
    if labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: labels.len() });
    }
    let z = Standardizer::fit(features).transform(features)?;
    let x = z.values();

    let mut gram = vec![0.0; d * d];
    for row in z.rows() {
        for a in 0..d {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            for b in 0..=a {
                gram[a * d + b] += ra * row[b];
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            gram[b * d + a] = gram[a * d + b];
        }
    }

    let mut score = vec![0.0f64; d];
    for class in 1..=labels.n_classes() as u32 {
        let raw: Vec<f64> = labels.labels().iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
        let mean = raw.iter().sum::<f64>() / n as f64;
        let mut xt = vec![0.0; d];
        for (row, t) in x.chunks(d).zip(&raw) {
            for (acc, v) in xt.iter_mut().zip(row) {
                *acc += v * (t - mean);
            }
        }
        let fit = coordinate_descent_gram(&gram, &xt, d, lambda * n as f64);
        for (s, b) in score.iter_mut().zip(&fit.coefficients) {
            *s = s.max(b.abs());
        }
    }

    let numeric: Vec<f64> = labels.labels().iter().map(|&l| f64::from(l)).collect();
    let lm = numeric.iter().sum::<f64>() / n as f64;
    let lsd = (numeric.iter().map(|t| (t - lm) * (t - lm)).sum::<f64>() / n as f64).sqrt();
    let mut correlation = vec![0.0; d];
    for (row, t) in z.rows().zip(&numeric) {
        for (c, v) in correlation.iter_mut().zip(row) {
            *c += v * (t - lm);
        }
    }
    correlation.iter_mut().for_each(|c| *c = (*c / (n as f64 * lsd)).abs());
    Ok(LassoScores { score, correlation })
}

pub(crate) fn mask_from_scores(scores: &LassoScores, nf: usize) -> Result<SelectionMask> {
    let d = scores.score.len();
    if nf == 0 || nf > d {
        return Err(Error::InvalidConfig(format!("nf must lie in 1..={d}, got {nf}")));
    }
    let mut active: Vec<usize> = (0..d).filter(|&j| scores.score[j] > 0.0).collect();
    active.sort_by(|&a, &b| scores.score[b].total_cmp(&scores.score[a]).then(a.cmp(&b)));
    active.truncate(nf);
    if active.len() < nf {
        let mut rest: Vec<usize> = (0..d).filter(|&j| scores.score[j] == 0.0).collect();
        rest.sort_by(|&a, &b| scores.correlation[b].total_cmp(&scores.correlation[a]).then(a.cmp(&b)));
        active.extend(rest.into_iter().take(nf - active.len()));
    }
    SelectionMask::new(active, d)
}

/// Top-`nf` features by one-vs-rest Lasso coefficient magnitude.
pub fn lasso_select(features: &FeatureMatrix, labels: &LabelVec, lambda: f64, nf: usize) -> Result<SelectionMask> {
    mask_from_scores(&lasso_scores(features, labels, lambda)?, nf)
}
