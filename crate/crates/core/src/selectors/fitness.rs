//! Wrapper fitness: holdout mean squared error of a ridge regression from the
//! selected features to the numeric class label, plus `w · nf`.

use serde::{Deserialize, Serialize};

use super::decode_mask;
use super::swarm::Objective;
use crate::dataset::{stratified_split, FeatureMatrix, LabelVec, Standardizer};
use crate::error::{Error, Result};
use crate::linalg::cholesky_solve;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitnessSpec {
    pub nf: usize,
    pub w: f64,
    pub holdout_fraction: f64,
    pub ridge_lambda: f64,
    pub seed: u64,
}

impl Default for FitnessSpec {
    fn default() -> Self {
        FitnessSpec { nf: 64, w: 0.01, holdout_fraction: 0.3, ridge_lambda: 1e-6, seed: 42 }
    }
}

impl FitnessSpec {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if n_features < 3 || self.nf < 2 || self.nf > n_features - 1 {
            return Err(Error::InvalidConfig(format!(
                "nf must lie in 2..={}, got {}",
                n_features.saturating_sub(1),
                self.nf
            )));
        }
        if !(self.w >= 0.0) || !(self.ridge_lambda >= 0.0) {
            return Err(Error::InvalidConfig("w and ridge_lambda must be >= 0".into()));
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return Err(Error::InvalidConfig("holdout_fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Everything the fitness needs that does not depend on the candidate:
/// the seeded split, training-set z-scoring, and the training Gram matrix of
/// all columns. A candidate only slices the Gram matrix and solves.
#[derive(Debug, Clone)]
pub struct FitnessContext {
    spec: FitnessSpec,
    d: usize,
    gram: Vec<f64>,
    xt: Vec<f64>,
    train_mean: f64,
    holdout: Vec<f64>,
    holdout_target: Vec<f64>,
}

impl FitnessContext {
    pub fn new(features: &FeatureMatrix, labels: &LabelVec, spec: &FitnessSpec) -> Result<Self> {
        let d = features.n_features();
        spec.validate(d)?;
        if labels.len() != features.n_samples() {
            return Err(Error::DimensionMismatch { expected: features.n_samples(), got: labels.len() });
        }
        let (train, test) = stratified_split(labels, spec.holdout_fraction, spec.seed)?;
        if let Some(c) = labels.select(&train).counts().iter().position(|&n| n == 0) {
            return Err(Error::DegenerateSplit(format!("class {} absent from the training split", c + 1)));
        }
        let scaler = Standardizer::fit_rows(features, train.iter().copied());
        let target = |i: usize| f64::from(labels.labels()[i]);

        let mut z = vec![0.0; d];
        let mut gram = vec![0.0; d * d];
        let mut xt = vec![0.0; d];
        let train_mean = train.iter().map(|&i| target(i)).sum::<f64>() / train.len() as f64;
        for &i in &train {
            scaler.apply_row(features.row(i), &mut z);
            let t = target(i) - train_mean;
            for a in 0..d {
                let za = z[a];
                if za == 0.0 {
                    continue;
                }
                xt[a] += za * t;
                let row = &mut gram[a * d..a * d + d];
                for b in 0..=a {
                    row[b] += za * z[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                gram[b * d + a] = gram[a * d + b];
            }
        }

        let mut holdout = vec![0.0; test.len() * d];
        for (k, &i) in test.iter().enumerate() {
            scaler.apply_row(features.row(i), &mut holdout[k * d..(k + 1) * d]);
        }
        let holdout_target = test.iter().map(|&i| target(i)).collect();
        Ok(FitnessContext { spec: spec.clone(), d, gram, xt, train_mean, holdout, holdout_target })
    }

    pub fn spec(&self) -> &FitnessSpec {
        &self.spec
    }

    /// Holdout MSE of the ridge model restricted to `columns`.
    pub fn holdout_mse(&self, columns: &[usize]) -> Result<f64> {
        let k = columns.len();
        let d = self.d;
        let mut a = vec![0.0; k * k];
        let mut beta = vec![0.0; k];
        for (i, &ci) in columns.iter().enumerate() {
            for (j, &cj) in columns.iter().enumerate() {
                a[i * k + j] = self.gram[ci * d + cj];
            }
            a[i * k + i] += self.spec.ridge_lambda;
            beta[i] = self.xt[ci];
        }
        cholesky_solve(&mut a, k, &mut beta)?;
        let n = self.holdout_target.len();
        let sse: f64 = (0..n)
            .map(|r| {
                let row = &self.holdout[r * d..(r + 1) * d];
                let y = self.train_mean + columns.iter().zip(&beta).map(|(&c, b)| row[c] * b).sum::<f64>();
                let e = self.holdout_target[r] - y;
                e * e
            })
            .sum();
        Ok(sse / n as f64)
    }
}

impl Objective for FitnessContext {
    fn dim(&self) -> usize {
        self.d
    }

    fn cost(&self, weights: &[f64]) -> Result<f64> {
        if weights.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: weights.len() });
        }
        let mask = decode_mask(weights, self.spec.nf)?;
        Ok(self.holdout_mse(mask.indices())? + self.spec.w * self.spec.nf as f64)
    }
}

/// Cost of one candidate. Builds a fresh [`FitnessContext`]; optimizers keep
/// one context for the whole run instead.
pub fn fitness(weights: &[f64], features: &FeatureMatrix, labels: &LabelVec, spec: &FitnessSpec) -> Result<f64> {
    FitnessContext::new(features, labels, spec)?.cost(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Labels 1..3 are an exact linear function of columns 0, 1 and 2.
    fn linear_data() -> (FeatureMatrix, LabelVec) {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..30u32 {
            let label = i % 3 + 1;
            let a = ((i * 7) % 11) as f64 / 11.0;
            let b = ((i * 5) % 13) as f64 / 13.0;
            let c = f64::from(label) - 2.0 * a + 0.5 * b;
            let noise = ((i * 17) % 19) as f64 / 19.0;
            rows.push(vec![a, b, c, noise, (i % 4) as f64]);
            labels.push(label);
        }
        (FeatureMatrix::from_rows(&rows).unwrap(), LabelVec::new(labels).unwrap())
    }

    #[test]
    fn exact_linear_labels_fit() {
        let (x, y) = linear_data();
        let spec = FitnessSpec { nf: 3, w: 0.0, ..Default::default() };
        let cost = fitness(&[5.0, 4.0, 3.0, -1.0, -2.0], &x, &y, &spec).unwrap();
        assert!(cost <= 1e-6, "cost {cost}");
    }

    #[test]
    fn penalty_is_additive() {
        let (x, y) = linear_data();
        let weights = [1.0, -4.0, 3.0, 2.0, -2.0];
        let spec = FitnessSpec { nf: 2, w: 0.0, ..Default::default() };
        let base = fitness(&weights, &x, &y, &spec).unwrap();
        let ctx = FitnessContext::new(&x, &y, &spec).unwrap();
        assert_eq!(base, ctx.holdout_mse(&[2, 3]).unwrap());
        let pen = fitness(&weights, &x, &y, &FitnessSpec { w: 0.5, ..spec }).unwrap();
        assert!((pen - base - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nf_range_enforced() {
        let (x, y) = linear_data();
        for nf in [0, 1, 5] {
            let spec = FitnessSpec { nf, ..Default::default() };
            assert!(FitnessContext::new(&x, &y, &spec).is_err(), "nf={nf}");
        }
    }
}
