//! One-vs-rest linear SVM trained with Pegasos-style stochastic subgradient
//! steps (step size 1/(λt)) on the hinge loss. A constant feature provides
//! the bias.

use rand::seq::SliceRandom;

use super::SvmParams;
use crate::dataset::{FeatureMatrix, LabelVec};
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    /// Per class: d weights followed by the bias.
    weights: Vec<Vec<f64>>,
}

impl SvmModel {
    pub(crate) fn fit(z: &FeatureMatrix, labels: &LabelVec, params: &SvmParams, seed: u64) -> Self {
        let (n, d) = (z.n_samples(), z.n_features());
        let lambda = params.lambda;
        let orders: Vec<Vec<usize>> = (0..params.epochs)
            .map(|e| {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut rng::stream(seed, &[tag::SVM, e as u64]));
                order
            })
            .collect();

        let weights = (1..=labels.n_classes() as u32)
            .map(|class| {
                // w = scale * v keeps the shrink step O(1)
                let mut v = vec![0.0; d + 1];
                let mut scale = 1.0;
                let mut t = 0usize;
                for order in &orders {
                    for &i in order {
                        t += 1;
                        let x = z.row(i);
                        let y = if labels.labels()[i] == class { 1.0 } else { -1.0 };
                        let margin = y * scale * (dot(&v[..d], x) + v[d]);
                        let eta = 1.0 / (lambda * t as f64);
                        let shrink = 1.0 - eta * lambda;
                        if shrink <= 0.0 {
                            v.iter_mut().for_each(|w| *w = 0.0);
                            scale = 1.0;
                        } else {
                            scale *= shrink;
                        }
                        if margin < 1.0 {
                            let step = eta * y / scale;
                            for (w, xi) in v[..d].iter_mut().zip(x) {
                                *w += step * xi;
                            }
                            v[d] += step;
                        }
                        if scale < 1e-100 {
                            v.iter_mut().for_each(|w| *w *= scale);
                            scale = 1.0;
                        }
                    }
                }
                v.iter().map(|w| w * scale).collect()
            })
            .collect();
        SvmModel { weights }
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// One-vs-rest margins.
    pub fn scores(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len();
        self.weights.iter().map(|w| dot(&w[..d], x) + w[d]).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
