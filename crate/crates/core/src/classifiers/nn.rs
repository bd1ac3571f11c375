//! One hidden tanh layer, softmax output, mean cross-entropy loss, trained
//! full-batch with momentum gradient descent.

use rand::Rng;

use super::NnParams;
use crate::dataset::{FeatureMatrix, LabelVec, Standardizer};
use crate::error::Result;
use crate::rng::{self, tag};

/// Parameters packed as `[w1 (h×d), b1 (h), w2 (c×h), b2 (c)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShallowNet {
    pub d: usize,
    pub hidden: usize,
    pub classes: usize,
    pub params: Vec<f64>,
    /// Training loss before each epoch's update.
    pub loss_history: Vec<f64>,
}

impl ShallowNet {
    fn n_params(d: usize, h: usize, c: usize) -> usize {
        h * d + h + c * h + c
    }

    /// Weights uniform in ±1/√fan_in, biases zero.
    pub fn init(d: usize, hidden: usize, classes: usize, seed: u64) -> Self {
        let mut rng = rng::stream(seed, &[tag::NN]);
        let mut params = vec![0.0; Self::n_params(d, hidden, classes)];
        let s1 = 1.0 / (d.max(1) as f64).sqrt();
        for w in &mut params[..hidden * d] {
            *w = s1 * (2.0 * rng.random::<f64>() - 1.0);
        }
        let off = hidden * d + hidden;
        let s2 = 1.0 / (hidden as f64).sqrt();
        for w in &mut params[off..off + classes * hidden] {
            *w = s2 * (2.0 * rng.random::<f64>() - 1.0);
        }
        ShallowNet { d, hidden, classes, params, loss_history: Vec::new() }
    }

    pub fn zeros(d: usize, hidden: usize, classes: usize) -> Self {
        ShallowNet { d, hidden, classes, params: vec![0.0; Self::n_params(d, hidden, classes)], loss_history: Vec::new() }
    }

    fn split(&self) -> (&[f64], &[f64], &[f64], &[f64]) {
        let (h, d, c) = (self.hidden, self.d, self.classes);
        let (w1, rest) = self.params.split_at(h * d);
        let (b1, rest) = rest.split_at(h);
        let (w2, b2) = rest.split_at(c * h);
        debug_assert_eq!(b2.len(), c);
        (w1, b1, w2, b2)
    }

    fn forward(&self, x: &[f64], hidden: &mut [f64], logits: &mut [f64]) {
        let (w1, b1, w2, b2) = self.split();
        for (j, hj) in hidden.iter_mut().enumerate() {
            let row = &w1[j * self.d..(j + 1) * self.d];
            *hj = (b1[j] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()).tanh();
        }
        for (k, ok) in logits.iter_mut().enumerate() {
            let row = &w2[k * self.hidden..(k + 1) * self.hidden];
            *ok = b2[k] + row.iter().zip(hidden.iter()).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let mut hidden = vec![0.0; self.hidden];
        let mut logits = vec![0.0; self.classes];
        self.forward(x, &mut hidden, &mut logits);
        softmax(&logits)
    }

    /// Mean cross-entropy over `rows` (standardized) and, when `grad` is
    /// given, its gradient with respect to `params`.
    pub fn loss_and_grad(&self, z: &FeatureMatrix, labels: &[u32], mut grad: Option<&mut [f64]>) -> f64 {
        let (h, d, c) = (self.hidden, self.d, self.classes);
        let (_, _, w2, _) = self.split();
        if let Some(g) = grad.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let n = z.n_samples() as f64;
        let mut hidden = vec![0.0; h];
        let mut logits = vec![0.0; c];
        let mut d_hidden = vec![0.0; h];
        let mut loss = 0.0;
        for (x, &label) in z.rows().zip(labels) {
            self.forward(x, &mut hidden, &mut logits);
            let target = label as usize - 1;
            let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let lse = logits.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            loss -= logits[target] - max - lse;
            let Some(g) = grad.as_deref_mut() else { continue };

            let (gw1, rest) = g.split_at_mut(h * d);
            let (gb1, rest) = rest.split_at_mut(h);
            let (gw2, gb2) = rest.split_at_mut(c * h);
            d_hidden.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..c {
                let p = (logits[k] - max - lse).exp();
                let dk = (p - if k == target { 1.0 } else { 0.0 }) / n;
                gb2[k] += dk;
                let row = &mut gw2[k * h..(k + 1) * h];
                for j in 0..h {
                    row[j] += dk * hidden[j];
                    d_hidden[j] += dk * w2[k * h + j];
                }
            }
            for j in 0..h {
                let da = d_hidden[j] * (1.0 - hidden[j] * hidden[j]);
                if da == 0.0 {
                    continue;
                }
                gb1[j] += da;
                for (gw, xi) in gw1[j * d..(j + 1) * d].iter_mut().zip(x) {
                    *gw += da * xi;
                }
            }
        }
        loss / n
    }

    pub(crate) fn fit(z: &FeatureMatrix, labels: &LabelVec, params: &NnParams, seed: u64) -> Self {
        let mut net = ShallowNet::init(z.n_features(), params.hidden, labels.n_classes(), seed);
        net.train(z, labels.labels(), params);
        net
    }

    /// Full-batch gradient descent with momentum from the current parameters.
    pub fn train(&mut self, z: &FeatureMatrix, labels: &[u32], params: &NnParams) {
        let mut grad = vec![0.0; self.params.len()];
        let mut velocity = vec![0.0; self.params.len()];
        for _ in 0..params.epochs {
            let loss = self.loss_and_grad(z, labels, Some(&mut grad));
            self.loss_history.push(loss);
            for ((p, v), g) in self.params.iter_mut().zip(&mut velocity).zip(&grad) {
                *v = params.momentum * *v - params.learning_rate * g;
                *p += *v;
            }
        }
    }
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.iter().map(|e| e / total).collect()
}

/// Largest relative gap between the analytic gradient and central finite
/// differences (step 1e-5) over every parameter of the seeded initial
/// network. Relative error is `|a - n| / max(|a|, |n|, 1e-4)`; the floor
/// keeps near-zero gradients from amplifying round-off.
pub fn nn_gradient_check(spec: &super::ClassifierSpec, features: &FeatureMatrix, labels: &LabelVec) -> Result<f64> {
    let z = Standardizer::fit(features).transform(features)?;
    let mut net = ShallowNet::init(z.n_features(), spec.nn.hidden, labels.n_classes(), spec.seed);
    Ok(gradient_error(&mut net, &z, labels.labels()))
}

pub(crate) fn gradient_error(net: &mut ShallowNet, z: &FeatureMatrix, labels: &[u32]) -> f64 {
    const STEP: f64 = 1e-5;
    let mut analytic = vec![0.0; net.params.len()];
    net.loss_and_grad(z, labels, Some(&mut analytic));
    let mut worst = 0.0f64;
    for i in 0..net.params.len() {
        let orig = net.params[i];
        net.params[i] = orig + STEP;
        let up = net.loss_and_grad(z, labels, None);
        net.params[i] = orig - STEP;
        let down = net.loss_and_grad(z, labels, None);
        net.params[i] = orig;
        let numeric = (up - down) / (2.0 * STEP);
        let a = analytic[i];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
        worst = worst.max(rel);
    }
    worst
}
