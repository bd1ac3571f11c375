use rand::seq::index;

use super::ClassifierSpec;
use crate::dataset::{FeatureMatrix, LabelVec};
use crate::rng::{self, tag};

/// Brute-force k nearest neighbours under Euclidean distance. Equal
/// distances favour the earlier training row.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    rows: Vec<f64>,
    d: usize,
    labels: Vec<u32>,
    n_classes: usize,
    k: usize,
}

impl KnnModel {
    pub(crate) fn fit(z: &FeatureMatrix, labels: &LabelVec, k: usize) -> Self {
        KnnModel {
            rows: z.values().to_vec(),
            d: z.n_features(),
            labels: labels.labels().to_vec(),
            n_classes: labels.n_classes(),
            k,
        }
    }

    /// Number of memorized training rows.
    pub fn n_train(&self) -> usize {
        self.labels.len()
    }

    pub fn training_rows(&self) -> &[f64] {
        &self.rows
    }

    /// Neighbour indices, nearest first.
    pub fn neighbours(&self, query: &[f64]) -> Vec<usize> {
        nearest(&self.rows, self.d, query, self.k)
    }

    /// Fraction of the k neighbours voting for each class.
    pub fn scores(&self, query: &[f64]) -> Vec<f64> {
        vote(&self.neighbours(query), &self.labels, self.n_classes)
    }
}

fn nearest(rows: &[f64], d: usize, query: &[f64], k: usize) -> Vec<usize> {
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
    for (i, row) in rows.chunks_exact(d.max(1)).enumerate() {
        let dist: f64 = row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.len() == k && dist >= best[k - 1].0 {
            continue;
        }
        let pos = best.partition_point(|&(bd, _)| bd <= dist);
        best.insert(pos, (dist, i));
        best.truncate(k);
    }
    best.into_iter().map(|(_, i)| i).collect()
}

fn vote(neighbours: &[usize], labels: &[u32], n_classes: usize) -> Vec<f64> {
    let mut scores = vec![0.0; n_classes];
    for &i in neighbours {
        scores[labels[i] as usize - 1] += 1.0;
    }
    let k = neighbours.len().max(1) as f64;
    scores.iter_mut().for_each(|s| *s /= k);
    scores
}

/// Random-subspace ensemble of KNN learners; scores are the mean vote
/// fractions across learners.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleModel {
    subspaces: Vec<Vec<usize>>,
    learners: Vec<KnnModel>,
}

impl EnsembleModel {
    pub(crate) fn fit(z: &FeatureMatrix, labels: &LabelVec, spec: &ClassifierSpec) -> Self {
        let d = z.n_features();
        let size = ((spec.ensemble.subspace_fraction * d as f64).round() as usize).clamp(1, d);
        let subspaces = (0..spec.ensemble.learners)
            .map(|l| {
                let mut rng = rng::stream(spec.seed, &[tag::ENSEMBLE, l as u64]);
                let mut cols = index::sample(&mut rng, d, size).into_vec();
                cols.sort_unstable();
                cols
            })
            .collect();
        Self::with_subspaces(z, labels, spec.knn.k, subspaces)
    }

    /// Ensemble over explicit column subsets of already standardized data.
    pub fn with_subspaces(z: &FeatureMatrix, labels: &LabelVec, k: usize, subspaces: Vec<Vec<usize>>) -> Self {
        let learners = subspaces
            .iter()
            .map(|cols| {
                let sub = z.select_columns(cols).expect("subspace columns within range");
                KnnModel::fit(&sub, labels, k)
            })
            .collect();
        EnsembleModel { subspaces, learners }
    }

    pub fn subspaces(&self) -> &[Vec<usize>] {
        &self.subspaces
    }

    pub fn scores(&self, query: &[f64]) -> Vec<f64> {
        let n_classes = self.learners[0].n_classes;
        let mut total = vec![0.0; n_classes];
        let mut sub = Vec::new();
        for (cols, learner) in self.subspaces.iter().zip(&self.learners) {
            sub.clear();
            sub.extend(cols.iter().map(|&c| query[c]));
            for (t, s) in total.iter_mut().zip(learner.scores(&sub)) {
                *t += s;
            }
        }
        let n = self.learners.len() as f64;
        total.iter_mut().for_each(|t| *t /= n);
        total
    }
}
