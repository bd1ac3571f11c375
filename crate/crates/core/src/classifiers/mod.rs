//! KNN, linear SVM, a one-hidden-layer network and a random-subspace KNN
//! ensemble. Every model z-scores columns with training statistics and
//! returns a per-class score matrix; the predicted label is the arg-max
//! score with ties going to the smallest label.

mod knn;
mod nn;
mod svm;

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, LabelVec, Standardizer};
use crate::error::{Error, Result};

pub use knn::{EnsembleModel, KnnModel};
pub use nn::{nn_gradient_check, ShallowNet};
pub use svm::SvmModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Knn,
    SvmLinear,
    ShallowNn,
    EnsembleSubspaceKnn,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] =
        [ClassifierKind::SvmLinear, ClassifierKind::Knn, ClassifierKind::ShallowNn, ClassifierKind::EnsembleSubspaceKnn];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Knn => "knn",
            ClassifierKind::SvmLinear => "svm_linear",
            ClassifierKind::ShallowNn => "shallow_nn",
            ClassifierKind::EnsembleSubspaceKnn => "ensemble_subspace_knn",
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown classifier {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub lambda: f64,
    pub epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { lambda: 1e-4, epochs: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NnParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
}

impl Default for NnParams {
    fn default() -> Self {
        NnParams { hidden: 20, learning_rate: 0.1, momentum: 0.9, epochs: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleParams {
    pub learners: usize,
    pub subspace_fraction: f64,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        EnsembleParams { learners: 30, subspace_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub knn: KnnParams,
    pub svm: SvmParams,
    pub nn: NnParams,
    pub ensemble: EnsembleParams,
    pub seed: u64,
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec::new(ClassifierKind::Knn)
    }
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierSpec {
            kind,
            knn: KnnParams::default(),
            svm: SvmParams::default(),
            nn: NnParams::default(),
            ensemble: EnsembleParams::default(),
            seed: 42,
        }
    }

    /// One spec per classifier kind, in grid row order.
    pub fn all_kinds(seed: u64) -> Vec<ClassifierSpec> {
        ClassifierKind::ALL.into_iter().map(|k| ClassifierSpec { seed, ..ClassifierSpec::new(k) }).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("{}: {msg}", self.kind.name())));
        if self.knn.k == 0 {
            return bad("knn.k must be positive");
        }
        if !(self.svm.lambda > 0.0) || self.svm.epochs == 0 {
            return bad("svm.lambda must be > 0 and svm.epochs positive");
        }
        if self.nn.hidden == 0 || self.nn.epochs == 0 || !(self.nn.learning_rate > 0.0) || !(0.0..1.0).contains(&self.nn.momentum) {
            return bad("nn needs hidden > 0, epochs > 0, learning_rate > 0, momentum in [0, 1)");
        }
        if self.ensemble.learners == 0 || !(self.ensemble.subspace_fraction > 0.0 && self.ensemble.subspace_fraction <= 1.0) {
            return bad("ensemble needs learners > 0 and subspace_fraction in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Knn(KnnModel),
    Svm(SvmModel),
    Nn(ShallowNet),
    Ensemble(EnsembleModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub scaler: Standardizer,
    pub n_classes: usize,
    pub model: Model,
}

/// Predicted labels and the n×C score matrix (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<u32>,
    pub scores: Vec<Vec<f64>>,
}

/// Index of the largest score, first one on ties.
pub fn argmax(scores: &[f64]) -> usize {
    scores
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

fn check_training(features: &FeatureMatrix, labels: &LabelVec) -> Result<()> {
    if labels.len() != features.n_samples() {
        return Err(Error::DimensionMismatch { expected: features.n_samples(), got: labels.len() });
    }
    for (c, &n) in labels.counts().iter().enumerate() {
        if n < 2 {
            return Err(Error::ClassTooSmall { class: c as u32 + 1, count: n, needed: 2 });
        }
    }
    Ok(())
}

pub fn fit(spec: &ClassifierSpec, features: &FeatureMatrix, labels: &LabelVec) -> Result<TrainedModel> {
    spec.validate()?;
    check_training(features, labels)?;
    let scaler = Standardizer::fit(features);
    let z = scaler.transform(features)?;
    let c = labels.n_classes();
    let model = match spec.kind {
        ClassifierKind::Knn => Model::Knn(KnnModel::fit(&z, labels, spec.knn.k)),
        ClassifierKind::SvmLinear => Model::Svm(SvmModel::fit(&z, labels, &spec.svm, spec.seed)),
        ClassifierKind::ShallowNn => Model::Nn(ShallowNet::fit(&z, labels, &spec.nn, spec.seed)),
        ClassifierKind::EnsembleSubspaceKnn => Model::Ensemble(EnsembleModel::fit(&z, labels, spec)),
    };
    Ok(TrainedModel { scaler, n_classes: c, model })
}

impl TrainedModel {
    pub fn n_features(&self) -> usize {
        self.scaler.mean.len()
    }

    pub fn predict(&self, features: &FeatureMatrix) -> Result<Prediction> {
        let z = self.scaler.transform(features)?;
        let scores: Vec<Vec<f64>> = z
            .rows()
            .map(|row| match &self.model {
                Model::Knn(m) => m.scores(row),
                Model::Svm(m) => m.scores(row),
                Model::Nn(m) => m.probabilities(row),
                Model::Ensemble(m) => m.scores(row),
            })
            .collect();
        let labels = scores.iter().map(|s| argmax(s) as u32 + 1).collect();
        Ok(Prediction { labels, scores })
    }
}

pub fn predict(model: &TrainedModel, features: &FeatureMatrix) -> Result<Prediction> {
    model.predict(features)
}
