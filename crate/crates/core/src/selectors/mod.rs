//! Dimensionality reduction: Bees and PSO wrapper selection over a shared
//! continuous-weights encoding, plus PCA and Lasso baselines.
//!
//! Wrapper candidates are weight vectors in `[LB, UB]^D`; a candidate selects
//! the `nf` features with the largest weights ([`decode_mask`]). Every method
//! produces a [`Reducer`], either an index mask or an affine projection.

mod bees;
mod fitness;
mod lasso;
mod pca;
mod pso;
mod swarm;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{FeatureMatrix, LabelVec};
use crate::error::{Error, Result};

pub use bees::{bees_optimize, bees_select, BeesParams};
pub use fitness::{fitness, FitnessContext, FitnessSpec};
pub use lasso::{lasso_coordinate_descent, lasso_select, LassoFit, LASSO_MAX_SWEEPS, LASSO_TOL};
pub use pca::{pca_fit, pca_transform};
pub use pso::{pso_optimize, pso_select, PsoParams};
pub use swarm::{Candidate, FnObjective, Objective, RunHistory, SwarmResult};

/// Sorted, unique feature indices into a `n_features`-wide matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionMask {
    indices: Vec<usize>,
    n_features: usize,
}

impl SelectionMask {
    pub fn new(mut indices: Vec<usize>, n_features: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidConfig("mask indices must be unique".into()));
        }
        if let Some(&bad) = indices.last().filter(|&&i| i >= n_features) {
            return Err(Error::DimensionMismatch { expected: n_features, got: bad + 1 });
        }
        Ok(SelectionMask { indices, n_features })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Indices of the `nf` largest weights, ties toward the lower index, returned
/// in ascending order.
pub fn decode_mask(weights: &[f64], nf: usize) -> Result<SelectionMask> {
    let d = weights.len();
    if nf == 0 || nf > d {
        return Err(Error::InvalidConfig(format!("nf must lie in 1..={d}, got {nf}")));
    }
    let mut order: Vec<usize> = (0..d).collect();
    let by_weight = |a: &usize, b: &usize| weights[*b].total_cmp(&weights[*a]).then(a.cmp(b));
    if nf < d {
        order.select_nth_unstable_by(nf - 1, by_weight);
    }
    let mut indices = order[..nf].to_vec();
    indices.sort_unstable();
    Ok(SelectionMask { indices, n_features: d })
}

/// `x -> (x - mean) · componentsᵀ`, components stored row-wise (k × D).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineProjection {
    pub mean: Vec<f64>,
    pub components: Vec<Vec<f64>>,
    /// Variance captured by each component, descending.
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reducer {
    Mask(SelectionMask),
    Projection(AffineProjection),
}

impl Reducer {
    pub fn input_dim(&self) -> usize {
        match self {
            Reducer::Mask(m) => m.n_features,
            Reducer::Projection(p) => p.mean.len(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self {
            Reducer::Mask(m) => m.len(),
            Reducer::Projection(p) => p.components.len(),
        }
    }

    pub fn apply(&self, features: &FeatureMatrix) -> Result<FeatureMatrix> {
        if features.n_features() != self.input_dim() {
            return Err(Error::DimensionMismatch { expected: self.input_dim(), got: features.n_features() });
        }
        match self {
            Reducer::Mask(m) => features.select_columns(m.indices()),
            Reducer::Projection(_) => pca_transform(self, features),
        }
    }
}

/// How to fit a reducer on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase", deny_unknown_fields)]
pub enum Selector {
    Bees { params: BeesParams, fitness: FitnessSpec },
    Pso { params: PsoParams, fitness: FitnessSpec },
    Pca,
    Lasso { lambda: f64 },
}

/// A fitted reducer plus the optimizer trace for swarm methods.
#[derive(Debug, Clone, PartialEq)]
pub struct Fitted {
    pub reducer: Reducer,
    pub history: Option<RunHistory>,
}

impl Selector {
    pub fn name(&self) -> &'static str {
        match self {
            Selector::Bees { .. } => "bees",
            Selector::Pso { .. } => "pso",
            Selector::Pca => "pca",
            Selector::Lasso { .. } => "lasso",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Selector::Bees { fitness, .. } | Selector::Pso { fitness, .. } => Some(fitness.seed),
            _ => None,
        }
    }

    pub fn fit(&self, features: &FeatureMatrix, labels: &LabelVec, nf: usize) -> Result<Fitted> {
        Ok(self.fit_many(features, labels, &[nf])?.remove(0))
    }

    /// One fitted reducer per entry of `nfs`. PCA and Lasso do their heavy
    /// work once and truncate; swarm methods run once per target size.
    pub fn fit_many(&self, features: &FeatureMatrix, labels: &LabelVec, nfs: &[usize]) -> Result<Vec<Fitted>> {
        match self {
            Selector::Bees { params, fitness } => nfs
                .iter()
                .map(|&nf| {
                    let spec = FitnessSpec { nf, ..fitness.clone() };
                    let (mask, history) = bees_select(features, labels, params, &spec)?;
                    Ok(Fitted { reducer: Reducer::Mask(mask), history: Some(history) })
                })
                .collect(),
            Selector::Pso { params, fitness } => nfs
                .iter()
                .map(|&nf| {
                    let spec = FitnessSpec { nf, ..fitness.clone() };
                    let (mask, history) = pso_select(features, labels, params, &spec)?;
                    Ok(Fitted { reducer: Reducer::Mask(mask), history: Some(history) })
                })
                .collect(),
            Selector::Pca => {
                let kmax = nfs.iter().copied().max().unwrap_or(0);
                let full = pca_fit(features, kmax)?;
                let Reducer::Projection(p) = full else { unreachable!("pca_fit returns a projection") };
                Ok(nfs
                    .iter()
                    .map(|&k| Fitted {
                        reducer: Reducer::Projection(AffineProjection {
                            mean: p.mean.clone(),
                            components: p.components[..k].to_vec(),
                            eigenvalues: p.eigenvalues[..k].to_vec(),
                        }),
                        history: None,
                    })
                    .collect())
            }
            Selector::Lasso { lambda } => {
                let scores = lasso::lasso_scores(features, labels, *lambda)?;
                nfs.iter()
                    .map(|&nf| {
                        Ok(Fitted { reducer: Reducer::Mask(lasso::mask_from_scores(&scores, nf)?), history: None })
                    })
                    .collect()
            }
        }
    }
}

/// Persisted form of a fitted reducer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducerDoc {
    pub method: String,
    pub nf: usize,
    pub n_features: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<RunHistory>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl ReducerDoc {
    pub fn from_fitted(selector: &Selector, fitted: &Fitted) -> Result<Self> {
        let mut doc = ReducerDoc {
            method: selector.name().to_string(),
            nf: fitted.reducer.output_dim(),
            n_features: fitted.reducer.input_dim(),
            indices: None,
            mean: None,
            components: None,
            eigenvalues: None,
            history: fitted.history.clone(),
            seed: selector.seed(),
            params: serde_json::to_value(selector)?,
        };
        match &fitted.reducer {
            Reducer::Mask(m) => doc.indices = Some(m.indices().to_vec()),
            Reducer::Projection(p) => {
                doc.mean = Some(p.mean.clone());
                doc.components = Some(p.components.clone());
                doc.eigenvalues = Some(p.eigenvalues.clone());
            }
        }
        Ok(doc)
    }

    pub fn to_reducer(&self) -> Result<Reducer> {
        let reducer = match (&self.indices, &self.mean, &self.components) {
            (Some(idx), None, None) => Reducer::Mask(SelectionMask::new(idx.clone(), self.n_features)?),
            (None, Some(mean), Some(components)) => {
                if mean.len() != self.n_features {
                    return Err(Error::DimensionMismatch { expected: self.n_features, got: mean.len() });
                }
                if let Some(row) = components.iter().find(|r| r.len() != mean.len()) {
                    return Err(Error::DimensionMismatch { expected: mean.len(), got: row.len() });
                }
                Reducer::Projection(AffineProjection {
                    mean: mean.clone(),
                    components: components.clone(),
                    eigenvalues: self.eigenvalues.clone().unwrap_or_default(),
                })
            }
            _ => return Err(Error::InvalidConfig("reducer document needs either indices or mean+components".into())),
        };
        if reducer.output_dim() != self.nf {
            return Err(Error::DimensionMismatch { expected: self.nf, got: reducer.output_dim() });
        }
        Ok(reducer)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_examples() {
        assert_eq!(decode_mask(&[0.1, 5.0, -3.0, 2.0], 2).unwrap().indices(), &[1, 3]);
        assert_eq!(decode_mask(&[1.0; 5], 2).unwrap().indices(), &[0, 1]);
        assert_eq!(decode_mask(&[3.0, 1.0, 2.0], 3).unwrap().indices(), &[0, 1, 2]);
        assert!(decode_mask(&[1.0, 2.0], 0).is_err());
        assert!(decode_mask(&[1.0, 2.0], 3).is_err());
    }

    #[test]
    fn mask_validation() {
        assert!(SelectionMask::new(vec![3, 1], 4).is_ok());
        assert!(SelectionMask::new(vec![1, 1], 4).is_err());
        assert!(SelectionMask::new(vec![4], 4).is_err());
    }

    #[test]
    fn reducer_doc_round_trip() {
        let selector = Selector::Lasso { lambda: 0.1 };
        let fitted = Fitted { reducer: Reducer::Mask(SelectionMask::new(vec![0, 2], 4).unwrap()), history: None };
        let doc = ReducerDoc::from_fitted(&selector, &fitted).unwrap();
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"indices\":[0,2]"));
        let back: ReducerDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_reducer().unwrap(), fitted.reducer);
    }
}
