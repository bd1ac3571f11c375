//! LPQ texture descriptors, swarm-based wrapper feature selection (Bees and
//! PSO) with PCA and Lasso baselines, four classifiers, and cross-validated
//! evaluation with confusion matrices and ROC curves.
//!
//! The pipeline runs images through [`imaging::preprocess`], extracts a
//! 256-bin [`lpq`] histogram per image, reduces the feature matrix with one of
//! the [`selectors`], and scores [`classifiers`] with stratified
//! cross-validation in [`eval`].

pub mod classifiers;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod imaging;
pub mod linalg;
pub mod lpq;
pub mod parallel;
pub mod rng;
pub mod selectors;

pub use error::{Error, Result};
