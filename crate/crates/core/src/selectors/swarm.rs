use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// A cost to minimize over real weight vectors of a fixed length.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn cost(&self, weights: &[f64]) -> Result<f64>;
}

/// Wraps a plain function as an [`Objective`].
pub struct FnObjective<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnObjective<F> {
    pub fn new(dim: usize, f: F) -> Self {
        FnObjective { dim, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Objective for FnObjective<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn cost(&self, weights: &[f64]) -> Result<f64> {
        Ok((self.f)(weights))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub weights: Vec<f64>,
    pub cost: f64,
}

/// Best cost after initialization and after each iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHistory {
    pub initial_best: f64,
    pub best_cost: Vec<f64>,
}

impl RunHistory {
    pub fn is_non_increasing(&self) -> bool {
        let mut prev = self.initial_best;
        self.best_cost.iter().all(|&c| {
            let ok = c <= prev;
            prev = c;
            ok
        })
    }

    pub fn final_best(&self) -> f64 {
        self.best_cost.last().copied().unwrap_or(self.initial_best)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmResult {
    pub best: Candidate,
    pub history: RunHistory,
}

pub(crate) fn uniform_weights<R: Rng>(rng: &mut R, dim: usize, lower: f64, upper: f64) -> Vec<f64> {
    (0..dim).map(|_| lower + (upper - lower) * rng.random::<f64>()).collect()
}

/// Costs in input order; the first error (by position) wins.
pub(crate) fn evaluate_all<O: Objective + ?Sized>(objective: &O, points: Vec<Vec<f64>>) -> Result<Vec<Candidate>> {
    points
        .into_par_iter()
        .map(|weights| objective.cost(&weights).map(|cost| Candidate { weights, cost }))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

pub(crate) fn sort_by_cost(pop: &mut [Candidate]) {
    pop.sort_by(|a, b| a.cost.total_cmp(&b.cost));
}

pub(crate) fn check_bounds(lower: f64, upper: f64) -> Result<()> {
    if !(lower.is_finite() && upper.is_finite() && lower < upper) {
        return Err(crate::Error::InvalidConfig(format!("bounds must satisfy LB < UB, got [{lower}, {upper}]")));
    }
    Ok(())
}
