//! Global-best particle swarm with damped inertia and a one-coordinate
//! resampling mutation.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fitness::{FitnessContext, FitnessSpec};
use super::swarm::{check_bounds, evaluate_all, Candidate, Objective, RunHistory, SwarmResult};
use super::{decode_mask, SelectionMask};
use crate::dataset::{FeatureMatrix, LabelVec};
use crate::error::{Error, Result};
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsoParams {
    pub iterations: usize,
    pub population: usize,
    pub inertia: f64,
    pub inertia_damp: f64,
    pub c_personal: f64,
    pub c_global: f64,
    pub mutation_rate: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub velocity_clamp: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        PsoParams {
            iterations: 100,
            population: 20,
            inertia: 1.0,
            inertia_damp: 0.99,
            c_personal: 1.5,
            c_global: 2.0,
            mutation_rate: 0.2,
            lower_bound: -10.0,
            upper_bound: 10.0,
            velocity_clamp: 2.0,
        }
    }
}

impl PsoParams {
    pub fn validate(&self) -> Result<()> {
        check_bounds(self.lower_bound, self.upper_bound)?;
        if self.population < 2 {
            return Err(Error::InvalidConfig("pso population must be >= 2".into()));
        }
        if !(self.inertia_damp > 0.0 && self.inertia_damp <= 1.0) {
            return Err(Error::InvalidConfig("inertia_damp must lie in (0, 1]".into()));
        }
        if !(self.velocity_clamp > 0.0) || !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidConfig("velocity_clamp must be > 0 and mutation_rate in [0, 1]".into()));
        }
        Ok(())
    }
}

struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best: Candidate,
}

/// Synchronous update: every particle moves against the global best of the
/// previous iteration, so particles are independent within an iteration.
pub fn pso_optimize<O: Objective + ?Sized>(objective: &O, params: &PsoParams, seed: u64) -> Result<SwarmResult> {
    params.validate()?;
    let dim = objective.dim();
    let (lb, ub) = (params.lower_bound, params.upper_bound);

    let init: Vec<Vec<f64>> = (0..params.population)
        .map(|p| {
            let mut rng = rng::stream(seed, &[tag::PSO, 0, p as u64]);
            super::swarm::uniform_weights(&mut rng, dim, lb, ub)
        })
        .collect();
    let mut swarm: Vec<Particle> = evaluate_all(objective, init)?
        .into_iter()
        .map(|c| Particle { position: c.weights.clone(), velocity: vec![0.0; dim], best: c })
        .collect();
    let mut gbest = best_of(&swarm).clone();
    let initial_best = gbest.cost;

    let mut inertia = params.inertia;
    let mut best_cost = Vec::with_capacity(params.iterations);
    for it in 0..params.iterations {
        let step = it as u64 + 1;
        let costs: Vec<Result<f64>> = swarm
            .par_iter_mut()
            .enumerate()
            .map(|(p, particle)| {
                let mut rng = rng::stream(seed, &[tag::PSO, step, p as u64]);
                for d in 0..dim {
                    let (r1, r2) = (rng.random::<f64>(), rng.random::<f64>());
                    let x = particle.position[d];
                    let v = inertia * particle.velocity[d]
                        + params.c_personal * r1 * (particle.best.weights[d] - x)
                        + params.c_global * r2 * (gbest.weights[d] - x);
                    let v = v.clamp(-params.velocity_clamp, params.velocity_clamp);
                    particle.velocity[d] = v;
                    particle.position[d] = (x + v).clamp(lb, ub);
                }
                if rng.random::<f64>() < params.mutation_rate {
                    let d = rng.random_range(0..dim);
                    particle.position[d] = lb + (ub - lb) * rng.random::<f64>();
                }
                objective.cost(&particle.position)
            })
            .collect();
        for (particle, cost) in swarm.iter_mut().zip(costs) {
            let cost = cost?;
            if cost < particle.best.cost {
                particle.best = Candidate { weights: particle.position.clone(), cost };
            }
        }
        let leader = best_of(&swarm);
        if leader.cost < gbest.cost {
            gbest = leader.clone();
        }
        inertia *= params.inertia_damp;
        best_cost.push(gbest.cost);
    }

    Ok(SwarmResult { best: gbest, history: RunHistory { initial_best, best_cost } })
}

/// Lowest personal best, ties toward the lower particle index.
fn best_of(swarm: &[Particle]) -> &Candidate {
    swarm
        .iter()
        .map(|p| &p.best)
        .reduce(|a, b| if b.cost < a.cost { b } else { a })
        .expect("non-empty swarm")
}

pub fn pso_select(
    features: &FeatureMatrix,
    labels: &LabelVec,
    params: &PsoParams,
    spec: &FitnessSpec,
) -> Result<(SelectionMask, RunHistory)> {
    let ctx = FitnessContext::new(features, labels, spec)?;
    let result = pso_optimize(&ctx, params, spec.seed)?;
    Ok((decode_mask(&result.best.weights, spec.nf)?, result.history))
}
