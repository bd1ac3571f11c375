//! Bees Algorithm: the best sites get neighbourhood search by recruited
//! foragers (more for elite sites), the remaining bees scout at random, and
//! the search radius shrinks geometrically.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fitness::{FitnessContext, FitnessSpec};
use super::swarm::{check_bounds, evaluate_all, sort_by_cost, uniform_weights, Candidate, Objective, RunHistory, SwarmResult};
use super::{decode_mask, SelectionMask};
use crate::dataset::{FeatureMatrix, LabelVec};
use crate::error::{Error, Result};
use crate::rng::{self, tag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeesParams {
    pub iterations: usize,
    pub population: usize,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub mutation_rate: f64,
    pub selected_sites: usize,
    pub elite_sites: usize,
    pub recruits_selected: usize,
    pub recruits_elite: usize,
    pub radius0: f64,
    pub radius_damp: f64,
}

impl Default for BeesParams {
    fn default() -> Self {
        BeesParams::from_population(10, 100, -10.0, 10.0)
    }
}

impl BeesParams {
    /// Site and recruit counts derived from the population size:
    /// selected = 0.5·pop, elite = 0.4·selected, recruits for selected sites
    /// = 0.5·pop, recruits for elite sites = 2·selected, radius = 0.1·(UB-LB).
    pub fn from_population(population: usize, iterations: usize, lower_bound: f64, upper_bound: f64) -> Self {
        let selected_sites = (0.5 * population as f64).round() as usize;
        BeesParams {
            iterations,
            population,
            lower_bound,
            upper_bound,
            mutation_rate: 0.2,
            selected_sites,
            elite_sites: (0.4 * selected_sites as f64).round() as usize,
            recruits_selected: (0.5 * population as f64).round() as usize,
            recruits_elite: 2 * selected_sites,
            radius0: 0.1 * (upper_bound - lower_bound),
            radius_damp: 0.96,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_bounds(self.lower_bound, self.upper_bound)?;
        if !(1 <= self.elite_sites && self.elite_sites <= self.selected_sites && self.selected_sites <= self.population) {
            return Err(Error::InvalidConfig(format!(
                "bees sites need 1 <= elite ({}) <= selected ({}) <= population ({})",
                self.elite_sites, self.selected_sites, self.population
            )));
        }
        if self.recruits_elite == 0 || self.recruits_selected == 0 {
            return Err(Error::InvalidConfig("bees recruit counts must be positive".into()));
        }
        if !(self.radius0 > 0.0) || !(self.radius_damp > 0.0 && self.radius_damp <= 1.0) {
            return Err(Error::InvalidConfig("bees radius0 must be > 0 and radius_damp in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return Err(Error::InvalidConfig("mutation_rate must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

const SCOUT: u64 = u64::MAX;

fn forage<R: Rng>(rng: &mut R, site: &[f64], radius: f64, params: &BeesParams) -> Vec<f64> {
    site.iter()
        .map(|&w| {
            if rng.random::<f64>() < params.mutation_rate {
                let delta = radius * (2.0 * rng.random::<f64>() - 1.0);
                (w + delta).clamp(params.lower_bound, params.upper_bound)
            } else {
                w
            }
        })
        .collect()
}

/// Minimizes `objective`. Each forager and scout draws from its own stream
/// keyed on (seed, iteration, slot, forager), so results do not depend on
/// how evaluations are scheduled.
pub fn bees_optimize<O: Objective + ?Sized>(objective: &O, params: &BeesParams, seed: u64) -> Result<SwarmResult> {
    params.validate()?;
    let dim = objective.dim();
    let (lb, ub) = (params.lower_bound, params.upper_bound);

    let init = (0..params.population)
        .map(|i| uniform_weights(&mut rng::stream(seed, &[tag::BEES, 0, i as u64, SCOUT]), dim, lb, ub))
        .collect();
    let mut pop = evaluate_all(objective, init)?;
    sort_by_cost(&mut pop);
    let initial_best = pop[0].cost;

    let mut best_cost = Vec::with_capacity(params.iterations);
    for it in 0..params.iterations {
        let step = it as u64 + 1;
        let radius = params.radius0 * params.radius_damp.powi(it as i32);

        let mut owners = Vec::new();
        let mut points = Vec::new();
        for (s, site) in pop.iter().take(params.selected_sites).enumerate() {
            let recruits = if s < params.elite_sites { params.recruits_elite } else { params.recruits_selected };
            for f in 0..recruits {
                let mut rng = rng::stream(seed, &[tag::BEES, step, s as u64, f as u64]);
                points.push(forage(&mut rng, &site.weights, radius, params));
                owners.push(s);
            }
        }
        let foragers = evaluate_all(objective, points)?;
        let mut best_forager: Vec<Option<Candidate>> = vec![None; params.selected_sites];
        for (owner, cand) in owners.into_iter().zip(foragers) {
            let slot = &mut best_forager[owner];
            if slot.as_ref().is_none_or(|b| cand.cost < b.cost) {
                *slot = Some(cand);
            }
        }
        for (site, forager) in pop.iter_mut().zip(best_forager) {
            if let Some(f) = forager.filter(|f| f.cost < site.cost) {
                *site = f;
            }
        }

        let scouts = (params.selected_sites..params.population)
            .map(|slot| uniform_weights(&mut rng::stream(seed, &[tag::BEES, step, slot as u64, SCOUT]), dim, lb, ub))
            .collect();
        let scouts = evaluate_all(objective, scouts)?;
        for (slot, scout) in pop[params.selected_sites..].iter_mut().zip(scouts) {
            *slot = scout;
        }

        sort_by_cost(&mut pop);
        best_cost.push(pop[0].cost);
    }

    Ok(SwarmResult { best: pop.swap_remove(0), history: RunHistory { initial_best, best_cost } })
}

/// Bees wrapper selection of `spec.nf` features.
pub fn bees_select(
    features: &FeatureMatrix,
    labels: &LabelVec,
    params: &BeesParams,
    spec: &FitnessSpec,
) -> Result<(SelectionMask, RunHistory)> {
    let ctx = FitnessContext::new(features, labels, spec)?;
    let result = bees_optimize(&ctx, params, spec.seed)?;
    Ok((decode_mask(&result.best.weights, spec.nf)?, result.history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selectors::FnObjective;

    #[test]
    fn default_parameters() {
        let p = BeesParams::default();
        assert_eq!((p.population, p.iterations), (10, 100));
        assert_eq!((p.selected_sites, p.elite_sites), (5, 2));
        assert_eq!((p.recruits_elite, p.recruits_selected), (10, 5));
        assert_eq!(p.radius0, 2.0);
        assert_eq!(p.radius_damp, 0.96);
        assert_eq!(p.mutation_rate, 0.2);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn invalid_params() {
        let bad = BeesParams { elite_sites: 6, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = BeesParams { radius_damp: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn minimizes_sphere_within_bounds() {
        let obj = FnObjective::new(8, |w: &[f64]| {
            assert!(w.iter().all(|x| (-10.0..=10.0).contains(x)));
            w.iter().map(|x| x * x).sum()
        });
        let res = bees_optimize(&obj, &BeesParams::default(), 3).unwrap();
        assert!(res.history.is_non_increasing());
        assert_eq!(res.history.best_cost.len(), 100);
        assert!(res.history.final_best() < 0.5 * res.history.initial_best);
        assert_eq!(res.best.cost, res.history.final_best());
    }

    #[test]
    fn deterministic_per_seed() {
        let obj = FnObjective::new(5, |w: &[f64]| w.iter().map(|x| (x - 1.0).abs()).sum());
        let a = bees_optimize(&obj, &BeesParams::default(), 9).unwrap();
        let b = bees_optimize(&obj, &BeesParams::default(), 9).unwrap();
        assert_eq!(a, b);
    }
}
