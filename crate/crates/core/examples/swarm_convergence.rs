//! Bees and PSO on the same objectives: a shifted sphere and the feature
//! selection cost. Prints best cost per iteration for both.

use swarmsel::cli::{synth_features, RunConfig};
use swarmsel::selectors::{bees_optimize, pso_optimize, BeesParams, FitnessContext, FitnessSpec, FnObjective, PsoParams};

fn main() -> swarmsel::Result<()> {
    let bees = BeesParams { iterations: 50, ..Default::default() };
    let pso = PsoParams { iterations: 50, ..Default::default() };

    let sphere = FnObjective::new(10, |w: &[f64]| w.iter().map(|v| (v - 1.0) * (v - 1.0)).sum::<f64>());
    let b = bees_optimize(&sphere, &bees, 1)?;
    let p = pso_optimize(&sphere, &pso, 1)?;
    println!("sphere (optimum 0 at w=1)");
    table(&b.history.best_cost, &p.history.best_cost);

    let mut cfg = RunConfig::default();
    cfg.synth.samples_per_class = 40;
    let (x, y) = synth_features(&cfg)?;
    let ctx = FitnessContext::new(&x, &y, &FitnessSpec::default())?;
    let b = bees_optimize(&ctx, &bees, 7)?;
    let p = pso_optimize(&ctx, &pso, 7)?;
    println!("feature selection, nf=64");
    table(&b.history.best_cost, &p.history.best_cost);
    Ok(())
}

fn table(bees: &[f64], pso: &[f64]) {
    println!("  iter        bees         pso");
    for i in (0..bees.len()).step_by(5).chain([bees.len() - 1]) {
        println!("  {:>4}  {:>10.5}  {:>10.5}", i + 1, bees[i], pso[i]);
    }
}
