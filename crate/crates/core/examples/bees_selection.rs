//! Select 64 of 256 LPQ bins with the Bees wrapper and print the chosen
//! bins and the cost trace.

use swarmsel::cli::{synth_features, RunConfig};
use swarmsel::selectors::{bees_select, BeesParams, FitnessSpec};

fn main() -> swarmsel::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.synth.samples_per_class = 60;
    let (x, y) = synth_features(&cfg)?;

    let params = BeesParams { iterations: 40, ..Default::default() };
    let spec = FitnessSpec { nf: 64, ..Default::default() };
    let (mask, history) = bees_select(&x, &y, &params, &spec)?;

    println!("{} samples, {} features -> {} selected", x.n_samples(), x.n_features(), mask.len());
    println!("bins: {:?}", mask.indices());
    println!("cost: initial {:.5}, final {:.5}", history.initial_best, history.final_best());
    for (i, c) in history.best_cost.iter().enumerate().step_by(10) {
        println!("  iter {:>3}  {c:.5}", i + 1);
    }
    Ok(())
}
