//! A reduced classifier x selector x nf grid printed as a table.

use swarmsel::cli::{synth_features, RunConfig};
use swarmsel::eval::comparison_grid;

fn main() -> swarmsel::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.synth.samples_per_class = 40;
    cfg.bees.iterations = 20;
    cfg.pso.iterations = 20;
    cfg.nf_list = vec![16, 64];
    let (x, y) = synth_features(&cfg)?;
    let selectors = cfg.selectors.iter().map(|s| cfg.selector(s)).collect::<swarmsel::Result<Vec<_>>>()?;
    let run = comparison_grid(&x, &y, &selectors, &cfg.nf_list, &cfg.classifiers, cfg.cv_folds, cfg.seed)?;

    let g = &run.grid;
    print!("{:<22}", "");
    for c in &g.columns {
        print!("{:>10}", format!("{}{}", c.selector, c.nf));
    }
    println!();
    for (name, row) in g.classifiers.iter().zip(&g.cells) {
        print!("{name:<22}");
        for v in row {
            print!("{v:>10.3}");
        }
        println!();
    }
    Ok(())
}
