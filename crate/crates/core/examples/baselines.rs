//! PCA and Lasso reducers next to a random subset, scored by 5-fold KNN.

use swarmsel::classifiers::ClassifierSpec;
use swarmsel::cli::{synth_features, RunConfig};
use swarmsel::eval::{cross_validate, random_masks, ReducerSpec};
use swarmsel::selectors::{Reducer, Selector};

fn main() -> swarmsel::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.synth.samples_per_class = 60;
    let (x, y) = synth_features(&cfg)?;
    let knn = ClassifierSpec::default();

    let pca = Selector::Pca.fit(&x, &y, 16)?;
    if let Reducer::Projection(p) = &pca.reducer {
        let total: f64 = p.eigenvalues.iter().sum();
        println!("pca: top eigenvalues {:?}", &p.eigenvalues[..4].iter().map(|e| format!("{:.2}", e / total)).collect::<Vec<_>>());
    }
    let lasso = Selector::Lasso { lambda: cfg.lasso_lambda }.fit(&x, &y, 16)?;
    if let Reducer::Mask(m) = &lasso.reducer {
        println!("lasso bins: {:?}", m.indices());
    }

    for nf in [8, 16, 32] {
        let row = [
            ("pca", ReducerSpec::Fit { selector: Selector::Pca, nf }),
            ("lasso", ReducerSpec::Fit { selector: Selector::Lasso { lambda: cfg.lasso_lambda }, nf }),
            ("random", ReducerSpec::Fixed(Reducer::Mask(random_masks(x.n_features(), nf, 1, 3)?.remove(0)))),
        ];
        for (name, spec) in row {
            let r = cross_validate(&knn, &spec, &x, &y, 5, 42)?;
            println!("nf={nf:>2} {name:<6} accuracy {:.3}", r.accuracy);
        }
    }
    Ok(())
}
