//! Cross-validate each classifier on all 256 bins and write the report
//! artifacts (json, confusion csv, ROC svg) for KNN.

use swarmsel::classifiers::ClassifierSpec;
use swarmsel::cli::{synth_features, RunConfig};
use swarmsel::eval::{cross_validate_many, write_report_artifacts, ReducerSpec};

fn main() -> swarmsel::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.synth.samples_per_class = 40;
    let (x, y) = synth_features(&cfg)?;
    let specs = ClassifierSpec::all_kinds(42);
    let reports = cross_validate_many(&specs, &ReducerSpec::None, &x, &y, 5, 42)?;

    for (spec, r) in specs.iter().zip(&reports) {
        let auc: Vec<String> = r.per_class_auc.iter().map(|a| format!("{a:.3}")).collect();
        println!("{:<22} acc {:.3}  auc {}", spec.kind.name(), r.accuracy, auc.join(" "));
    }
    let knn = specs.iter().position(|s| s.kind.name() == "knn").expect("knn row");
    println!("knn confusion:");
    for row in &reports[knn].confusion {
        println!("  {row:?}");
    }

    let out = std::env::temp_dir().join("swarmsel_classify_evaluate");
    write_report_artifacts(&reports[knn], &out)?;
    println!("artifacts in {}", out.display());
    Ok(())
}
