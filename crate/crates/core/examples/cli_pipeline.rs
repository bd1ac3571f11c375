//! Drive the command-line entry point from code: synth, extract, select,
//! train-eval, in a temporary directory.

use swarmsel::cli::run_from;

fn main() {
    let dir = std::env::temp_dir().join("swarmsel_cli_pipeline");
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let steps: [Vec<String>; 4] = [
        vec!["synth".into(), "--out".into(), p("images")],
        vec!["extract".into(), p("images/manifest.csv"), "--out".into(), p("features.csv")],
        vec!["select".into(), p("features.csv"), "--method".into(), "lasso".into(), "--nf".into(), "32".into(), "--out".into(), p("lasso.json")],
        vec!["train-eval".into(), p("features.csv"), "--reducer".into(), p("lasso.json"), "--out".into(), p("eval")],
    ];
    for args in steps {
        let code = run_from(std::iter::once("swarmsel".to_string()).chain(args.iter().cloned()));
        println!("swarmsel {} -> exit {code}", args[0]);
        if code != 0 {
            std::process::exit(code);
        }
    }
    let report = std::fs::read_to_string(dir.join("eval/report.json")).expect("report written");
    let v: serde_json::Value = serde_json::from_str(&report).expect("valid json");
    println!("accuracy {}", v["accuracy"]);
}
