//! Command-line front end: `synth`, `extract`, `select`, `train-eval` and
//! `pipeline`, all driven by one JSON [`RunConfig`] with flag overrides.
//!
//! Outputs go to files only; diagnostics go to stderr. Exit code 0 means
//! success, 2 a usage, configuration or input error, 1 a numerical failure.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierKind, ClassifierSpec};
use crate::dataset::{self, FeatureMatrix, LabelVec, SynthConfig};
use crate::error::{Error, Result};
use crate::eval::{self, ReducerSpec};
use crate::imaging::{self, GrayImage, Image, PreprocessConfig};
use crate::lpq::{self, LpqConfig};
use crate::parallel;
use crate::selectors::{BeesParams, FitnessSpec, PsoParams, Reducer, ReducerDoc, Selector};

pub const CONFIG_ECHO: &str = "effective_config.json";

/// Every knob of a run. The top-level `seed` is authoritative: it is copied
/// into the synthetic, fitness and classifier seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub preprocess: PreprocessConfig,
    pub lpq: LpqConfig,
    pub synth: SynthConfig,
    /// Image manifest for `pipeline`; synthetic data when absent.
    pub manifest: Option<PathBuf>,
    pub fitness: FitnessSpec,
    pub bees: BeesParams,
    pub pso: PsoParams,
    pub lasso_lambda: f64,
    pub nf_list: Vec<usize>,
    pub selectors: Vec<String>,
    pub classifiers: Vec<ClassifierSpec>,
    pub cv_folds: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            preprocess: PreprocessConfig::default(),
            lpq: LpqConfig::default(),
            synth: SynthConfig::default(),
            manifest: None,
            fitness: FitnessSpec::default(),
            bees: BeesParams::default(),
            pso: PsoParams::default(),
            lasso_lambda: 0.01,
            nf_list: vec![32, 64, 128],
            selectors: ["pca", "lasso", "pso", "bees"].map(String::from).to_vec(),
            classifiers: ClassifierSpec::all_kinds(42),
            cv_folds: 5,
            seed: 42,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        let seed = cfg.seed;
        Ok(cfg.with_seed(seed))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.synth.seed = seed;
        self.fitness.seed = seed;
        self.classifiers.iter_mut().for_each(|c| c.seed = seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.lpq.validate()?;
        self.preprocess.validate(self.lpq.window_size)?;
        self.synth.validate()?;
        self.bees.validate()?;
        self.pso.validate()?;
        for c in &self.classifiers {
            c.validate()?;
        }
        if self.classifiers.is_empty() {
            return Err(Error::InvalidConfig("classifiers must not be empty".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidConfig("cv_folds must be at least 2".into()));
        }
        if !(self.lasso_lambda >= 0.0) {
            return Err(Error::InvalidConfig("lasso_lambda must be >= 0".into()));
        }
        for s in &self.selectors {
            self.selector(s)?;
        }
        Ok(())
    }

    pub fn selector(&self, method: &str) -> Result<Selector> {
        Ok(match method {
            "bees" => Selector::Bees { params: self.bees.clone(), fitness: self.fitness.clone() },
            "pso" => Selector::Pso { params: self.pso.clone(), fitness: self.fitness.clone() },
            "pca" => Selector::Pca,
            "lasso" => Selector::Lasso { lambda: self.lasso_lambda },
            other => {
                return Err(Error::InvalidConfig(format!("unknown method {other:?}; expected bees, pso, pca or lasso")))
            }
        })
    }

    pub fn classifier(&self, kind: ClassifierKind) -> ClassifierSpec {
        self.classifiers
            .iter()
            .find(|c| c.kind == kind)
            .cloned()
            .unwrap_or_else(|| ClassifierSpec { seed: self.seed, ..ClassifierSpec::new(kind) })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n").map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Parser)]
#[command(name = "swarmsel", version, about = "LPQ features, swarm feature selection and classifier comparison")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON run configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, or output file for `extract` and `select`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the synthetic grating images and their manifest.
    Synth {
        #[command(flatten)]
        common: Common,
    },
    /// Preprocess and LPQ-encode every image of a manifest into a feature CSV.
    Extract {
        manifest: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit a reducer (bees, pso, pca or lasso) on a feature CSV.
    Select {
        features: PathBuf,
        #[arg(long, default_value = "bees")]
        method: String,
        #[arg(long)]
        nf: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-validate one classifier on a feature CSV.
    TrainEval {
        features: PathBuf,
        /// Reducer JSON from `select`, or `none` for all features.
        #[arg(long, default_value = "none")]
        reducer: String,
        #[arg(long, default_value = "knn")]
        classifier: String,
        #[arg(long)]
        folds: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Data, extraction, every selector × nf and every classifier.
    Pipeline {
        #[arg(long)]
        nf: Option<usize>,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        folds: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. Errors are reported on stderr.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = parallel::with_env_pool(|| run(cli.command)).and_then(|r| r);
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("swarmsel: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Synth { common } => {
            let cfg = effective(&common, |_| Ok(()))?;
            let dir = common.out.unwrap_or_else(|| cfg.output_dir.clone());
            cmd_synth(&cfg, &dir)
        }
        Command::Extract { manifest, common } => {
            let cfg = effective(&common, |_| Ok(()))?;
            let out = common.out.unwrap_or_else(|| cfg.output_dir.join("features.csv"));
            cmd_extract(&manifest, &cfg, &out)
        }
        Command::Select { features, method, nf, common } => {
            let cfg = effective(&common, |c| {
                if let Some(nf) = nf {
                    c.fitness.nf = nf;
                }
                Ok(())
            })?;
            let out = common
                .out
                .unwrap_or_else(|| cfg.output_dir.join(format!("reducer_{method}_{}.json", cfg.fitness.nf)));
            cmd_select(&features, &method, cfg.fitness.nf, &cfg, &out).map(|_| ())
        }
        Command::TrainEval { features, reducer, classifier, folds, common } => {
            let cfg = effective(&common, |c| {
                if let Some(k) = folds {
                    c.cv_folds = k;
                }
                Ok(())
            })?;
            let kind: ClassifierKind = classifier.parse()?;
            let reducer = if reducer == "none" { None } else { Some(PathBuf::from(reducer)) };
            let dir = common.out.unwrap_or_else(|| cfg.output_dir.clone());
            cmd_train_eval(&features, reducer.as_deref(), kind, &cfg, &dir).map(|_| ())
        }
        Command::Pipeline { nf, method, folds, common } => {
            let cfg = effective(&common, |c| {
                if let Some(nf) = nf {
                    c.nf_list = vec![nf];
                }
                if let Some(m) = &method {
                    c.selectors = vec![m.clone()];
                }
                if let Some(k) = folds {
                    c.cv_folds = k;
                }
                Ok(())
            })?;
            let dir = common.out.unwrap_or_else(|| cfg.output_dir.clone());
            cmd_pipeline(&cfg, &dir).map(|_| ())
        }
    }
}

fn effective(common: &Common, overrides: impl FnOnce(&mut RunConfig) -> Result<()>) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg = cfg.with_seed(seed);
    }
    overrides(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Copies the effective config into `dir` with `output_dir` pointing there.
fn echo_config(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let echoed = RunConfig { output_dir: dir.to_path_buf(), ..cfg.clone() };
    echoed.write(&dir.join(CONFIG_ECHO))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn parent_dir(file: &Path) -> &Path {
    file.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or_else(|| Path::new("."))
}

/// Synthetic images as 8-bit PGM plus `manifest.csv`.
pub fn cmd_synth(cfg: &RunConfig, dir: &Path) -> Result<()> {
    create_dir(dir)?;
    let (images, labels) = dataset::synth_generate(&cfg.synth)?;
    let mut manifest = String::from("path,label\n");
    for (i, (img, label)) in images.iter().zip(labels.labels()).enumerate() {
        let name = format!("img_{i:05}.pgm");
        imaging::save_pgm(img, &dir.join(&name))?;
        manifest.push_str(&format!("{name},{label}\n"));
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest).map_err(|e| Error::io(&path, e))?;
    echo_config(cfg, dir)
}

/// Loads every manifest image and writes one feature row per entry, in
/// manifest order. Row ids are the image file names.
pub fn cmd_extract(manifest: &Path, cfg: &RunConfig, out: &Path) -> Result<()> {
    let (features, labels) = manifest_features(manifest, cfg)?;
    create_dir(parent_dir(out))?;
    dataset::features_write(&features, &labels, out)?;
    echo_config(cfg, parent_dir(out))
}

pub fn manifest_features(manifest: &Path, cfg: &RunConfig) -> Result<(FeatureMatrix, LabelVec)> {
    let entries = dataset::load_manifest(manifest)?;
    let images = entries
        .iter()
        .map(|e| imaging::load_image(&e.path).map(Image::into_gray))
        .collect::<Result<Vec<GrayImage>>>()?;
    let ids = entries
        .iter()
        .map(|e| e.path.file_name().map_or_else(|| e.path.display().to_string(), |n| n.to_string_lossy().into_owned()))
        .collect();
    let labels = LabelVec::new(entries.iter().map(|e| e.label).collect())?;
    Ok((lpq::extract_matrix(&images, ids, &cfg.preprocess, &cfg.lpq)?, labels))
}

/// Synthetic features exactly as `synth` followed by `extract` would produce
/// them: images pass through 8-bit quantization first.
pub fn synth_features(cfg: &RunConfig) -> Result<(FeatureMatrix, LabelVec)> {
    let (images, labels) = dataset::synth_generate(&cfg.synth)?;
    let images = images
        .iter()
        .map(|img| GrayImage::from_u8(img.width(), img.height(), &img.quantize_u8()))
        .collect::<Result<Vec<_>>>()?;
    let ids = (0..images.len()).map(|i| format!("img_{i:05}.pgm")).collect();
    Ok((lpq::extract_matrix(&images, ids, &cfg.preprocess, &cfg.lpq)?, labels))
}

pub fn cmd_select(features: &Path, method: &str, nf: usize, cfg: &RunConfig, out: &Path) -> Result<ReducerDoc> {
    let (x, y) = dataset::features_read(features)?;
    let d = x.n_features();
    if nf < 2 || nf + 1 > d {
        return Err(Error::InvalidConfig(format!("nf must lie in 2..={}, got {nf}", d.saturating_sub(1))));
    }
    let selector = cfg.selector(method)?;
    let fitted = selector.fit(&x, &y, nf)?;
    let doc = ReducerDoc::from_fitted(&selector, &fitted)?;
    create_dir(parent_dir(out))?;
    doc.write(out)?;
    echo_config(cfg, parent_dir(out))?;
    Ok(doc)
}

/// Writes `report.json`, `confusion.csv` and per-class ROC SVGs into `dir`.
pub fn cmd_train_eval(
    features: &Path,
    reducer: Option<&Path>,
    kind: ClassifierKind,
    cfg: &RunConfig,
    dir: &Path,
) -> Result<eval::EvalReport> {
    let (x, y) = dataset::features_read(features)?;
    let spec = match reducer {
        None => ReducerSpec::None,
        Some(p) => {
            let r: Reducer = ReducerDoc::read(p)?.to_reducer()?;
            if r.input_dim() != x.n_features() {
                return Err(Error::DimensionMismatch { expected: x.n_features(), got: r.input_dim() });
            }
            ReducerSpec::Fixed(r)
        }
    };
    let report = eval::cross_validate(&cfg.classifier(kind), &spec, &x, &y, cfg.cv_folds, cfg.seed)?;
    eval::write_report_artifacts(&report, dir)?;
    echo_config(cfg, dir)?;
    Ok(report)
}

/// Writes `features.csv`, `grid.json` and `cells/<classifier>/<selector>_<nf>/`
/// report artifacts into `dir`.
pub fn cmd_pipeline(cfg: &RunConfig, dir: &Path) -> Result<eval::GridRun> {
    create_dir(dir)?;
    let (x, y) = match &cfg.manifest {
        Some(m) => manifest_features(m, cfg)?,
        None => synth_features(cfg)?,
    };
    let d = x.n_features();
    if let Some(&bad) = cfg.nf_list.iter().find(|&&nf| nf < 2 || nf + 1 > d) {
        return Err(Error::InvalidConfig(format!("nf_list entries must lie in 2..={}, got {bad}", d - 1)));
    }
    dataset::features_write(&x, &y, &dir.join("features.csv"))?;
    let selectors = cfg.selectors.iter().map(|s| cfg.selector(s)).collect::<Result<Vec<_>>>()?;
    let run = eval::comparison_grid(&x, &y, &selectors, &cfg.nf_list, &cfg.classifiers, cfg.cv_folds, cfg.seed)?;
    run.grid.write_json(&dir.join("grid.json"))?;
    for (row, name) in run.reports.iter().zip(&run.grid.classifiers) {
        for (report, col) in row.iter().zip(&run.grid.columns) {
            eval::write_report_artifacts(report, &dir.join("cells").join(name).join(format!("{}_{}", col.selector, col.nf)))?;
        }
    }
    echo_config(cfg, dir)?;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trip() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"cv_fold": 3}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"bees": {"populaton": 3}}"#).is_err());
        let partial: RunConfig = serde_json::from_str(r#"{"cv_folds": 3}"#).unwrap();
        assert_eq!(partial.cv_folds, 3);
    }

    #[test]
    fn seed_propagates() {
        let cfg = RunConfig::default().with_seed(9);
        assert_eq!((cfg.synth.seed, cfg.fitness.seed), (9, 9));
        assert!(cfg.classifiers.iter().all(|c| c.seed == 9));
    }

    #[test]
    fn unknown_method() {
        assert!(RunConfig::default().selector("firefly").is_err());
    }

    #[test]
    fn parses_subcommands() {
        let cli = Cli::try_parse_from(["swarmsel", "select", "f.csv", "--method", "pca", "--nf", "8"]).unwrap();
        assert!(matches!(cli.command, Command::Select { nf: Some(8), .. }));
        assert!(Cli::try_parse_from(["swarmsel", "train-eval", "f.csv", "--folds", "3"]).is_ok());
        assert_eq!(run_from(["swarmsel", "bogus"]), 2);
    }
}
