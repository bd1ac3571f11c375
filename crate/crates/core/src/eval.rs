//! Stratified k-fold cross-validation, confusion matrices, one-vs-rest ROC
//! curves and the classifier × reducer comparison grid.
//!
//! Reducers and standardization are fitted on the training folds only. Test
//! predictions are pooled across folds (ordered by sample index) before the
//! confusion matrix and ROC curves are computed.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{self, ClassifierSpec};
use crate::dataset::{FeatureMatrix, LabelVec};
use crate::error::{Error, Result};
use crate::rng::{self, tag};
use crate::selectors::{Reducer, SelectionMask, Selector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<u64>>,
    /// `(fpr, tpr)` points per class.
    pub per_class_roc: Vec<Vec<(f64, f64)>>,
    pub per_class_auc: Vec<f64>,
    pub fold_accuracies: Vec<f64>,
}

impl EvalReport {
    pub fn mean_fold_accuracy(&self) -> f64 {
        self.fold_accuracies.iter().sum::<f64>() / self.fold_accuracies.len().max(1) as f64
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_text(path, serde_json::to_string_pretty(self)? + "\n")
    }
}

/// `k` disjoint folds covering every index. Each class is shuffled and dealt
/// round-robin, continuing from where the previous class stopped, so fold
/// sizes and per-fold class counts differ by at most one.
pub fn stratified_kfold(labels: &LabelVec, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for (c, mut members) in labels.indices_by_class().into_iter().enumerate() {
        if members.len() < k {
            return Err(Error::ClassTooSmall { class: c as u32 + 1, count: members.len(), needed: k });
        }
        members.shuffle(&mut rng::stream(seed, &[tag::KFOLD, c as u64]));
        for (pos, i) in members.into_iter().enumerate() {
            folds[(offset + pos) % k].push(i);
        }
        offset += labels.counts()[c];
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

pub fn confusion_matrix(y_true: &[u32], y_pred: &[u32], n_classes: usize) -> Result<Vec<Vec<u64>>> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch { expected: y_true.len(), got: y_pred.len() });
    }
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        for l in [t, p] {
            if l == 0 || l as usize > n_classes {
                return Err(Error::LabelOutOfRange { label: l, classes: n_classes });
            }
        }
        m[t as usize - 1][p as usize - 1] += 1;
    }
    Ok(m)
}

/// ROC points from a descending threshold sweep (tied scores form a single
/// step) and the trapezoidal area under them. The area is accumulated in
/// integers as `Σ Δfp · (tp_prev + tp)` over `2·P·N`, so it equals the
/// Mann-Whitney statistic exactly.
pub fn roc_auc(scores: &[f64], positives: &[bool]) -> Result<(Vec<(f64, f64)>, f64)> {
    if scores.len() != positives.len() {
        return Err(Error::DimensionMismatch { expected: scores.len(), got: positives.len() });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidConfig("ROC scores must not be NaN".into()));
    }
    let p = positives.iter().filter(|&&b| b).count() as u64;
    let n = scores.len() as u64 - p;
    if p == 0 || n == 0 {
        return Err(Error::DegenerateSplit("ROC needs at least one positive and one negative".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp, mut twice_area) = (0u64, 0u64, 0u128);
    let mut i = 0;
    while i < order.len() {
        let (tp0, fp0) = (tp, fp);
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if positives[order[i]] { tp += 1 } else { fp += 1 }
            i += 1;
        }
        twice_area += (fp - fp0) as u128 * (tp0 + tp) as u128;
        points.push((fp as f64 / n as f64, tp as f64 / p as f64));
    }
    Ok((points, twice_area as f64 / (2 * p * n) as f64))
}

/// How the feature space is reduced before classification.
#[derive(Debug, Clone, PartialEq)]
pub enum ReducerSpec {
    /// All columns.
    None,
    /// Refit on each training fold.
    Fit { selector: Selector, nf: usize },
    /// Applied as given to every fold.
    Fixed(Reducer),
}

/// Cross-validated report for one classifier and one reducer.
pub fn cross_validate(
    spec: &ClassifierSpec,
    reducer: &ReducerSpec,
    features: &FeatureMatrix,
    labels: &LabelVec,
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    let column = match reducer {
        ReducerSpec::None => Column::Identity,
        ReducerSpec::Fixed(r) => Column::Fixed(r),
        ReducerSpec::Fit { selector, nf } => Column::Fit(selector, std::slice::from_ref(nf)),
    };
    Ok(run_folds(&[column], std::slice::from_ref(spec), features, labels, k, seed)?.remove(0).remove(0))
}

/// Same folds, one report per classifier; the reducer is fitted once per fold.
pub fn cross_validate_many(
    specs: &[ClassifierSpec],
    reducer: &ReducerSpec,
    features: &FeatureMatrix,
    labels: &LabelVec,
    k: usize,
    seed: u64,
) -> Result<Vec<EvalReport>> {
    let column = match reducer {
        ReducerSpec::None => Column::Identity,
        ReducerSpec::Fixed(r) => Column::Fixed(r),
        ReducerSpec::Fit { selector, nf } => Column::Fit(selector, std::slice::from_ref(nf)),
    };
    Ok(run_folds(&[column], specs, features, labels, k, seed)?.remove(0))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridColumn {
    pub selector: String,
    pub nf: usize,
}

/// Mean fold accuracy per classifier (rows) and reducer column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGrid {
    pub classifiers: Vec<String>,
    pub columns: Vec<GridColumn>,
    pub cells: Vec<Vec<f64>>,
}

impl ComparisonGrid {
    pub fn cell(&self, classifier: &str, selector: &str, nf: usize) -> Option<f64> {
        let r = self.classifiers.iter().position(|c| c == classifier)?;
        let c = self.columns.iter().position(|c| c.selector == selector && c.nf == nf)?;
        Some(self.cells[r][c])
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_text(path, serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Full reports behind each grid cell, `reports[row][column]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRun {
    pub grid: ComparisonGrid,
    pub reports: Vec<Vec<EvalReport>>,
}

/// One `none` column on all features, then one column per selector and nf.
pub fn comparison_grid(
    features: &FeatureMatrix,
    labels: &LabelVec,
    selectors: &[Selector],
    nf_list: &[usize],
    classifiers: &[ClassifierSpec],
    k: usize,
    seed: u64,
) -> Result<GridRun> {
    let mut plan = vec![Column::Identity];
    let mut columns = vec![GridColumn { selector: "none".into(), nf: features.n_features() }];
    for s in selectors {
        plan.push(Column::Fit(s, nf_list));
        columns.extend(nf_list.iter().map(|&nf| GridColumn { selector: s.name().into(), nf }));
    }
    let by_column = run_folds(&plan, classifiers, features, labels, k, seed)?;
    let reports: Vec<Vec<EvalReport>> =
        (0..classifiers.len()).map(|r| by_column.iter().map(|col| col[r].clone()).collect()).collect();
    let cells = reports.iter().map(|row| row.iter().map(EvalReport::mean_fold_accuracy).collect()).collect();
    let grid = ComparisonGrid {
        classifiers: classifiers.iter().map(|c| c.kind.name().to_string()).collect(),
        columns,
        cells,
    };
    Ok(GridRun { grid, reports })
}

/// `count` uniformly random `nf`-of-`n_features` masks.
pub fn random_masks(n_features: usize, nf: usize, count: usize, seed: u64) -> Result<Vec<SelectionMask>> {
    if nf == 0 || nf > n_features {
        return Err(Error::InvalidConfig(format!("nf must lie in 1..={n_features}, got {nf}")));
    }
    (0..count)
        .map(|i| {
            let mut r = rng::stream(seed, &[tag::RANDOM_MASK, i as u64]);
            SelectionMask::new(rand::seq::index::sample(&mut r, n_features, nf).into_vec(), n_features)
        })
        .collect()
}

enum Column<'a> {
    Identity,
    Fixed(&'a Reducer),
    /// Expands to one column per nf.
    Fit(&'a Selector, &'a [usize]),
}

impl Column<'_> {
    fn width(&self) -> usize {
        match self {
            Column::Fit(_, nfs) => nfs.len(),
            _ => 1,
        }
    }
}

struct FoldOutput {
    test: Vec<usize>,
    /// `[column][classifier]`
    predictions: Vec<Vec<classifiers::Prediction>>,
}

/// Reports indexed `[column][classifier]`, with `Fit` columns expanded.
fn run_folds(
    plan: &[Column<'_>],
    specs: &[ClassifierSpec],
    features: &FeatureMatrix,
    labels: &LabelVec,
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<EvalReport>>> {
    if features.n_samples() != labels.len() {
        return Err(Error::DimensionMismatch { expected: features.n_samples(), got: labels.len() });
    }
    if specs.is_empty() {
        return Err(Error::Empty("classifier list".into()));
    }
    for spec in specs {
        spec.validate()?;
    }
    let folds = stratified_kfold(labels, k, seed)?;
    let outputs: Vec<FoldOutput> = folds
        .par_iter()
        .map(|test| run_fold(plan, specs, features, labels, test))
        .collect::<Result<_>>()?;

    let n_columns: usize = plan.iter().map(Column::width).sum();
    let mut reports = Vec::with_capacity(n_columns);
    for col in 0..n_columns {
        let mut row = Vec::with_capacity(specs.len());
        for s in 0..specs.len() {
            let per_fold: Vec<(&[usize], &classifiers::Prediction)> =
                outputs.iter().map(|o| (o.test.as_slice(), &o.predictions[col][s])).collect();
            row.push(aggregate(&per_fold, labels)?);
        }
        reports.push(row);
    }
    Ok(reports)
}

fn run_fold(
    plan: &[Column<'_>],
    specs: &[ClassifierSpec],
    features: &FeatureMatrix,
    labels: &LabelVec,
    test: &[usize],
) -> Result<FoldOutput> {
    let mut in_test = vec![false; labels.len()];
    test.iter().for_each(|&i| in_test[i] = true);
    let train: Vec<usize> = (0..labels.len()).filter(|&i| !in_test[i]).collect();
    let (x_train, y_train) = (features.select_rows(&train), labels.select(&train));
    let x_test = features.select_rows(test);

    let mut reducers: Vec<Option<Reducer>> = Vec::new();
    for column in plan {
        match column {
            Column::Identity => reducers.push(None),
            Column::Fixed(r) => reducers.push(Some((*r).clone())),
            Column::Fit(selector, nfs) => reducers.extend(
                selector.fit_many(&x_train, &y_train, nfs)?.into_iter().map(|f| Some(f.reducer)),
            ),
        }
    }
    let mut predictions = Vec::with_capacity(reducers.len());
    for reducer in &reducers {
        let (tr, te) = match reducer {
            None => (x_train.clone(), x_test.clone()),
            Some(r) => (r.apply(&x_train)?, r.apply(&x_test)?),
        };
        let row = specs
            .par_iter()
            .map(|spec| classifiers::fit(spec, &tr, &y_train)?.predict(&te))
            .collect::<Result<Vec<_>>>()?;
        predictions.push(row);
    }
    Ok(FoldOutput { test: test.to_vec(), predictions })
}

fn aggregate(per_fold: &[(&[usize], &classifiers::Prediction)], labels: &LabelVec) -> Result<EvalReport> {
    let n = labels.len();
    let c = labels.n_classes();
    let mut predicted = vec![0u32; n];
    let mut scores = vec![Vec::new(); n];
    let mut fold_accuracies = Vec::with_capacity(per_fold.len());
    for (test, pred) in per_fold {
        let mut correct = 0usize;
        for (j, &i) in test.iter().enumerate() {
            predicted[i] = pred.labels[j];
            scores[i] = pred.scores[j].clone();
            correct += usize::from(pred.labels[j] == labels.labels()[i]);
        }
        fold_accuracies.push(correct as f64 / test.len() as f64);
    }
    let confusion = confusion_matrix(labels.labels(), &predicted, c)?;
    let trace: u64 = (0..c).map(|i| confusion[i][i]).sum();
    let mut per_class_roc = Vec::with_capacity(c);
    let mut per_class_auc = Vec::with_capacity(c);
    for class in 0..c {
        let s: Vec<f64> = scores.iter().map(|row| row[class]).collect();
        let pos: Vec<bool> = labels.labels().iter().map(|&l| l as usize == class + 1).collect();
        let (points, auc) = roc_auc(&s, &pos)?;
        per_class_roc.push(points);
        per_class_auc.push(auc);
    }
    Ok(EvalReport { accuracy: trace as f64 / n as f64, confusion, per_class_roc, per_class_auc, fold_accuracies })
}

/// Header `true\pred,1,..,C`, one row per true class.
pub fn write_confusion_csv(confusion: &[Vec<u64>], path: &Path) -> Result<()> {
    let mut out = String::from("true\\pred");
    for j in 1..=confusion.len() {
        write!(out, ",{j}").unwrap();
    }
    out.push('\n');
    for (i, row) in confusion.iter().enumerate() {
        write!(out, "{}", i + 1).unwrap();
        for v in row {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    write_text(path, out)
}

/// Polyline plot of one ROC curve in the unit square.
pub fn roc_svg(points: &[(f64, f64)], title: &str) -> String {
    const SIZE: f64 = 320.0;
    const PAD: f64 = 40.0;
    let map = |(x, y): (f64, f64)| (PAD + x * SIZE, PAD + (1.0 - y) * SIZE);
    let poly: Vec<String> = points
        .iter()
        .map(|&p| {
            let (x, y) = map(p);
            format!("{x:.3},{y:.3}")
        })
        .collect();
    let full = SIZE + 2.0 * PAD;
    format!(
        concat!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{full}\" height=\"{full}\" viewBox=\"0 0 {full} {full}\">\n",
            "<title>{title}</title>\n",
            "<rect x=\"{pad}\" y=\"{pad}\" width=\"{size}\" height=\"{size}\" fill=\"none\" stroke=\"#888\"/>\n",
            "<line x1=\"{pad}\" y1=\"{bottom}\" x2=\"{right}\" y2=\"{pad}\" stroke=\"#ccc\" stroke-dasharray=\"4 4\"/>\n",
            "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\" points=\"{points}\"/>\n",
            "<text x=\"{pad}\" y=\"{label_y}\" font-size=\"14\">{title}</text>\n",
            "</svg>\n"
        ),
        full = full,
        pad = PAD,
        size = SIZE,
        bottom = PAD + SIZE,
        right = PAD + SIZE,
        label_y = PAD - 12.0,
        title = title,
        points = poly.join(" "),
    )
}

/// Writes `report.json`, `confusion.csv` and `roc_class<c>.svg` into `dir`.
pub fn write_report_artifacts(report: &EvalReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    report.write_json(&dir.join("report.json"))?;
    write_confusion_csv(&report.confusion, &dir.join("confusion.csv"))?;
    for (c, (points, auc)) in report.per_class_roc.iter().zip(&report.per_class_auc).enumerate() {
        let title = format!("class {} (AUC {auc:.4})", c + 1);
        write_text(&dir.join(format!("roc_class{}.svg", c + 1)), roc_svg(points, &title))?;
    }
    Ok(())
}

fn write_text(path: &Path, text: String) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
