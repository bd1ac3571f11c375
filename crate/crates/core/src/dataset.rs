//! Feature matrices, labels, manifests, feature CSV files, stratified
//! holdout splits and the synthetic grating dataset.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::GrayImage;
use crate::rng::{self, tag};

/// Row-major sample × feature matrix with per-row identifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n_samples: usize,
    n_features: usize,
    values: Vec<f64>,
    ids: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(n_samples: usize, n_features: usize, values: Vec<f64>, ids: Vec<String>) -> Result<Self> {
        if values.len() != n_samples * n_features {
            return Err(Error::DimensionMismatch { expected: n_samples * n_features, got: values.len() });
        }
        if ids.len() != n_samples {
            return Err(Error::DimensionMismatch { expected: n_samples, got: ids.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("feature matrix contains non-finite values".into()));
        }
        Ok(FeatureMatrix { n_samples, n_features, values, ids })
    }

    /// Builds a matrix from rows, naming them `0, 1, ...`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: bad.len() });
        }
        let ids = (0..rows.len()).map(|i| i.to_string()).collect();
        FeatureMatrix::new(rows.len(), d, rows.concat(), ids)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.n_features.max(1)).take(self.n_samples)
    }

    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            n_samples: indices.len(),
            n_features: self.n_features,
            values,
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
        }
    }

    pub fn select_columns(&self, columns: &[usize]) -> Result<FeatureMatrix> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.n_features) {
            return Err(Error::DimensionMismatch { expected: self.n_features, got: bad + 1 });
        }
        let mut values = Vec::with_capacity(self.n_samples * columns.len());
        for row in self.rows() {
            values.extend(columns.iter().map(|&c| row[c]));
        }
        Ok(FeatureMatrix { n_samples: self.n_samples, n_features: columns.len(), values, ids: self.ids.clone() })
    }

    pub(crate) fn from_parts_unchecked(n_samples: usize, n_features: usize, values: Vec<f64>, ids: Vec<String>) -> Self {
        debug_assert_eq!(values.len(), n_samples * n_features);
        FeatureMatrix { n_samples, n_features, values, ids }
    }
}

/// Column z-scoring fitted on one set of rows. Columns whose spread is
/// negligible against their magnitude are treated as constant and map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    /// Population standard deviation; 0 marks a constant column.
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(m: &FeatureMatrix) -> Self {
        Self::fit_rows(m, 0..m.n_samples())
    }

    pub fn fit_rows(m: &FeatureMatrix, rows: impl IntoIterator<Item = usize> + Clone) -> Self {
        let d = m.n_features();
        let mut mean = vec![0.0; d];
        let mut n = 0usize;
        for i in rows.clone() {
            n += 1;
            for (acc, v) in mean.iter_mut().zip(m.row(i)) {
                *acc += v;
            }
        }
        let nf = n.max(1) as f64;
        mean.iter_mut().for_each(|v| *v /= nf);
        let mut var = vec![0.0; d];
        for i in rows {
            for ((acc, v), mu) in var.iter_mut().zip(m.row(i)).zip(&mean) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let std = var
            .iter()
            .zip(&mean)
            .map(|(v, mu)| {
                let s = (v / nf).sqrt();
                if s <= 1e-12 * (1.0 + mu.abs()) { 0.0 } else { s }
            })
            .collect();
        Standardizer { mean, std }
    }

    #[inline]
    pub fn apply_row(&self, row: &[f64], out: &mut [f64]) {
        for j in 0..row.len() {
            out[j] = if self.std[j] == 0.0 { 0.0 } else { (row[j] - self.mean[j]) / self.std[j] };
        }
    }

    pub fn transform(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        if m.n_features() != self.mean.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), got: m.n_features() });
        }
        let d = m.n_features();
        let mut values = vec![0.0; m.values.len()];
        for (i, out) in values.chunks_mut(d.max(1)).enumerate().take(m.n_samples()) {
            self.apply_row(m.row(i), out);
        }
        Ok(FeatureMatrix::from_parts_unchecked(m.n_samples(), d, values, m.ids.clone()))
    }
}

/// Class labels `1..=C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVec {
    labels: Vec<u32>,
    n_classes: usize,
}

impl LabelVec {
    /// Every class in `1..=max` must occur, and there must be at least two.
    pub fn new(labels: Vec<u32>) -> Result<Self> {
        let n_classes = labels.iter().copied().max().unwrap_or(0) as usize;
        if let Some(&bad) = labels.iter().find(|&&l| l == 0) {
            return Err(Error::LabelOutOfRange { label: bad, classes: n_classes });
        }
        if n_classes < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 classes, found {n_classes}")));
        }
        let counts = class_counts(&labels, n_classes);
        if let Some(c) = counts.iter().position(|&n| n == 0) {
            return Err(Error::ClassTooSmall { class: c as u32 + 1, count: 0, needed: 1 });
        }
        Ok(LabelVec { labels, n_classes })
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn counts(&self) -> Vec<usize> {
        class_counts(&self.labels, self.n_classes)
    }

    /// Sample indices grouped by class, ascending within each class.
    pub fn indices_by_class(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l as usize - 1].push(i);
        }
        groups
    }

    /// Subset of labels. The class count is kept even if some class vanishes.
    pub fn select(&self, indices: &[usize]) -> LabelVec {
        LabelVec { labels: indices.iter().map(|&i| self.labels[i]).collect(), n_classes: self.n_classes }
    }
}

fn class_counts(labels: &[u32], n_classes: usize) -> Vec<usize> {
    let mut counts = vec![0; n_classes];
    for &l in labels {
        if (1..=n_classes).contains(&(l as usize)) {
            counts[l as usize - 1] += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: u32,
}

/// Reads a `path,label` CSV. Relative paths resolve against the manifest's
/// directory; rows keep file order and duplicates are kept.
pub fn load_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = reader.headers().map_err(|e| Error::parse(path, e.to_string()))?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["path", "label"] {
        return Err(Error::parse(path, format!("expected header \"path,label\", got {:?}", headers.iter().collect::<Vec<_>>())));
    }
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut entries = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let row = line + 2;
        if record.len() != 2 {
            return Err(Error::parse(path, format!("row {row}: expected 2 fields, got {}", record.len())));
        }
        let label: u32 = record[1]
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, format!("row {row}: label {:?} is not a positive integer", &record[1])))?;
        if label == 0 {
            return Err(Error::parse(path, format!("row {row}: labels start at 1")));
        }
        let p = PathBuf::from(record[0].trim());
        let p = if p.is_relative() { base.join(p) } else { p };
        entries.push(ManifestEntry { path: p, label });
    }
    if entries.is_empty() {
        return Err(Error::parse(path, "manifest has no rows"));
    }
    Ok(entries)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_classes: usize,
    pub samples_per_class: usize,
    pub image_size: usize,
    pub noise_sigma: f64,
    pub blur_sigma: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { n_classes: 5, samples_per_class: 200, image_size: 64, noise_sigma: 1.25, blur_sigma: 1.0, seed: 42 }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 || self.samples_per_class < 2 {
            return Err(Error::InvalidConfig("synthetic data needs >= 2 classes and >= 2 samples per class".into()));
        }
        if self.image_size < 3 {
            return Err(Error::InvalidConfig("synthetic image_size must be >= 3".into()));
        }
        if !(self.noise_sigma >= 0.0) || !(self.blur_sigma >= 0.0) {
            return Err(Error::InvalidConfig("noise_sigma and blur_sigma must be >= 0".into()));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.n_classes * self.samples_per_class
    }
}

const GRATING_AMPLITUDE: f64 = 0.35;

/// Sinusoidal gratings: class c has orientation π(c-1)/C and (2+c) cycles per
/// image, with a random phase per sample, Gaussian pixel noise, then Gaussian
/// blur, clipped to [0, 1]. Samples are ordered class by class.
pub fn synth_generate(cfg: &SynthConfig) -> Result<(Vec<GrayImage>, LabelVec)> {
    cfg.validate()?;
    let labels: Vec<u32> = (0..cfg.n_samples()).map(|i| (i / cfg.samples_per_class) as u32 + 1).collect();
    let images = (0..cfg.n_samples())
        .into_par_iter()
        .map(|i| synth_sample(cfg, i, labels[i]))
        .collect();
    Ok((images, LabelVec::new(labels)?))
}

fn synth_sample(cfg: &SynthConfig, index: usize, class: u32) -> GrayImage {
    let mut rng = rng::stream(cfg.seed, &[tag::SYNTH, index as u64]);
    let c = f64::from(class);
    let theta = PI * (c - 1.0) / cfg.n_classes as f64;
    let freq = 2.0 + c;
    let phase = rng.random::<f64>() * 2.0 * PI;
    let n = cfg.image_size;
    let (ct, st) = (theta.cos(), theta.sin());
    let noise = Normal::new(0.0, cfg.noise_sigma).expect("validated sigma");
    let img = GrayImage::from_fn(n, n, |x, y| {
        let t = (x as f64 * ct + y as f64 * st) / n as f64;
        0.5 + GRATING_AMPLITUDE * (2.0 * PI * freq * t + phase).sin() + noise.sample(&mut rng)
    });
    gaussian_blur(&img, cfg.blur_sigma).map(|p| p.clamp(0.0, 1.0))
}

/// Separable Gaussian blur with edge clamping; sigma 0 is the identity.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> GrayImage {
    if sigma <= 0.0 {
        return img.clone();
    }
    let radius = (3.0 * sigma).ceil() as isize;
    let mut kernel: Vec<f64> = (-radius..=radius).map(|d| (-(d * d) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|k| *k /= total);
    let (w, h) = (img.width() as isize, img.height() as isize);
    let tap = |v: isize, n: isize| v.clamp(0, n - 1) as usize;
    let horiz = GrayImage::from_fn(w as usize, h as usize, |x, y| {
        kernel.iter().enumerate().map(|(k, wt)| wt * img.get(tap(x as isize + k as isize - radius, w), y)).sum()
    });
    GrayImage::from_fn(w as usize, h as usize, |x, y| {
        kernel.iter().enumerate().map(|(k, wt)| wt * horiz.get(x, tap(y as isize + k as isize - radius, h))).sum()
    })
}

/// Writes `id,label,f0,...,f{D-1}` with LF line endings. Values use the
/// shortest decimal form that parses back to the same `f64`.
pub fn features_write(m: &FeatureMatrix, labels: &LabelVec, path: &Path) -> Result<()> {
    if labels.len() != m.n_samples() {
        return Err(Error::DimensionMismatch { expected: m.n_samples(), got: labels.len() });
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| Error::parse(path, e.to_string());
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend((0..m.n_features()).map(|j| format!("f{j}")));
    out.write_record(&header).map_err(csv_err)?;
    for (i, row) in m.rows().enumerate() {
        let mut record = vec![m.ids()[i].clone(), labels.labels()[i].to_string()];
        record.extend(row.iter().map(|v| v.to_string()));
        out.write_record(&record).map_err(csv_err)?;
    }
    let mut inner = out.into_inner().map_err(|e| Error::parse(path, e.to_string()))?;
    inner.flush().map_err(|e| Error::io(path, e))
}

pub fn features_read(path: &Path) -> Result<(FeatureMatrix, LabelVec)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(file);
    let headers = reader.headers().map_err(|e| Error::parse(path, e.to_string()))?.clone();
    if headers.len() < 3 || &headers[0] != "id" || &headers[1] != "label" {
        return Err(Error::parse(path, "expected header \"id,label,f0,...\""));
    }
    for (j, h) in headers.iter().skip(2).enumerate() {
        if h != format!("f{j}") {
            return Err(Error::parse(path, format!("column {} should be f{j}, got {h:?}", j + 2)));
        }
    }
    let d = headers.len() - 2;
    let (mut ids, mut labels, mut values) = (Vec::new(), Vec::new(), Vec::new());
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let row = line + 2;
        if record.len() != d + 2 {
            return Err(Error::parse(path, format!("row {row}: expected {} columns, got {}", d + 2, record.len())));
        }
        ids.push(record[0].to_string());
        labels.push(
            record[1].parse::<u32>().map_err(|_| Error::parse(path, format!("row {row}: bad label {:?}", &record[1])))?,
        );
        for field in record.iter().skip(2) {
            let v: f64 = field.parse().map_err(|_| Error::parse(path, format!("row {row}: bad value {field:?}")))?;
            values.push(v);
        }
    }
    if ids.is_empty() {
        return Err(Error::parse(path, "no data rows"));
    }
    let n = ids.len();
    let m = FeatureMatrix::new(n, d, values, ids).map_err(|e| Error::parse(path, e.to_string()))?;
    let labels = LabelVec::new(labels).map_err(|e| Error::parse(path, e.to_string()))?;
    Ok((m, labels))
}

/// Per class, `round(count * test_fraction)` samples (kept within
/// `1..count-1`) go to the test side. Both index lists come back sorted.
pub fn stratified_split(labels: &LabelVec, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!("test fraction must lie in (0, 1), got {test_fraction}")));
    }
    let mut train = Vec::with_capacity(labels.len());
    let mut test = Vec::new();
    for (c, mut group) in labels.indices_by_class().into_iter().enumerate() {
        if group.len() < 2 {
            return Err(Error::ClassTooSmall { class: c as u32 + 1, count: group.len(), needed: 2 });
        }
        let mut rng = rng::stream(seed, &[tag::SPLIT, c as u64]);
        group.shuffle(&mut rng);
        let n_test = ((group.len() as f64 * test_fraction).round() as usize).clamp(1, group.len() - 1);
        test.extend_from_slice(&group[..n_test]);
        train.extend_from_slice(&group[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}
