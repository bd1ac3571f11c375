//! Local phase quantization.
//!
//! At every pixel whose M×M neighbourhood fits inside the image, the local
//! Fourier response is taken at four low frequencies, u1 = (a, 0),
//! u2 = (0, a), u3 = (a, a) and u4 = (a, -a) with a = 1/M. The signs of the
//! real and imaginary parts, ordered `[Re u1..u4, Im u1..u4]`, give the bits
//! of an 8-bit code (bit j weighted 2^j, a zero response counts as positive).
//! The descriptor is the L1-normalized 256-bin histogram of codes.
//!
//! Responses are computed separably. The zero-sum 1-D passes are evaluated in
//! difference form (`f(c) + f(-c) - 2 f(0)` and `f(c) - f(-c)`), so a constant
//! neighbourhood produces exactly zero and adding a constant to the image
//! cannot change any code beyond rounding noise.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::FeatureMatrix;
use crate::error::{Error, Result};
use crate::imaging::{preprocess, GrayImage, PreprocessConfig};
use crate::linalg::symmetric_eigen;

pub const N_BINS: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpqConfig {
    pub window_size: usize,
    pub decorrelate: bool,
    pub rho: f64,
}

impl Default for LpqConfig {
    fn default() -> Self {
        LpqConfig { window_size: 7, decorrelate: false, rho: 0.9 }
    }
}

impl LpqConfig {
    pub fn with_window(window_size: usize) -> Self {
        LpqConfig { window_size, ..Default::default() }
    }

    pub fn alpha(&self) -> f64 {
        1.0 / self.window_size as f64
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.window_size;
        if m < 3 || m % 2 == 0 {
            return Err(Error::InvalidConfig(format!("LPQ window must be odd and >= 3, got {m}")));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidConfig(format!("rho must lie in [0, 1), got {}", self.rho)));
        }
        Ok(())
    }

    fn radius(&self) -> usize {
        (self.window_size - 1) / 2
    }
}

/// The four frequency vectors, as (horizontal, vertical) components.
pub fn frequencies(cfg: &LpqConfig) -> [(f64, f64); 4] {
    let a = cfg.alpha();
    [(a, 0.0), (0.0, a), (a, a), (a, -a)]
}

/// Complex M×M kernel, row-major with rows indexed by vertical offset.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub size: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Kernel {
    pub fn at(&self, row: usize, col: usize) -> (f64, f64) {
        let i = row * self.size + col;
        (self.re[i], self.im[i])
    }
}

/// Kernels `exp(-2πi u·x)` for offsets x in [-(M-1)/2, (M-1)/2]².
pub fn stft_filters(cfg: &LpqConfig) -> Result<[Kernel; 4]> {
    cfg.validate()?;
    let m = cfg.window_size;
    let r = cfg.radius() as isize;
    Ok(frequencies(cfg).map(|(ux, uy)| {
        let mut re = Vec::with_capacity(m * m);
        let mut im = Vec::with_capacity(m * m);
        for dy in -r..=r {
            for dx in -r..=r {
                let phase = 2.0 * PI * (ux * dx as f64 + uy * dy as f64);
                re.push(phase.cos());
                im.push(-phase.sin());
            }
        }
        Kernel { size: m, re, im }
    }))
}

/// Per-pixel codes over the valid region, `(H-M+1) x (W-M+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CodeImage {
    pub width: usize,
    pub height: usize,
    pub codes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpqFeature {
    pub histogram: Vec<f64>,
}

/// Precomputed tables for repeated extraction with one configuration.
#[derive(Debug, Clone)]
pub struct LpqExtractor {
    cfg: LpqConfig,
    cos: Vec<f64>,
    sin: Vec<f64>,
    whitening: Option<[[f64; 8]; 8]>,
}

impl LpqExtractor {
    pub fn new(cfg: &LpqConfig) -> Result<Self> {
        cfg.validate()?;
        let omega = 2.0 * PI * cfg.alpha();
        let r = cfg.radius();
        // index c holds offset c (1..=r); slot 0 unused
        let cos = (0..=r).map(|c| (omega * c as f64).cos()).collect();
        let sin = (0..=r).map(|c| (omega * c as f64).sin()).collect();
        let whitening = if cfg.decorrelate { Some(whitening_matrix(cfg)?) } else { None };
        Ok(LpqExtractor { cfg: cfg.clone(), cos, sin, whitening })
    }

    pub fn config(&self) -> &LpqConfig {
        &self.cfg
    }

    pub fn whitening(&self) -> Option<&[[f64; 8]; 8]> {
        self.whitening.as_ref()
    }

    /// Σ_c cos(ωc) f(c) for a zero-sum cosine kernel, read at `f(base + c*stride)`.
    #[inline]
    fn cos_pass(&self, f: &[f64], base: usize, stride: usize) -> f64 {
        let centre = 2.0 * f[base];
        let mut acc = 0.0;
        for c in 1..self.cos.len() {
            acc += self.cos[c] * (f[base + c * stride] + f[base - c * stride] - centre);
        }
        acc
    }

    /// Σ_c sin(ωc) f(c).
    #[inline]
    fn sin_pass(&self, f: &[f64], base: usize, stride: usize) -> f64 {
        let mut acc = 0.0;
        for c in 1..self.sin.len() {
            acc += self.sin[c] * (f[base + c * stride] - f[base - c * stride]);
        }
        acc
    }

    /// The eight responses `[Re u1..u4, Im u1..u4]` for every valid pixel,
    /// before decorrelation.
    pub fn responses(&self, img: &GrayImage) -> Result<(usize, usize, Vec<[f64; 8]>)> {
        let m = self.cfg.window_size;
        let (w, h) = (img.width(), img.height());
        if w < m || h < m {
            return Err(Error::ImageTooSmall { width: w, height: h, window: m });
        }
        let r = self.cfg.radius();
        let (vw, vh) = (w - m + 1, h - m + 1);
        let px = img.pixels();

        // Horizontal pass over all rows, valid columns only; stored with row stride vw.
        let mut dc = vec![0.0; h * vw];
        let mut h_re = vec![0.0; h * vw];
        let mut h_im = vec![0.0; h * vw];
        for y in 0..h {
            for vx in 0..vw {
                let base = y * w + vx + r;
                let o = y * vw + vx;
                dc[o] = px[base - r..=base + r].iter().sum();
                h_re[o] = self.cos_pass(px, base, 1);
                h_im[o] = -self.sin_pass(px, base, 1);
            }
        }

        let mut out = Vec::with_capacity(vw * vh);
        for vy in 0..vh {
            for vx in 0..vw {
                let base = (vy + r) * vw + vx;
                let (mut f1_re, mut f1_im) = (0.0, 0.0);
                for dy in 0..m {
                    let o = (vy + dy) * vw + vx;
                    f1_re += h_re[o];
                    f1_im += h_im[o];
                }
                let c_dc = self.cos_pass(&dc, base, vw);
                let s_dc = self.sin_pass(&dc, base, vw);
                let c_re = self.cos_pass(&h_re, base, vw);
                let s_re = self.sin_pass(&h_re, base, vw);
                let c_im = self.cos_pass(&h_im, base, vw);
                let s_im = self.sin_pass(&h_im, base, vw);
                // vertical e^{-iωy} for u2, u3 and e^{+iωy} for u4
                let (f2_re, f2_im) = (c_dc, -s_dc);
                let (f3_re, f3_im) = (c_re + s_im, c_im - s_re);
                let (f4_re, f4_im) = (c_re - s_im, c_im + s_re);
                out.push([f1_re, f2_re, f3_re, f4_re, f1_im, f2_im, f3_im, f4_im]);
            }
        }
        Ok((vw, vh, out))
    }

    pub fn codes(&self, img: &GrayImage) -> Result<CodeImage> {
        let (width, height, responses) = self.responses(img)?;
        let codes = responses
            .iter()
            .map(|v| match &self.whitening {
                Some(t) => quantize(&apply(t, v)),
                None => quantize(v),
            })
            .collect();
        Ok(CodeImage { width, height, codes })
    }

    pub fn extract(&self, img: &GrayImage) -> Result<LpqFeature> {
        lpq_histogram(&self.codes(img)?)
    }
}

fn apply(t: &[[f64; 8]; 8], v: &[f64; 8]) -> [f64; 8] {
    let mut out = [0.0; 8];
    for (o, row) in out.iter_mut().zip(t) {
        *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

/// Bit j set iff component j >= 0.
pub fn quantize(v: &[f64; 8]) -> u8 {
    v.iter()
        .enumerate()
        .fold(0u8, |code, (j, &x)| if x >= 0.0 { code | (1 << j) } else { code })
}

/// Rotation onto the eigenvectors of the response covariance under a
/// `rho^distance` pixel correlation model. Rows are eigenvectors, ordered by
/// descending eigenvalue.
pub fn whitening_matrix(cfg: &LpqConfig) -> Result<[[f64; 8]; 8]> {
    let kernels = stft_filters(cfg)?;
    let m = cfg.window_size;
    let n = m * m;
    let mut rows: Vec<&[f64]> = kernels.iter().map(|k| k.re.as_slice()).collect();
    rows.extend(kernels.iter().map(|k| k.im.as_slice()));

    let pos: Vec<(f64, f64)> = (0..n).map(|i| ((i % m) as f64, (i / m) as f64)).collect();
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let d = ((pos[i].0 - pos[j].0).powi(2) + (pos[i].1 - pos[j].1).powi(2)).sqrt();
            cov[i * n + j] = if d == 0.0 { 1.0 } else { cfg.rho.powf(d) };
        }
    }
    let mut d = [0.0; 64];
    for a in 0..8 {
        let tmp: Vec<f64> = (0..n).map(|j| (0..n).map(|i| rows[a][i] * cov[i * n + j]).sum()).collect();
        for b in 0..8 {
            d[a * 8 + b] = tmp.iter().zip(rows[b]).map(|(x, y)| x * y).sum();
        }
    }
    let eig = symmetric_eigen(&d, 8);
    let mut t = [[0.0; 8]; 8];
    for (row, v) in t.iter_mut().zip(&eig.vectors) {
        row.copy_from_slice(v);
    }
    Ok(t)
}

pub fn lpq_codes(img: &GrayImage, cfg: &LpqConfig) -> Result<CodeImage> {
    LpqExtractor::new(cfg)?.codes(img)
}

pub fn lpq_histogram(codes: &CodeImage) -> Result<LpqFeature> {
    if codes.codes.is_empty() {
        return Err(Error::Empty("code image".into()));
    }
    let mut counts = [0usize; N_BINS];
    for &c in &codes.codes {
        counts[c as usize] += 1;
    }
    let total = codes.codes.len() as f64;
    Ok(LpqFeature { histogram: counts.iter().map(|&c| c as f64 / total).collect() })
}

pub fn extract(img: &GrayImage, cfg: &LpqConfig) -> Result<LpqFeature> {
    LpqExtractor::new(cfg)?.extract(img)
}

/// Preprocesses and encodes every image; one 256-bin row per image.
pub fn extract_matrix(
    images: &[GrayImage],
    ids: Vec<String>,
    pre: &PreprocessConfig,
    cfg: &LpqConfig,
) -> Result<FeatureMatrix> {
    let extractor = LpqExtractor::new(cfg)?;
    pre.validate(cfg.window_size)?;
    let rows: Vec<Vec<f64>> = images
        .par_iter()
        .map(|img| Ok(extractor.extract(&preprocess(img, pre))?.histogram))
        .collect::<Result<_>>()?;
    FeatureMatrix::new(images.len(), N_BINS, rows.concat(), ids)
}
