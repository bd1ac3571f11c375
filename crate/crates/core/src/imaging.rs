//! Grayscale images and the preprocessing chain applied before feature
//! extraction: gray conversion, intensity adjustment, histogram equalization
//! and resizing, in that order.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major grid of intensities.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Empty(format!("image dimensions {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::DimensionMismatch { expected: width * height, got: pixels.len() });
        }
        if let Some(bad) = pixels.iter().find(|p| !p.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite pixel value {bad}")));
        }
        Ok(GrayImage { width, height, pixels })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        GrayImage { width, height, pixels }
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Self {
        Self::from_fn(width, height, |_, _| value)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    /// Applies `f` to every pixel. The result is not clamped.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| f(p)).collect(),
        }
    }

    /// Rounds to 8-bit levels, as stored on disk.
    pub fn quantize_u8(&self) -> Vec<u8> {
        self.pixels.iter().map(|p| (p.clamp(0.0, 1.0) * 255.0).round() as u8).collect()
    }

    pub fn from_u8(width: usize, height: usize, data: &[u8]) -> Result<Self> {
        GrayImage::new(width, height, data.iter().map(|&v| f64::from(v) / 255.0).collect())
    }
}

/// Three-channel image with intensities in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f64; 3]>,
}

/// A decoded input image, before gray conversion.
#[derive(Debug, Clone, PartialEq)]
pub enum Image {
    Gray(GrayImage),
    Rgb(RgbImage),
}

impl Image {
    pub fn into_gray(self) -> GrayImage {
        match self {
            Image::Gray(g) => g,
            Image::Rgb(rgb) => to_gray(&rgb),
        }
    }
}

/// BT.601 luminosity.
pub fn to_gray(img: &RgbImage) -> GrayImage {
    let pixels = img
        .pixels
        .iter()
        .map(|[r, g, b]| (0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 1.0))
        .collect();
    GrayImage { width: img.width, height: img.height, pixels }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub target_width: usize,
    pub target_height: usize,
    pub low_percentile: f64,
    pub high_percentile: f64,
    pub equalize_bins: usize,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            target_width: 64,
            target_height: 64,
            low_percentile: 0.01,
            high_percentile: 0.99,
            equalize_bins: 256,
        }
    }
}

impl PreprocessConfig {
    /// `min_size` is the smallest side the downstream window accepts.
    pub fn validate(&self, min_size: usize) -> Result<()> {
        if !(0.0..1.0).contains(&self.low_percentile)
            || !(self.high_percentile > 0.0 && self.high_percentile <= 1.0)
            || self.low_percentile >= self.high_percentile
        {
            return Err(Error::InvalidConfig(format!(
                "percentiles must satisfy 0 <= low < high <= 1, got ({}, {})",
                self.low_percentile, self.high_percentile
            )));
        }
        if self.target_width < min_size || self.target_height < min_size {
            return Err(Error::InvalidConfig(format!(
                "target size {}x{} is below the window size {min_size}",
                self.target_width, self.target_height
            )));
        }
        if self.equalize_bins < 2 {
            return Err(Error::InvalidConfig("equalize_bins must be at least 2".into()));
        }
        Ok(())
    }
}

/// Linearly interpolated percentile of sorted data, `p` in [0, 1].
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let t = pos - lo as f64;
    sorted[lo] + t * (sorted[hi] - sorted[lo])
}

/// Percentile contrast stretch: the low percentile maps to 0, the high one to
/// 1, values outside are clipped. A zero-width range yields an all-zero image.
pub fn adjust_intensity(img: &GrayImage, cfg: &PreprocessConfig) -> GrayImage {
    let mut sorted = img.pixels.clone();
    sorted.sort_by(f64::total_cmp);
    let lo = percentile(&sorted, cfg.low_percentile);
    let hi = percentile(&sorted, cfg.high_percentile);
    if hi <= lo {
        return img.map(|_| 0.0);
    }
    let span = hi - lo;
    img.map(|p| ((p - lo) / span).clamp(0.0, 1.0))
}

/// Histogram equalization over `bins` quantization levels.
///
/// Each pixel maps to the cumulative fraction of pixels at or below its level,
/// rescaled so the lowest occupied level lands on 0 and the highest on 1. An
/// image with a single occupied level maps to all zeros.
pub fn equalize_hist(img: &GrayImage, bins: usize) -> GrayImage {
    assert!(bins >= 2, "equalize_hist needs at least 2 bins");
    let level = |p: f64| ((p.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
    let mut hist = vec![0usize; bins];
    for &p in &img.pixels {
        hist[level(p)] += 1;
    }
    let n = img.pixels.len() as f64;
    let mut cdf = vec![0.0; bins];
    let mut acc = 0usize;
    for (c, h) in cdf.iter_mut().zip(&hist) {
        acc += h;
        *c = acc as f64 / n;
    }
    let cdf_min = hist.iter().position(|&h| h > 0).map(|i| cdf[i]).unwrap_or(1.0);
    if cdf_min >= 1.0 {
        return img.map(|_| 0.0);
    }
    let denom = 1.0 - cdf_min;
    img.map(|p| ((cdf[level(p)] - cdf_min) / denom).clamp(0.0, 1.0))
}

fn lerp_within(a: f64, b: f64, t: f64) -> f64 {
    (a + t * (b - a)).clamp(a.min(b), a.max(b))
}

/// Bilinear resize on a corner-aligned grid: output corners sample input
/// corners exactly. A single output column (row) samples the input center.
pub fn resize_bilinear(img: &GrayImage, width: usize, height: usize) -> GrayImage {
    assert!(width > 0 && height > 0, "resize target must be at least 1x1");
    if width == img.width && height == img.height {
        return img.clone();
    }
    let coord = |i: usize, n_out: usize, n_in: usize| -> (usize, usize, f64) {
        let src = if n_out == 1 {
            (n_in - 1) as f64 / 2.0
        } else {
            i as f64 * (n_in - 1) as f64 / (n_out - 1) as f64
        };
        let i0 = (src.floor() as usize).min(n_in - 1);
        let i1 = (i0 + 1).min(n_in - 1);
        (i0, i1, src - i0 as f64)
    };
    let xs: Vec<_> = (0..width).map(|x| coord(x, width, img.width)).collect();
    GrayImage::from_fn(width, height, |x, y| {
        let (y0, y1, ty) = coord(y, height, img.height);
        let (x0, x1, tx) = xs[x];
        let top = lerp_within(img.get(x0, y0), img.get(x1, y0), tx);
        let bottom = lerp_within(img.get(x0, y1), img.get(x1, y1), tx);
        lerp_within(top, bottom, ty)
    })
}

/// Gray conversion happens at decode time (`Image::into_gray`); this runs the
/// remaining steps and always returns the configured target dimensions.
pub fn preprocess(img: &GrayImage, cfg: &PreprocessConfig) -> GrayImage {
    let adjusted = adjust_intensity(img, cfg);
    let equalized = equalize_hist(&adjusted, cfg.equalize_bins);
    resize_bilinear(&equalized, cfg.target_width, cfg.target_height)
}

pub fn preprocess_image(img: Image, cfg: &PreprocessConfig) -> GrayImage {
    preprocess(&img.into_gray(), cfg)
}

/// Decodes PNG or binary PGM. 8-bit data scales by 1/255, 16-bit (depth) data
/// by 1/65535.
pub fn load_image(path: &Path) -> Result<Image> {
    let wrap = |source| Error::Image { path: path.to_path_buf(), source };
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    let decoded = reader.decode().map_err(wrap)?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let gray = |pixels: Vec<f64>| GrayImage::new(w, h, pixels).map(Image::Gray);
    let rgb = |pixels: Vec<[f64; 3]>| Ok(Image::Rgb(RgbImage { width: w, height: h, pixels }));
    match decoded {
        DynamicImage::ImageLuma8(b) => gray(b.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect()),
        DynamicImage::ImageLumaA8(b) => gray(b.pixels().map(|p| f64::from(p.0[0]) / 255.0).collect()),
        DynamicImage::ImageLuma16(b) => gray(b.pixels().map(|p| f64::from(p.0[0]) / 65535.0).collect()),
        DynamicImage::ImageLumaA16(b) => gray(b.pixels().map(|p| f64::from(p.0[0]) / 65535.0).collect()),
        DynamicImage::ImageRgb16(b) => {
            rgb(b.pixels().map(|p| p.0.map(|c| f64::from(c) / 65535.0)).collect())
        }
        other => rgb(other.to_rgb8().pixels().map(|p| p.0.map(|c| f64::from(c) / 255.0)).collect()),
    }
}

/// Writes an 8-bit binary PGM (P5).
pub fn save_pgm(img: &GrayImage, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let encoder = PnmEncoder::new(BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
    encoder
        .write_image(&img.quantize_u8(), img.width as u32, img.height as u32, ExtendedColorType::L8)
        .map_err(|source| Error::Image { path: path.to_path_buf(), source })
}
