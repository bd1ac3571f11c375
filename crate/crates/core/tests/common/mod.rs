//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarmsel::dataset::{FeatureMatrix, LabelVec};
use swarmsel::imaging::GrayImage;

pub const PLANTED: [usize; 8] = [3, 9, 17, 22, 30, 41, 50, 60];

/// 64 binary columns; the label is 1 plus the number of ones among the
/// planted columns, so it is an exact linear function of them. The first 18
/// rows force every class 1..=9 to appear at least twice.
pub fn planted_data(n: usize, seed: u64) -> (FeatureMatrix, LabelVec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 64;
    let mut rows = vec![vec![0.0; d]; n];
    let mut labels = vec![0u32; n];
    for i in 0..n {
        for v in rows[i].iter_mut() {
            *v = f64::from(rng.random_range(0..2u8));
        }
        if i < 18 {
            for (k, &j) in PLANTED.iter().enumerate() {
                rows[i][j] = if k < i % 9 { 1.0 } else { 0.0 };
            }
        }
        labels[i] = 1 + PLANTED.iter().map(|&j| rows[i][j] as u32).sum::<u32>();
    }
    (FeatureMatrix::from_rows(&rows).unwrap(), LabelVec::new(labels).unwrap())
}

pub fn noise_image(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(w, h, |_, _| rng.random::<f64>())
}

/// LPQ code at `(cx, cy)` from the textbook neighbourhood DFT with every
/// exponential evaluated in place.
pub fn dft_code(img: &GrayImage, cx: usize, cy: usize, m: usize) -> u8 {
    let r = (m / 2) as isize;
    let a = 1.0 / m as f64;
    let freqs = [(a, 0.0), (0.0, a), (a, a), (a, -a)];
    let mut bits = [0.0; 8];
    for (k, (ux, uy)) in freqs.iter().enumerate() {
        let (mut re, mut im) = (0.0, 0.0);
        for dy in -r..=r {
            for dx in -r..=r {
                let p = img.get((cx as isize + dx) as usize, (cy as isize + dy) as usize);
                let phase = -2.0 * PI * (ux * dx as f64 + uy * dy as f64);
                re += p * phase.cos();
                im += p * phase.sin();
            }
        }
        bits[k] = re;
        bits[k + 4] = im;
    }
    bits.iter().enumerate().map(|(j, &x)| if x >= 0.0 { 1u8 << j } else { 0 }).sum()
}

/// `(correctly ordered pairs + ties / 2) / (P · N)`.
pub fn mann_whitney(scores: &[f64], positives: &[bool]) -> f64 {
    let mut twice = 0u64;
    let (mut p, mut n) = (0u64, 0u64);
    for (i, &pi) in positives.iter().enumerate() {
        if pi {
            p += 1;
        } else {
            n += 1;
            continue;
        }
        for (j, &pj) in positives.iter().enumerate() {
            if pj {
                continue;
            }
            twice += if scores[i] > scores[j] {
                2
            } else if scores[i] == scores[j] {
                1
            } else {
                0
            };
        }
    }
    twice as f64 / (2 * p * n) as f64
}

/// Plain KNN: z-score with population statistics, sort all training rows by
/// squared distance (stable, so ties keep the lower index), vote, and pick the
/// smallest label among the most voted.
pub fn brute_knn(train: &[Vec<f64>], labels: &[u32], test: &[Vec<f64>], k: usize, classes: usize) -> Vec<(u32, Vec<f64>)> {
    let d = train[0].len();
    let n = train.len() as f64;
    let mean: Vec<f64> = (0..d).map(|j| train.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let std: Vec<f64> = (0..d)
        .map(|j| (train.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    let z = |r: &Vec<f64>| -> Vec<f64> { (0..d).map(|j| (r[j] - mean[j]) / std[j]).collect() };
    let zt: Vec<Vec<f64>> = train.iter().map(z).collect();
    test.iter()
        .map(|q| {
            let zq = z(q);
            let mut order: Vec<(f64, usize)> = zt
                .iter()
                .enumerate()
                .map(|(i, r)| (r.iter().zip(&zq).map(|(a, b)| (a - b) * (a - b)).sum(), i))
                .collect();
            order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut votes = vec![0usize; classes];
            for &(_, i) in order.iter().take(k) {
                votes[labels[i] as usize - 1] += 1;
            }
            let best = *votes.iter().max().unwrap();
            let label = votes.iter().position(|&v| v == best).unwrap() as u32 + 1;
            (label, votes.iter().map(|&v| v as f64 / k as f64).collect())
        })
        .collect()
}

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap()).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}
