mod common;

use proptest::prelude::*;
use swarmsel::dataset::{FeatureMatrix, LabelVec, Standardizer};
use swarmsel::eval::{confusion_matrix, roc_auc, stratified_kfold};
use swarmsel::imaging::{preprocess, GrayImage, PreprocessConfig};
use swarmsel::lpq::{self, LpqConfig};
use swarmsel::selectors::{decode_mask, pca_fit, FitnessContext, FitnessSpec, Objective, Reducer};

fn labelled_scores() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2usize..120).prop_flat_map(|n| {
        (prop::collection::vec(0u8..12, n), prop::collection::vec(any::<bool>(), n)).prop_map(|(s, mut p)| {
            p[0] = true;
            p[1] = false;
            (s.into_iter().map(|v| f64::from(v) / 4.0).collect(), p)
        })
    })
}

fn balanced_labels() -> impl Strategy<Value = Vec<u32>> {
    (2u32..5, 5usize..20).prop_flat_map(|(c, per)| {
        Just((0..c as usize * per).map(|i| (i % c as usize) as u32 + 1).collect::<Vec<_>>()).prop_shuffle()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn auc_is_pair_counting((scores, pos) in labelled_scores()) {
        let (points, auc) = roc_auc(&scores, &pos).unwrap();
        prop_assert_eq!(auc, common::mann_whitney(&scores, &pos));
        prop_assert_eq!(points[0], (0.0, 0.0));
        prop_assert_eq!(*points.last().unwrap(), (1.0, 1.0));
        prop_assert!(points.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
    }

    #[test]
    fn negated_distinct_scores_flip_auc(n in 2usize..80, seed in any::<u64>()) {
        use rand::{seq::SliceRandom, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut scores: Vec<f64> = (0..n).map(|i| i as f64).collect();
        scores.shuffle(&mut rng);
        let pos: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        let (_, a) = roc_auc(&scores, &pos).unwrap();
        let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
        let (_, b) = roc_auc(&neg, &pos).unwrap();
        prop_assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kfold_partitions_with_balance(labels in balanced_labels(), k in 2usize..5, seed in any::<u64>()) {
        let y = LabelVec::new(labels.clone()).unwrap();
        prop_assume!(y.counts().iter().all(|&c| c >= k));
        let folds = stratified_kfold(&y, k, seed).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for (c, &count) in y.counts().iter().enumerate() {
            for f in &folds {
                let in_fold = f.iter().filter(|&&i| labels[i] as usize == c + 1).count() as f64;
                prop_assert!((in_fold - count as f64 / k as f64).abs() < 1.0);
            }
        }
    }

    #[test]
    fn confusion_totals(pairs in prop::collection::vec((1u32..5, 1u32..5), 1..100)) {
        let (t, p): (Vec<u32>, Vec<u32>) = pairs.into_iter().unzip();
        let m = confusion_matrix(&t, &p, 4).unwrap();
        let total: u64 = m.iter().flatten().sum();
        prop_assert_eq!(total as usize, t.len());
        let trace: u64 = (0..4).map(|i| m[i][i]).sum();
        prop_assert_eq!(trace as usize, t.iter().zip(&p).filter(|(a, b)| a == b).count());
    }

    #[test]
    fn decode_mask_is_permutation_equivariant(
        weights in prop::collection::vec(-10.0f64..10.0, 3..40),
        nf_frac in 0.0f64..1.0,
        seed in any::<u64>(),
    ) {
        use rand::{seq::SliceRandom, SeedableRng};
        let d = weights.len();
        let nf = 1 + (nf_frac * (d - 1) as f64) as usize;
        let mask = decode_mask(&weights, nf).unwrap();
        prop_assert_eq!(mask.len(), nf);
        prop_assert!(mask.indices().windows(2).all(|w| w[0] < w[1]));
        // distinct weights, so the tie rule never applies
        let mut sorted = weights.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assume!(sorted.windows(2).all(|w| w[0] < w[1]));
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let permuted: Vec<f64> = (0..d).map(|i| weights[perm[i]]).collect();
        let mut mapped: Vec<usize> = decode_mask(&permuted, nf).unwrap().indices().iter().map(|&i| perm[i]).collect();
        mapped.sort_unstable();
        prop_assert_eq!(mapped, mask.indices().to_vec());
    }

    #[test]
    fn preprocess_range_and_size(w in 2usize..30, h in 2usize..30, seed in any::<u64>(), tw in 8usize..40) {
        let img = common::noise_image(w, h, seed);
        let cfg = PreprocessConfig { target_width: tw, target_height: tw + 1, ..PreprocessConfig::default() };
        let out = preprocess(&img, &cfg);
        prop_assert_eq!((out.width(), out.height()), (tw, tw + 1));
        prop_assert!(out.pixels().iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn lpq_histogram_and_power_of_two_scaling(seed in any::<u64>(), size in 7usize..24, shift in -4i32..4) {
        let img = common::noise_image(size, size, seed);
        let cfg = LpqConfig::default();
        let f = lpq::extract(&img, &cfg).unwrap();
        prop_assert_eq!(f.histogram.len(), 256);
        prop_assert!((f.histogram.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let scaled = lpq::extract(&img.map(|p| p * 2f64.powi(shift)), &cfg).unwrap();
        prop_assert_eq!(scaled, f);
    }

    #[test]
    fn standardized_training_columns(rows in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 3..30)) {
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let z = Standardizer::fit(&x).transform(&x).unwrap();
        for j in 0..3 {
            let mean = z.rows().map(|r| r[j]).sum::<f64>() / rows.len() as f64;
            prop_assert!(mean.abs() < 1e-9);
        }
    }

    #[test]
    fn full_pca_keeps_distances(rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 5..12)) {
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let r = pca_fit(&x, 4).unwrap();
        let Reducer::Projection(p) = &r else { unreachable!() };
        prop_assert!(p.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        let y = r.apply(&x).unwrap();
        let dist = |m: &FeatureMatrix, a: usize, b: usize| -> f64 {
            m.row(a).iter().zip(m.row(b)).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
        };
        for a in 0..rows.len() {
            for b in 0..a {
                prop_assert!((dist(&x, a, b) - dist(&y, a, b)).abs() < 1e-8);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fitness_shift_is_w_times_nf(w in 0.0f64..2.0, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..30).map(|_| (0..8).map(|_| rng.random::<f64>()).collect()).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let y = LabelVec::new((0..30).map(|i| (i % 3) as u32 + 1).collect()).unwrap();
        let weights: Vec<f64> = (0..8).map(|_| rng.random_range(-10.0..10.0)).collect();
        let base = FitnessContext::new(&x, &y, &FitnessSpec { nf: 3, w: 0.0, ..FitnessSpec::default() }).unwrap();
        let with_w = FitnessContext::new(&x, &y, &FitnessSpec { nf: 3, w, ..FitnessSpec::default() }).unwrap();
        let diff = with_w.cost(&weights).unwrap() - base.cost(&weights).unwrap();
        prop_assert!((diff - 3.0 * w).abs() < 1e-12);
    }
}

#[test]
fn gray_image_rejects_bad_buffer() {
    assert!(GrayImage::new(3, 3, vec![0.0; 8]).is_err());
}
