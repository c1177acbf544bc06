mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mpeg7_annotate::classifiers::{
    fit_c45, fit_nb, posterior_from_log_scores, predict_from_log_scores, root_split, C45Params, LabeledDataset,
};
use mpeg7_annotate::descriptors::{extract_cld_raw, extract_ehd, extract_scd, EhdParams};
use mpeg7_annotate::raster::{grid_average, ColorSpace, RasterImage};
use mpeg7_annotate::reduction::fit_pca;

fn names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("c{i}")).collect()
}

fn gray_image(n: usize, pixels: &[u8]) -> RasterImage {
    RasterImage::new(n, n, ColorSpace::Gray, pixels.iter().map(|&p| p as f64).collect()).unwrap()
}

/// Bin totals over all sub-images; every sub-image has the same block count
/// for the square sizes used here.
fn ehd_mass(img: &RasterImage) -> [f64; 5] {
    let v = extract_ehd(img, &EhdParams::default()).unwrap();
    let mut mass = [0.0; 5];
    for group in v.values().chunks(5) {
        for (m, g) in mass.iter_mut().zip(group) {
            *m += g;
        }
    }
    mass
}

fn rotate_clockwise(n: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = vec![0; n * n];
    for y in 0..n {
        for x in 0..n {
            out[x * n + (n - 1 - y)] = pixels[y * n + x];
        }
    }
    out
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn image_strategy(max_side: usize) -> impl Strategy<Value = (usize, usize, Vec<u8>)> {
    (8..=max_side, 8..=max_side).prop_flat_map(|(w, h)| (Just(w), Just(h), proptest::collection::vec(any::<u8>(), w * h * 3)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ehd_rotation_swaps_vertical_and_horizontal(pixels in proptest::collection::vec(0u8..8, 64 * 64), scale in 1u8..32) {
        let pixels: Vec<u8> = pixels.iter().map(|p| p * scale).collect();
        let before = ehd_mass(&gray_image(64, &pixels));
        let after = ehd_mass(&gray_image(64, &rotate_clockwise(64, &pixels)));
        prop_assert_eq!(before[0], after[1]);
        prop_assert_eq!(before[1], after[0]);
        prop_assert_eq!(before[2] + before[3], after[2] + after[3]);
        prop_assert_eq!(before[4], after[4]);
    }

    #[test]
    fn ehd_groups_are_bounded((w, h, bytes) in image_strategy(40)) {
        let v = extract_ehd(&RasterImage::from_rgb8(w, h, &bytes).unwrap(), &EhdParams::default()).unwrap();
        for group in v.values().chunks(5) {
            prop_assert!(group.iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert!(group.iter().sum::<f64>() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn scd_ignores_pixel_order((w, h, bytes) in image_strategy(32), seed in any::<u64>()) {
        let img = RasterImage::from_rgb8(w, h, &bytes).unwrap();
        let mut px: Vec<&[f64]> = img.pixels().collect();
        px.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = RasterImage::new(w, h, ColorSpace::Rgb, px.concat()).unwrap();
        let (a, b) = (extract_scd(&img).unwrap(), extract_scd(&shuffled).unwrap());
        prop_assert!((a.values()[0] - 1.0).abs() <= 1e-9);
        prop_assert!(max_abs_diff(a.values(), b.values()) <= 1e-12);
    }

    #[test]
    fn cld_ignores_order_within_cells(cell in 1usize..5, bytes in proptest::collection::vec(any::<u8>(), 3 * 64 * 16), seed in any::<u64>()) {
        let n = 8 * cell;
        let img = RasterImage::from_rgb8(n, n, &bytes[..n * n * 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples = img.samples().to_vec();
        for cy in 0..8 {
            for cx in 0..8 {
                let mut idx: Vec<usize> = (0..cell * cell).map(|k| (cy * cell + k / cell) * n + cx * cell + k % cell).collect();
                let orig = idx.clone();
                idx.shuffle(&mut rng);
                for (&dst, &src) in orig.iter().zip(&idx) {
                    samples[dst * 3..dst * 3 + 3].copy_from_slice(&img.samples()[src * 3..src * 3 + 3]);
                }
            }
        }
        let permuted = RasterImage::new(n, n, ColorSpace::Rgb, samples).unwrap();
        let (a, b) = (extract_cld_raw(&img).unwrap(), extract_cld_raw(&permuted).unwrap());
        prop_assert!(max_abs_diff(a.values(), b.values()) <= 1e-9);
    }

    #[test]
    fn cld_preserves_energy((w, h, bytes) in image_strategy(40)) {
        let img = RasterImage::from_rgb8(w, h, &bytes).unwrap();
        let cld = extract_cld_raw(&img).unwrap();
        let ycc = mpeg7_annotate::raster::convert_space(&img, ColorSpace::YCbCr).unwrap();
        let grid = grid_average(&ycc, 8, 8).unwrap();
        for ch in 0..3 {
            let spatial: f64 = grid.channel_plane(ch).iter().map(|v| v * v).sum();
            let spectral: f64 = cld.values()[ch * 64..ch * 64 + 64].iter().map(|v| v * v).sum();
            prop_assert!((spatial - spectral).abs() <= 1e-9 * spatial.max(1.0));
        }
    }

    #[test]
    fn nb_posteriors_sum_to_one(
        rows in proptest::collection::vec((0usize..3, proptest::collection::vec(-50.0f64..50.0, 4)), 3..30),
        x in proptest::collection::vec(-100.0f64..100.0, 4),
    ) {
        let (mut labels, features): (Vec<usize>, Vec<Vec<f64>>) = rows.into_iter().unzip();
        labels[0] = 0;
        labels[1] = 1;
        labels[2] = 2;
        let model = fit_nb(&LabeledDataset::new(features, labels, names(3)).unwrap()).unwrap();
        let post = model.posterior(&x).unwrap();
        prop_assert!((post.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        prop_assert!(post.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn log_score_shift_keeps_argmax(scores in proptest::collection::vec(-1e4f64..1e4, 1..8), shift in -1e4f64..1e4) {
        let shifted: Vec<f64> = scores.iter().map(|s| s + shift).collect();
        prop_assert_eq!(predict_from_log_scores(&scores), predict_from_log_scores(&shifted));
        let (a, b) = (posterior_from_log_scores(&scores), posterior_from_log_scores(&shifted));
        prop_assert!(max_abs_diff(&a, &b) <= 1e-9);
    }

    #[test]
    fn c45_fits_distinct_training_data(
        rows in proptest::collection::vec((0usize..3, -1e3f64..1e3, -1e3f64..1e3), 2..40),
    ) {
        let mut seen = std::collections::HashSet::new();
        let rows: Vec<_> = rows.into_iter().filter(|r| seen.insert(r.1.to_bits())).collect();
        prop_assume!(rows.len() >= 2);
        let labels: Vec<usize> = rows.iter().map(|r| r.0).collect();
        let features: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.1, r.2]).collect();
        let data = LabeledDataset::new(features.clone(), labels.clone(), names(3)).unwrap();
        let tree = fit_c45(&data, &C45Params { min_samples: 1, max_depth: None }).unwrap();
        for (x, &y) in features.iter().zip(&labels) {
            prop_assert_eq!(tree.predict(x).unwrap(), y);
        }
    }

    #[test]
    fn c45_ignores_monotone_rescaling(
        rows in proptest::collection::vec((0usize..3, -20i32..20, -20i32..20), 2..30),
    ) {
        let labels: Vec<usize> = rows.iter().map(|r| r.0).collect();
        let raw: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.1 as f64, r.2 as f64]).collect();
        let g = |v: f64| v * v * v + 2.0 * v;
        let warped: Vec<Vec<f64>> = raw.iter().map(|r| r.iter().map(|&v| g(v)).collect()).collect();
        let a = fit_c45(&LabeledDataset::new(raw.clone(), labels.clone(), names(3)).unwrap(), &C45Params::default()).unwrap();
        let b = fit_c45(&LabeledDataset::new(warped.clone(), labels, names(3)).unwrap(), &C45Params::default()).unwrap();
        prop_assert_eq!(a.leaves(), b.leaves());
        prop_assert_eq!(a.depth(), b.depth());
        for (x, y) in raw.iter().zip(&warped) {
            prop_assert_eq!(a.predict(x).unwrap(), b.predict(y).unwrap());
        }
    }

    #[test]
    fn c45_root_matches_brute_force(
        rows in proptest::collection::vec((0usize..3, 0u8..4, -5.0f64..5.0), 2..13),
    ) {
        let labels: Vec<usize> = rows.iter().map(|r| r.0).collect();
        let features: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.1 as f64, r.2]).collect();
        let data = LabeledDataset::new(features.clone(), labels.clone(), names(3)).unwrap();
        let got = root_split(&data).map(|s| (s.feature, s.threshold));
        prop_assert_eq!(got, common::brute_root_split(&features, &labels, 3));
    }

    #[test]
    fn pca_matches_jacobi_oracle(
        rows in proptest::collection::vec(proptest::collection::vec(-10.0f64..10.0, 3), 5..30),
        scale in proptest::collection::vec(0.1f64..5.0, 3),
    ) {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().zip(&scale).map(|(v, s)| v * s).collect()).collect();
        let model = fit_pca(&rows, 3).unwrap();
        let (mut values, _) = common::jacobi_eigen(common::covariance3(&rows));
        values.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in model.eigenvalues.iter().zip(values) {
            prop_assert!((got - want.max(0.0)).abs() <= 1e-6 * want.abs().max(1.0));
        }
    }
}
