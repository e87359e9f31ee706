//! Randomized invariants over the simulator, products, features, kernels and SVM.

use std::f64::consts::PI;

use ndarray::{Array2, Array3};
use num_complex::Complex64;
use proptest::prelude::*;

use radar_qk::features::{AngularScaler, FeatureMatrix, PcaModel, Standardizer};
use radar_qk::kernels::{fidelity_kernel, fidelity_train_gram, rbf_gram, rbf_train_gram, KernelKind};
use radar_qk::products::{form_rdm, range_doppler_spectrum, rdm_energy_factor, windowed_energy};
use radar_qk::radar_sim::{synthesize_cube_with, IqCube, NoiseFloor, RadarConfig, Scatterer, Scene};
use radar_qk::svm::{kkt_violation, solve_smo, BinaryProblem};

fn matrix(rows: usize, cols: usize, lo: f64, hi: f64) -> impl Strategy<Value = Array2<f64>> {
    prop::collection::vec(lo..hi, rows * cols).prop_map(move |v| Array2::from_shape_vec((rows, cols), v).unwrap())
}

fn sized_matrix(rows: std::ops::RangeInclusive<usize>, cols: std::ops::RangeInclusive<usize>, lo: f64, hi: f64) -> impl Strategy<Value = Array2<f64>> {
    (rows, cols).prop_flat_map(move |(r, c)| matrix(r, c, lo, hi))
}

fn scatterer() -> impl Strategy<Value = Scatterer> {
    (1.0..8.0f64, -2.0..2.0f64, -0.5..0.5f64, 0.05..1.0f64).prop_map(|(r, v, y, rcs)| Scatterer {
        position_m: [r, y, 0.0],
        velocity_mps: [v, 0.0, 0.0],
        rcs,
        micro_motion: None,
    })
}

/// A binary problem with both labels present.
fn labelled_points() -> impl Strategy<Value = (Array2<f64>, Vec<f64>)> {
    (4usize..=20, 1usize..=3).prop_flat_map(|(n, d)| {
        (matrix(n, d, -2.0, 2.0), prop::collection::vec(any::<bool>(), n)).prop_map(|(x, flags)| {
            let mut y: Vec<f64> = flags.into_iter().map(|b| if b { 1.0 } else { -1.0 }).collect();
            y[0] = 1.0;
            y[1] = -1.0;
            (x, y)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn synthesis_is_linear_in_the_scene(a in prop::collection::vec(scatterer(), 1..4), b in prop::collection::vec(scatterer(), 1..4)) {
        let cfg = RadarConfig::fall();
        let cube = |s: Vec<Scatterer>| synthesize_cube_with(&Scene::new(s, 0), &cfg, 0, NoiseFloor::None).unwrap();
        let both = cube(a.iter().chain(&b).copied().collect());
        let sum = &cube(a).samples + &cube(b).samples;
        let scale = both.samples.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let worst = both.samples.iter().zip(sum.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-12 * scale, "max deviation {worst}");
    }

    #[test]
    fn synthesis_is_deterministic(s in prop::collection::vec(scatterer(), 1..4), seed in any::<u64>()) {
        let cfg = RadarConfig::fall();
        let scene = Scene::new(s, 1);
        let a = synthesize_cube_with(&scene, &cfg, seed, NoiseFloor::Absolute(0.1)).unwrap();
        let b = synthesize_cube_with(&scene, &cfg, seed, NoiseFloor::Absolute(0.1)).unwrap();
        prop_assert!(a.samples.iter().zip(b.samples.iter()).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
    }

    #[test]
    fn spectrum_energy_matches_windowed_cube(values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 32 * 16)) {
        let mut cfg = RadarConfig::fall();
        cfg.n_rx = 1;
        cfg.n_chirps = 32;
        cfg.n_fast = 16;
        cfg.usable_range_bins = 16;
        let samples = Array3::from_shape_vec((1, 32, 16), values.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).unwrap();
        let cube = IqCube { samples, config: cfg };
        let spectrum: f64 = range_doppler_spectrum(&cube).unwrap().iter().map(|z| z.norm_sqr()).sum();
        let expected = windowed_energy(&cube) * rdm_energy_factor(&cube);
        prop_assert!((spectrum - expected).abs() <= 1e-9 * expected, "{spectrum} vs {expected}");
    }

    #[test]
    fn pca_components_are_orthonormal_and_ordered(x in sized_matrix(5..=30, 3..=40, -3.0, 3.0), d in 1usize..=4) {
        let n = x.nrows();
        let d = d.min(n - 1).min(x.ncols());
        let p = PcaModel::fit(&FeatureMatrix::new(x, vec![0; n]).unwrap(), d).unwrap();
        let g = p.components.dot(&p.components.t());
        for ((i, j), v) in g.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            prop_assert!((v - want).abs() < 1e-10, "VV^T[{i},{j}] = {v}");
        }
        prop_assert!(p.explained_variance.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn standardized_training_columns_are_centred(x in sized_matrix(2..=20, 1..=10, -5.0, 5.0)) {
        let n = x.nrows();
        let fm = FeatureMatrix::new(x, vec![0; n]).unwrap();
        let s = Standardizer::fit(&fm).unwrap();
        let z = s.apply(&fm).unwrap();
        for col in z.values.columns() {
            let mean = col.sum() / n as f64;
            prop_assert!(mean.abs() < 1e-9);
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            prop_assert!(var < 1.0 + 1e-9);
        }
        prop_assert!(s.scale.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn angular_scaler_stays_in_range(train in sized_matrix(2..=20, 1..=8, -4.0, 4.0), probe in matrix(10, 8, -10.0, 10.0)) {
        let n = train.nrows();
        let d = train.ncols();
        let a = AngularScaler::fit(&FeatureMatrix::new(train.clone(), vec![0; n]).unwrap()).unwrap();
        let probe = probe.slice(ndarray::s![.., ..d]).to_owned();
        for x in [train, probe] {
            let rows = x.nrows();
            let mapped = a.apply(&FeatureMatrix::new(x, vec![0; rows]).unwrap()).unwrap();
            prop_assert!(mapped.values.iter().all(|&v| (0.0..=PI).contains(&v)));
        }
        prop_assert!(a.max.iter().zip(&a.min).all(|(hi, lo)| hi >= lo));
    }

    #[test]
    fn train_grams_are_valid(x in sized_matrix(2..=64, 1..=8, 0.0, PI), gamma in 0.01..4.0f64) {
        for k in [rbf_train_gram(&x.view(), gamma), fidelity_train_gram(&x.view()).unwrap()] {
            prop_assert!(k.max_asymmetry() < 1e-12);
            prop_assert!(k.max_diagonal_error() < 1e-12);
            prop_assert!(k.min_eigenvalue() >= -1e-9);
        }
    }

    #[test]
    fn kernel_entries_stay_in_range(x in sized_matrix(1..=10, 1..=6, 0.0, PI)) {
        let y = x.mapv(|v| PI - v);
        let q = fidelity_kernel(&x.view(), &y.view()).unwrap();
        prop_assert!(q.values.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
        let r = rbf_gram(&x.view(), &y.view(), 0.5).unwrap();
        prop_assert!(r.values.iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn smo_solution_is_feasible_and_kkt((x, y) in labelled_points(), c in 0.1..10.0f64) {
        let gram = rbf_train_gram(&x.view(), 0.7);
        let problem = BinaryProblem::new(gram.values.view(), KernelKind::Rbf, y.clone(), c).unwrap();
        let tol = 1e-3;
        let model = solve_smo(&problem, tol, 10_000).unwrap();
        let alpha = model.alphas(y.len());
        prop_assert!(alpha.iter().all(|&a| (0.0..=c).contains(&a)));
        let balance: f64 = alpha.iter().zip(&y).map(|(a, yi)| a * yi).sum();
        prop_assert!(balance.abs() < 1e-8, "sum alpha y = {balance}");
        prop_assert!(kkt_violation(&model, &problem) <= tol);
    }

    #[test]
    fn identical_grams_give_identical_models((x, y) in labelled_points()) {
        // an all-zero extra feature leaves every squared distance bit-identical
        let mut padded = Array2::zeros((x.nrows(), x.ncols() + 1));
        padded.slice_mut(ndarray::s![.., ..x.ncols()]).assign(&x);
        let g1 = rbf_train_gram(&x.view(), 0.5);
        let g2 = rbf_train_gram(&padded.view(), 0.5);
        prop_assert_eq!(&g1.values, &g2.values);
        let solve = |g: &Array2<f64>| solve_smo(&BinaryProblem::new(g.view(), KernelKind::Rbf, y.clone(), 1.0).unwrap(), 1e-3, 10_000).unwrap();
        let (a, b) = (solve(&g1.values), solve(&g2.values));
        prop_assert_eq!(a.support_indices, b.support_indices);
        prop_assert_eq!(a.alpha_y, b.alpha_y);
        prop_assert_eq!(a.bias.to_bits(), b.bias.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scatterer_lands_in_its_range_doppler_cell(range in 5.0..200.0f64, v in -20.0..20.0f64) {
        let cfg = RadarConfig::uav();
        let scene = Scene::new(vec![Scatterer::on_boresight(range, v, 1.0)], 0);
        let rdm = form_rdm(&synthesize_cube_with(&scene, &cfg, 0, NoiseFloor::None).unwrap()).unwrap();
        let (row, col) = rdm.argmax();
        let mid = range + v * cfg.cpi_s() / 2.0;
        prop_assert!((col as f64 - cfg.range_bin_of(mid)).abs() <= 1.0, "col {col} vs {}", cfg.range_bin_of(mid));
        prop_assert!((row as f64 - cfg.doppler_row_of(v)).abs() <= 1.0, "row {row} vs {}", cfg.doppler_row_of(v));
    }

    #[test]
    fn one_range_bin_delay_moves_one_column(bin in 10usize..400, frac in 0.0..0.4f64) {
        let cfg = RadarConfig::uav();
        let col = |r: f64| {
            let scene = Scene::new(vec![Scatterer::stationary([r, 0.0, 0.0], 1.0)], 0);
            form_rdm(&synthesize_cube_with(&scene, &cfg, 0, NoiseFloor::None).unwrap()).unwrap().argmax().1
        };
        let r = (bin as f64 + frac) * cfg.range_bin_m();
        prop_assert_eq!(col(r + cfg.range_bin_m()), col(r) + 1);
    }
}
