//! Quick oracle-equivalence and invariant checks, runnable from the CLI.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::features::{FeatureMatrix, PcaModel};
use crate::kernels::{fidelity_kernel, fidelity_train_gram, oracle_kernel, rbf_train_gram, KernelKind};
use crate::oracle::{dft, dual_objective, solve_dual_qp};
use crate::products::form_rdm;
use crate::radar_sim::{synthesize_cube_with, NoiseFloor, RadarConfig, Scatterer, Scene};
use crate::svm::{kkt_violation, solve_smo, BinaryProblem};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Check { name, passed, detail }
    }
}

fn angles(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(0.0..PI)).collect()
}

fn quantum_oracle(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst = 0.0f64;
    for d in 1..=8 {
        for _ in 0..25 {
            let (x, y) = (angles(rng, d), angles(rng, d));
            let fast = fidelity_kernel(
                &Array2::from_shape_vec((1, d), x.clone()).expect("1 x d").view(),
                &Array2::from_shape_vec((1, d), y.clone()).expect("1 x d").view(),
            )?
            .values[[0, 0]];
            worst = worst.max((fast - oracle_kernel(&x, &y)?).abs());
        }
    }
    Ok(Check::new(
        "fidelity kernel matches gate-level statevector",
        worst < 1e-10,
        format!("max |diff| = {worst:.2e} over d = 1..8"),
    ))
}

fn single_qubit(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (x, y) = (rng.gen_range(0.0..PI), rng.gen_range(0.0..PI));
        let k = fidelity_kernel(&Array2::from_elem((1, 1), x).view(), &Array2::from_elem((1, 1), y).view())?;
        worst = worst.max((k.values[[0, 0]] - (y - x).cos().powi(2)).abs());
    }
    Ok(Check::new(
        "single-qubit kernel equals cos^2(y - x)",
        worst < 1e-12,
        format!("max |diff| = {worst:.2e}"),
    ))
}

fn gram_validity(rng: &mut ChaCha8Rng) -> Result<Check> {
    let (mut asym, mut diag, mut min_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..10 {
        let (n, d) = (rng.gen_range(4..=32), rng.gen_range(1..=8));
        let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(0.0..PI));
        for k in [rbf_train_gram(&x.view(), 1.0 / d as f64), fidelity_train_gram(&x.view())?] {
            asym = asym.max(k.max_asymmetry());
            diag = diag.max(k.max_diagonal_error());
            min_eig = min_eig.min(k.min_eigenvalue());
        }
    }
    Ok(Check::new(
        "Gram matrices are symmetric, unit-diagonal and PSD",
        asym < 1e-12 && diag < 1e-12 && min_eig >= -1e-9,
        format!("asymmetry {asym:.1e}, diagonal error {diag:.1e}, min eigenvalue {min_eig:.2e}"),
    ))
}

fn smo_oracle(rng: &mut ChaCha8Rng) -> Result<Check> {
    let (mut worst_rel, mut worst_kkt) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let n = rng.gen_range(4..=16);
        let x = Array2::from_shape_fn((n, 2), |_| rng.gen_range(0.0..PI));
        let mut y: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let gram = rbf_train_gram(&x.view(), 0.5);
        let problem = BinaryProblem::new(gram.values.view(), KernelKind::Rbf, y.clone(), 1.0)?;
        let model = solve_smo(&problem, 1e-6, 10_000)?;
        let reference = dual_objective(&gram.values.view(), &y, &solve_dual_qp(&gram.values.view(), &y, 1.0, 20_000));
        worst_rel = worst_rel.max((model.dual_objective - reference).abs() / reference.abs().max(1e-12));
        worst_kkt = worst_kkt.max(kkt_violation(&model, &problem));
    }
    Ok(Check::new(
        "SMO dual objective matches projected-gradient QP",
        worst_rel < 1e-6 && worst_kkt < 1e-3,
        format!("max relative gap {worst_rel:.1e}, max KKT violation {worst_kkt:.1e}"),
    ))
}

fn rdm_placement(rng: &mut ChaCha8Rng) -> Result<Check> {
    let cfg = RadarConfig::uav();
    let mut worst = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let range = rng.gen_range(5.0..70.0);
        let v = rng.gen_range(-20.0..20.0);
        let scene = Scene::new(vec![Scatterer::on_boresight(range, v, 1.0)], 0);
        let cube = synthesize_cube_with(&scene, &cfg, 0, NoiseFloor::None)?;
        let (row, col) = form_rdm(&cube)?.argmax();
        let mid = range + v * cfg.cpi_s() / 2.0;
        worst.0 = worst.0.max((col as f64 - cfg.range_bin_of(mid)).abs());
        worst.1 = worst.1.max((row as f64 - cfg.doppler_row_of(v)).abs());
    }
    Ok(Check::new(
        "single scatterer peaks at its predicted range-Doppler cell",
        worst.0 <= 1.0 && worst.1 <= 1.0,
        format!("max offset {:.2} range bins, {:.2} Doppler bins", worst.0, worst.1),
    ))
}

fn fft_vs_dft(rng: &mut ChaCha8Rng) -> Check {
    use rustfft::FftPlanner;
    let n = 64;
    let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
    let mut fast = x.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut fast);
    let worst = dft(&x)
        .iter()
        .zip(&fast)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Check::new("FFT matches direct DFT", worst < 1e-9, format!("max |diff| = {worst:.2e}"))
}

fn pca_orthonormal(rng: &mut ChaCha8Rng) -> Result<Check> {
    let x = Array2::from_shape_fn((30, 50), |_| rng.gen_range(-1.0..1.0));
    let p = PcaModel::fit(&FeatureMatrix::new(x, vec![0; 30])?, 8)?;
    let g = p.components.dot(&p.components.t());
    let err = g
        .indexed_iter()
        .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    let ordered = p.explained_variance.windows(2).all(|w| w[0] >= w[1]);
    Ok(Check::new(
        "PCA components are orthonormal and ordered",
        err < 1e-10 && ordered,
        format!("max |VV^T - I| = {err:.1e}"),
    ))
}

/// Runs every check with a fixed seed.
pub fn run_selftest() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f);
    Ok(vec![
        quantum_oracle(&mut rng)?,
        single_qubit(&mut rng)?,
        gram_validity(&mut rng)?,
        smo_oracle(&mut rng)?,
        rdm_placement(&mut rng)?,
        fft_vs_dft(&mut rng),
        pca_orthonormal(&mut rng)?,
    ])
}
