//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::ThreadPoolBuilder;

use radar_qk::bench::{
    emit_report, generate_default, make_split, perturb, prepare_split, run_benchmark, run_cell, BenchConfig,
    BenchmarkReport, Dataset, ReportFormat, SplitMode, Task, DEFAULT_DATA_SEED, DEFAULT_SEEDS,
};
use radar_qk::kernels::{fidelity_kernel, fidelity_train_gram, oracle_kernel, rbf_train_gram, KernelKind, KernelMatrix};
use radar_qk::oracle::{dual_objective, solve_dual_qp};
use radar_qk::products::form_rdm;
use radar_qk::radar_sim::{synthesize_cube_with, NoiseFloor, RadarConfig, Scatterer, Scene};
use radar_qk::svm::{kkt_violation, solve_smo, BinaryProblem, SmoParams};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn angles(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(0.0..PI)).collect()
}

fn row(v: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((1, v.len()), v.to_vec()).unwrap()
}

fn quantum_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for d in 1..=8 {
        for _ in 0..200 {
            let (x, y) = (angles(&mut rng, d), angles(&mut rng, d));
            let fast = fidelity_kernel(&row(&x).view(), &row(&y).view()).unwrap().values[[0, 0]];
            worst = worst.max((fast - oracle_kernel(&x, &y).unwrap()).abs());
        }
    }
    let elapsed = started.elapsed();
    outcome(
        worst < 1e-10 && elapsed < Duration::from_secs(10),
        format!("1600 pairs, max |diff| {worst:.1e}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn single_qubit() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let (x, y) = (PI * i as f64 / 9.0, PI * j as f64 / 9.0);
            let k = fidelity_kernel(&row(&[x]).view(), &row(&[y]).view()).unwrap().values[[0, 0]];
            worst = worst.max((k - (y - x).cos().powi(2)).abs());
        }
    }
    outcome(worst < 1e-12, format!("100-point grid, max |diff| {worst:.1e}"))
}

fn gram_validity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut asym, mut diag, mut eig) = (0.0f64, 0.0f64, f64::INFINITY);
    for _ in 0..50 {
        let (n, d) = (rng.gen_range(2..=64), rng.gen_range(1..=8));
        let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(0.0..PI));
        let gamma = rng.gen_range(0.05..2.0);
        for k in [rbf_train_gram(&x.view(), gamma), fidelity_train_gram(&x.view()).unwrap()] {
            asym = asym.max(k.max_asymmetry());
            diag = diag.max(k.max_diagonal_error());
            eig = eig.min(k.min_eigenvalue());
        }
    }
    outcome(
        asym < 1e-12 && diag < 1e-12 && eig >= -1e-9,
        format!("50 sets x 2 kernels, asymmetry {asym:.1e}, diagonal {diag:.1e}, min eigenvalue {eig:.1e}"),
    )
}

/// SMO tolerance used for the objective comparison.
const SMO_TOL: f64 = 1e-3;

fn svm_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut rel, mut kkt) = (0.0f64, 0.0f64);
    for p in 0..50 {
        let (n, d) = (rng.gen_range(4..=20), rng.gen_range(1..=4));
        let x = Array2::from_shape_fn((n, d), |_| rng.gen_range(0.0..PI));
        let mut y: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let c = rng.gen_range(0.1..10.0);
        let gram: KernelMatrix = if p % 2 == 0 {
            rbf_train_gram(&x.view(), rng.gen_range(0.1..2.0))
        } else {
            fidelity_train_gram(&x.view()).unwrap()
        };
        let problem = BinaryProblem::from_kernel(&gram, y.clone(), c).unwrap();
        let model = solve_smo(&problem, SMO_TOL, 10_000).unwrap();
        let reference = dual_objective(&gram.values.view(), &y, &solve_dual_qp(&gram.values.view(), &y, c, 50_000));
        rel = rel.max((model.dual_objective - reference).abs() / reference.abs().max(1e-12));
        kkt = kkt.max(kkt_violation(&model, &problem));
    }
    outcome(
        rel < 1e-6 && kkt <= SMO_TOL,
        format!("50 problems, max relative objective gap {rel:.1e}, max KKT violation {kkt:.1e} (tol {SMO_TOL:.0e})"),
    )
}

fn rdm_placement() -> Outcome {
    let cfg = RadarConfig::uav();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut dr, mut dv) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let range = rng.gen_range(2.0..240.0);
        let v = rng.gen_range(-0.95..0.95) * cfg.max_speed_mps();
        let scene = Scene::new(vec![Scatterer::on_boresight(range, v, rng.gen_range(0.1..2.0))], 0);
        let (r, c) = form_rdm(&synthesize_cube_with(&scene, &cfg, 0, NoiseFloor::None).unwrap()).unwrap().argmax();
        let mid = range + v * cfg.cpi_s() / 2.0;
        dr = dr.max((c as f64 - cfg.range_bin_of(mid)).abs());
        dv = dv.max((r as f64 - cfg.doppler_row_of(v)).abs());
    }
    outcome(dr <= 1.0 && dv <= 1.0, format!("100 scenes, worst offset {dr:.2} range / {dv:.2} Doppler bins"))
}

/// One full protocol run: simulate both tracks, run the grid, write reports.
struct Run {
    datasets: Vec<Dataset>,
    report: BenchmarkReport,
    files: BTreeMap<String, Vec<u8>>,
    elapsed: Duration,
}

fn protocol_run(dir: &Path) -> Run {
    let started = Instant::now();
    let datasets: Vec<Dataset> = Task::ALL.iter().map(|&t| generate_default(t, DEFAULT_DATA_SEED).unwrap()).collect();
    let report = run_benchmark(&BenchConfig::protocol(), &datasets).unwrap();
    let paths = emit_report(&report, dir, &ReportFormat::ALL).unwrap();
    let elapsed = started.elapsed();
    let files = paths
        .iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(p).unwrap()))
        .collect();
    Run { datasets, report, files, elapsed }
}

fn protocol_shape(run: &Run) -> Outcome {
    let recs = &run.report.records;
    let clean = recs.iter().filter(|r| r.sigma == 0.0).count();
    let noisy: Vec<_> = recs.iter().filter(|r| r.sigma > 0.0).collect();
    // 2 tasks x 5 seeds x 3 dims x 3 sigmas x 2 kernels
    let noise_ok = noisy.len() == 180 && noisy.iter().all(|r| [4, 6, 8].contains(&r.d));
    let mut split_ok = true;
    for ds in &run.datasets {
        for seed in DEFAULT_SEEDS {
            match ds.task {
                Task::Uav => {
                    let p = make_split(ds, seed, 0.25, SplitMode::StratifiedSample).unwrap();
                    split_ok &= p.train_rows.len() == 450 && p.test_rows.len() == 150;
                    split_ok &= (0..3).all(|c| p.test_rows.iter().filter(|&&r| ds.products[r].label == c).count() == 50);
                }
                Task::Fall => {
                    let p = make_split(ds, seed, 0.25, SplitMode::ClipLevel).unwrap();
                    let clip = |r: &usize| ds.products[*r].clip_id.unwrap();
                    let train: Vec<usize> = p.train_rows.iter().map(clip).collect();
                    split_ok &= p.test_clips.len() == 4;
                    split_ok &= p.test_rows.iter().map(clip).all(|c| !train.contains(&c));
                    split_ok &= ds.clip_ids().unwrap().iter().max() == Some(&15);
                }
            }
        }
    }
    outcome(
        clean == 80 && noise_ok && split_ok,
        format!("{clean} clean + {} noisy records; splits {}", noisy.len(), if split_ok { "ok" } else { "wrong" }),
    )
}

fn noise_statistics(run: &Run) -> Outcome {
    let ds = &run.datasets[0];
    let split = prepare_split(ds, 7, 8, &[0.0], 0.25).unwrap();
    let mut worst = 0.0f64;
    let mut pixels = 0usize;
    for sigma in [0.10, 0.25, 0.50] {
        let (mut ss, mut n) = (0.0f64, 0usize);
        for &r in &split.plan.test_rows {
            let noisy = perturb(&ds.products[r], r, split.s_train, sigma, 7).unwrap();
            for (a, b) in noisy.values.iter().zip(ds.products[r].values.iter()) {
                ss += (f64::from(*a) - f64::from(*b)).powi(2);
                n += 1;
            }
        }
        worst = worst.max(((ss / n as f64).sqrt() / (sigma * split.s_train) - 1.0).abs());
        pixels = n;
    }
    let passthrough = split
        .plan
        .test_rows
        .iter()
        .all(|&r| perturb(&ds.products[r], r, split.s_train, 0.0, 7).unwrap().values == ds.products[r].values);

    // every sigma record carries the clean model's digest
    let recs = &run.report.records;
    let reused = recs.iter().filter(|r| r.sigma > 0.0).all(|r| {
        recs.iter()
            .any(|c| c.sigma == 0.0 && (c.task, c.d, c.kernel, c.seed) == (r.task, r.d, r.kernel, r.seed) && c.model_digest == r.model_digest)
    });
    // and a clean-only retrain reproduces the swept model exactly
    let swept = prepare_split(ds, 42, 8, &[0.0, 0.1, 0.25, 0.5], 0.25).unwrap();
    let same_model = [KernelKind::Rbf, KernelKind::Quantum].iter().all(|&k| {
        let a = run_cell(&swept, 6, k, &[0.0], SmoParams::default()).unwrap().model;
        let b = run_cell(&swept, 6, k, &[0.0, 0.1, 0.25, 0.5], SmoParams::default()).unwrap().model;
        a.pairwise.iter().zip(&b.pairwise).all(|(p, q)| {
            p.model.support_indices == q.model.support_indices && p.model.bias.to_bits() == q.model.bias.to_bits()
        })
    });
    outcome(
        worst < 0.02 && pixels >= 100_000 && passthrough && reused && same_model,
        format!(
            "std error {:.3}% over {pixels} pixels; sigma=0 passthrough {passthrough}; model reuse {}",
            100.0 * worst,
            reused && same_model
        ),
    )
}

fn trend(run: &Run) -> Outcome {
    let mut ok = run.elapsed < Duration::from_secs(30 * 60);
    let mut parts = Vec::new();
    for task in Task::ALL {
        let floor = match task {
            Task::Uav => 0.70,
            Task::Fall => 0.65,
        };
        for kernel in [KernelKind::Rbf, KernelKind::Quantum] {
            let at = |d| run.report.aggregate_for(task, d, kernel, 0.0).map_or(f64::NAN, |a| a.mean_accuracy);
            let (a2, a8) = (at(2), at(8));
            ok &= a8 > floor && a8 >= a2;
            parts.push(format!("{task}/{kernel} {a2:.3}->{a8:.3}"));
        }
    }
    outcome(ok, format!("{}; run took {:.0}s", parts.join(", "), run.elapsed.as_secs_f64()))
}

fn determinism(a: &Run, b: &Run, threads: (usize, usize)) -> Outcome {
    let same_data = a.datasets == b.datasets;
    let same_files = a.files == b.files;
    let kinds = ["raw.csv", "aggregate.csv"].iter().all(|f| a.files.contains_key(*f))
        && a.files.keys().any(|k| k.ends_with(".svg"));
    outcome(
        same_data && same_files && kinds,
        format!(
            "{} files byte-identical across {}- and {}-thread runs: {}; datasets identical: {same_data}",
            a.files.len(),
            threads.0,
            threads.1,
            same_files
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 quantum kernel matches gate-level oracle", quantum_oracle()),
        ("2 single-qubit kernel is cos^2(y - x)", single_qubit()),
        ("3 Gram matrices symmetric, unit diagonal, PSD", gram_validity()),
        ("4 SMO matches brute-force QP", svm_oracle()),
        ("5 RDM peak placement", rdm_placement()),
    ];

    let dirs = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let wide = std::thread::available_parallelism().map_or(4, |n| n.get()).max(4);
    let parallel = ThreadPoolBuilder::new().num_threads(wide).build().unwrap();
    let serial = ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let first = parallel.install(|| protocol_run(dirs.0.path()));
    let second = serial.install(|| protocol_run(dirs.1.path()));

    results.push(("6 protocol shape", protocol_shape(&first)));
    results.push(("7 noise statistics and model reuse", noise_statistics(&first)));
    results.push(("8 accuracy trend and runtime", trend(&first)));
    results.push(("9 deterministic outputs", determinism(&first, &second, (wide, 1))));

    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
