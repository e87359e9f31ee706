//! Splits, leakage guards, noise injection, model reuse, containers and reports.

use std::collections::BTreeSet;
use std::fs;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radar_qk::bench::{
    aggregate, emit_report, held_out_count, inject_noise, make_split, mean_std, model_digest, perturb, pixel_std,
    prepare_split, raw_csv, read_dataset, read_raw_csv, run_benchmark, run_cell, sample_file_name, write_dataset,
    BenchConfig, BenchmarkReport, Dataset, ReportFormat, RunRecord, SplitMode, Task, AGGREGATE_FILE, AGGREGATE_HEADER,
    DEFAULT_SEEDS, MANIFEST_FILE, RAW_FILE, RAW_HEADER, TABLE_FILE,
};
use radar_qk::kernels::KernelKind;
use radar_qk::products::{AxisKind, ProductAxis, RadarProduct};
use radar_qk::radar_sim::RadarConfig;
use radar_qk::svm::SmoParams;

fn product(values: Array2<f32>, label: usize, clip: Option<usize>, window: Option<usize>) -> RadarProduct {
    RadarProduct {
        values,
        row_axis: ProductAxis { kind: AxisKind::Doppler, spacing: 0.4 },
        col_axis: ProductAxis { kind: AxisKind::Range, spacing: 0.5 },
        label,
        clip_id: clip,
        window_index: window,
    }
}

/// Class-shifted noise images, `per_class` rows per class, class-major.
fn uav_like(per_class: usize, shape: (usize, usize), seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let products = (0..3)
        .flat_map(|c| (0..per_class).map(move |_| c))
        .map(|c| {
            let v = Array2::from_shape_fn(shape, |(i, j)| {
                let bump = if (i + j) % 3 == c { 1.5 } else { 0.0 };
                (bump + rng.gen_range(0.0..1.0)) as f32
            });
            product(v, c, None, None)
        })
        .collect();
    Dataset {
        task: Task::Uav,
        products,
        class_names: Task::Uav.class_names(),
        seed,
        config: RadarConfig::uav(),
    }
}

/// 16 clips alternating label, `windows` spectrograms each.
fn fall_like(windows: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut products = Vec::new();
    for clip in 0..16 {
        let label = clip % 2;
        for w in 0..windows {
            let v = Array2::from_shape_fn((6, 4), |(i, _)| (rng.gen_range(0.0..1.0) + if i == 2 * label { 2.0 } else { 0.0 }) as f32);
            products.push(product(v, label, Some(clip), Some(w)));
        }
    }
    Dataset {
        task: Task::Fall,
        products,
        class_names: Task::Fall.class_names(),
        seed,
        config: RadarConfig::fall(),
    }
}

#[test]
fn uav_splits_hold_out_a_quarter_per_class() {
    let ds = uav_like(200, (1, 2), 1);
    for seed in DEFAULT_SEEDS {
        let plan = make_split(&ds, seed, 0.25, SplitMode::StratifiedSample).unwrap();
        assert_eq!((plan.train_rows.len(), plan.test_rows.len()), (450, 150));
        for c in 0..3 {
            assert_eq!(plan.test_rows.iter().filter(|&&r| ds.products[r].label == c).count(), 50);
        }
        let all: BTreeSet<usize> = plan.train_rows.iter().chain(&plan.test_rows).copied().collect();
        assert_eq!(all.len(), 600);
    }
    let a = make_split(&ds, 7, 0.25, SplitMode::StratifiedSample).unwrap();
    let b = make_split(&ds, 11, 0.25, SplitMode::StratifiedSample).unwrap();
    assert_ne!(a.test_rows, b.test_rows);
}

#[test]
fn fall_splits_hold_out_four_whole_clips() {
    let ds = fall_like(3, 2);
    for seed in DEFAULT_SEEDS {
        let plan = make_split(&ds, seed, 0.25, SplitMode::ClipLevel).unwrap();
        assert_eq!(plan.test_clips.len(), 4);
        let labels: Vec<usize> = plan.test_clips.iter().map(|c| c % 2).collect();
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 2, "clips {:?}", plan.test_clips);
        let clip = |r: &usize| ds.products[*r].clip_id.unwrap();
        let train: BTreeSet<usize> = plan.train_rows.iter().map(clip).collect();
        let test: BTreeSet<usize> = plan.test_rows.iter().map(clip).collect();
        assert!(train.is_disjoint(&test));
        assert_eq!(test.iter().copied().collect::<Vec<_>>(), plan.test_clips);
        assert_eq!(plan.test_rows.len(), 12);
    }
}

#[test]
fn held_out_count_rounds_half_up() {
    assert_eq!(held_out_count(600, 0.25), 150);
    assert_eq!(held_out_count(16, 0.25), 4);
    assert_eq!(held_out_count(6, 0.25), 2);
    assert_eq!(held_out_count(5, 0.25), 1);
}

#[test]
fn split_needs_every_class_on_both_sides() {
    let mut ds = uav_like(2, (1, 2), 3);
    ds.products.retain(|p| p.label != 2 || p.values[[0, 0]] < 0.0);
    assert!(make_split(&ds, 7, 0.25, SplitMode::StratifiedSample).is_err());
}

#[test]
fn perturbing_test_rows_leaves_fitted_state_alone() {
    let ds = uav_like(12, (3, 4), 4);
    let before = prepare_split(&ds, 21, 4, &[0.0, 0.25], 0.25).unwrap();
    let mut tampered = ds.clone();
    for &r in &before.plan.test_rows {
        tampered.products[r].values.mapv_inplace(|v| v * 40.0 - 3.0);
    }
    let after = prepare_split(&tampered, 21, 4, &[0.0, 0.25], 0.25).unwrap();
    assert_eq!(before.pipeline, after.pipeline);
    assert_eq!(before.s_train.to_bits(), after.s_train.to_bits());
    assert_eq!(before.train, after.train);
    assert_ne!(before.test, after.test);
    for kernel in [KernelKind::Rbf, KernelKind::Quantum] {
        let a = run_cell(&before, 4, kernel, &[0.0], SmoParams::default()).unwrap();
        let b = run_cell(&after, 4, kernel, &[0.0], SmoParams::default()).unwrap();
        assert_eq!(a.model, b.model);
    }
}

#[test]
fn refitting_on_all_rows_changes_the_pipeline() {
    use radar_qk::features::{FeatureMatrix, FeaturePipeline};
    let ds = uav_like(12, (3, 4), 5);
    let split = prepare_split(&ds, 7, 4, &[0.0], 0.25).unwrap();
    let (everything, _) = FeaturePipeline::fit(FeatureMatrix::from_products(&ds.products).unwrap(), 4).unwrap();
    assert_ne!(split.pipeline.standardizer, everything.standardizer);
}

#[test]
fn noise_has_the_requested_spread() {
    let p = product(Array2::zeros((400, 300)), 0, None, None);
    let (s_train, sigma) = (2.0, 0.25);
    let noisy = perturb(&p, 9, s_train, sigma, 42).unwrap();
    let n = noisy.values.len() as f64;
    let mean = noisy.values.iter().map(|&v| f64::from(v)).sum::<f64>() / n;
    let std = (noisy.values.iter().map(|&v| (f64::from(v) - mean).powi(2)).sum::<f64>() / n).sqrt();
    assert!(n >= 1e5);
    assert!((std / (sigma * s_train) - 1.0).abs() < 0.02, "std {std}");
    assert!(noisy.values.iter().any(|&v| v < 0.0), "values must not be clipped");
}

#[test]
fn zero_sigma_is_a_bitwise_passthrough() {
    let ds = uav_like(3, (5, 7), 6);
    let ids: Vec<usize> = (0..ds.len()).collect();
    let out = inject_noise(&ds.products, &ids, 1.3, 0.0, 7).unwrap();
    for (a, b) in out.iter().zip(&ds.products) {
        assert!(a.values.iter().zip(b.values.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
    assert!(perturb(&ds.products[0], 0, 1.0, -0.1, 7).is_err());
}

#[test]
fn noise_streams_are_keyed_by_seed_sigma_and_sample() {
    let p = product(Array2::zeros((4, 4)), 0, None, None);
    let a = perturb(&p, 3, 1.0, 0.1, 7).unwrap();
    assert_eq!(a, perturb(&p, 3, 1.0, 0.1, 7).unwrap());
    assert_ne!(a, perturb(&p, 4, 1.0, 0.1, 7).unwrap());
    assert_ne!(a, perturb(&p, 3, 1.0, 0.1, 8).unwrap());
    // a different sigma draws a fresh stream rather than rescaling the old one
    let b = perturb(&p, 3, 1.0, 0.25, 7).unwrap();
    assert!(a.values.iter().zip(b.values.iter()).any(|(x, y)| (x / 0.1 - y / 0.25).abs() > 1e-3));
}

#[test]
fn pixel_std_is_the_population_std() {
    let a = product(ndarray::array![[1.0f32, 3.0]], 0, None, None);
    let b = product(ndarray::array![[5.0f32, 7.0]], 0, None, None);
    let want = (5.0f64).sqrt();
    assert!((pixel_std([&a, &b]) - want).abs() < 1e-12);
}

#[test]
fn sigma_cells_reuse_the_clean_model() {
    let ds = uav_like(12, (3, 4), 8);
    let split = prepare_split(&ds, 42, 6, &[0.0, 0.1, 0.25, 0.5], 0.25).unwrap();
    for kernel in [KernelKind::Rbf, KernelKind::Quantum] {
        let clean = run_cell(&split, 6, kernel, &[0.0], SmoParams::default()).unwrap();
        let swept = run_cell(&split, 6, kernel, &[0.0, 0.1, 0.25, 0.5], SmoParams::default()).unwrap();
        assert_eq!(clean.model, swept.model);
        let digest = model_digest(&clean.model);
        assert!(swept.records.iter().all(|r| r.model_digest == digest));
        assert_eq!(swept.records[0].accuracy, clean.records[0].accuracy);
        for r in &swept.records {
            let correct = r.accuracy * r.n_test as f64;
            assert_eq!(correct, correct.round());
            assert!((0.0..=1.0).contains(&r.accuracy));
        }
    }
}

#[test]
fn container_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for ds in [uav_like(2, (3, 5), 9), fall_like(2, 9)] {
        let path = dir.path().join(ds.task.as_str());
        write_dataset(&ds, &path).unwrap();
        assert!(path.join(MANIFEST_FILE).is_file());
        assert_eq!(fs::metadata(path.join(sample_file_name(0))).unwrap().len(), 4 * ds.products[0].values.len() as u64);
        assert_eq!(read_dataset(&path).unwrap(), ds);
    }
}

#[test]
fn malformed_containers_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let ds = uav_like(2, (3, 5), 10);
    write_dataset(&ds, dir.path()).unwrap();
    let manifest = dir.path().join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest).unwrap();

    fs::write(&manifest, text.replace("rows=3", "rows=three")).unwrap();
    assert!(read_dataset(dir.path()).is_err());
    fs::write(&manifest, text.replace("task=uav", "task=boat")).unwrap();
    assert!(read_dataset(dir.path()).is_err());
    fs::write(&manifest, &text).unwrap();
    fs::write(dir.path().join(sample_file_name(1)), [0u8; 7]).unwrap();
    assert!(read_dataset(dir.path()).is_err());
    assert!(read_dataset(&dir.path().join("absent")).is_err());
}

fn record(task: Task, d: usize, kernel: KernelKind, sigma: f64, seed: u64, accuracy: f64) -> RunRecord {
    RunRecord { task, d, kernel, sigma, seed, accuracy, n_test: 4, model_digest: 0 }
}

#[test]
fn aggregation_examples() {
    assert_eq!(mean_std(&[0.5]), (0.5, None));
    let (m, s) = mean_std(&[1.0, 0.0]);
    assert_eq!(m, 0.5);
    assert!((s.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);

    let recs = vec![
        record(Task::Uav, 2, KernelKind::Rbf, 0.0, 7, 1.0),
        record(Task::Uav, 2, KernelKind::Rbf, 0.0, 11, 0.0),
        record(Task::Uav, 2, KernelKind::Quantum, 0.0, 7, 0.75),
    ];
    let agg = aggregate(&recs);
    assert_eq!(agg.len(), 2);
    let rbf = agg.iter().find(|a| a.kernel == KernelKind::Rbf).unwrap();
    assert_eq!((rbf.mean_accuracy, rbf.n_seeds), (0.5, 2));
    assert!(agg.iter().find(|a| a.kernel == KernelKind::Quantum).unwrap().std_accuracy.is_none());
}

#[test]
fn report_files_and_headers() {
    let mut recs = Vec::new();
    for seed in [7, 11] {
        for d in [2, 4] {
            for kernel in [KernelKind::Rbf, KernelKind::Quantum] {
                recs.push(record(Task::Fall, d, kernel, 0.0, seed, 0.5 + 0.01 * d as f64));
                if d == 4 {
                    recs.push(record(Task::Fall, d, kernel, 0.1, seed, 0.25));
                }
            }
        }
    }
    let report = BenchmarkReport::from_records(recs);
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&report, dir.path(), &ReportFormat::ALL).unwrap();
    let names: BTreeSet<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    for want in [RAW_FILE, AGGREGATE_FILE, TABLE_FILE, "accuracy_vs_d_fall.svg", "accuracy_vs_sigma_fall_d4.svg"] {
        assert!(names.contains(want), "missing {want} in {names:?}");
    }
    let raw = fs::read_to_string(dir.path().join(RAW_FILE)).unwrap();
    assert_eq!(raw.lines().next().unwrap(), RAW_HEADER.join(","));
    assert_eq!(raw.lines().next().unwrap(), "task,d,kernel,sigma,seed,accuracy,n_test");
    let agg = fs::read_to_string(dir.path().join(AGGREGATE_FILE)).unwrap();
    assert_eq!(agg.lines().next().unwrap(), AGGREGATE_HEADER.join(","));
    assert_eq!(agg.lines().next().unwrap(), "task,d,kernel,sigma,mean_accuracy,std_accuracy,n_seeds");

    let back = read_raw_csv(&dir.path().join(RAW_FILE)).unwrap();
    assert_eq!(raw_csv(&back).unwrap(), raw.as_bytes());
    let again = tempfile::tempdir().unwrap();
    emit_report(&BenchmarkReport::from_records(back), again.path(), &ReportFormat::ALL).unwrap();
    for name in &names {
        assert_eq!(fs::read(dir.path().join(name)).unwrap(), fs::read(again.path().join(name)).unwrap(), "{name}");
    }
}

#[test]
fn raw_csv_with_a_wrong_header_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(RAW_FILE);
    fs::write(&path, "task,d,kernel,seed,sigma,accuracy,n_test\n").unwrap();
    assert!(read_raw_csv(&path).is_err());
}

fn small_config() -> BenchConfig {
    BenchConfig {
        seeds: vec![7, 11],
        dims: vec![2, 4],
        noise_dims: vec![4],
        sigmas: vec![0.1, 0.5],
        ..BenchConfig::protocol()
    }
}

#[test]
fn grid_shape_and_determinism() {
    let data = [uav_like(8, (3, 4), 12), fall_like(2, 12)];
    let cfg = small_config();
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = serial.install(|| run_benchmark(&cfg, &data)).unwrap();
    let b = wide.install(|| run_benchmark(&cfg, &data)).unwrap();
    // 2 tasks x 2 seeds x 2 kernels x (2 clean + 2 noisy at d = 4)
    assert_eq!(a.records.len(), 32);
    assert_eq!(a.records.iter().filter(|r| r.sigma == 0.0).count(), 16);
    assert_eq!(raw_csv(&a.records).unwrap(), raw_csv(&b.records).unwrap());
    assert_eq!(a.aggregates, b.aggregates);
    for r in &a.records {
        let twin = a.records.iter().find(|o| (o.task, o.d, o.kernel, o.seed) == (r.task, r.d, r.kernel, r.seed) && o.sigma == 0.0).unwrap();
        assert_eq!(r.model_digest, twin.model_digest);
    }
}

#[test]
fn noise_sweep_config_includes_the_clean_column() {
    let cfg = BenchConfig::noise_sweep();
    assert_eq!(cfg.all_dims(), vec![4, 6, 8]);
    assert_eq!(cfg.cell_sigmas(6), vec![0.0, 0.1, 0.25, 0.5]);
    let protocol = BenchConfig::protocol();
    assert_eq!(protocol.cell_sigmas(2), vec![0.0]);
    assert_eq!(protocol.cell_sigmas(8), vec![0.0, 0.1, 0.25, 0.5]);
}

#[test]
fn invalid_grids_are_rejected() {
    let data = [uav_like(4, (2, 2), 13)];
    let bad = [
        BenchConfig { seeds: vec![], ..small_config() },
        BenchConfig { dims: vec![0], ..small_config() },
        BenchConfig { sigmas: vec![-0.1], ..small_config() },
        BenchConfig { test_fraction: 1.0, ..small_config() },
    ];
    for cfg in bad {
        assert!(run_benchmark(&cfg, &data).is_err());
    }
}
