//! The seeded (task, seed, d, kernel, sigma) grid.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use super::dataset::{Dataset, Task};
use super::noise::{perturb, pixel_std};
use super::split::{default_mode, make_split, SplitPlan, DEFAULT_SEEDS, DEFAULT_TEST_FRACTION};
use crate::features::{AngularScaler, FeatureMatrix, FeaturePipeline};
use crate::kernels::{
    fidelity_kernel, fidelity_train_gram, rbf_gamma_scale, rbf_gram, rbf_train_gram, KernelKind, KernelMatrix,
    MAX_QUBITS,
};
use crate::svm::{predict_ovo, train_ovo, MulticlassModel, SmoParams};
use crate::{par, Error, Result};

pub const DEFAULT_DIMS: [usize; 4] = [2, 4, 6, 8];
pub const DEFAULT_NOISE_DIMS: [usize; 3] = [4, 6, 8];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub seeds: Vec<u64>,
    /// Dimensions evaluated on clean test inputs.
    pub dims: Vec<usize>,
    /// Dimensions evaluated at every entry of `sigmas`.
    pub noise_dims: Vec<usize>,
    pub sigmas: Vec<f64>,
    pub kernels: Vec<KernelKind>,
    pub test_fraction: f64,
    pub smo: SmoParams,
}

impl BenchConfig {
    /// Clean grid over every dimension plus the noisy cells at d = 4, 6, 8.
    pub fn protocol() -> Self {
        BenchConfig {
            seeds: DEFAULT_SEEDS.to_vec(),
            dims: DEFAULT_DIMS.to_vec(),
            noise_dims: DEFAULT_NOISE_DIMS.to_vec(),
            sigmas: vec![0.10, 0.25, 0.50],
            kernels: vec![KernelKind::Rbf, KernelKind::Quantum],
            test_fraction: DEFAULT_TEST_FRACTION,
            smo: SmoParams::default(),
        }
    }

    /// Only the noise table: d = 4, 6, 8 at sigma = 0, 0.10, 0.25, 0.50.
    pub fn noise_sweep() -> Self {
        BenchConfig {
            dims: Vec::new(),
            sigmas: super::noise::DEFAULT_SIGMAS.to_vec(),
            ..BenchConfig::protocol()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.kernels.is_empty() {
            return Err(Error::InvalidConfig("need at least one seed and one kernel".into()));
        }
        if self.all_dims().is_empty() {
            return Err(Error::InvalidConfig("no dimensions requested".into()));
        }
        if let Some(d) = self.all_dims().into_iter().find(|&d| d == 0 || d > MAX_QUBITS) {
            return Err(Error::InvalidConfig(format!("dimension {d} outside 1..={MAX_QUBITS}")));
        }
        if let Some(s) = self.sigmas.iter().find(|s| !(**s >= 0.0) || !s.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma {s} is not a non-negative number")));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!("test fraction {} outside (0, 1)", self.test_fraction)));
        }
        Ok(())
    }

    pub fn all_dims(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.dims.iter().chain(&self.noise_dims).copied().collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Sigmas evaluated at dimension `d`, ascending.
    pub fn cell_sigmas(&self, d: usize) -> Vec<f64> {
        let mut s = Vec::new();
        if self.dims.contains(&d) {
            s.push(0.0);
        }
        if self.noise_dims.contains(&d) {
            s.extend(self.sigmas.iter().copied());
        }
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }

    fn all_sigmas(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.all_dims().into_iter().flat_map(|d| self.cell_sigmas(d)).collect();
        s.sort_by(f64::total_cmp);
        s.dedup();
        s
    }
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig::protocol()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub task: Task,
    pub d: usize,
    pub kernel: KernelKind,
    pub sigma: f64,
    pub seed: u64,
    pub accuracy: f64,
    pub n_test: usize,
    /// Hash of the trained model (support sets, coefficients, biases). Zero
    /// when the record was read back from CSV.
    #[serde(skip)]
    pub model_digest: u64,
}

impl RunRecord {
    pub(crate) fn sort_key(&self) -> (Task, usize, KernelKind, u64, u64) {
        (self.task, self.d, self.kernel, sigma_key(self.sigma), self.seed)
    }
}

/// Order-preserving key for non-negative sigmas.
fn sigma_key(s: f64) -> u64 {
    s.to_bits()
}

/// Mean and sample standard deviation of one (task, d, kernel, sigma) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub task: Task,
    pub d: usize,
    pub kernel: KernelKind,
    pub sigma: f64,
    pub mean_accuracy: f64,
    /// Absent for single-seed cells.
    pub std_accuracy: Option<f64>,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl BenchmarkReport {
    /// Sorts records and recomputes the aggregates.
    pub fn from_records(mut records: Vec<RunRecord>) -> Self {
        records.sort_by_key(RunRecord::sort_key);
        let aggregates = aggregate(&records);
        BenchmarkReport { records, aggregates }
    }

    pub fn aggregate_for(&self, task: Task, d: usize, kernel: KernelKind, sigma: f64) -> Option<&Aggregate> {
        self.aggregates
            .iter()
            .find(|a| a.task == task && a.d == d && a.kernel == kernel && a.sigma == sigma)
    }
}

pub fn mean_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.len() >= 2)
        .then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

/// Groups records by (task, d, kernel, sigma) in sorted order.
pub fn aggregate(records: &[RunRecord]) -> Vec<Aggregate> {
    let mut sorted: Vec<&RunRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.sort_key());
    let mut out = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let head = sorted[start];
        let key = |r: &RunRecord| (r.task, r.d, r.kernel, sigma_key(r.sigma));
        let end = start + sorted[start..].iter().take_while(|r| key(r) == key(head)).count();
        let acc: Vec<f64> = sorted[start..end].iter().map(|r| r.accuracy).collect();
        let (mean, std) = mean_std(&acc);
        out.push(Aggregate {
            task: head.task,
            d: head.d,
            kernel: head.kernel,
            sigma: head.sigma,
            mean_accuracy: mean,
            std_accuracy: std,
            n_seeds: acc.len(),
        });
        start = end;
    }
    out
}

/// Features of one (task, seed) split, projected once at the largest
/// dimension; smaller bottlenecks are leading columns.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub task: Task,
    pub plan: SplitPlan,
    pub pipeline: FeaturePipeline,
    pub s_train: f64,
    pub train: FeatureMatrix,
    /// Projected test rows per sigma, ascending in sigma.
    pub test: Vec<(f64, FeatureMatrix)>,
}

impl PreparedSplit {
    pub fn test_at(&self, sigma: f64) -> Option<&FeatureMatrix> {
        self.test.iter().find(|(s, _)| *s == sigma).map(|(_, m)| m)
    }
}

pub fn prepare_split(ds: &Dataset, seed: u64, d_max: usize, sigmas: &[f64], test_fraction: f64) -> Result<PreparedSplit> {
    let plan = make_split(ds, seed, test_fraction, default_mode(ds))?;
    let train_products = plan.train_rows.iter().map(|&r| &ds.products[r]);
    let s_train = pixel_std(train_products.clone());
    let (pipeline, train) = FeaturePipeline::fit(FeatureMatrix::from_products(train_products)?, d_max)?;
    let mut test = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let noisy = par::map_slice(&plan.test_rows, |&r| perturb(&ds.products[r], r, s_train, sigma, seed));
        let noisy = par::collect_results(noisy)?;
        test.push((sigma, pipeline.transform(&FeatureMatrix::from_products(&noisy)?)?));
    }
    Ok(PreparedSplit {
        task: ds.task,
        plan,
        pipeline,
        s_train,
        train,
        test,
    })
}

/// One trained model and its accuracy at every requested sigma.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub model: MulticlassModel,
    pub records: Vec<RunRecord>,
}

pub fn model_digest(model: &MulticlassModel) -> u64 {
    let mut h = DefaultHasher::new();
    for pm in &model.pairwise {
        (pm.positive, pm.negative).hash(&mut h);
        pm.model.support_indices.hash(&mut h);
        pm.model.bias.to_bits().hash(&mut h);
        for a in &pm.model.alpha_y {
            a.to_bits().hash(&mut h);
        }
    }
    h.finish()
}

enum Encoder {
    Rbf(f64),
    Quantum(AngularScaler),
}

impl Encoder {
    fn train_gram(&self, x: &FeatureMatrix) -> Result<KernelMatrix> {
        match self {
            Encoder::Rbf(gamma) => Ok(rbf_train_gram(&x.values.view(), *gamma)),
            Encoder::Quantum(a) => fidelity_train_gram(&a.apply(x)?.values.view()),
        }
    }

    fn cross(&self, test: &FeatureMatrix, train: &FeatureMatrix) -> Result<KernelMatrix> {
        match self {
            Encoder::Rbf(gamma) => rbf_gram(&test.values.view(), &train.values.view(), *gamma),
            Encoder::Quantum(a) => fidelity_kernel(&a.apply(test)?.values.view(), &a.apply(train)?.values.view()),
        }
    }
}

/// Trains at bottleneck `d` and scores the same model at each sigma.
pub fn run_cell(
    split: &PreparedSplit,
    d: usize,
    kernel: KernelKind,
    sigmas: &[f64],
    smo: SmoParams,
) -> Result<CellOutcome> {
    if d == 0 || d > split.train.cols() {
        return Err(Error::PcaDimension {
            d,
            rows: split.train.rows(),
            cols: split.train.cols(),
        });
    }
    let train = split.train.leading(d);
    let encoder = match kernel {
        KernelKind::Rbf => Encoder::Rbf(rbf_gamma_scale(&train.values.view())?),
        KernelKind::Quantum => Encoder::Quantum(AngularScaler::fit(&train)?),
    };
    let model = train_ovo(&encoder.train_gram(&train)?, &train.labels, smo)?;
    let digest = model_digest(&model);
    let mut records = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let test = split
            .test_at(sigma)
            .ok_or_else(|| Error::InvalidArgument(format!("test features for sigma {sigma} were not prepared")))?
            .leading(d);
        let k = encoder.cross(&test, &train)?;
        let predicted = predict_ovo(&model, &k.values.view());
        let correct = predicted.iter().zip(&test.labels).filter(|(p, t)| p == t).count();
        records.push(RunRecord {
            task: split.task,
            d,
            kernel,
            sigma,
            seed: split.plan.seed,
            accuracy: correct as f64 / test.rows() as f64,
            n_test: test.rows(),
            model_digest: digest,
        });
    }
    Ok(CellOutcome { model, records })
}

/// Runs the whole grid over `datasets`. Seeds run one after another; the
/// (d, kernel) cells of a seed run in parallel.
pub fn run_benchmark(config: &BenchConfig, datasets: &[Dataset]) -> Result<BenchmarkReport> {
    config.validate()?;
    let dims = config.all_dims();
    let d_max = *dims.last().expect("validated");
    let sigmas = config.all_sigmas();
    let mut records = Vec::new();
    for ds in datasets {
        for &seed in &config.seeds {
            let split = prepare_split(ds, seed, d_max, &sigmas, config.test_fraction).map_err(|e| Error::Cell {
                cell: format!("task={} seed={seed}", ds.task),
                source: Box::new(e),
            })?;
            let cells: Vec<(usize, KernelKind)> = dims
                .iter()
                .flat_map(|&d| config.kernels.iter().map(move |&k| (d, k)))
                .collect();
            let outcomes = par::map_slice(&cells, |&(d, kernel)| {
                run_cell(&split, d, kernel, &config.cell_sigmas(d), config.smo)
                    .map(|o| o.records)
                    .map_err(|e| Error::Cell {
                        cell: format!("task={} seed={seed} d={d} kernel={kernel}", ds.task),
                        source: Box::new(e),
                    })
            });
            for r in par::collect_results(outcomes)? {
                records.extend(r);
            }
        }
    }
    Ok(BenchmarkReport::from_records(records))
}
