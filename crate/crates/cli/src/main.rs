use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use radar_qk::bench::{
    self, emit_report, generate_fall, generate_uav, read_dataset, read_raw_csv, run_benchmark, write_dataset,
    BenchConfig, BenchmarkReport, Dataset, ReportFormat, Task, DEFAULT_DATA_SEED, DEFAULT_FALL_CLIPS,
    DEFAULT_UAV_PER_CLASS,
};
use radar_qk::kernels::KernelKind;
use radar_qk::radar_sim::RadarConfig;
use radar_qk::selftest::run_selftest;
use radar_qk::svm::SmoParams;

#[derive(Parser, Debug)]
#[command(name = "radar-qk", version, about = "RBF vs quantum-fidelity kernel benchmark on simulated FMCW radar")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate datasets and write them as containers.
    Generate(GenerateArgs),
    /// Run the clean protocol (plus the noisy cells) and write reports.
    Bench(BenchArgs),
    /// Run only the test-time noise sweep.
    NoiseSweep(BenchArgs),
    /// Re-render tables and plots from a raw CSV.
    Report(ReportArgs),
    /// Run the oracle-equivalence and invariant checks.
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Track {
    Uav,
    Fall,
    Both,
}

impl Track {
    fn tasks(self) -> Vec<Task> {
        match self {
            Track::Uav => vec![Task::Uav],
            Track::Fall => vec![Task::Fall],
            Track::Both => Task::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KernelChoice {
    Rbf,
    Quantum,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Markdown,
    Svg,
    All,
}

fn formats(list: &[Format]) -> Vec<ReportFormat> {
    if list.contains(&Format::All) {
        return ReportFormat::ALL.to_vec();
    }
    list.iter()
        .map(|f| match f {
            Format::Csv => ReportFormat::Csv,
            Format::Markdown => ReportFormat::Markdown,
            Format::Svg => ReportFormat::Svg,
            Format::All => unreachable!(),
        })
        .collect()
}

#[derive(Args, Debug)]
struct SimArgs {
    /// UAV samples per class.
    #[arg(long, default_value_t = DEFAULT_UAV_PER_CLASS)]
    per_class: usize,
    /// Number of simulated fall-track clips.
    #[arg(long, default_value_t = DEFAULT_FALL_CLIPS)]
    clips: usize,
    /// Generator seed.
    #[arg(long, default_value_t = DEFAULT_DATA_SEED)]
    seed: u64,
    /// Override the carrier frequency (Hz).
    #[arg(long)]
    carrier_hz: Option<f64>,
    /// Override the sweep bandwidth (Hz).
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    /// Override the number of chirps per frame.
    #[arg(long)]
    chirps: Option<usize>,
}

impl SimArgs {
    fn config(&self, task: Task) -> RadarConfig {
        let mut c = task.default_config();
        if let Some(f) = self.carrier_hz {
            c.carrier_hz = f;
        }
        if let Some(b) = self.bandwidth_hz {
            c.bandwidth_hz = b;
        }
        if let Some(n) = self.chirps {
            c.n_chirps = n;
        }
        c
    }

    fn generate(&self, task: Task) -> Result<Dataset> {
        let started = Instant::now();
        let cfg = self.config(task);
        let ds = match task {
            Task::Uav => generate_uav(self.per_class, &cfg, self.seed),
            Task::Fall => generate_fall(self.clips, &cfg, self.seed),
        }
        .with_context(|| format!("generating the {task} dataset"))?;
        eprintln!("generated {} {task} samples in {:.1}s", ds.len(), started.elapsed().as_secs_f64());
        Ok(ds)
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = Track::Both)]
    track: Track,
    /// Output directory. With `--track both` each task goes to `<out>/<task>`.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    sim: SimArgs,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum, default_value_t = Track::Both)]
    track: Track,
    /// Dataset directory holding `uav/` and `fall/` containers. Simulated in
    /// memory when omitted.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Dimensions evaluated on clean inputs.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Dimensions evaluated at every noise level.
    #[arg(long, value_delimiter = ',')]
    noise_dims: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = KernelChoice::Both)]
    kernels: KernelChoice,
    /// SVM box constraint.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = bench::DEFAULT_TEST_FRACTION)]
    test_fraction: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    format: Vec<Format>,
    #[command(flatten)]
    sim: SimArgs,
}

impl BenchArgs {
    fn config(&self, base: BenchConfig) -> BenchConfig {
        let mut cfg = base;
        if let Some(s) = &self.seeds {
            cfg.seeds = s.clone();
        }
        if let Some(d) = &self.dims {
            cfg.dims = d.clone();
        }
        if let Some(d) = &self.noise_dims {
            cfg.noise_dims = d.clone();
        }
        if let Some(s) = &self.sigmas {
            cfg.sigmas = s.clone();
        }
        cfg.kernels = match self.kernels {
            KernelChoice::Rbf => vec![KernelKind::Rbf],
            KernelChoice::Quantum => vec![KernelKind::Quantum],
            KernelChoice::Both => vec![KernelKind::Rbf, KernelKind::Quantum],
        };
        cfg.test_fraction = self.test_fraction;
        cfg.smo = SmoParams {
            c: self.c,
            ..SmoParams::default()
        };
        cfg
    }

    fn datasets(&self) -> Result<Vec<Dataset>> {
        self.track
            .tasks()
            .into_iter()
            .map(|task| match &self.data {
                Some(dir) => load(dir, task),
                None => self.sim.generate(task),
            })
            .collect()
    }
}

/// Loads `<dir>/<task>`, or `dir` itself when it is a container of that task.
fn load(dir: &Path, task: Task) -> Result<Dataset> {
    let nested = dir.join(task.as_str());
    let path = if nested.join(bench::MANIFEST_FILE).is_file() {
        nested
    } else if dir.join(bench::MANIFEST_FILE).is_file() {
        dir.to_path_buf()
    } else {
        bail!(
            "missing dataset: no {} under {} (run `radar-qk generate` first)",
            bench::MANIFEST_FILE,
            nested.display()
        );
    };
    let ds = read_dataset(&path).with_context(|| format!("reading dataset {}", path.display()))?;
    if ds.task != task {
        bail!("dataset at {} is a {} dataset, expected {task}", path.display(), ds.task);
    }
    Ok(ds)
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Raw per-record CSV written by `bench`.
    #[arg(long)]
    raw: PathBuf,
    /// Output directory (default: the CSV's directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "markdown,svg")]
    format: Vec<Format>,
}

fn write_report(report: &BenchmarkReport, out: &Path, fmts: &[Format]) -> Result<()> {
    let files = emit_report(report, out, &formats(fmts)).with_context(|| format!("writing reports to {}", out.display()))?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn bench_cmd(args: &BenchArgs, base: BenchConfig) -> Result<()> {
    let cfg = args.config(base);
    let datasets = args.datasets()?;
    let started = Instant::now();
    let report = run_benchmark(&cfg, &datasets)?;
    eprintln!(
        "{} records in {:.1}s",
        report.records.len(),
        started.elapsed().as_secs_f64()
    );
    write_report(&report, &args.out, &args.format)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(args) => {
            for task in args.track.tasks() {
                let dir = if args.track == Track::Both { args.out.join(task.as_str()) } else { args.out.clone() };
                let ds = args.sim.generate(task)?;
                write_dataset(&ds, &dir).with_context(|| format!("writing {}", dir.display()))?;
                println!("wrote {} samples to {}", ds.len(), dir.display());
            }
            Ok(())
        }
        Command::Bench(args) => bench_cmd(&args, BenchConfig::protocol()),
        Command::NoiseSweep(args) => bench_cmd(&args, BenchConfig::noise_sweep()),
        Command::Report(args) => {
            let records = read_raw_csv(&args.raw)?;
            let out = match args.out {
                Some(o) => o,
                None => args.raw.parent().map(Path::to_path_buf).unwrap_or_default(),
            };
            write_report(&BenchmarkReport::from_records(records), &out, &args.format)
        }
        Command::Selftest => {
            let checks = run_selftest()?;
            for c in &checks {
                println!("[{}] {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                bail!("{failed} of {} checks failed", checks.len());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
