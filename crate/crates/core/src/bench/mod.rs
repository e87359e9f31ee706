//! Protocol harness: datasets, splits, test-time noise, the seeded run grid
//! and report files.

mod container;
mod dataset;
mod noise;
mod report;
mod run;
mod split;

pub use container::{read_dataset, sample_file_name, write_dataset, MANIFEST_FILE};
pub use dataset::{
    generate_default, generate_fall, generate_fall_with, generate_uav, generate_uav_with, Dataset, Task,
    DEFAULT_DATA_SEED, DEFAULT_FALL_CLIPS, DEFAULT_UAV_PER_CLASS, FALL_NOISE_FLOOR, UAV_NOISE_FLOOR,
};
pub use noise::{inject_noise, perturb, pixel_std, DEFAULT_SIGMAS};
pub use report::{
    accuracy_vs_d_svg, accuracy_vs_sigma_svg, aggregate_csv, ci95, emit_report, markdown_table, raw_csv,
    read_raw_csv, ReportFormat, AGGREGATE_FILE, AGGREGATE_HEADER, RAW_FILE, RAW_HEADER, TABLE_FILE,
};
pub use run::{
    aggregate, mean_std, model_digest, prepare_split, run_benchmark, run_cell, Aggregate, BenchConfig,
    BenchmarkReport, CellOutcome, PreparedSplit, RunRecord, DEFAULT_DIMS, DEFAULT_NOISE_DIMS,
};
pub use split::{default_mode, held_out_count, make_split, SplitMode, SplitPlan, DEFAULT_SEEDS, DEFAULT_TEST_FRACTION};
