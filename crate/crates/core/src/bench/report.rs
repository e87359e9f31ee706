//! CSV, markdown and SVG renderings of a [`BenchmarkReport`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::dataset::Task;
use super::run::{Aggregate, BenchmarkReport, RunRecord};
use crate::kernels::KernelKind;
use crate::{Error, Result};

pub const RAW_HEADER: [&str; 7] = ["task", "d", "kernel", "sigma", "seed", "accuracy", "n_test"];
pub const AGGREGATE_HEADER: [&str; 7] = ["task", "d", "kernel", "sigma", "mean_accuracy", "std_accuracy", "n_seeds"];
pub const RAW_FILE: &str = "raw.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const TABLE_FILE: &str = "table.md";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Svg,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Markdown, ReportFormat::Svg];
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "svg" => Ok(ReportFormat::Svg),
            other => Err(Error::InvalidArgument(format!("unknown report format '{other}'"))),
        }
    }
}

fn report_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Report {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv buffer: {e}")))
}

/// Raw records, one per line. Numbers use the shortest round-trip form so a
/// re-read reproduces the same values.
pub fn raw_csv(records: &[RunRecord]) -> Result<Vec<u8>> {
    csv_bytes(
        &RAW_HEADER,
        records.iter().map(|r| {
            vec![
                r.task.to_string(),
                r.d.to_string(),
                r.kernel.to_string(),
                r.sigma.to_string(),
                r.seed.to_string(),
                r.accuracy.to_string(),
                r.n_test.to_string(),
            ]
        }),
    )
}

pub fn aggregate_csv(aggregates: &[Aggregate]) -> Result<Vec<u8>> {
    csv_bytes(
        &AGGREGATE_HEADER,
        aggregates.iter().map(|a| {
            vec![
                a.task.to_string(),
                a.d.to_string(),
                a.kernel.to_string(),
                a.sigma.to_string(),
                format!("{:.6}", a.mean_accuracy),
                a.std_accuracy.map(|s| format!("{s:.6}")).unwrap_or_default(),
                a.n_seeds.to_string(),
            ]
        }),
    )
}

pub fn read_raw_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => report_err(path, format!("cannot open: {e}")),
        _ => Error::Csv(e),
    })?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != RAW_HEADER {
        return Err(report_err(path, format!("unexpected header {}", header.join(","))));
    }
    let mut out = Vec::new();
    for (line, row) in reader.records().enumerate() {
        let row = row?;
        let bad = |field: &str| report_err(path, format!("record {}: bad {field}", line + 1));
        let field = |i: usize| row.get(i).unwrap_or("");
        let record = RunRecord {
            task: field(0).parse().map_err(|_| bad("task"))?,
            d: field(1).parse().map_err(|_| bad("d"))?,
            kernel: field(2).parse().map_err(|_| bad("kernel"))?,
            sigma: field(3).parse().map_err(|_| bad("sigma"))?,
            seed: field(4).parse().map_err(|_| bad("seed"))?,
            accuracy: field(5).parse().map_err(|_| bad("accuracy"))?,
            n_test: field(6).parse().map_err(|_| bad("n_test"))?,
            model_digest: 0,
        };
        if !(0.0..=1.0).contains(&record.accuracy) {
            return Err(bad("accuracy"));
        }
        out.push(record);
    }
    Ok(out)
}

fn tasks_of(report: &BenchmarkReport) -> Vec<Task> {
    Task::ALL
        .into_iter()
        .filter(|t| report.aggregates.iter().any(|a| a.task == *t))
        .collect()
}

fn kernels_of(report: &BenchmarkReport) -> Vec<KernelKind> {
    [KernelKind::Rbf, KernelKind::Quantum]
        .into_iter()
        .filter(|k| report.aggregates.iter().any(|a| a.kernel == *k))
        .collect()
}

fn sorted_unique<T: PartialOrd + Copy>(mut v: Vec<T>) -> Vec<T> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    v.dedup();
    v
}

/// Dimensions that carry at least one noisy cell for `task`.
fn noise_dims(report: &BenchmarkReport, task: Task) -> Vec<usize> {
    sorted_unique(
        report
            .aggregates
            .iter()
            .filter(|a| a.task == task && a.sigma > 0.0)
            .map(|a| a.d)
            .collect(),
    )
}

fn mean_std_cell(a: Option<&Aggregate>, bold: bool) -> String {
    let Some(a) = a else {
        return "n/a".into();
    };
    let text = match a.std_accuracy {
        Some(s) => format!("{:.3} ± {:.3}", a.mean_accuracy, s),
        None => format!("{:.3}", a.mean_accuracy),
    };
    if bold {
        format!("**{text}**")
    } else {
        text
    }
}

/// Index of the strictly best mean, if there is one.
fn best_of(cells: &[Option<&Aggregate>]) -> Option<usize> {
    if cells.len() < 2 {
        return None;
    }
    let means: Vec<f64> = cells.iter().map(|c| c.map_or(f64::NAN, |a| a.mean_accuracy)).collect();
    let top = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let winners: Vec<usize> = (0..means.len()).filter(|&i| means[i] == top).collect();
    (winners.len() == 1).then(|| winners[0])
}

/// Clean accuracy by dimension (rows) and task/kernel (columns), followed by
/// the noise table when noisy cells are present.
pub fn markdown_table(report: &BenchmarkReport) -> String {
    let tasks = tasks_of(report);
    let kernels = kernels_of(report);
    let mut md = String::new();
    let n_seeds = report.aggregates.iter().map(|a| a.n_seeds).max().unwrap_or(0);

    let clean_dims = sorted_unique(
        report
            .aggregates
            .iter()
            .filter(|a| a.sigma == 0.0)
            .map(|a| a.d)
            .collect(),
    );
    if !clean_dims.is_empty() {
        let _ = writeln!(md, "## Clean test accuracy\n");
        let _ = writeln!(md, "Mean ± standard deviation over {n_seeds} seeds; the better mean per task is in bold.\n");
        let mut head = String::from("| d |");
        let mut rule = String::from("|---|");
        for t in &tasks {
            for k in &kernels {
                let _ = write!(head, " {} {} |", t.display_name(), k.display_name());
                rule.push_str("---|");
            }
        }
        let _ = writeln!(md, "{head}\n{rule}");
        for &d in &clean_dims {
            let mut line = format!("| {d} |");
            for &t in &tasks {
                let cells: Vec<Option<&Aggregate>> =
                    kernels.iter().map(|&k| report.aggregate_for(t, d, k, 0.0)).collect();
                let best = best_of(&cells);
                for (i, c) in cells.iter().enumerate() {
                    let _ = write!(line, " {} |", mean_std_cell(*c, best == Some(i)));
                }
            }
            let _ = writeln!(md, "{line}");
        }
    }

    let has_noise = report.aggregates.iter().any(|a| a.sigma > 0.0);
    if has_noise {
        let sigmas = sorted_unique(report.aggregates.iter().map(|a| a.sigma).collect());
        if !md.is_empty() {
            md.push('\n');
        }
        let names: Vec<&str> = kernels.iter().map(|k| k.display_name()).collect();
        let _ = writeln!(md, "## Noise robustness\n");
        let _ = writeln!(md, "Entries are {} mean accuracy; the better value in each pair is in bold.\n", names.join("/"));
        let mut head = String::from("| Task | d |");
        let mut rule = String::from("|---|---|");
        for s in &sigmas {
            let _ = write!(head, " σ={s:.2} |");
            rule.push_str("---|");
        }
        let _ = writeln!(md, "{head}\n{rule}");
        for &t in &tasks {
            for d in noise_dims(report, t) {
                let mut line = format!("| {} | {d} |", t.display_name());
                for &s in &sigmas {
                    let cells: Vec<Option<&Aggregate>> =
                        kernels.iter().map(|&k| report.aggregate_for(t, d, k, s)).collect();
                    let best = best_of(&cells);
                    let parts: Vec<String> = cells
                        .iter()
                        .enumerate()
                        .map(|(i, c)| match c {
                            Some(a) if best == Some(i) => format!("**{:.3}**", a.mean_accuracy),
                            Some(a) => format!("{:.3}", a.mean_accuracy),
                            None => "n/a".into(),
                        })
                        .collect();
                    let _ = write!(line, " {} |", parts.join("/"));
                }
                let _ = writeln!(md, "{line}");
            }
        }
    }
    md
}

/// Half-width of the normal-approximation 95% interval.
pub fn ci95(a: &Aggregate) -> f64 {
    a.std_accuracy
        .map_or(0.0, |s| 1.96 * s / (a.n_seeds as f64).sqrt())
}

fn kernel_color(k: KernelKind) -> &'static str {
    match k {
        KernelKind::Rbf => "#1f77b4",
        KernelKind::Quantum => "#d62728",
    }
}

struct Series {
    name: &'static str,
    color: &'static str,
    /// (x, mean, ci half-width)
    points: Vec<(f64, f64, f64)>,
}

fn line_plot(title: &str, x_label: &str, x_ticks: &[f64], series: &[Series]) -> String {
    let (w, h) = (640.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 60.0);
    let (pw, ph) = (w - left - right, h - top - bottom);

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(_, m, c) in &s.points {
            lo = lo.min(m - c);
            hi = hi.max(m + c);
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    let lo = ((lo - 0.05) * 20.0).floor() / 20.0;
    let hi = ((hi + 0.05) * 20.0).ceil() / 20.0;
    let (lo, hi) = (lo.max(0.0), hi.min(1.0).max(lo + 0.05));
    let (xmin, xmax) = (
        x_ticks.first().copied().unwrap_or(0.0),
        x_ticks.last().copied().unwrap_or(1.0),
    );
    let xspan = if xmax > xmin { xmax - xmin } else { 1.0 };
    let px = |x: f64| left + pw * if xmax > xmin { (x - xmin) / xspan } else { 0.5 };
    let py = |y: f64| top + ph * (1.0 - (y - lo) / (hi - lo));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{title}</text>"#,
        left + pw / 2.0
    );
    let _ = writeln!(
        svg,
        r##"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##
    );
    for i in 0..=5 {
        let y = lo + (hi - lo) * i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" stroke="#ddd"/><text x="{2:.1}" y="{3:.1}" text-anchor="end">{y:.2}</text>"##,
            py(y),
            left + pw,
            left - 6.0,
            py(y) + 4.0
        );
    }
    for &x in x_ticks {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x}</text>"#,
            px(x),
            top + ph + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{x_label}</text>"#,
        left + pw / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{0:.1}" text-anchor="middle" transform="rotate(-90 18 {0:.1})">mean accuracy</text>"#,
        top + ph / 2.0
    );
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s.points.iter().map(|&(x, m, _)| format!("{:.1},{:.1}", px(x), py(m))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            s.color
        );
        for &(x, m, c) in &s.points {
            let (x0, ylo, yhi) = (px(x), py((m - c).max(lo)), py((m + c).min(hi)));
            let _ = writeln!(
                svg,
                r#"<line x1="{x0:.1}" y1="{ylo:.1}" x2="{x0:.1}" y2="{yhi:.1}" stroke="{0}"/><line x1="{1:.1}" y1="{ylo:.1}" x2="{2:.1}" y2="{ylo:.1}" stroke="{0}"/><line x1="{1:.1}" y1="{yhi:.1}" x2="{2:.1}" y2="{yhi:.1}" stroke="{0}"/><circle cx="{x0:.1}" cy="{3:.1}" r="3.5" fill="{0}"/>"#,
                s.color,
                x0 - 4.0,
                x0 + 4.0,
                py(m)
            );
        }
        let ly = top + 14.0 + 20.0 * i as f64;
        let lx = left + pw + 14.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 20.0,
            s.color,
            lx + 26.0,
            ly + 4.0,
            s.name
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Mean clean accuracy against d for one task, one line per kernel.
pub fn accuracy_vs_d_svg(report: &BenchmarkReport, task: Task) -> String {
    let rows: Vec<&Aggregate> = report.aggregates.iter().filter(|a| a.task == task && a.sigma == 0.0).collect();
    let ticks = sorted_unique(rows.iter().map(|a| a.d as f64).collect());
    let series: Vec<Series> = kernels_of(report)
        .into_iter()
        .map(|k| Series {
            name: k.display_name(),
            color: kernel_color(k),
            points: rows
                .iter()
                .filter(|a| a.kernel == k)
                .map(|a| (a.d as f64, a.mean_accuracy, ci95(a)))
                .collect(),
        })
        .collect();
    line_plot(&format!("{}: accuracy vs d", task.display_name()), "PCA dimension d", &ticks, &series)
}

/// Mean accuracy against sigma at one dimension.
pub fn accuracy_vs_sigma_svg(report: &BenchmarkReport, task: Task, d: usize) -> String {
    let rows: Vec<&Aggregate> = report.aggregates.iter().filter(|a| a.task == task && a.d == d).collect();
    let ticks = sorted_unique(rows.iter().map(|a| a.sigma).collect());
    let series: Vec<Series> = kernels_of(report)
        .into_iter()
        .map(|k| Series {
            name: k.display_name(),
            color: kernel_color(k),
            points: rows
                .iter()
                .filter(|a| a.kernel == k)
                .map(|a| (a.sigma, a.mean_accuracy, ci95(a)))
                .collect(),
        })
        .collect();
    line_plot(
        &format!("{}: accuracy vs sigma (d = {d})", task.display_name()),
        "noise level sigma",
        &ticks,
        &series,
    )
}

fn write_file(path: PathBuf, bytes: &[u8], written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(())
}

/// Writes the requested renderings into `dir` and returns the file paths.
pub fn emit_report(report: &BenchmarkReport, dir: &Path, formats: &[ReportFormat]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    if formats.contains(&ReportFormat::Csv) {
        write_file(dir.join(RAW_FILE), &raw_csv(&report.records)?, &mut written)?;
        write_file(dir.join(AGGREGATE_FILE), &aggregate_csv(&report.aggregates)?, &mut written)?;
    }
    if formats.contains(&ReportFormat::Markdown) {
        write_file(dir.join(TABLE_FILE), markdown_table(report).as_bytes(), &mut written)?;
    }
    if formats.contains(&ReportFormat::Svg) {
        for task in tasks_of(report) {
            if report.aggregates.iter().any(|a| a.task == task && a.sigma == 0.0) {
                let path = dir.join(format!("accuracy_vs_d_{task}.svg"));
                write_file(path, accuracy_vs_d_svg(report, task).as_bytes(), &mut written)?;
            }
            for d in noise_dims(report, task) {
                let path = dir.join(format!("accuracy_vs_sigma_{task}_d{d}.svg"));
                write_file(path, accuracy_vs_sigma_svg(report, task, d).as_bytes(), &mut written)?;
            }
        }
    }
    Ok(written)
}
