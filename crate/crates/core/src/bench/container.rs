//! On-disk dataset container: `manifest.txt` plus one `sample_<i>.bin` per
//! product holding row-major little-endian f32 values.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;

use super::dataset::{Dataset, Task};
use crate::products::{AxisKind, ProductAxis, RadarProduct};
use crate::radar_sim::RadarConfig;
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.txt";

pub fn sample_file_name(index: usize) -> String {
    format!("sample_{index}.bin")
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn axis_str(axis: &ProductAxis) -> String {
    let kind = match axis.kind {
        AxisKind::Doppler => "doppler",
        AxisKind::Range => "range",
        AxisKind::Time => "time",
    };
    format!("{kind}:{}", axis.spacing)
}

fn manifest_text(ds: &Dataset) -> Result<String> {
    let (rows, cols) = ds
        .shape()
        .ok_or_else(|| Error::InvalidArgument("cannot write an empty dataset".into()))?;
    let first = &ds.products[0];
    let c = &ds.config;
    let mut lines = vec![
        format!("task={}", ds.task),
        format!("n_samples={}", ds.len()),
        format!("rows={rows}"),
        format!("cols={cols}"),
        format!("labels={}", join(ds.labels())),
        format!("class_names={}", ds.class_names.join(",")),
    ];
    if let Some(ids) = ds.clip_ids() {
        lines.push(format!("clip_ids={}", join(ids)));
    }
    let windows: Option<Vec<usize>> = ds.products.iter().map(|p| p.window_index).collect();
    if let Some(w) = windows {
        lines.push(format!("window_indices={}", join(w)));
    }
    lines.extend([
        format!("seed={}", ds.seed),
        format!("row_axis={}", axis_str(&first.row_axis)),
        format!("col_axis={}", axis_str(&first.col_axis)),
        format!("config.carrier_hz={}", c.carrier_hz),
        format!("config.bandwidth_hz={}", c.bandwidth_hz),
        format!("config.chirp_duration_s={}", c.chirp_duration_s),
        format!("config.n_fast={}", c.n_fast),
        format!("config.n_chirps={}", c.n_chirps),
        format!("config.n_rx={}", c.n_rx),
        format!("config.sample_rate_hz={}", c.sample_rate_hz),
        format!("config.usable_range_bins={}", c.usable_range_bins),
    ]);
    Ok(lines.join("\n") + "\n")
}

/// Writes `ds` into `dir`, creating it if needed.
pub fn write_dataset(ds: &Dataset, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = manifest_text(ds)?;
    let shape = ds.shape().expect("checked by manifest_text");
    for (i, p) in ds.products.iter().enumerate() {
        if p.shape() != shape {
            return Err(Error::ShapeMismatch {
                expected: format!("{shape:?}"),
                got: format!("{:?}", p.shape()),
            });
        }
        let bytes: Vec<u8> = p.values.iter().flat_map(|v| v.to_le_bytes()).collect();
        let path = dir.join(sample_file_name(i));
        fs::write(&path, bytes).map_err(|e| Error::io(path, e))?;
    }
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest).map_err(|e| Error::io(path, e))
}

struct Manifest {
    path: PathBuf,
    entries: BTreeMap<String, String>,
}

impl Manifest {
    fn err(&self, reason: impl Into<String>) -> Error {
        Error::Manifest {
            path: self.path.clone(),
            reason: reason.into(),
        }
    }

    fn get(&self, key: &str) -> Result<&str> {
        self.entries
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| self.err(format!("missing key '{key}'")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key)?;
        raw.parse()
            .map_err(|_| self.err(format!("bad value '{raw}' for '{key}'")))
    }

    fn list(&self, key: &str) -> Result<Vec<usize>> {
        let raw = self.get(key)?;
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|v| v.parse().map_err(|_| self.err(format!("bad entry '{v}' in '{key}'"))))
            .collect()
    }

    fn axis(&self, key: &str) -> Result<ProductAxis> {
        let raw = self.get(key)?;
        let (kind, spacing) = raw
            .split_once(':')
            .ok_or_else(|| self.err(format!("bad axis '{raw}'")))?;
        let kind = match kind {
            "doppler" => AxisKind::Doppler,
            "range" => AxisKind::Range,
            "time" => AxisKind::Time,
            other => return Err(self.err(format!("unknown axis kind '{other}'"))),
        };
        let spacing = spacing
            .parse()
            .map_err(|_| self.err(format!("bad axis spacing '{spacing}'")))?;
        Ok(ProductAxis { kind, spacing })
    }
}

fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut entries = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Manifest {
                path,
                reason: format!("line {} is not key=value", n + 1),
            });
        };
        entries.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(Manifest { path, entries })
}

/// Reads a container written by [`write_dataset`].
pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let m = read_manifest(dir)?;
    let task: Task = m.get("task")?.parse().map_err(|_| m.err("unknown task"))?;
    let n: usize = m.parse("n_samples")?;
    let rows: usize = m.parse("rows")?;
    let cols: usize = m.parse("cols")?;
    let labels = m.list("labels")?;
    if labels.len() != n {
        return Err(m.err(format!("{} labels for {n} samples", labels.len())));
    }
    let class_names: Vec<String> = m.get("class_names")?.split(',').map(str::to_string).collect();
    if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
        return Err(m.err(format!("label {bad} has no class name")));
    }
    let optional_list = |key: &str| -> Result<Option<Vec<usize>>> {
        if m.entries.contains_key(key) {
            let v = m.list(key)?;
            if v.len() != n {
                return Err(m.err(format!("'{key}' has {} entries for {n} samples", v.len())));
            }
            Ok(Some(v))
        } else {
            Ok(None)
        }
    };
    let clip_ids = optional_list("clip_ids")?;
    let windows = optional_list("window_indices")?;
    let config = RadarConfig {
        carrier_hz: m.parse("config.carrier_hz")?,
        bandwidth_hz: m.parse("config.bandwidth_hz")?,
        chirp_duration_s: m.parse("config.chirp_duration_s")?,
        n_fast: m.parse("config.n_fast")?,
        n_chirps: m.parse("config.n_chirps")?,
        n_rx: m.parse("config.n_rx")?,
        sample_rate_hz: m.parse("config.sample_rate_hz")?,
        usable_range_bins: m.parse("config.usable_range_bins")?,
    };
    let row_axis = m.axis("row_axis")?;
    let col_axis = m.axis("col_axis")?;

    let mut products = Vec::with_capacity(n);
    for i in 0..n {
        let path = dir.join(sample_file_name(i));
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if bytes.len() != rows * cols * 4 {
            return Err(m.err(format!(
                "{} holds {} bytes, expected {}",
                path.display(),
                bytes.len(),
                rows * cols * 4
            )));
        }
        let values: Vec<f32> = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        products.push(RadarProduct {
            values: Array2::from_shape_vec((rows, cols), values).expect("length checked"),
            row_axis,
            col_axis,
            label: labels[i],
            clip_id: clip_ids.as_ref().map(|c| c[i]),
            window_index: windows.as_ref().map(|w| w[i]),
        });
    }
    Ok(Dataset {
        task,
        products,
        class_names,
        seed: m.parse("seed")?,
        config,
    })
}
