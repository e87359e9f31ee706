//! Seeded train/test partitions.

use rand::seq::SliceRandom;

use super::dataset::Dataset;
use crate::{streams, Error, Result};

pub const DEFAULT_SEEDS: [u64; 5] = [7, 11, 21, 42, 84];
pub const DEFAULT_TEST_FRACTION: f64 = 0.25;

const SPLIT_KEY: u64 = 0x7370_6c69;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    /// Holds out a fraction of the rows of every class.
    StratifiedSample,
    /// Holds out whole clips so no clip feeds both partitions.
    ClipLevel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPlan {
    pub seed: u64,
    pub test_fraction: f64,
    pub mode: SplitMode,
    /// Sorted row indices.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    /// Held-out clips, sorted; empty for stratified plans.
    pub test_clips: Vec<usize>,
}

/// `round(fraction * n)` with halves rounded up.
pub fn held_out_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64) + 0.5).floor() as usize
}

/// Clip-level when every sample carries a clip id, stratified otherwise.
pub fn default_mode(ds: &Dataset) -> SplitMode {
    if ds.clip_ids().is_some() {
        SplitMode::ClipLevel
    } else {
        SplitMode::StratifiedSample
    }
}

pub fn make_split(ds: &Dataset, seed: u64, test_fraction: f64, mode: SplitMode) -> Result<SplitPlan> {
    if ds.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let labels = ds.labels();
    let n_classes = ds.n_classes().max(labels.iter().max().map_or(0, |m| m + 1));
    let mut test = vec![false; labels.len()];
    let mut test_clips = Vec::new();

    match mode {
        SplitMode::StratifiedSample => {
            for class in 0..n_classes {
                let mut rows: Vec<usize> = (0..labels.len()).filter(|&r| labels[r] == class).collect();
                rows.shuffle(&mut streams::stream(seed, &[SPLIT_KEY, class as u64]));
                for &r in rows.iter().take(held_out_count(rows.len(), test_fraction)) {
                    test[r] = true;
                }
            }
        }
        SplitMode::ClipLevel => {
            let ids = ds
                .clip_ids()
                .ok_or_else(|| Error::InvalidArgument("clip-level split needs clip ids".into()))?;
            // clip -> label, checking each clip is single-class
            let mut clips: Vec<(usize, usize)> = Vec::new();
            for (&c, &l) in ids.iter().zip(&labels) {
                match clips.iter().find(|(id, _)| *id == c) {
                    Some(&(_, lab)) if lab != l => {
                        return Err(Error::InvalidArgument(format!("clip {c} mixes labels")));
                    }
                    Some(_) => {}
                    None => clips.push((c, l)),
                }
            }
            clips.sort_unstable();
            test_clips = pick_test_clips(&clips, n_classes, test_fraction, seed);
            for (r, c) in ids.iter().enumerate() {
                test[r] = test_clips.binary_search(c).is_ok();
            }
        }
    }

    let train_rows: Vec<usize> = (0..labels.len()).filter(|&r| !test[r]).collect();
    let test_rows: Vec<usize> = (0..labels.len()).filter(|&r| test[r]).collect();
    for class in 0..n_classes {
        for (rows, partition) in [(&train_rows, "train"), (&test_rows, "test")] {
            if !rows.iter().any(|&r| labels[r] == class) {
                return Err(Error::MissingClass { class, partition });
            }
        }
    }
    Ok(SplitPlan {
        seed,
        test_fraction,
        mode,
        train_rows,
        test_rows,
        test_clips,
    })
}

/// Spreads the held-out clip budget over classes as evenly as possible. The
/// remainder goes to classes in seed-shuffled order, and every class keeps
/// at least one training clip.
fn pick_test_clips(clips: &[(usize, usize)], n_classes: usize, fraction: f64, seed: u64) -> Vec<usize> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for &(c, l) in clips {
        by_class[l].push(c);
    }
    for (class, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut streams::stream(seed, &[SPLIT_KEY, 0x636c, class as u64]));
    }
    let capacity: Vec<usize> = by_class.iter().map(|m| m.len().saturating_sub(1)).collect();
    let budget = held_out_count(clips.len(), fraction).min(capacity.iter().sum());

    let mut order: Vec<usize> = (0..n_classes).collect();
    order.shuffle(&mut streams::stream(seed, &[SPLIT_KEY, 0x6f72]));
    let mut quota = vec![0usize; n_classes];
    let mut left = budget;
    // round robin in shuffled order, skipping full classes
    while left > 0 {
        let mut progressed = false;
        for &class in &order {
            if left > 0 && quota[class] < capacity[class] {
                quota[class] += 1;
                left -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    let mut picked: Vec<usize> = by_class
        .iter()
        .zip(&quota)
        .flat_map(|(m, &q)| m.iter().take(q).copied())
        .collect();
    picked.sort_unstable();
    picked
}
