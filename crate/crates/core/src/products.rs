//! Range-Doppler maps and Doppler-time spectrograms.
//!
//! Both products use Hann windows before every DFT, unnormalized forward
//! transforms, and a zero-centred Doppler axis (DC on row `n_chirps / 2`).
//! Values are stored as linear magnitude.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::radar_sim::IqCube;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisKind {
    Doppler,
    Range,
    Time,
}

/// Axis kind plus physical spacing per bin (m/s, m or s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductAxis {
    pub kind: AxisKind,
    pub spacing: f64,
}

/// A real, non-negative 2-D radar image with its label.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarProduct {
    pub values: Array2<f32>,
    pub row_axis: ProductAxis,
    pub col_axis: ProductAxis,
    pub label: usize,
    pub clip_id: Option<usize>,
    pub window_index: Option<usize>,
}

impl RadarProduct {
    pub fn shape(&self) -> (usize, usize) {
        self.values.dim()
    }

    /// Row and column of the largest value (first occurrence in row-major order).
    pub fn argmax(&self) -> (usize, usize) {
        let cols = self.values.ncols();
        let (flat, _) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f32::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
        (flat / cols, flat % cols)
    }
}

/// Symmetric Hann window.
pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
        .collect()
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

/// Row index of DFT bin `k` after moving DC to the centre.
fn shifted(k: usize, n: usize) -> usize {
    (k + n / 2) % n
}

/// Coherent mean over receive channels.
pub fn rx_average(cube: &IqCube) -> IqCube {
    let n_rx = cube.samples.len_of(Axis(0));
    let mean = cube.samples.sum_axis(Axis(0)) / Complex64::new(n_rx as f64, 0.0);
    let mut config = cube.config;
    config.n_rx = 1;
    IqCube {
        samples: mean.insert_axis(Axis(0)),
        config,
    }
}

/// Windowed fast-time then slow-time DFT of a single-channel cube, full size
/// `[n_chirps, n_fast]`, Doppler rows already centred.
pub fn range_doppler_spectrum(cube: &IqCube) -> Result<Array2<Complex64>> {
    cube.validate()?;
    let cfg = &cube.config;
    if cfg.n_rx != 1 {
        return Err(Error::ShapeMismatch {
            expected: "single receive channel (average channels first)".into(),
            got: format!("{} channels", cfg.n_rx),
        });
    }
    let (n_chirps, n_fast) = (cfg.n_chirps, cfg.n_fast);
    let w_fast = hann(n_fast);
    let w_slow = hann(n_chirps);

    let mut grid = Array2::<Complex64>::zeros((n_chirps, n_fast));
    let fast = forward_plan(n_fast);
    for (m, mut row) in grid.outer_iter_mut().enumerate() {
        let src = cube.samples.index_axis(Axis(0), 0);
        let src = src.index_axis(Axis(0), m);
        for ((dst, x), w) in row.iter_mut().zip(src.iter()).zip(&w_fast) {
            *dst = x * (w * w_slow[m]);
        }
        fast.process(row.as_slice_mut().expect("row-major grid"));
    }

    let slow = forward_plan(n_chirps);
    let mut column = vec![Complex64::new(0.0, 0.0); n_chirps];
    let mut out = Array2::<Complex64>::zeros((n_chirps, n_fast));
    for k in 0..n_fast {
        for m in 0..n_chirps {
            column[m] = grid[[m, k]];
        }
        slow.process(&mut column);
        for (l, v) in column.iter().enumerate() {
            out[[shifted(l, n_chirps), k]] = *v;
        }
    }
    Ok(out)
}

/// Factor relating windowed-cube energy to spectrum energy (Parseval for the
/// unnormalized 2-D DFT).
pub fn rdm_energy_factor(cube: &IqCube) -> f64 {
    (cube.config.n_fast * cube.config.n_chirps) as f64
}

/// Energy of the cube after the separable Hann window used by [`form_rdm`].
pub fn windowed_energy(cube: &IqCube) -> f64 {
    let w_fast = hann(cube.config.n_fast);
    let w_slow = hann(cube.config.n_chirps);
    let plane = cube.samples.index_axis(Axis(0), 0);
    plane
        .indexed_iter()
        .map(|((m, n), x)| x.norm_sqr() * (w_slow[m] * w_fast[n]).powi(2))
        .sum()
}

/// Range-Doppler map `|FFT_slow{FFT_fast{x}}|`, shape `n_chirps x usable_range_bins`.
pub fn form_rdm(cube: &IqCube) -> Result<RadarProduct> {
    let spectrum = range_doppler_spectrum(cube)?;
    let cfg = &cube.config;
    let values = spectrum
        .slice(ndarray::s![.., ..cfg.usable_range_bins])
        .mapv(|z| z.norm() as f32);
    Ok(RadarProduct {
        values,
        row_axis: ProductAxis {
            kind: AxisKind::Doppler,
            spacing: cfg.velocity_bin_mps(),
        },
        col_axis: ProductAxis {
            kind: AxisKind::Range,
            spacing: cfg.range_bin_m(),
        },
        label: 0,
        clip_id: None,
        window_index: None,
    })
}

/// Doppler magnitude profile of one frame: receive channels are averaged, the
/// range bin with the largest integrated energy is selected, and its
/// slow-time sequence is windowed and transformed. Length `n_chirps`, centred.
pub fn doppler_profile(cube: &IqCube) -> Result<Vec<f64>> {
    cube.validate()?;
    let avg = if cube.config.n_rx == 1 { cube.clone() } else { rx_average(cube) };
    let cfg = &avg.config;
    let (n_chirps, n_fast) = (cfg.n_chirps, cfg.n_fast);
    let w_fast = hann(n_fast);
    let fast = forward_plan(n_fast);

    let plane = avg.samples.index_axis(Axis(0), 0);
    let mut ranged = Array2::<Complex64>::zeros((n_chirps, n_fast));
    for (m, mut row) in ranged.outer_iter_mut().enumerate() {
        for ((dst, x), w) in row.iter_mut().zip(plane.index_axis(Axis(0), m)).zip(&w_fast) {
            *dst = x * w;
        }
        fast.process(row.as_slice_mut().expect("row-major grid"));
    }
    let energy = ranged.map_axis(Axis(0), |c| c.iter().map(|z| z.norm_sqr()).sum::<f64>());
    let best = energy
        .iter()
        .take(cfg.usable_range_bins)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (k, &e)| if e > b.1 { (k, e) } else { b })
        .0;

    let w_slow = hann(n_chirps);
    let mut column: Vec<Complex64> = ranged
        .column(best)
        .iter()
        .zip(&w_slow)
        .map(|(z, w)| z * w)
        .collect();
    forward_plan(n_chirps).process(&mut column);
    let mut profile = vec![0.0; n_chirps];
    for (l, z) in column.iter().enumerate() {
        profile[shifted(l, n_chirps)] = z.norm();
    }
    Ok(profile)
}

/// Stacks `window_len` consecutive profiles starting at `start` into a
/// `n_doppler x window_len` spectrogram.
pub fn stack_profiles(
    profiles: &[Vec<f64>],
    start: usize,
    window_len: usize,
    doppler_spacing: f64,
    frame_period_s: f64,
) -> Result<RadarProduct> {
    if window_len == 0 || start + window_len > profiles.len() {
        return Err(Error::InvalidArgument(format!(
            "need {} frames from index {start}, have {}",
            window_len,
            profiles.len()
        )));
    }
    let n_doppler = profiles[start].len();
    if profiles[start..start + window_len].iter().any(|p| p.len() != n_doppler) {
        return Err(Error::ShapeMismatch {
            expected: format!("profiles of length {n_doppler}"),
            got: "ragged profiles".into(),
        });
    }
    let values = Array2::from_shape_fn((n_doppler, window_len), |(l, t)| profiles[start + t][l] as f32);
    Ok(RadarProduct {
        values,
        row_axis: ProductAxis {
            kind: AxisKind::Doppler,
            spacing: doppler_spacing,
        },
        col_axis: ProductAxis {
            kind: AxisKind::Time,
            spacing: frame_period_s,
        },
        label: 0,
        clip_id: None,
        window_index: None,
    })
}

/// Start frames of every window of `window_len` frames cut with `stride`.
pub fn window_starts(n_frames: usize, window_len: usize, stride: usize) -> Vec<usize> {
    if n_frames < window_len || stride == 0 {
        return Vec::new();
    }
    (0..=(n_frames - window_len)).step_by(stride).collect()
}

/// Doppler-time spectrogram from the first `window_len` frames.
pub fn form_spectrogram(frames: &[IqCube], window_len: usize) -> Result<RadarProduct> {
    if frames.len() < window_len || window_len == 0 {
        return Err(Error::InvalidArgument(format!(
            "spectrogram needs {window_len} frames, got {}",
            frames.len()
        )));
    }
    let profiles = frames[..window_len]
        .iter()
        .map(doppler_profile)
        .collect::<Result<Vec<_>>>()?;
    let cfg = &frames[0].config;
    let mut product = stack_profiles(&profiles, 0, window_len, cfg.velocity_bin_mps(), cfg.cpi_s())?;
    product.window_index = Some(0);
    Ok(product)
}

/// Every strided spectrogram window of a clip's frames.
pub fn form_spectrograms(frames: &[IqCube], window_len: usize, stride: usize) -> Result<Vec<RadarProduct>> {
    if frames.len() < window_len || window_len == 0 {
        return Err(Error::InvalidArgument(format!(
            "spectrogram needs {window_len} frames, got {}",
            frames.len()
        )));
    }
    let profiles = frames.iter().map(doppler_profile).collect::<Result<Vec<_>>>()?;
    let cfg = &frames[0].config;
    window_starts(frames.len(), window_len, stride)
        .into_iter()
        .enumerate()
        .map(|(w, start)| {
            let mut p = stack_profiles(&profiles, start, window_len, cfg.velocity_bin_mps(), cfg.cpi_s())?;
            p.window_index = Some(w);
            Ok(p)
        })
        .collect()
}
