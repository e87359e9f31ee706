use std::f64::consts::PI;

use ndarray::{Array3, Axis};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{RadarConfig, Scene};
use crate::{streams, Error, Result};

/// Dechirped complex baseband samples, shape `[n_rx, n_chirps, n_fast]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IqCube {
    pub samples: Array3<Complex64>,
    pub config: RadarConfig,
}

impl IqCube {
    pub fn zeros(config: RadarConfig) -> Self {
        IqCube {
            samples: Array3::zeros((config.n_rx, config.n_chirps, config.n_fast)),
            config,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let want = (self.config.n_rx, self.config.n_chirps, self.config.n_fast);
        if self.samples.dim() != want {
            return Err(Error::ShapeMismatch {
                expected: format!("{want:?}"),
                got: format!("{:?}", self.samples.dim()),
            });
        }
        if self.samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("cube holds non-finite samples".into()));
        }
        Ok(())
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Thermal noise added on top of the scatterer returns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseFloor {
    None,
    /// Complex Gaussian whose standard deviation sits this many dB relative to
    /// the amplitude of the strongest scatterer.
    RelativeDb(f64),
    /// Fixed standard deviation, independent of the scene.
    Absolute(f64),
}

impl NoiseFloor {
    /// Per-sample standard deviation for `scene`.
    pub fn sigma(&self, scene: &Scene) -> f64 {
        match *self {
            NoiseFloor::None => 0.0,
            NoiseFloor::RelativeDb(db) => scene.max_rcs() * 10f64.powf(db / 20.0),
            NoiseFloor::Absolute(s) => s,
        }
    }
}

impl Default for NoiseFloor {
    fn default() -> Self {
        NoiseFloor::RelativeDb(-40.0)
    }
}

/// Synthesizes `scene` with the default -40 dB relative noise floor.
pub fn synthesize_cube(scene: &Scene, config: &RadarConfig, seed: u64) -> Result<IqCube> {
    synthesize_cube_with(scene, config, seed, NoiseFloor::default())
}

/// Each radiating point at range `R(t_m)` adds a tone at beat frequency `2 R S / c`
/// across fast time, with carrier phase `4 pi R / lambda` per chirp and an
/// inter-element phase `pi * rx * sin(azimuth)` across receive channels.
pub fn synthesize_cube_with(
    scene: &Scene,
    config: &RadarConfig,
    seed: u64,
    noise: NoiseFloor,
) -> Result<IqCube> {
    config.validate()?;
    for (i, s) in scene.scatterers.iter().enumerate() {
        s.check_window(i, config)?;
    }

    let mut cube = IqCube::zeros(*config);
    let lambda = config.wavelength();
    let n_fast = config.n_fast;
    let mut points: Vec<([f64; 3], f64)> = Vec::new();
    let mut tone: Vec<Complex64> = Vec::with_capacity(n_fast);

    for m in 0..config.n_chirps {
        let t = m as f64 * config.chirp_duration_s;
        points.clear();
        for s in &scene.scatterers {
            s.for_each_point(t, |p, a| points.push((p, a)));
        }
        for &(p, amp) in &points {
            if amp == 0.0 {
                continue;
            }
            let range = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            let ground = (p[0] * p[0] + p[1] * p[1]).sqrt();
            let sin_az = if ground > 0.0 { p[1] / ground } else { 0.0 };
            let step = Complex64::cis(2.0 * PI * config.beat_frequency(range) / config.sample_rate_hz);
            let carrier = 4.0 * PI * range / lambda;
            tone.clear();
            let mut z = Complex64::from_polar(amp, carrier);
            for _ in 0..n_fast {
                tone.push(z);
                z *= step;
            }
            for rx in 0..config.n_rx {
                let mut plane = cube.samples.index_axis_mut(Axis(0), rx);
                let mut row = plane.index_axis_mut(Axis(0), m);
                let row = row.as_slice_mut().expect("cube rows are contiguous");
                if rx == 0 {
                    row.iter_mut().zip(&tone).for_each(|(x, t)| *x += t);
                } else {
                    let w = Complex64::cis(PI * rx as f64 * sin_az);
                    row.iter_mut().zip(&tone).for_each(|(x, t)| *x += t * w);
                }
            }
        }
    }

    let sigma = noise.sigma(scene);
    if sigma > 0.0 {
        let mut rng = streams::stream(seed, &[0x6e6f_6973_6566]);
        let s = sigma / 2f64.sqrt();
        for x in cube.samples.iter_mut() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *x += Complex64::new(re * s, im * s);
        }
    }
    Ok(cube)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radar_sim::Scatterer;

    #[test]
    fn empty_scene_without_noise_is_zero() {
        let cfg = RadarConfig::uav();
        let cube = synthesize_cube(&Scene::new(vec![], 0), &cfg, 3).unwrap();
        assert!(cube.samples.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
        assert_eq!(cube.samples.dim(), (1, 128, 512));
    }

    #[test]
    fn deterministic_with_noise() {
        let cfg = RadarConfig::fall();
        let scene = Scene::new(vec![Scatterer::on_boresight(4.0, 1.0, 1.0)], 1);
        let a = synthesize_cube(&scene, &cfg, 11).unwrap();
        let b = synthesize_cube(&scene, &cfg, 11).unwrap();
        let c = synthesize_cube(&scene, &cfg, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn out_of_window_is_an_error() {
        let cfg = RadarConfig::fall();
        let scene = Scene::new(vec![Scatterer::on_boresight(40.0, 0.0, 1.0)], 0);
        assert!(matches!(
            synthesize_cube(&scene, &cfg, 0),
            Err(Error::OutOfWindow { index: 0, .. })
        ));
    }

    #[test]
    fn tone_amplitude_is_rcs() {
        let cfg = RadarConfig::uav();
        let scene = Scene::new(vec![Scatterer::on_boresight(10.0, 2.0, 0.7)], 0);
        let cube = synthesize_cube_with(&scene, &cfg, 0, NoiseFloor::None).unwrap();
        assert!(cube.samples.iter().all(|z| (z.norm() - 0.7).abs() < 1e-9));
        cube.validate().unwrap();
    }
}
