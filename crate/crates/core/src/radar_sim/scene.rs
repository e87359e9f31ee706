use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::RadarConfig;
use crate::{Error, Result};

/// Sub-part motion superimposed on a scatterer's bulk trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MicroMotion {
    /// Rotor in the horizontal plane through the scatterer. Each blade is a
    /// single point at `0.8 * blade_length_m` from the hub.
    Rotor {
        blade_length_m: f64,
        rotation_hz: f64,
        n_blades: usize,
        phase_rad: f64,
    },
    /// Sinusoidal displacement along the line of sight.
    Oscillation {
        amplitude_m: f64,
        frequency_hz: f64,
        phase_rad: f64,
    },
}

/// Radius of the equivalent blade point as a fraction of blade length.
pub const BLADE_POINT_FRACTION: f64 = 0.8;

impl MicroMotion {
    /// Largest radial displacement away from the bulk position.
    pub fn max_excursion_m(&self) -> f64 {
        match *self {
            MicroMotion::Rotor { blade_length_m, .. } => BLADE_POINT_FRACTION * blade_length_m,
            MicroMotion::Oscillation { amplitude_m, .. } => amplitude_m.abs(),
        }
    }

    /// Largest radial speed contributed by the micro-motion.
    pub fn peak_speed_mps(&self) -> f64 {
        match *self {
            MicroMotion::Rotor {
                rotation_hz,
                n_blades,
                ..
            } if n_blades > 0 => 2.0 * PI * rotation_hz * self.max_excursion_m(),
            MicroMotion::Rotor { .. } => 0.0,
            MicroMotion::Oscillation { frequency_hz, .. } => {
                2.0 * PI * frequency_hz * self.max_excursion_m()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    /// Position relative to the radar, which looks along +x.
    pub position_m: [f64; 3],
    pub velocity_mps: [f64; 3],
    /// Reflectivity amplitude. For rotors this is the per-blade amplitude.
    pub rcs: f64,
    pub micro_motion: Option<MicroMotion>,
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

impl Scatterer {
    pub fn stationary(position_m: [f64; 3], rcs: f64) -> Self {
        Scatterer {
            position_m,
            velocity_mps: [0.0; 3],
            rcs,
            micro_motion: None,
        }
    }

    /// Scatterer on the boresight at `range_m` moving radially at `radial_mps`.
    pub fn on_boresight(range_m: f64, radial_mps: f64, rcs: f64) -> Self {
        Scatterer {
            position_m: [range_m, 0.0, 0.0],
            velocity_mps: [radial_mps, 0.0, 0.0],
            rcs,
            micro_motion: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rcs >= 0.0) || !self.rcs.is_finite() {
            return Err(Error::InvalidArgument(format!("rcs must be >= 0, got {}", self.rcs)));
        }
        if self.position_m.iter().chain(&self.velocity_mps).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite scatterer kinematics".into()));
        }
        match self.micro_motion {
            Some(MicroMotion::Rotor {
                blade_length_m,
                rotation_hz,
                ..
            }) if !(blade_length_m >= 0.0) || !(rotation_hz >= 0.0) => Err(
                Error::InvalidArgument("blade length and rotation rate must be >= 0".into()),
            ),
            Some(MicroMotion::Oscillation {
                amplitude_m,
                frequency_hz,
                ..
            }) if !amplitude_m.is_finite() || !(frequency_hz >= 0.0) => Err(
                Error::InvalidArgument("oscillation parameters must be finite, frequency >= 0".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Range of the bulk position at time zero.
    pub fn range_m(&self) -> f64 {
        norm(self.position_m)
    }

    /// Bulk radial velocity (positive = receding).
    pub fn radial_velocity_mps(&self) -> f64 {
        let r = self.range_m();
        if r == 0.0 {
            return 0.0;
        }
        (0..3).map(|k| self.position_m[k] * self.velocity_mps[k]).sum::<f64>() / r
    }

    /// Upper bound on the radial speed of any point of this scatterer.
    pub fn peak_radial_speed_mps(&self) -> f64 {
        self.radial_velocity_mps().abs()
            + self.micro_motion.map_or(0.0, |m| m.peak_speed_mps())
    }

    /// Calls `f(position, amplitude)` for every radiating point at time `t`.
    pub(crate) fn for_each_point(&self, t: f64, mut f: impl FnMut([f64; 3], f64)) {
        let p = [
            self.position_m[0] + self.velocity_mps[0] * t,
            self.position_m[1] + self.velocity_mps[1] * t,
            self.position_m[2] + self.velocity_mps[2] * t,
        ];
        match self.micro_motion {
            None => f(p, self.rcs),
            Some(MicroMotion::Rotor {
                blade_length_m,
                rotation_hz,
                n_blades,
                phase_rad,
            }) => {
                let radius = BLADE_POINT_FRACTION * blade_length_m;
                let base = phase_rad + 2.0 * PI * rotation_hz * t;
                for k in 0..n_blades {
                    let angle = base + 2.0 * PI * k as f64 / n_blades as f64;
                    f(
                        [p[0] + radius * angle.cos(), p[1] + radius * angle.sin(), p[2]],
                        self.rcs,
                    );
                }
            }
            Some(MicroMotion::Oscillation {
                amplitude_m,
                frequency_hz,
                phase_rad,
            }) => {
                let r = norm(p);
                let offset = amplitude_m * (2.0 * PI * frequency_hz * t + phase_rad).sin();
                if r == 0.0 {
                    f([offset, 0.0, 0.0], self.rcs);
                } else {
                    let s = 1.0 + offset / r;
                    f([p[0] * s, p[1] * s, p[2] * s], self.rcs);
                }
            }
        }
    }

    /// Rejects scatterers whose range or radial speed can leave the
    /// unambiguous window during one coherent interval.
    pub(crate) fn check_window(&self, index: usize, config: &RadarConfig) -> Result<()> {
        self.validate()?;
        let speed_now = self.peak_radial_speed_mps();
        let max_speed = config.max_speed_mps();
        if speed_now >= max_speed {
            return Err(Error::OutOfWindow {
                index,
                reason: format!(
                    "peak radial speed {speed_now:.3} m/s reaches the unambiguous limit {max_speed:.3} m/s"
                ),
            });
        }
        let drift = norm(self.velocity_mps) * config.cpi_s();
        let excursion = self.micro_motion.map_or(0.0, |m| m.max_excursion_m());
        let r = self.range_m();
        let (lo, hi) = (r - drift - excursion, r + drift + excursion);
        let max_range = config.max_range_m();
        if lo < 0.0 || hi >= max_range {
            return Err(Error::OutOfWindow {
                index,
                reason: format!(
                    "range span [{lo:.3}, {hi:.3}] m leaves the window [0, {max_range:.3}) m"
                ),
            });
        }
        Ok(())
    }
}

/// A labelled set of scatterers for one coherent interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub scatterers: Vec<Scatterer>,
    pub label: usize,
    /// Source clip, present only for fall-track frames.
    pub clip_id: Option<usize>,
}

impl Scene {
    pub fn new(scatterers: Vec<Scatterer>, label: usize) -> Self {
        Scene {
            scatterers,
            label,
            clip_id: None,
        }
    }

    pub fn peak_radial_speed_mps(&self) -> f64 {
        self.scatterers
            .iter()
            .map(Scatterer::peak_radial_speed_mps)
            .fold(0.0, f64::max)
    }

    pub fn max_rcs(&self) -> f64 {
        self.scatterers.iter().map(|s| s.rcs).fold(0.0, f64::max)
    }
}
