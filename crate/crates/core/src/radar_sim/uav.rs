use std::f64::consts::PI;

use rand::Rng;

use super::{synthesize_cube, IqCube, MicroMotion, RadarConfig, Scatterer, Scene};
use crate::{par, streams, Error, Result};

pub const UAV_CLASS_NAMES: [&str; 3] = ["helicopter", "hexacopter", "quadcopter"];

/// Airframe template for one UAV class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavClassParams {
    pub body_rcs: f64,
    /// Extra fuselage point behind the body (tail boom), as (offset m, rcs fraction).
    pub tail: Option<(f64, f64)>,
    pub n_rotors: usize,
    /// Hub distance from the body centre.
    pub arm_m: f64,
    pub blade_length_m: (f64, f64),
    pub rotation_hz: (f64, f64),
    pub n_blades: usize,
    pub blade_rcs: f64,
    pub hub_rcs: f64,
}

/// Flight envelope shared by all classes plus the per-class airframes.
#[derive(Debug, Clone, PartialEq)]
pub struct UavScenario {
    pub range_m: (f64, f64),
    pub azimuth_rad: (f64, f64),
    pub elevation_rad: (f64, f64),
    pub max_speed_mps: f64,
    /// Symmetric log-uniform amplitude jitter applied per sample.
    pub rcs_jitter_db: f64,
    pub classes: [UavClassParams; 3],
}

impl Default for UavScenario {
    fn default() -> Self {
        UavScenario {
            // near-hover at a fixed stand-off: about two range bins of spread
            range_m: (24.5, 25.5),
            azimuth_rad: (-0.15, 0.15),
            elevation_rad: (0.0, 0.2),
            max_speed_mps: 0.3,
            rcs_jitter_db: 2.0,
            classes: [
                // single two-blade main rotor, long blades, slow
                UavClassParams {
                    body_rcs: 1.0,
                    tail: Some((1.2, 0.4)),
                    n_rotors: 1,
                    arm_m: 0.0,
                    blade_length_m: (0.85, 1.0),
                    rotation_hz: (3.2, 3.8),
                    n_blades: 2,
                    blade_rcs: 0.35,
                    hub_rcs: 0.1,
                },
                // six rotors on 0.45 m arms
                UavClassParams {
                    body_rcs: 0.5,
                    tail: None,
                    n_rotors: 6,
                    arm_m: 0.45,
                    blade_length_m: (0.17, 0.2),
                    rotation_hz: (9.0, 11.0),
                    n_blades: 2,
                    blade_rcs: 0.12,
                    hub_rcs: 0.05,
                },
                // four rotors, shortest blades
                UavClassParams {
                    body_rcs: 0.25,
                    tail: None,
                    n_rotors: 4,
                    arm_m: 0.17,
                    blade_length_m: (0.11, 0.13),
                    rotation_hz: (9.0, 11.0),
                    n_blades: 2,
                    blade_rcs: 0.08,
                    hub_rcs: 0.05,
                },
            ],
        }
    }
}

fn uniform(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

impl UavScenario {
    /// Draws one labelled airframe scene. The stream depends only on
    /// `(seed, index)`.
    pub fn sample_scene(&self, label: usize, seed: u64, index: u64) -> Scene {
        let class = &self.classes[label];
        let mut rng = streams::stream(seed, &[0x0075_6176, index]);

        let range = uniform(&mut rng, self.range_m);
        let az = uniform(&mut rng, self.azimuth_rad);
        let el = uniform(&mut rng, self.elevation_rad);
        let centre = [
            range * el.cos() * az.cos(),
            range * el.cos() * az.sin(),
            range * el.sin(),
        ];
        let heading = rng.gen_range(0.0..2.0 * PI);
        let speed = rng.gen_range(0.0..=self.max_speed_mps);
        let velocity = [speed * heading.cos(), speed * heading.sin(), 0.0];
        let jitter_db = rng.gen_range(-self.rcs_jitter_db..=self.rcs_jitter_db);
        let gain = 10f64.powf(jitter_db / 20.0);

        let mut scatterers = vec![Scatterer {
            position_m: centre,
            velocity_mps: velocity,
            rcs: class.body_rcs * gain,
            micro_motion: None,
        }];
        if let Some((offset, frac)) = class.tail {
            scatterers.push(Scatterer {
                position_m: [
                    centre[0] - offset * heading.cos(),
                    centre[1] - offset * heading.sin(),
                    centre[2],
                ],
                velocity_mps: velocity,
                rcs: class.body_rcs * frac * gain,
                micro_motion: None,
            });
        }
        for k in 0..class.n_rotors {
            let arm_angle = heading + 2.0 * PI * k as f64 / class.n_rotors as f64 + PI / class.n_rotors as f64;
            let hub = [
                centre[0] + class.arm_m * arm_angle.cos(),
                centre[1] + class.arm_m * arm_angle.sin(),
                centre[2] + 0.05,
            ];
            let blade_length_m = uniform(&mut rng, class.blade_length_m);
            let rotation_hz = uniform(&mut rng, class.rotation_hz);
            let phase_rad = rng.gen_range(0.0..2.0 * PI);
            if class.hub_rcs > 0.0 {
                scatterers.push(Scatterer {
                    position_m: hub,
                    velocity_mps: velocity,
                    rcs: class.hub_rcs * gain,
                    micro_motion: None,
                });
            }
            scatterers.push(Scatterer {
                position_m: hub,
                velocity_mps: velocity,
                rcs: class.blade_rcs * gain,
                micro_motion: Some(MicroMotion::Rotor {
                    blade_length_m,
                    rotation_hz,
                    n_blades: class.n_blades,
                    phase_rad,
                }),
            });
        }
        Scene::new(scatterers, label)
    }

    /// Scenes for `n_per_class` samples of each class, ordered class-major.
    pub fn scenes(&self, n_per_class: usize, seed: u64) -> Result<Vec<Scene>> {
        if n_per_class == 0 {
            return Err(Error::InvalidArgument("n_per_class must be >= 1".into()));
        }
        Ok((0..3 * n_per_class)
            .map(|i| self.sample_scene(i / n_per_class, seed, i as u64))
            .collect())
    }
}

/// Noise seed of UAV sample `index`.
pub fn sample_seed(seed: u64, index: usize) -> u64 {
    streams::mix(seed, &[0x6375_6265, index as u64])
}

/// Generates `3 * n_per_class` labelled scenes and their cubes under the
/// default scenario.
pub fn generate_uav_dataset(
    n_per_class: usize,
    config: &RadarConfig,
    seed: u64,
) -> Result<Vec<(Scene, IqCube)>> {
    let scenes = UavScenario::default().scenes(n_per_class, seed)?;
    let cubes = par::map_range(scenes.len(), |i| {
        synthesize_cube(&scenes[i], config, sample_seed(seed, i))
    });
    let cubes = par::collect_results(cubes)?;
    Ok(scenes.into_iter().zip(cubes).collect())
}
