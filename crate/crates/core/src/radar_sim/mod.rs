//! Point-scatterer FMCW simulator.
//!
//! Scenes are lists of scatterers with bulk motion plus optional rotor or
//! oscillator micro-motion. [`synthesize_cube`] turns a scene into the
//! dechirped complex baseband cube `x[rx, chirp, sample]`; the two dataset
//! generators ([`generate_uav_dataset`], [`generate_fall_clips`]) produce the
//! labelled scenes for the two benchmark tracks.

mod config;
mod fall;
mod scene;
mod synth;
mod uav;

pub use config::{FmcwRelations, RadarConfig, SPEED_OF_LIGHT};
pub use fall::{generate_fall_clips, FallClip, FallKinematics, FALL_CLASS_NAMES};
pub use scene::{MicroMotion, Scatterer, Scene};
pub use synth::{synthesize_cube, synthesize_cube_with, IqCube, NoiseFloor};
pub use uav::{generate_uav_dataset, sample_seed as uav_sample_seed, UavClassParams, UavScenario, UAV_CLASS_NAMES};
