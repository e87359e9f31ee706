//! Labelled product sets for the two tracks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::products::{doppler_profile, form_rdm, stack_profiles, window_starts, RadarProduct};
use crate::radar_sim::{
    synthesize_cube_with, uav_sample_seed, FallKinematics, NoiseFloor, RadarConfig, UavScenario, FALL_CLASS_NAMES,
    UAV_CLASS_NAMES,
};
use crate::{par, streams, Error, Result};

/// Seed used for dataset generation when none is given.
pub const DEFAULT_DATA_SEED: u64 = 7;
pub const DEFAULT_UAV_PER_CLASS: usize = 200;
pub const DEFAULT_FALL_CLIPS: usize = 16;

/// Receiver noise of the UAV track: -60 dB below a unit-RCS return per
/// sample. Fixed across scenes, so the floor carries no class information.
pub const UAV_NOISE_FLOOR: NoiseFloor = NoiseFloor::Absolute(1e-3);
/// Receiver noise of the indoor track, -40 dB re unit RCS.
pub const FALL_NOISE_FLOOR: NoiseFloor = NoiseFloor::Absolute(1e-2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Uav,
    Fall,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Uav, Task::Fall];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Uav => "uav",
            Task::Fall => "fall",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Task::Uav => "UAV, 3-class",
            Task::Fall => "Fall, 2-class",
        }
    }

    pub fn class_names(self) -> Vec<String> {
        let names: &[&str] = match self {
            Task::Uav => &UAV_CLASS_NAMES,
            Task::Fall => &FALL_CLASS_NAMES,
        };
        names.iter().map(|s| s.to_string()).collect()
    }

    pub fn default_config(self) -> RadarConfig {
        match self {
            Task::Uav => RadarConfig::uav(),
            Task::Fall => RadarConfig::fall(),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uav" => Ok(Task::Uav),
            "fall" => Ok(Task::Fall),
            other => Err(Error::InvalidArgument(format!("unknown task '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub task: Task,
    pub products: Vec<RadarProduct>,
    pub class_names: Vec<String>,
    /// Generator seed.
    pub seed: u64,
    pub config: RadarConfig,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.products.len()
    }

    pub fn is_empty(&self) -> bool {
        self.products.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.products.iter().map(|p| p.label).collect()
    }

    /// Per-sample clip ids, if every sample carries one.
    pub fn clip_ids(&self) -> Option<Vec<usize>> {
        self.products.iter().map(|p| p.clip_id).collect()
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        self.products.first().map(RadarProduct::shape)
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }
}

/// `3 * n_per_class` range-Doppler maps, class-major. Cubes are formed and
/// dropped one sample at a time.
pub fn generate_uav(n_per_class: usize, config: &RadarConfig, seed: u64) -> Result<Dataset> {
    generate_uav_with(&UavScenario::default(), UAV_NOISE_FLOOR, n_per_class, config, seed)
}

/// [`generate_uav`] under a custom flight envelope.
pub fn generate_uav_with(
    scenario: &UavScenario,
    noise: NoiseFloor,
    n_per_class: usize,
    config: &RadarConfig,
    seed: u64,
) -> Result<Dataset> {
    config.validate()?;
    let scenes = scenario.scenes(n_per_class, seed)?;
    let products = par::map_range(scenes.len(), |i| {
        let cube = synthesize_cube_with(&scenes[i], config, uav_sample_seed(seed, i), noise)?;
        let mut rdm = form_rdm(&cube)?;
        rdm.label = scenes[i].label;
        Ok::<_, Error>(rdm)
    });
    Ok(Dataset {
        task: Task::Uav,
        products: par::collect_results(products)?,
        class_names: Task::Uav.class_names(),
        seed,
        config: *config,
    })
}

/// Every strided spectrogram window of `n_clips` simulated clips, clip-major.
pub fn generate_fall(n_clips: usize, config: &RadarConfig, seed: u64) -> Result<Dataset> {
    generate_fall_with(&FallKinematics::default(), FALL_NOISE_FLOOR, n_clips, config, seed)
}

/// [`generate_fall`] with custom motion parameters.
pub fn generate_fall_with(
    kin: &FallKinematics,
    noise: NoiseFloor,
    n_clips: usize,
    config: &RadarConfig,
    seed: u64,
) -> Result<Dataset> {
    let clips = kin.clips(n_clips, config, seed)?;
    let mut products = Vec::new();
    for clip in &clips {
        let profiles = par::map_range(clip.frames.len(), |f| {
            let key = streams::mix(seed, &[0x6672_616d, clip.clip_id as u64, f as u64]);
            doppler_profile(&synthesize_cube_with(&clip.frames[f], config, key, noise)?)
        });
        let profiles = par::collect_results(profiles)?;
        for (w, start) in window_starts(profiles.len(), kin.window_frames, kin.window_stride)
            .into_iter()
            .enumerate()
        {
            let mut p = stack_profiles(
                &profiles,
                start,
                kin.window_frames,
                config.velocity_bin_mps(),
                clip.frame_period_s,
            )?;
            p.label = clip.label;
            p.clip_id = Some(clip.clip_id);
            p.window_index = Some(w);
            products.push(p);
        }
    }
    Ok(Dataset {
        task: Task::Fall,
        products,
        class_names: Task::Fall.class_names(),
        seed,
        config: *config,
    })
}

/// Default-sized dataset for `task`.
pub fn generate_default(task: Task, seed: u64) -> Result<Dataset> {
    match task {
        Task::Uav => generate_uav(DEFAULT_UAV_PER_CLASS, &RadarConfig::uav(), seed),
        Task::Fall => generate_fall(DEFAULT_FALL_CLIPS, &RadarConfig::fall(), seed),
    }
}
