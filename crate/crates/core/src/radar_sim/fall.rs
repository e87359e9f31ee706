use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{MicroMotion, RadarConfig, Scatterer, Scene};
use crate::{streams, Error, Result};

/// Label 1 is a fall clip, label 0 everything else.
pub const FALL_CLASS_NAMES: [&str; 2] = ["non_fall", "fall"];

/// Radar mounting height above the floor; scene z is relative to it.
const RADAR_HEIGHT_M: f64 = 1.0;
const STANDING_TORSO_M: f64 = 1.0;
const SITTING_TORSO_M: f64 = 0.6;
const LYING_TORSO_M: f64 = 0.2;

/// Human motion model for the indoor track.
#[derive(Debug, Clone, PartialEq)]
pub struct FallKinematics {
    /// Spectrogram length in frames.
    pub window_frames: usize,
    pub window_stride: usize,
    /// Inclusive range of spectrogram windows cut from one clip.
    pub windows_per_clip: (usize, usize),
    /// Radial walking band.
    pub room_m: (f64, f64),
    pub walk_speed_mps: (f64, f64),
    pub gait_hz: (f64, f64),
    pub leg_swing_m: f64,
    pub arm_swing_m: f64,
    pub fall_peak_mps: (f64, f64),
    pub fall_duration_s: (f64, f64),
    pub sit_peak_mps: (f64, f64),
    pub breathing_m: f64,
    pub breathing_hz: f64,
    pub rcs_jitter_db: f64,
}

impl Default for FallKinematics {
    fn default() -> Self {
        FallKinematics {
            window_frames: 64,
            window_stride: 16,
            windows_per_clip: (28, 42),
            room_m: (2.0, 6.5),
            walk_speed_mps: (0.6, 1.2),
            gait_hz: (0.8, 1.0),
            leg_swing_m: 0.18,
            arm_swing_m: 0.12,
            fall_peak_mps: (2.6, 3.4),
            fall_duration_s: (0.6, 1.0),
            sit_peak_mps: (0.4, 0.8),
            breathing_m: 0.004,
            breathing_hz: 0.25,
            rcs_jitter_db: 2.0,
        }
    }
}

/// One simulated recording: a scene per frame, frames spaced by one CPI.
#[derive(Debug, Clone, PartialEq)]
pub struct FallClip {
    pub clip_id: usize,
    pub label: usize,
    pub frames: Vec<Scene>,
    pub frame_period_s: f64,
}

impl FallClip {
    pub fn peak_radial_speed_mps(&self) -> f64 {
        self.frames
            .iter()
            .map(Scene::peak_radial_speed_mps)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy)]
enum Segment {
    Stand,
    Walk { speed: f64 },
    SitDown { peak: f64 },
    Sit,
    StandUp { peak: f64 },
    Fall { peak: f64 },
    Lie,
}

/// Body state at the start of a frame.
#[derive(Debug, Clone, Copy)]
struct Body {
    range: f64,
    lateral: f64,
    radial_v: f64,
    torso_h: f64,
    vertical_v: f64,
    /// Gait amplitude scale in [0, 1].
    gait: f64,
    /// Head speed multiplier relative to torso (rotation during a fall).
    head_gain: f64,
    lying: bool,
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

impl FallKinematics {
    pub fn frames_for_windows(&self, windows: usize) -> usize {
        self.window_frames + self.window_stride * windows.saturating_sub(1)
    }

    fn timeline(&self, fall: bool, total_s: f64, rng: &mut ChaCha8Rng) -> Vec<(Segment, f64)> {
        let mut segs = Vec::new();
        let mut t = 0.0;
        fn push(segs: &mut Vec<(Segment, f64)>, t: &mut f64, s: Segment, d: f64) -> f64 {
            segs.push((s, d));
            *t += d;
            *t
        }
        if fall {
            push(&mut segs, &mut t, Segment::Stand, uniform(rng, (0.3, 1.0)));
            let speed = uniform(rng, self.walk_speed_mps);
            push(&mut segs, &mut t, Segment::Walk { speed }, uniform(rng, (1.0, 3.0)));
            let peak = uniform(rng, self.fall_peak_mps);
            let elapsed = push(&mut segs, &mut t, Segment::Fall { peak }, uniform(rng, self.fall_duration_s));
            segs.push((Segment::Lie, (total_s - elapsed).max(0.0) + 1.0));
        } else {
            push(&mut segs, &mut t, Segment::Stand, uniform(rng, (0.5, 1.5)));
            while t < total_s {
                let pick: f64 = rng.gen();
                if pick < 0.45 {
                    let speed = uniform(rng, self.walk_speed_mps);
                    push(&mut segs, &mut t, Segment::Walk { speed }, uniform(rng, (2.0, 5.0)));
                } else if pick < 0.7 {
                    push(&mut segs, &mut t, Segment::Stand, uniform(rng, (1.0, 3.0)));
                } else {
                    let down = uniform(rng, self.sit_peak_mps);
                    push(&mut segs, &mut t, Segment::SitDown { peak: down }, uniform(rng, (1.0, 1.5)));
                    push(&mut segs, &mut t, Segment::Sit, uniform(rng, (2.0, 5.0)));
                    let up = uniform(rng, self.sit_peak_mps);
                    push(&mut segs, &mut t, Segment::StandUp { peak: up }, uniform(rng, (1.0, 1.5)));
                }
            }
        }
        segs
    }

    fn simulate(&self, fall: bool, n_frames: usize, dt: f64, rng: &mut ChaCha8Rng) -> Vec<Body> {
        let segs = self.timeline(fall, n_frames as f64 * dt, rng);
        let (lo, hi) = self.room_m;
        let mut range = uniform(rng, (lo + 0.5, hi - 0.5));
        let lateral = uniform(rng, (-0.5, 0.5));
        let mut dir = if rng.gen::<bool>() { 1.0 } else { -1.0 };

        let mut out = Vec::with_capacity(n_frames);
        let mut seg_idx = 0;
        let mut seg_start = 0.0;
        for f in 0..n_frames {
            let t = f as f64 * dt;
            while seg_idx + 1 < segs.len() && t >= seg_start + segs[seg_idx].1 {
                seg_start += segs[seg_idx].1;
                seg_idx += 1;
            }
            let (seg, dur) = segs[seg_idx];
            let tau = ((t - seg_start) / dur).clamp(0.0, 1.0);
            let pulse = (PI * tau).sin();
            let ramp = 0.5 - 0.5 * (PI * tau).cos();
            let ramp_rate = 0.5 * PI / dur * pulse;
            let mut body = Body {
                range,
                lateral,
                radial_v: 0.0,
                torso_h: STANDING_TORSO_M,
                vertical_v: 0.0,
                gait: 0.0,
                head_gain: 1.0,
                lying: false,
            };
            match seg {
                Segment::Stand => {}
                Segment::Walk { speed } => {
                    if (range + dir * speed * dt > hi && dir > 0.0)
                        || (range + dir * speed * dt < lo && dir < 0.0)
                    {
                        dir = -dir;
                    }
                    body.radial_v = dir * speed;
                    body.gait = 1.0;
                }
                Segment::SitDown { peak } => {
                    body.radial_v = dir * peak * pulse;
                    body.torso_h = STANDING_TORSO_M - (STANDING_TORSO_M - SITTING_TORSO_M) * ramp;
                    body.vertical_v = -(STANDING_TORSO_M - SITTING_TORSO_M) * ramp_rate;
                }
                Segment::Sit => body.torso_h = SITTING_TORSO_M,
                Segment::StandUp { peak } => {
                    body.radial_v = -dir * peak * pulse;
                    body.torso_h = SITTING_TORSO_M + (STANDING_TORSO_M - SITTING_TORSO_M) * ramp;
                    body.vertical_v = (STANDING_TORSO_M - SITTING_TORSO_M) * ramp_rate;
                }
                Segment::Fall { peak } => {
                    body.radial_v = dir * peak * pulse;
                    body.torso_h = STANDING_TORSO_M - (STANDING_TORSO_M - LYING_TORSO_M) * ramp;
                    body.vertical_v = -(STANDING_TORSO_M - LYING_TORSO_M) * ramp_rate;
                    body.head_gain = 1.3;
                }
                Segment::Lie => {
                    body.torso_h = LYING_TORSO_M;
                    body.lying = true;
                }
            }
            out.push(body);
            range = (range + body.radial_v * dt).clamp(lo - 1.0, hi + 1.5);
        }
        out
    }

    fn frame_scene(&self, body: &Body, t: f64, gait_hz: f64, phases: &[f64; 6], gain: f64) -> Vec<Scatterer> {
        let z = body.torso_h - RADAR_HEIGHT_M;
        let upright = ((body.torso_h - LYING_TORSO_M) / (STANDING_TORSO_M - LYING_TORSO_M)).clamp(0.0, 1.0);
        let v = [body.radial_v, 0.0, body.vertical_v];
        let breathing = MicroMotion::Oscillation {
            amplitude_m: self.breathing_m,
            frequency_hz: self.breathing_hz,
            phase_rad: phases[0] + 2.0 * PI * self.breathing_hz * t,
        };
        let swing = |amp: f64, phase: f64| MicroMotion::Oscillation {
            amplitude_m: amp * body.gait,
            frequency_hz: gait_hz,
            phase_rad: phase + 2.0 * PI * gait_hz * t,
        };
        let at = |dy: f64, dz: f64| [body.range, body.lateral + dy, z + dz];
        let torso_rcs = if body.lying { 0.6 } else { 1.0 };
        let mut s = vec![
            Scatterer {
                position_m: at(0.0, 0.0),
                velocity_mps: v,
                rcs: torso_rcs * gain,
                micro_motion: Some(breathing),
            },
            Scatterer {
                position_m: at(0.0, 0.6 * upright),
                velocity_mps: [v[0] * body.head_gain, 0.0, v[2] * body.head_gain],
                rcs: 0.25 * gain,
                micro_motion: None,
            },
        ];
        for (side, dy) in [(0usize, -0.12), (1, 0.12)] {
            s.push(Scatterer {
                position_m: at(dy, -0.5 * upright),
                velocity_mps: v,
                rcs: 0.3 * gain,
                micro_motion: Some(swing(self.leg_swing_m, phases[2 + side])),
            });
            s.push(Scatterer {
                position_m: at(2.0 * dy, 0.1 * upright),
                velocity_mps: v,
                rcs: 0.15 * gain,
                micro_motion: Some(swing(self.arm_swing_m, phases[4 + side])),
            });
        }
        s
    }

    /// Simulates clip `clip_id`; labels alternate starting with a fall clip.
    pub fn clip(&self, clip_id: usize, config: &RadarConfig, seed: u64) -> FallClip {
        let label = usize::from(clip_id % 2 == 0);
        let mut rng = streams::stream(seed, &[0x6661_6c6c, clip_id as u64]);
        let (wlo, whi) = self.windows_per_clip;
        let windows = rng.gen_range(wlo..=whi.max(wlo));
        let n_frames = self.frames_for_windows(windows);
        let dt = config.cpi_s();
        let gait_hz = uniform(&mut rng, self.gait_hz);
        let g = rng.gen_range(0.0..2.0 * PI);
        // breathing, unused, legs (antiphase), arms opposite to the same-side leg
        let phases = [rng.gen_range(0.0..2.0 * PI), 0.0, g, g + PI, g + PI, g];
        let jitter = rng.gen_range(-self.rcs_jitter_db..=self.rcs_jitter_db);
        let gain = 10f64.powf(jitter / 20.0);

        let bodies = self.simulate(label == 1, n_frames, dt, &mut rng);
        let frames = bodies
            .iter()
            .enumerate()
            .map(|(f, b)| Scene {
                scatterers: self.frame_scene(b, f as f64 * dt, gait_hz, &phases, gain),
                label,
                clip_id: Some(clip_id),
            })
            .collect();
        FallClip {
            clip_id,
            label,
            frames,
            frame_period_s: dt,
        }
    }

    pub fn clips(&self, n_clips: usize, config: &RadarConfig, seed: u64) -> Result<Vec<FallClip>> {
        if n_clips < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 clips (one per class), got {n_clips}"
            )));
        }
        config.validate()?;
        Ok((0..n_clips).map(|c| self.clip(c, config, seed)).collect())
    }
}

/// Generates `n_clips` clips under the default kinematics.
pub fn generate_fall_clips(n_clips: usize, config: &RadarConfig, seed: u64) -> Result<Vec<FallClip>> {
    FallKinematics::default().clips(n_clips, config, seed)
}
