use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// FMCW front-end parameters.
///
/// `sample_rate_hz` is chosen so that `n_fast` complex samples span exactly one
/// chirp; the fast-time bin spacing is then `1 / chirp_duration_s` and one range
/// bin equals the range resolution `c / 2B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub chirp_duration_s: f64,
    pub n_fast: usize,
    pub n_chirps: usize,
    pub n_rx: usize,
    pub sample_rate_hz: f64,
    /// Range bins kept in the product; bins at or beyond this index are truncated.
    pub usable_range_bins: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmcwRelations {
    /// Sweep slope in Hz/s.
    pub slope: f64,
    pub range_resolution: f64,
    pub velocity_resolution: f64,
}

impl RadarConfig {
    /// 77 GHz / 300 MHz UAV front end: 512 fast-time samples of which 510 range
    /// bins are kept, 128 chirps of 38 us (0.40 m/s velocity bins).
    pub fn uav() -> Self {
        let chirp_duration_s = 38.0e-6;
        let n_fast = 512;
        RadarConfig {
            carrier_hz: 77.0e9,
            bandwidth_hz: 300.0e6,
            chirp_duration_s,
            n_fast,
            n_chirps: 128,
            n_rx: 1,
            sample_rate_hz: n_fast as f64 / chirp_duration_s,
            usable_range_bins: 510,
        }
    }

    /// 60 GHz / 499.7 MHz indoor front end: 64 range bins, 256 chirps of
    /// 102.7 us (0.095 m/s velocity bins), four receive channels.
    pub fn fall() -> Self {
        let chirp_duration_s = 102.7e-6;
        let n_fast = 64;
        RadarConfig {
            carrier_hz: 60.0e9,
            bandwidth_hz: 499.7e6,
            chirp_duration_s,
            n_fast,
            n_chirps: 256,
            n_rx: 4,
            sample_rate_hz: n_fast as f64 / chirp_duration_s,
            usable_range_bins: 64,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.bandwidth_hz) {
            return Err(Error::InvalidConfig(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        if !positive(self.chirp_duration_s) {
            return Err(Error::InvalidConfig(format!(
                "chirp duration must be positive, got {}",
                self.chirp_duration_s
            )));
        }
        if !positive(self.carrier_hz) || !positive(self.sample_rate_hz) {
            return Err(Error::InvalidConfig(
                "carrier and sample rate must be positive".into(),
            ));
        }
        if self.n_fast == 0 || self.n_chirps == 0 || self.n_rx == 0 {
            return Err(Error::InvalidConfig("all counts must be at least 1".into()));
        }
        if self.usable_range_bins == 0 || self.usable_range_bins > self.n_fast {
            return Err(Error::InvalidConfig(format!(
                "usable range bins {} not in 1..={}",
                self.usable_range_bins, self.n_fast
            )));
        }
        if !positive(self.slope()) {
            return Err(Error::InvalidConfig("sweep slope is not finite".into()));
        }
        Ok(())
    }

    pub fn slope(&self) -> f64 {
        self.bandwidth_hz / self.chirp_duration_s
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Slope, range resolution `c/2B` and velocity resolution `lambda / (2 N T_c)`.
    pub fn relations(&self) -> Result<FmcwRelations> {
        self.validate()?;
        Ok(FmcwRelations {
            slope: self.slope(),
            range_resolution: SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz),
            velocity_resolution: self.wavelength()
                / (2.0 * self.n_chirps as f64 * self.chirp_duration_s),
        })
    }

    /// Range of a target with beat frequency `f_b`: `c f_b / 2S`.
    pub fn beat_range(&self, beat_hz: f64) -> Result<f64> {
        self.validate()?;
        if !(beat_hz >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beat frequency must be non-negative, got {beat_hz}"
            )));
        }
        Ok(SPEED_OF_LIGHT * beat_hz / (2.0 * self.slope()))
    }

    pub fn beat_frequency(&self, range_m: f64) -> f64 {
        2.0 * range_m * self.slope() / SPEED_OF_LIGHT
    }

    /// Range spanned by one fast-time DFT bin.
    pub fn range_bin_m(&self) -> f64 {
        SPEED_OF_LIGHT * self.sample_rate_hz / (2.0 * self.slope() * self.n_fast as f64)
    }

    /// Radial velocity spanned by one slow-time DFT bin.
    pub fn velocity_bin_mps(&self) -> f64 {
        self.wavelength() / (2.0 * self.n_chirps as f64 * self.chirp_duration_s)
    }

    /// Largest representable range (exclusive) after truncation to usable bins.
    pub fn max_range_m(&self) -> f64 {
        self.usable_range_bins as f64 * self.range_bin_m()
    }

    /// Unambiguous radial speed `lambda / 4 T_c`.
    pub fn max_speed_mps(&self) -> f64 {
        self.wavelength() / (4.0 * self.chirp_duration_s)
    }

    /// Coherent processing interval `n_chirps * T_c`.
    pub fn cpi_s(&self) -> f64 {
        self.n_chirps as f64 * self.chirp_duration_s
    }

    /// Fractional fast-time bin for a static target at `range_m`.
    pub fn range_bin_of(&self, range_m: f64) -> f64 {
        range_m / self.range_bin_m()
    }

    /// Fractional, zero-centred Doppler row (after the DC shift) for radial velocity `v`.
    pub fn doppler_row_of(&self, velocity_mps: f64) -> f64 {
        velocity_mps / self.velocity_bin_mps() + (self.n_chirps / 2) as f64
    }
}
