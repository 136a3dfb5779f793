//! Scenario description loaded from TOML.
//!
//! Every section has documented defaults (the millimeter-wave setup: 257
//! antennas at 30 GHz, 30 dBm, −70 dBm noise, κ = 30 dB with two NLoS
//! paths, `M = 16`, `V = 4`, 1000 trials). Unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::beamforming::Digital;
use crate::channel::{ref_gain_db_for, ChannelParams};
use crate::codebook::central_sector;
use crate::error::{Error, Result};
use crate::geometry::{fresnel_distance, ArrayConfig, SparseActivation};
use crate::training::{subarray_grid_size, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub name: String,
    pub trials: usize,
    pub seed: u64,
    /// Digital beamformers to evaluate; each yields its own result rows.
    pub digital: Vec<Digital>,
    pub array: ArraySection,
    pub channel: ChannelSection,
    pub power: PowerSection,
    pub training: TrainingSection,
    pub users: UserSection,
    pub frame: FrameSection,
    pub sweep: SweepSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub n_antennas: usize,
    pub carrier_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub rician_factor_db: f64,
    pub n_nlos: usize,
    /// Reference gain at 1 m; derived from the carrier when absent.
    pub ref_gain_db: Option<f64>,
    pub absorption_db_per_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub tx_dbm: f64,
    pub noise_dbm: f64,
    /// When set, the transmit power of each trial is chosen so that the
    /// reference SNR at the users' mean range equals this value.
    pub reference_snr_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub schemes: Vec<Scheme>,
    /// Activation interval `M`.
    pub interval: usize,
    /// Range samples `V` per angle.
    pub n_ranges: usize,
    /// Candidate angles kept by the two-phase benchmark.
    pub chi: usize,
    /// Sub-arrays `M̃` of the array-division benchmark.
    pub n_subarrays: usize,
    /// Enables the multi-path variant of the proposed scheme.
    pub multipath_threshold: Option<f64>,
    /// Noise-free pilots (data transmission stays noisy).
    pub noiseless: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UserSection {
    pub count: usize,
    /// Spatial-angle interval for uniform placement.
    pub theta: [f64; 2],
    /// Range interval in metres for uniform placement.
    pub range_m: [f64; 2],
    /// Draw users uniformly from the single-beam grid points inside the
    /// angle and range intervals instead.
    pub on_grid: bool,
    /// Drop the NLoS paths.
    pub los_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameSection {
    pub symbol_time_s: f64,
    pub frame_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVariable {
    None,
    ReferenceSnrDb,
    TxPowerDbm,
    UserRangeM,
    RicianFactorDb,
    Interval,
    Users,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::None => "none",
            SweepVariable::ReferenceSnrDb => "reference-snr-db",
            SweepVariable::TxPowerDbm => "tx-power-dbm",
            SweepVariable::UserRangeM => "user-range-m",
            SweepVariable::RicianFactorDb => "rician-factor-db",
            SweepVariable::Interval => "interval",
            SweepVariable::Users => "users",
        }
    }
}

impl std::fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            trials: 1000,
            seed: 1,
            digital: vec![Digital::Zf],
            array: ArraySection::default(),
            channel: ChannelSection::default(),
            power: PowerSection::default(),
            training: TrainingSection::default(),
            users: UserSection::default(),
            frame: FrameSection::default(),
            sweep: SweepSection::default(),
        }
    }
}

impl Default for ArraySection {
    fn default() -> Self {
        Self { n_antennas: 257, carrier_hz: 30e9 }
    }
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { rician_factor_db: 30.0, n_nlos: 2, ref_gain_db: None, absorption_db_per_m: 0.0 }
    }
}

impl Default for PowerSection {
    fn default() -> Self {
        Self { tx_dbm: 30.0, noise_dbm: -70.0, reference_snr_db: None }
    }
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self {
            schemes: Scheme::ALL.to_vec(),
            interval: 16,
            n_ranges: 4,
            chi: 3,
            n_subarrays: 4,
            multipath_threshold: None,
            noiseless: false,
        }
    }
}

impl Default for UserSection {
    fn default() -> Self {
        Self { count: 1, theta: [-1.0, 1.0], range_m: [10.0, 20.0], on_grid: false, los_only: false }
    }
}

impl Default for FrameSection {
    fn default() -> Self {
        Self { symbol_time_s: 1e-7, frame_time_s: 2e-4 }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { variable: SweepVariable::None, values: Vec::new() }
    }
}

fn fail<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn as_count(name: &str, v: f64) -> Result<usize> {
    if v.fract() != 0.0 || v < 1.0 || v > u32::MAX as f64 {
        return fail(format!("sweep value {v} for `{name}` must be a positive integer"));
    }
    Ok(v as usize)
}

impl SimulationConfig {
    /// Parses and validates.
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg = Self::parse_toml(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses without validating, for callers that adjust fields first.
    pub fn parse_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(format!("malformed config: {e}")))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialise config: {e}")))
    }

    pub fn array_config(&self) -> Result<ArrayConfig> {
        ArrayConfig::new(self.array.n_antennas, self.array.carrier_hz)
    }

    /// Channel parameters before any per-trial power adjustment.
    pub fn channel_params(&self) -> Result<ChannelParams> {
        let cfg = self.array_config()?;
        let mut p = ChannelParams {
            rician_factor_db: self.channel.rician_factor_db,
            n_nlos: self.channel.n_nlos,
            ref_gain_db: self.channel.ref_gain_db.unwrap_or_else(|| ref_gain_db_for(&cfg)),
            absorption_db_per_m: self.channel.absorption_db_per_m,
            noise_power_dbm: self.power.noise_dbm,
            tx_power_dbm: self.power.tx_dbm,
        };
        if self.users.los_only {
            p.rician_factor_db = f64::INFINITY;
            p.n_nlos = 0;
        }
        p.validate()?;
        Ok(p)
    }

    /// Sweep values, or a single unlabeled point when nothing is swept.
    pub fn sweep_points(&self) -> Vec<Option<f64>> {
        match self.sweep.variable {
            SweepVariable::None => vec![None],
            _ => self.sweep.values.iter().copied().map(Some).collect(),
        }
    }

    /// Configuration with the swept variable set to `value`.
    pub fn at(&self, value: Option<f64>) -> Result<Self> {
        let mut c = self.clone();
        let Some(v) = value else { return Ok(c) };
        match self.sweep.variable {
            SweepVariable::None => {}
            SweepVariable::ReferenceSnrDb => c.power.reference_snr_db = Some(v),
            SweepVariable::TxPowerDbm => {
                c.power.tx_dbm = v;
                c.power.reference_snr_db = None;
            }
            SweepVariable::UserRangeM => c.users.range_m = [v, v],
            SweepVariable::RicianFactorDb => c.channel.rician_factor_db = v,
            SweepVariable::Interval => c.training.interval = as_count("interval", v)?,
            SweepVariable::Users => c.users.count = as_count("users", v)?,
        }
        c.sweep = SweepSection::default();
        Ok(c)
    }

    /// Checks the configuration at every sweep point.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return fail("trials must be at least 1");
        }
        if self.digital.is_empty() {
            return fail("at least one digital beamformer is required");
        }
        if self.training.schemes.is_empty() {
            return fail("at least one training scheme is required");
        }
        if self.sweep.variable == SweepVariable::None {
            if !self.sweep.values.is_empty() {
                return fail("sweep values given without a sweep variable");
            }
        } else if self.sweep.values.is_empty() {
            return fail(format!("sweep over `{}` has no values", self.sweep.variable));
        }
        for v in self.sweep_points() {
            if v.is_some_and(|x| !x.is_finite() && self.sweep.variable != SweepVariable::RicianFactorDb) {
                return fail(format!("sweep value {v:?} is not finite"));
            }
            self.at(v)?.validate_point()?;
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<()> {
        let cfg = self.array_config()?;
        self.channel_params()?;
        if let Some(snr) = self.power.reference_snr_db {
            if !snr.is_finite() {
                return fail(format!("reference SNR must be finite, got {snr}"));
            }
        }
        let t = &self.training;
        let act = SparseActivation::new(t.interval, &cfg)?;
        if t.n_ranges == 0 {
            return fail("training.n_ranges must be at least 1");
        }
        let has = |s: Scheme| t.schemes.contains(&s);
        if has(Scheme::Proposed) {
            central_sector(&act)?;
        }
        if has(Scheme::TwoPhase) && !(1..=act.angle_bins()).contains(&t.chi) {
            return fail(format!("training.chi = {} outside 1..={}", t.chi, act.angle_bins()));
        }
        if has(Scheme::Subarray) {
            let bins = subarray_grid_size(&cfg);
            if !matches!(t.n_subarrays, 1 | 4) || !bins.is_multiple_of(t.n_subarrays * t.n_subarrays) {
                return fail(format!(
                    "training.n_subarrays = {} unsupported for {bins} angle bins (use 1 or 4)",
                    t.n_subarrays
                ));
            }
        }
        if let Some(tau) = t.multipath_threshold {
            if !(0.0..=1.0).contains(&tau) {
                return fail(format!("training.multipath_threshold = {tau} outside [0, 1]"));
            }
        }

        let u = &self.users;
        if u.count == 0 {
            return fail("users.count must be at least 1");
        }
        let [t0, t1] = u.theta;
        if !(-1.0 <= t0 && t0 <= t1 && t1 <= 1.0) {
            return fail(format!("users.theta = [{t0}, {t1}] must be an ordered interval inside [-1, 1]"));
        }
        let [r0, r1] = u.range_m;
        let z_f = fresnel_distance(&cfg);
        if !(r0.is_finite() && r1.is_finite() && r0 <= r1) {
            return fail(format!("users.range_m = [{r0}, {r1}] must be an ordered finite interval"));
        }
        if r0 < z_f {
            return fail(format!("users.range_m starts at {r0} m, inside the Fresnel distance {z_f:.3} m"));
        }

        let f = &self.frame;
        if !(f.symbol_time_s > 0.0 && f.frame_time_s > 0.0) {
            return fail("frame durations must be positive");
        }
        Ok(())
    }
}
