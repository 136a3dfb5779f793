//! Built-in scenarios selectable by name.
//!
//! Unless a preset says otherwise, a single user is placed with `θ` uniform
//! on `[−1, 1]` and `r` uniform on `[10, 20]` m.

use super::config::{SimulationConfig, SweepSection, SweepVariable};
use crate::beamforming::Digital;
use crate::training::Scheme;

/// `(name, description)` of every preset.
pub const PRESETS: [(&str, &str); 10] = [
    ("fig6", "rate versus reference SNR, -10..30 dB"),
    ("fig6-noiseless-sanity", "noise-free training of on-grid LoS users at 60 dB: proposed equals exhaustive"),
    ("fig7", "rate versus user range at 30 dBm"),
    ("fig8", "rate versus Rician factor at 28 dB reference SNR"),
    ("fig9", "rate versus activation interval M in {8, ..., 128}"),
    ("fig10", "sum rate versus number of users, ZF and MMSE"),
    ("fig11", "effective sum rate versus number of users, ZF and MMSE"),
    ("fig12", "300 GHz, N = 1025: rate versus user range"),
    ("fig13", "300 GHz, N = 1025: effective rate versus user range"),
    ("default", "defaults only, no sweep"),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|p| p.0)
}

fn sweep(variable: SweepVariable, values: impl IntoIterator<Item = f64>) -> SweepSection {
    SweepSection { variable, values: values.into_iter().collect() }
}

fn steps(from: i32, to: i32, step: usize) -> impl Iterator<Item = f64> {
    (from..=to).step_by(step).map(f64::from)
}

fn named(name: &str) -> SimulationConfig {
    SimulationConfig { name: name.into(), ..SimulationConfig::default() }
}

fn users_sweep(name: &str) -> SimulationConfig {
    let mut c = named(name);
    c.digital = vec![Digital::Zf, Digital::Mmse];
    c.sweep = sweep(SweepVariable::Users, steps(1, 8, 1));
    c
}

fn terahertz(name: &str) -> SimulationConfig {
    let mut c = named(name);
    c.array.n_antennas = 1025;
    c.array.carrier_hz = 300e9;
    c.power.tx_dbm = 48.0;
    c.channel.absorption_db_per_m = 5.157e-4;
    // nearest divisor of 1024 to the overhead optimum below the ring threshold
    c.training.interval = 32;
    c.sweep = sweep(SweepVariable::UserRangeM, [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0]);
    c
}

/// Preset by name.
pub fn preset(name: &str) -> Option<SimulationConfig> {
    let c = match name {
        "default" => named("default"),
        "fig6" => {
            let mut c = named(name);
            c.sweep = sweep(SweepVariable::ReferenceSnrDb, steps(-10, 30, 5));
            c
        }
        "fig6-noiseless-sanity" => {
            let mut c = named(name);
            c.trials = 200;
            c.training.schemes = vec![Scheme::Proposed, Scheme::Exhaustive];
            c.training.noiseless = true;
            c.users.on_grid = true;
            c.users.los_only = true;
            c.sweep = sweep(SweepVariable::ReferenceSnrDb, [60.0]);
            c
        }
        "fig7" => {
            let mut c = named(name);
            c.sweep = sweep(SweepVariable::UserRangeM, [5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0]);
            c
        }
        "fig8" => {
            let mut c = named(name);
            c.power.reference_snr_db = Some(28.0);
            c.sweep = sweep(SweepVariable::RicianFactorDb, steps(-10, 30, 5));
            c
        }
        "fig9" => {
            let mut c = named(name);
            c.training.schemes = vec![Scheme::Proposed, Scheme::Exhaustive, Scheme::PerfectCsi];
            c.sweep = sweep(SweepVariable::Interval, [8.0, 16.0, 32.0, 64.0, 128.0]);
            c
        }
        "fig10" | "fig11" => users_sweep(name),
        "fig12" | "fig13" => terahertz(name),
        _ => return None,
    };
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_is_valid() {
        for name in preset_names() {
            let c = preset(name).unwrap();
            assert_eq!(c.name, name);
            c.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
            let text = c.to_toml_string().unwrap();
            assert_eq!(SimulationConfig::from_toml_str(&text).unwrap(), c, "{name}");
        }
        assert!(preset("fig99").is_none());
    }
}
