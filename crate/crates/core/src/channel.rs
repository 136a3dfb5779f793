//! Near-field steering vectors and LoS-dominant multi-user channels.
//!
//! The channel of a user is stored as the column vector `h` such that the
//! received sample for a transmit weight vector `w` is `hᴴ·w`. With the
//! steering vector `b(r, θ)` below this gives
//! `hᴴ = √N·β·bᴴ(r, θ) + Σ_ℓ √(N/L)·β_ℓ·bᴴ(r̄_ℓ, θ̄_ℓ)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{exact_range_at, fresnel_distance, fresnel_range_at, ArrayConfig, PolarPoint, SparseActivation};
use crate::rng::SimRng;
use crate::units::{db_to_linear, dbm_to_watts, linear_to_db};

/// Reference power gain at 1 m for a 30 GHz carrier, dB.
pub const REF_GAIN_DB_30GHZ: f64 = -62.0;

/// Propagation and power parameters shared by all users.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Rician factor κ in dB; `+inf` removes the NLoS paths' power.
    pub rician_factor_db: f64,
    /// Number of NLoS paths L.
    pub n_nlos: usize,
    /// Reference channel power gain at 1 m, α0 in dB.
    pub ref_gain_db: f64,
    /// Molecular absorption A(f) in dB/m, zero below THz.
    pub absorption_db_per_m: f64,
    pub noise_power_dbm: f64,
    pub tx_power_dbm: f64,
}

impl ChannelParams {
    /// Millimeter-wave defaults: κ = 30 dB, L = 2, P = 30 dBm, σ² = −70 dBm,
    /// α0 scaled from −62 dB at 30 GHz to the array's carrier.
    pub fn defaults_for(cfg: &ArrayConfig) -> Self {
        Self {
            rician_factor_db: 30.0,
            n_nlos: 2,
            ref_gain_db: ref_gain_db_for(cfg),
            absorption_db_per_m: 0.0,
            noise_power_dbm: -70.0,
            tx_power_dbm: 30.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rician_factor_db.is_nan() || self.rician_factor_db == f64::NEG_INFINITY {
            return Err(Error::InvalidChannel(format!(
                "Rician factor must be a finite dB value or +inf, got {}",
                self.rician_factor_db
            )));
        }
        for (name, v) in [
            ("ref_gain_db", self.ref_gain_db),
            ("noise_power_dbm", self.noise_power_dbm),
            ("tx_power_dbm", self.tx_power_dbm),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidChannel(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.absorption_db_per_m.is_finite() && self.absorption_db_per_m >= 0.0) {
            return Err(Error::InvalidChannel(format!(
                "absorption must be non-negative, got {}",
                self.absorption_db_per_m
            )));
        }
        Ok(())
    }

    /// κ as a linear ratio.
    pub fn rician_linear(&self) -> f64 {
        db_to_linear(self.rician_factor_db)
    }

    /// κ/(κ+1), well defined for κ = ∞.
    pub fn los_power_fraction(&self) -> f64 {
        1.0 / (1.0 + 1.0 / self.rician_linear())
    }

    /// 1/(κ+1).
    pub fn nlos_power_fraction(&self) -> f64 {
        1.0 - self.los_power_fraction()
    }

    pub fn ref_gain_linear(&self) -> f64 {
        db_to_linear(self.ref_gain_db)
    }

    pub fn tx_power_watts(&self) -> f64 {
        dbm_to_watts(self.tx_power_dbm)
    }

    pub fn noise_power_watts(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm)
    }
}

/// α0 for the array's carrier, anchored at −62 dB for 30 GHz and following
/// the free-space `(λ/4π)²` law elsewhere.
pub fn ref_gain_db_for(cfg: &ArrayConfig) -> f64 {
    REF_GAIN_DB_30GHZ + 20.0 * (cfg.wavelength() / 0.01).log10()
}

/// One NLoS component: complex gain and scatterer location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlosPath {
    pub gain: Complex64,
    pub point: PolarPoint,
}

/// A single user's channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub user: PolarPoint,
    pub los_gain: Complex64,
    pub nlos: Vec<NlosPath>,
    /// Column channel vector, length N, in storage order.
    pub h: Vec<Complex64>,
}

impl ChannelRealization {
    /// `hᴴ·w` over the full array.
    pub fn response(&self, w: &[Complex64]) -> Complex64 {
        self.h.iter().zip(w).map(|(h, w)| h.conj() * w).sum()
    }

    /// `hᴴ·w` restricted to the storage slots in `support`.
    pub fn response_on(&self, w: &[Complex64], support: &[usize]) -> Complex64 {
        support.iter().map(|&i| self.h[i].conj() * w[i]).sum()
    }
}

#[inline]
fn unit_phasor(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// `exp(−j·2π·x/λ)` with the integer number of wavelengths removed first.
#[inline]
fn propagation_phasor(distance: f64, wavelength: f64) -> Complex64 {
    let cycles = distance / wavelength;
    unit_phasor(-2.0 * PI * cycles.fract())
}

/// Near-field ULA steering vector under the Fresnel approximation, phase
/// referenced to the array centre. Unit norm.
pub fn ula_steering(p: &PolarPoint, cfg: &ArrayConfig) -> Vec<Complex64> {
    let scale = 1.0 / (cfg.n_antennas() as f64).sqrt();
    let (r, d0, lambda) = (p.range(), cfg.spacing(), cfg.wavelength());
    cfg.antenna_indices()
        .map(|n| {
            let x = n as f64 * d0;
            // r_n − r without forming r_n
            let excess = fresnel_range_at(p, x) - r;
            scale * unit_phasor(-2.0 * PI * excess / lambda)
        })
        .collect()
}

/// Same as [`ula_steering`] but with exact element distances.
pub fn ula_steering_exact(p: &PolarPoint, cfg: &ArrayConfig) -> Vec<Complex64> {
    let scale = 1.0 / (cfg.n_antennas() as f64).sqrt();
    let (r, d0, lambda) = (p.range(), cfg.spacing(), cfg.wavelength());
    cfg.antenna_indices()
        .map(|n| {
            let excess = exact_range_at(p, n as f64 * d0) - r;
            scale * unit_phasor(-2.0 * PI * excess / lambda)
        })
        .collect()
}

/// Response of the effective sparse array (length Q), absolute phase.
pub fn sla_steering(p: &PolarPoint, act: &SparseActivation, cfg: &ArrayConfig) -> Vec<Complex64> {
    let scale = 1.0 / (act.active_count() as f64).sqrt();
    let lambda = cfg.wavelength();
    let base = propagation_phasor(p.range(), lambda);
    act.active_antennas(cfg)
        .map(|n| {
            let x = n as f64 * cfg.spacing();
            let excess = fresnel_range_at(p, x) - p.range();
            scale * base * unit_phasor(-2.0 * PI * excess / lambda)
        })
        .collect()
}

/// Complex LoS gain `β`, including molecular absorption when configured.
pub fn los_gain(p: &PolarPoint, params: &ChannelParams, cfg: &ArrayConfig) -> Complex64 {
    let r = p.range();
    let mut amp = params.los_power_fraction().sqrt() * params.ref_gain_linear().sqrt() / r;
    if params.absorption_db_per_m > 0.0 {
        // exp(−½·A·r) with A in dB/m, applied to amplitude
        amp *= db_to_linear(-0.5 * params.absorption_db_per_m * r / 2.0);
    }
    amp * propagation_phasor(r, cfg.wavelength())
}

/// Draws one user's channel from the generator.
///
/// NLoS scatterers sit at spatial angles uniform on `[−1, 1]` and ranges
/// uniform on `[Z_F, r_user]`; their gains are `CN(0, α0/((κ+1)·r²))`.
pub fn sample_channel_with(
    user: PolarPoint,
    params: &ChannelParams,
    cfg: &ArrayConfig,
    rng: &mut SimRng,
) -> Result<ChannelRealization> {
    params.validate()?;
    let z_f = fresnel_distance(cfg);
    if user.range() < z_f {
        return Err(Error::InvalidPoint(format!(
            "user range {} m is inside the Fresnel distance {z_f} m",
            user.range()
        )));
    }
    let n = cfg.n_antennas() as f64;
    let beta = los_gain(&user, params, cfg);
    let mut h: Vec<Complex64> = ula_steering(&user, cfg).into_iter().map(|b| (n.sqrt() * beta).conj() * b).collect();

    let sigma = params.nlos_power_fraction().sqrt() * params.ref_gain_linear().sqrt() / user.range();
    let mut nlos = Vec::with_capacity(params.n_nlos);
    for _ in 0..params.n_nlos {
        let theta = rng.random_range(-1.0..=1.0);
        let range = if user.range() > z_f { rng.random_range(z_f..=user.range()) } else { z_f };
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        let gain = Complex64::new(re, im) * (sigma / 2f64.sqrt());
        let point = PolarPoint::new(range, theta)?;
        let amp = (n / params.n_nlos as f64).sqrt() * gain;
        for (hi, b) in h.iter_mut().zip(ula_steering(&point, cfg)) {
            *hi += amp.conj() * b;
        }
        nlos.push(NlosPath { gain, point });
    }
    Ok(ChannelRealization { user, los_gain: beta, nlos, h })
}

/// Deterministic channel draw from a seed.
pub fn sample_channel(
    user: PolarPoint,
    params: &ChannelParams,
    cfg: &ArrayConfig,
    seed: u64,
) -> Result<ChannelRealization> {
    use rand::SeedableRng;
    sample_channel_with(user, params, cfg, &mut SimRng::seed_from_u64(seed))
}

/// Reference SNR `N·P·α0/(r²·σ²)` in dB.
pub fn reference_snr(user_range: f64, params: &ChannelParams, cfg: &ArrayConfig) -> f64 {
    let n = cfg.n_antennas() as f64;
    let lin =
        n * params.tx_power_watts() * params.ref_gain_linear() / (user_range * user_range * params.noise_power_watts());
    linear_to_db(lin)
}

/// Transmit power in dBm that yields `snr_db` reference SNR at `user_range`.
pub fn tx_power_for_reference_snr(snr_db: f64, user_range: f64, params: &ChannelParams, cfg: &ArrayConfig) -> f64 {
    let at_current = reference_snr(user_range, params, cfg);
    params.tx_power_dbm + (snr_db - at_current)
}

/// `aᴴ·b`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm.
pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
