//! Array geometry: the half-wavelength ULA, polar coordinates of users and
//! scatterers, sparse activation patterns and per-antenna ranges.
//!
//! Antenna indices are signed and centred, `n ∈ {0, ±1, …, ±(N−1)/2}`.
//! Weight vectors are stored in ascending `n`; [`ArrayConfig::storage_index`]
//! and [`ArrayConfig::antenna_index`] are the only places that translate
//! between the two.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::SPEED_OF_LIGHT;

/// Uniform linear array with half-wavelength spacing and an odd number of
/// antennas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    n_antennas: usize,
    carrier_freq: f64,
    wavelength: f64,
    spacing: f64,
    aperture: f64,
}

impl ArrayConfig {
    /// Builds an array from its antenna count and carrier frequency in Hz.
    pub fn new(n_antennas: usize, carrier_freq: f64) -> Result<Self> {
        if !(carrier_freq.is_finite() && carrier_freq > 0.0) {
            return Err(Error::InvalidArray(format!("carrier frequency must be positive, got {carrier_freq}")));
        }
        Self::with_wavelength(n_antennas, SPEED_OF_LIGHT / carrier_freq)
    }

    /// Builds an array directly from its wavelength in meters.
    pub fn with_wavelength(n_antennas: usize, wavelength: f64) -> Result<Self> {
        if n_antennas == 0 || n_antennas.is_multiple_of(2) {
            return Err(Error::InvalidArray(format!("antenna count must be a positive odd integer, got {n_antennas}")));
        }
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::InvalidArray(format!("wavelength must be positive, got {wavelength}")));
        }
        let spacing = wavelength / 2.0;
        Ok(Self {
            n_antennas,
            carrier_freq: SPEED_OF_LIGHT / wavelength,
            wavelength,
            spacing,
            aperture: (n_antennas - 1) as f64 * spacing,
        })
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Inter-element spacing `d0 = λ/2`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Aperture `D = (N−1)·d0`.
    pub fn aperture(&self) -> f64 {
        self.aperture
    }

    /// Largest antenna index, `(N−1)/2`.
    pub fn half_span(&self) -> i64 {
        ((self.n_antennas - 1) / 2) as i64
    }

    /// Iterator over antenna indices in storage order.
    pub fn antenna_indices(&self) -> impl Iterator<Item = i64> + Clone {
        let h = self.half_span();
        -h..=h
    }

    /// Position of antenna `n` in a length-N weight vector.
    pub fn storage_index(&self, n: i64) -> Result<usize> {
        self.check_index(n)?;
        Ok((n + self.half_span()) as usize)
    }

    /// Antenna index of storage slot `i`.
    pub fn antenna_index(&self, i: usize) -> i64 {
        debug_assert!(i < self.n_antennas);
        i as i64 - self.half_span()
    }

    fn check_index(&self, n: i64) -> Result<()> {
        let max = self.half_span();
        if n.abs() > max {
            return Err(Error::AntennaIndex { index: n, max });
        }
        Ok(())
    }
}

/// Inner boundary of the radiative near field, `Z_F = 1.2·D`.
pub fn fresnel_distance(cfg: &ArrayConfig) -> f64 {
    1.2 * cfg.aperture()
}

/// Rayleigh distance `Z_R = 2·D²/λ`.
pub fn rayleigh_distance(cfg: &ArrayConfig) -> f64 {
    2.0 * cfg.aperture() * cfg.aperture() / cfg.wavelength()
}

/// A location in polar coordinates relative to the array centre: range in
/// meters and spatial angle `θ = cos(AoD)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    range: f64,
    spatial_angle: f64,
}

impl PolarPoint {
    pub fn new(range: f64, spatial_angle: f64) -> Result<Self> {
        if !(range.is_finite() && range > 0.0) {
            return Err(Error::InvalidPoint(format!("range must be positive, got {range}")));
        }
        if !(-1.0..=1.0).contains(&spatial_angle) {
            return Err(Error::InvalidPoint(format!("spatial angle must lie in [-1, 1], got {spatial_angle}")));
        }
        Ok(Self { range, spatial_angle })
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn spatial_angle(&self) -> f64 {
        self.spatial_angle
    }

    /// The user-ring value `(1−θ²)/r`.
    pub fn ring_value(&self) -> f64 {
        (1.0 - self.spatial_angle * self.spatial_angle) / self.range
    }

    /// Point at angle `theta` on the same user-ring as `self`.
    ///
    /// Returns `None` when `theta` is outside `[-1, 1]` or the ring point
    /// would collapse onto the array (`θ = ±1` on a ring with `θ0 ≠ ±1`).
    pub fn on_same_ring(&self, theta: f64) -> Option<PolarPoint> {
        ring_point(self.ring_value(), theta).or_else(|| {
            // endfire steer: the "ring" is the whole endfire line
            (self.ring_value() == 0.0 && theta.abs() == 1.0).then(|| PolarPoint::new(self.range, theta).ok()).flatten()
        })
    }
}

/// Point at angle `theta` on the ring `(1−θ²)/r = ring_value`.
pub fn ring_point(ring_value: f64, theta: f64) -> Option<PolarPoint> {
    if ring_value <= 0.0 {
        return None;
    }
    let r = (1.0 - theta * theta) / ring_value;
    PolarPoint::new(r, theta).ok()
}

/// Every `M`-th antenna active; `Q = (N−1)/M + 1` active elements sharing
/// the full aperture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseActivation {
    interval: usize,
    active_count: usize,
}

impl SparseActivation {
    /// Fails unless `M` divides `N−1`.
    ///
    /// `M = 1` is accepted and degenerates to the dense array (`QM = N`).
    pub fn new(interval: usize, cfg: &ArrayConfig) -> Result<Self> {
        let n_minus_one = cfg.n_antennas() - 1;
        if interval == 0 || n_minus_one == 0 || !n_minus_one.is_multiple_of(interval) {
            return Err(Error::IndivisibleActivation { interval, n_minus_one });
        }
        Ok(Self { interval, active_count: n_minus_one / interval + 1 })
    }

    /// Activation interval `M`.
    pub fn interval(&self) -> usize {
        self.interval
    }

    /// Number of active antennas `Q`.
    pub fn active_count(&self) -> usize {
        self.active_count
    }

    /// `Q·M`, the number of sampled angles of the single-beam grid.
    pub fn angle_bins(&self) -> usize {
        self.active_count * self.interval
    }

    /// Antenna indices of the active elements, ascending.
    pub fn active_antennas<'a>(&self, cfg: &'a ArrayConfig) -> impl Iterator<Item = i64> + 'a {
        let m = self.interval as i64;
        let q = self.active_count as i64;
        let first = -cfg.half_span();
        (0..q).map(move |i| first + i * m)
    }
}

/// Exact distance from antenna `n` to `p`.
pub fn exact_range(p: &PolarPoint, n: i64, cfg: &ArrayConfig) -> Result<f64> {
    cfg.check_index(n)?;
    Ok(exact_range_at(p, n as f64 * cfg.spacing()))
}

/// Second-order (Fresnel) approximation of the distance from element `n` of
/// a uniform array with spacing `stride·d0` to `p`.
///
/// `stride = 1` addresses the dense ULA, `stride = M` the active elements of
/// a sparse activation (`n` is then the SLA index `q`).
pub fn fresnel_range(p: &PolarPoint, n: i64, cfg: &ArrayConfig, stride: usize) -> Result<f64> {
    if stride == 0 {
        return Err(Error::InvalidArray("stride must be positive".into()));
    }
    cfg.check_index(n * stride as i64)?;
    Ok(fresnel_range_at(p, n as f64 * stride as f64 * cfg.spacing()))
}

/// Exact distance to `p` from an element at signed offset `x` meters.
#[inline]
pub(crate) fn exact_range_at(p: &PolarPoint, x: f64) -> f64 {
    let r = p.range;
    (r * r + x * x - 2.0 * r * p.spatial_angle * x).sqrt()
}

/// Fresnel-approximate distance to `p` from an element at offset `x` meters.
#[inline]
pub(crate) fn fresnel_range_at(p: &PolarPoint, x: f64) -> f64 {
    let (r, th) = (p.range, p.spatial_angle);
    r - x * th + x * x * (1.0 - th * th) / (2.0 * r)
}
