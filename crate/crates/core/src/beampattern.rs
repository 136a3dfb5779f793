//! Near-field beam patterns of dense and sparse codewords.
//!
//! `f(r, θ; w) = |b(r, θ)ᴴ w|` normalised by the size of the codeword's
//! support, so that a matched sparse codeword also peaks at one. On the
//! user-ring `(1−θ²)/r = const` the sparse pattern is a Dirichlet kernel
//! repeating every `2/M`, which is where the grating lobes come from.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::codebook::{Codeword, PHI_3DB};
use crate::error::{Error, Result};
use crate::geometry::{
    exact_range_at, fresnel_distance, fresnel_range_at, rayleigh_distance, ring_point, ArrayConfig, PolarPoint,
    SparseActivation,
};
use crate::special::fresnel_kernel;

pub use crate::special::dirichlet_sinc;

fn pattern_by<F: Fn(&PolarPoint, f64) -> f64>(
    observe: &PolarPoint,
    codeword: &Codeword,
    cfg: &ArrayConfig,
    range_fn: F,
) -> f64 {
    let support = codeword.support();
    if support.is_empty() {
        return 0.0;
    }
    let (r, d0, lambda) = (observe.range(), cfg.spacing(), cfg.wavelength());
    let w = codeword.weights();
    let acc: Complex64 = support
        .iter()
        .map(|&i| {
            let x = cfg.antenna_index(i) as f64 * d0;
            let excess = range_fn(observe, x) - r;
            Complex64::from_polar(1.0, 2.0 * PI * excess / lambda) * w[i]
        })
        .sum();
    acc.norm() / (support.len() as f64).sqrt()
}

/// Beam pattern of `codeword` at `observe` under Fresnel-approximate
/// steering. In `[0, 1]` for unit-norm codewords.
pub fn pattern(observe: &PolarPoint, codeword: &Codeword, cfg: &ArrayConfig) -> f64 {
    pattern_by(observe, codeword, cfg, fresnel_range_at)
}

/// As [`pattern`] but with exact element distances.
pub fn pattern_exact(observe: &PolarPoint, codeword: &Codeword, cfg: &ArrayConfig) -> f64 {
    pattern_by(observe, codeword, cfg, exact_range_at)
}

/// Evaluates [`pattern`] on the Cartesian product `thetas × ranges`,
/// returning `(θ, r, f)` rows in angle-major order. Points that are not
/// valid polar coordinates are skipped.
pub fn pattern_grid(codeword: &Codeword, cfg: &ArrayConfig, thetas: &[f64], ranges: &[f64]) -> Vec<(f64, f64, f64)> {
    thetas
        .par_iter()
        .flat_map_iter(|&th| {
            ranges.iter().filter_map(move |&r| PolarPoint::new(r, th).ok().map(|p| (th, r, pattern(&p, codeword, cfg))))
        })
        .collect()
}

/// Sparse-array pattern by direct summation over the active elements,
/// `(1/Q)·|Σ_q exp(j(πqMΔ + (π/λ)q²(Md0)²Φ))|` with `Δ = θ − θ0` and
/// `Φ = (1−θ0²)/r0 − (1−θ²)/r`.
pub fn sla_pattern_closed_form(
    observe: &PolarPoint,
    steer: &PolarPoint,
    act: &SparseActivation,
    cfg: &ArrayConfig,
) -> f64 {
    let delta = observe.spatial_angle() - steer.spatial_angle();
    let phi = steer.ring_value() - observe.ring_value();
    let (q_count, m) = (act.active_count(), act.interval() as f64);
    let b2 = PI / cfg.wavelength() * (m * cfg.spacing()).powi(2) * phi;
    let centre = (q_count as f64 - 1.0) / 2.0;
    let acc: Complex64 = (0..q_count)
        .map(|i| {
            let q = i as f64 - centre;
            Complex64::from_polar(1.0, PI * q * m * delta + b2 * q * q)
        })
        .sum();
    acc.norm() / q_count as f64
}

/// Range-domain pattern at the steering angle: `|F(γ)|` with
/// `γ = (QMd0/2)·√(2|Φ|/λ)`.
pub fn range_domain_pattern(observe_range: f64, steer: &PolarPoint, act: &SparseActivation, cfg: &ArrayConfig) -> f64 {
    let th = steer.spatial_angle();
    let phi = steer.ring_value() - (1.0 - th * th) / observe_range;
    let aperture = act.angle_bins() as f64 * cfg.spacing();
    let gamma = 0.5 * aperture * (2.0 * phi.abs() / cfg.wavelength()).sqrt();
    fresnel_kernel(gamma).norm()
}

/// Activation-interval threshold `√(1.2·(N−1))` above which abnormal rings
/// can enter the Fresnel region.
pub fn m_threshold(cfg: &ArrayConfig) -> f64 {
    (1.2 * (cfg.n_antennas() as f64 - 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingSource {
    UserRing,
    AbnormalRing(i64),
}

/// A ring `(1−θ²)/r = ring_value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingSpec {
    pub ring_value: f64,
    pub source: RingSource,
}

impl RingSpec {
    pub fn user(steer: &PolarPoint) -> Self {
        Self { ring_value: steer.ring_value(), source: RingSource::UserRing }
    }

    /// Ring shifted from the user ring by `α/(M²d0)`; `α > 0` gives an
    /// outer ring (farther from the array).
    pub fn abnormal(steer: &PolarPoint, alpha: i64, act: &SparseActivation, cfg: &ArrayConfig) -> Self {
        let m = act.interval() as f64;
        Self {
            ring_value: steer.ring_value() - alpha as f64 / (m * m * cfg.spacing()),
            source: RingSource::AbnormalRing(alpha),
        }
    }

    pub fn alpha(&self) -> Option<i64> {
        match self.source {
            RingSource::UserRing => None,
            RingSource::AbnormalRing(a) => Some(a),
        }
    }

    /// Point of the ring at angle `theta`, if it exists.
    pub fn point_at(&self, theta: f64) -> Option<PolarPoint> {
        ring_point(self.ring_value, theta)
    }

    /// Largest range reached by the ring (at broadside).
    pub fn max_range(&self) -> f64 {
        if self.ring_value > 0.0 {
            1.0 / self.ring_value
        } else {
            f64::INFINITY
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingType {
    /// `α ≡ 0 (mod 4)`: full-gain lobes every `2/M`.
    I,
    /// `α ≡ 2 (mod 4)`: lobes shifted by `1/M`.
    II,
    /// `α` odd: split lobes of reduced gain.
    III,
}

impl RingType {
    pub fn of(alpha: i64) -> Option<Self> {
        match alpha.rem_euclid(4) {
            _ if alpha == 0 => None,
            0 => Some(RingType::I),
            2 => Some(RingType::II),
            _ => Some(RingType::III),
        }
    }
}

/// Closed-form pattern on abnormal ring `α` at angular offset `Δ` from the
/// steering angle, for odd Q.
///
/// The quadratic phase reduces to `απq²/2`, which only depends on `q mod 2`
/// and `α mod 4`, so the sum splits into even- and odd-index Dirichlet
/// kernels `E = Ξ_{Qe}(2MΔ)` and `O = Ξ_{Qo}(2MΔ)`.
pub fn abnormal_ring_closed_form(alpha: i64, delta: f64, act: &SparseActivation) -> Result<f64> {
    let q = act.active_count();
    if q.is_multiple_of(2) {
        return Err(Error::InvalidArray(format!("closed form needs odd Q, got {q}")));
    }
    let h = (q - 1) / 2;
    let (n_even, n_odd) = if h.is_multiple_of(2) { (h + 1, h) } else { (h, h + 1) };
    let x = 2.0 * act.interval() as f64 * delta;
    let e = dirichlet_sinc(n_even as i64, x);
    let o = dirichlet_sinc(n_odd as i64, x);
    let sum = match alpha.rem_euclid(4) {
        0 => Complex64::new(e + o, 0.0),
        2 => Complex64::new(e - o, 0.0),
        1 => Complex64::new(e, o),
        _ => Complex64::new(e, -o),
    };
    Ok(sum.norm() / q as f64)
}

/// Enumerates the abnormal rings that reach into `[z_min, z_max]`.
///
/// A ring with value `c` covers ranges `(0, 1/c]`, so it intersects the
/// region exactly when `c > 0` and `1/c ≥ z_min`.
pub fn abnormal_rings(
    steer: &PolarPoint,
    act: &SparseActivation,
    cfg: &ArrayConfig,
    fresnel_bounds: (f64, f64),
) -> Vec<(RingSpec, RingType)> {
    let (z_min, z_max) = fresnel_bounds;
    if !(z_min > 0.0 && z_max >= z_min) {
        return Vec::new();
    }
    let m = act.interval() as f64;
    let unit = 1.0 / (m * m * cfg.spacing());
    let c0 = steer.ring_value();
    // outer: c0 − α·unit > 0; inner: c0 + |α|·unit ≤ 1/z_min
    let alpha_max = (c0 / unit).ceil() as i64;
    let alpha_min = -((1.0 / z_min - c0) / unit).floor().max(0.0) as i64;
    (alpha_min..=alpha_max)
        .filter(|&a| a != 0)
        .map(|a| RingSpec::abnormal(steer, a, act, cfg))
        .filter(|ring| ring.ring_value > 0.0 && ring.max_range() >= z_min)
        .map(|ring| {
            let t = RingType::of(ring.alpha().unwrap()).unwrap();
            (ring, t)
        })
        .collect()
}

/// Main lobe and grating lobes of a sparse codeword.
#[derive(Debug, Clone, PartialEq)]
pub struct LobeSet {
    pub lobes: Vec<PolarPoint>,
    /// Lobe order `m` of each entry of `lobes`.
    pub orders: Vec<i64>,
    pub beam_width: f64,
    /// Predicted 3-dB depth per lobe; `f64::INFINITY` when unbounded.
    pub beam_depths: Vec<f64>,
}

/// Predicted lobes at `θ_m = θ0 + 2m/M`, `r_m = r0(1−θ_m²)/(1−θ0²)`.
///
/// Lobes that would fall exactly on endfire (zero range) are omitted.
pub fn grating_lobes(steer: &PolarPoint, act: &SparseActivation, cfg: &ArrayConfig) -> LobeSet {
    grating_lobes_with(steer, act, cfg, PHI_3DB)
}

pub fn grating_lobes_with(steer: &PolarPoint, act: &SparseActivation, cfg: &ArrayConfig, phi_3db: f64) -> LobeSet {
    if act.interval() as f64 > m_threshold(cfg) {
        log::warn!(
            "activation interval {} exceeds the threshold {:.2}; abnormal rings may appear",
            act.interval(),
            m_threshold(cfg)
        );
    }
    let m = act.interval() as i64;
    let (q, mf) = (act.active_count() as f64, m as f64);
    let (th0, r0) = (steer.spatial_angle(), steer.range());
    let mut set =
        LobeSet { lobes: Vec::new(), orders: Vec::new(), beam_width: 4.0 / (q * mf), beam_depths: Vec::new() };
    for order in -m..=m {
        let th = th0 + 2.0 * order as f64 / mf;
        if !(-1.0..=1.0).contains(&th) {
            continue;
        }
        let lobe = if order == 0 {
            *steer
        } else {
            let r = r0 * (1.0 - th * th) / (1.0 - th0 * th0);
            match PolarPoint::new(r, th) {
                Ok(p) => p,
                Err(_) => continue,
            }
        };
        let r_bd = q * q * mf * mf * cfg.spacing() * (1.0 - th * th) / (4.0 * phi_3db * phi_3db);
        let rm = lobe.range();
        let depth = if rm < r_bd { 2.0 * rm * rm * r_bd / (r_bd * r_bd - rm * rm) } else { f64::INFINITY };
        set.lobes.push(lobe);
        set.orders.push(order);
        set.beam_depths.push(depth);
    }
    set
}

fn scan_step(codeword: &Codeword) -> f64 {
    let bins = codeword.support().len() * codeword.support_stride();
    1.0 / (10.0 * bins.max(1) as f64)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Walks along the user ring from the steering angle until the first local
/// minimum, then refines it.
fn first_null(codeword: &Codeword, steer: &PolarPoint, cfg: &ArrayConfig, dir: f64) -> Result<f64> {
    let step = scan_step(codeword);
    let th0 = steer.spatial_angle();
    let eval = |th: f64| steer.on_same_ring(th).map(|p| pattern(&p, codeword, cfg));
    let mut prev = eval(th0).ok_or_else(|| Error::DegeneratePattern("steer not on its ring".into()))?;
    let mut k = 1;
    loop {
        let th = th0 + dir * k as f64 * step;
        let Some(cur) = eval(th) else {
            return Err(Error::DegeneratePattern("no null before the end of the ring".into()));
        };
        if cur > prev {
            let lo = th0 + dir * (k as f64 - 2.0) * step;
            let (a, b) = if lo < th { (lo, th) } else { (th, lo) };
            let f = |t: f64| eval(t).unwrap_or(f64::INFINITY);
            return Ok(golden_min(f, a, b));
        }
        prev = cur;
        k += 1;
    }
}

/// Null-to-null beam width on the user ring through `steer`.
pub fn measure_beam_width(codeword: &Codeword, steer: &PolarPoint, cfg: &ArrayConfig) -> Result<f64> {
    let peak = pattern(steer, codeword, cfg);
    let step = scan_step(codeword);
    let side = steer
        .on_same_ring((steer.spatial_angle() + step).min(1.0))
        .or_else(|| steer.on_same_ring(steer.spatial_angle() - step))
        .map(|p| pattern(&p, codeword, cfg))
        .unwrap_or(peak);
    if peak < 1e-9 || (peak - side).abs() < 1e-12 {
        return Err(Error::DegeneratePattern(format!("flat pattern around the steering point ({peak})")));
    }
    let right = first_null(codeword, steer, cfg, 1.0)?;
    let left = first_null(codeword, steer, cfg, -1.0)?;
    Ok((right - left).abs())
}

const DEPTH_SAMPLES: usize = 2000;

/// 3-dB beam depth along the radial line through `steer`, searched over
/// `(Z_F, Z_R)`. Returns `f64::INFINITY` when the half-power region reaches
/// the far end of the search interval.
pub fn measure_beam_depth(codeword: &Codeword, steer: &PolarPoint, cfg: &ArrayConfig) -> Result<f64> {
    let (z_f, z_r) = (fresnel_distance(cfg), rayleigh_distance(cfg));
    let th = steer.spatial_angle();
    let power = |r: f64| {
        let p = PolarPoint::new(r, th).expect("positive range");
        pattern(&p, codeword, cfg).powi(2)
    };
    let ratio = z_r / z_f;
    let grid: Vec<f64> =
        (0..DEPTH_SAMPLES).map(|i| z_f * ratio.powf((i as f64 + 0.5) / DEPTH_SAMPLES as f64)).collect();
    let vals: Vec<f64> = grid.iter().map(|&r| power(r)).collect();
    let (imax, &vmax) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let vmin = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    if vmax < 1e-12 || vmax - vmin < 1e-9 * vmax {
        return Err(Error::DegeneratePattern("flat radial pattern".into()));
    }
    let half = 0.5 * vmax;
    let mut hi = imax;
    while hi + 1 < grid.len() && vals[hi + 1] >= half {
        hi += 1;
    }
    if hi + 1 == grid.len() {
        return Ok(f64::INFINITY);
    }
    let mut lo = imax;
    while lo > 0 && vals[lo - 1] >= half {
        lo -= 1;
    }
    let crossing = |inside: f64, outside: f64| {
        let (mut a, mut b) = (inside, outside);
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if power(mid) >= half {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };
    let r_large = crossing(grid[hi], grid[hi + 1]);
    let r_small = if lo == 0 { z_f } else { crossing(grid[lo], grid[lo - 1]) };
    Ok(r_large - r_small)
}

/// Locates the lobes of `codeword` numerically: local maxima above
/// `min_value` along the user ring of `steer`, each refined radially over
/// `[Z_F/2, Z_R]` at its angle.
pub fn locate_ring_peaks(
    codeword: &Codeword,
    steer: &PolarPoint,
    cfg: &ArrayConfig,
    min_value: f64,
) -> Vec<PolarPoint> {
    let step = scan_step(codeword);
    let th0 = steer.spatial_angle();
    let k_lo = ((-1.0 - th0) / step).ceil() as i64;
    let k_hi = ((1.0 - th0) / step).floor() as i64;
    let samples: Vec<(f64, f64)> = (k_lo..=k_hi)
        .into_par_iter()
        .filter_map(|k| {
            let th = th0 + k as f64 * step;
            steer.on_same_ring(th).map(|p| (th, pattern(&p, codeword, cfg)))
        })
        .collect();
    let (z_f, z_r) = (fresnel_distance(cfg), rayleigh_distance(cfg));
    let lo = 0.5 * z_f;
    let ratio = z_r / lo;
    let mut peaks = Vec::new();
    for i in 0..samples.len() {
        let (th, v) = samples[i];
        let left = if i > 0 { samples[i - 1].1 } else { f64::NEG_INFINITY };
        let right = samples.get(i + 1).map_or(f64::NEG_INFINITY, |s| s.1);
        if v < min_value || v < left || v <= right {
            continue;
        }
        let best = (0..DEPTH_SAMPLES)
            .into_par_iter()
            .map(|j| {
                let r = lo * ratio.powf(j as f64 / (DEPTH_SAMPLES - 1) as f64);
                let p = PolarPoint::new(r, th).expect("positive range");
                (r, pattern(&p, codeword, cfg))
            })
            .reduce(|| (lo, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        peaks.push(PolarPoint::new(best.0, th).expect("positive range"));
    }
    peaks
}
