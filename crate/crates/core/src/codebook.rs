//! Beam codebooks.
//!
//! * the dense single-beam polar codebook over `QM` angles and `V` ranges,
//! * the sparse-activation multi-beam codebook over the central sector,
//! * the far-field DFT codebook,
//! * the array-division multi-arm codeword used by the sub-array benchmark.
//!
//! Polar codebooks are stored as steering descriptors and materialise their
//! weight vectors on first use.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::channel::{sla_steering, ula_steering};
use crate::error::{Error, Result};
use crate::geometry::{ArrayConfig, PolarPoint, SparseActivation};

/// Half-power threshold on the Fresnel-kernel argument used for range
/// sampling and beam-depth formulas.
pub const PHI_3DB: f64 = 1.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodewordKind {
    DensePolar,
    SparseMulti,
    Dft,
    ArrayDivision,
    /// Arbitrary weights, e.g. a beam matched to an estimated channel.
    Custom,
}

/// What a codeword points at.
#[derive(Debug, Clone, PartialEq)]
pub enum Steer {
    Polar(PolarPoint),
    Angle(f64),
    /// One angle per sub-array.
    Angles(Vec<f64>),
    /// Matched to a channel vector rather than a location.
    Channel,
}

impl Steer {
    /// Spatial angle of the main lobe (first arm for multi-arm codewords).
    pub fn angle(&self) -> Option<f64> {
        match self {
            Steer::Polar(p) => Some(p.spatial_angle()),
            Steer::Angle(a) => Some(*a),
            Steer::Angles(a) => a.first().copied(),
            Steer::Channel => None,
        }
    }
}

/// Transmit weight vector of length N with its active support.
#[derive(Debug, Clone, PartialEq)]
pub struct Codeword {
    weights: Vec<Complex64>,
    support: Vec<usize>,
    steer: Steer,
    kind: CodewordKind,
}

impl Codeword {
    /// `w = b(r, θ)` over the full array.
    pub fn dense_polar(p: PolarPoint, cfg: &ArrayConfig) -> Self {
        Self {
            weights: ula_steering(&p, cfg),
            support: (0..cfg.n_antennas()).collect(),
            steer: Steer::Polar(p),
            kind: CodewordKind::DensePolar,
        }
    }

    /// `b_SLA(r, θ)` placed on every M-th antenna, zeros elsewhere.
    pub fn sparse_multi(p: PolarPoint, act: &SparseActivation, cfg: &ArrayConfig) -> Self {
        let mut weights = vec![Complex64::new(0.0, 0.0); cfg.n_antennas()];
        let support: Vec<usize> =
            act.active_antennas(cfg).map(|n| cfg.storage_index(n).expect("active antenna inside array")).collect();
        for (&i, w) in support.iter().zip(sla_steering(&p, act, cfg)) {
            weights[i] = w;
        }
        Self { weights, support, steer: Steer::Polar(p), kind: CodewordKind::SparseMulti }
    }

    /// Planar-wave codeword `(1/√N)·exp(jπnθ)`.
    pub fn far_field(theta: f64, cfg: &ArrayConfig) -> Self {
        let scale = 1.0 / (cfg.n_antennas() as f64).sqrt();
        Self {
            weights: cfg.antenna_indices().map(|n| scale * Complex64::from_polar(1.0, PI * n as f64 * theta)).collect(),
            support: (0..cfg.n_antennas()).collect(),
            steer: Steer::Angle(theta),
            kind: CodewordKind::Dft,
        }
    }

    /// Wraps arbitrary weights, scaled to unit norm. The support is the set
    /// of nonzero entries.
    pub fn custom(mut weights: Vec<Complex64>, steer: Steer) -> Result<Self> {
        let norm = crate::channel::norm(&weights);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Codebook("codeword weights must have positive finite norm".into()));
        }
        weights.iter_mut().for_each(|w| *w /= norm);
        let support = weights.iter().enumerate().filter(|(_, w)| w.norm() > 0.0).map(|(i, _)| i).collect();
        Ok(Self { weights, support, steer, kind: CodewordKind::Custom })
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Storage slots of the active antennas, ascending.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn steer(&self) -> &Steer {
        &self.steer
    }

    pub fn kind(&self) -> CodewordKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Spacing of the active antennas in units of `d0`; 1 for dense words.
    pub fn support_stride(&self) -> usize {
        match self.support.as_slice() {
            [a, b, ..] => b - a,
            _ => 1,
        }
    }
}

/// Sampled spatial angles `θ_s = (2s − QM − 1)/(QM)`, `s = 1..QM`.
pub fn angle_grid(act: &SparseActivation) -> Vec<f64> {
    let qm = act.angle_bins();
    (1..=qm).map(|s| grid_angle(s, qm)).collect()
}

#[inline]
fn grid_angle(s: usize, bins: usize) -> f64 {
    (2.0 * s as f64 - bins as f64 - 1.0) / bins as f64
}

/// Range sampling scale `Z = M²Q²d0² / (2λφ²)` with `φ = 1.6`.
pub fn range_grid_scale(act: &SparseActivation, cfg: &ArrayConfig) -> f64 {
    range_grid_scale_with(act, cfg, PHI_3DB)
}

pub fn range_grid_scale_with(act: &SparseActivation, cfg: &ArrayConfig, phi_3db: f64) -> f64 {
    let qm = act.angle_bins() as f64;
    let d0 = cfg.spacing();
    qm * qm * d0 * d0 / (2.0 * cfg.wavelength() * phi_3db * phi_3db)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BookKind {
    SingleBeam,
    MultiBeam,
}

/// Polar-domain codebook indexed by `(s, v)`, both 1-based.
///
/// The multi-beam book uses the same global angle index `s` as the
/// single-beam book, restricted to the central sector `G`.
#[derive(Debug)]
pub struct PolarCodebook {
    kind: BookKind,
    cfg: ArrayConfig,
    act: SparseActivation,
    n_ranges: usize,
    z_grid: f64,
    angles: Vec<usize>,
    cache: OnceLock<Vec<Codeword>>,
}

impl PolarCodebook {
    fn new(
        kind: BookKind,
        act: SparseActivation,
        n_ranges: usize,
        cfg: &ArrayConfig,
        angles: Vec<usize>,
    ) -> Result<Self> {
        if n_ranges == 0 {
            return Err(Error::Codebook("at least one range sample is required".into()));
        }
        Ok(Self { kind, cfg: *cfg, act, n_ranges, z_grid: range_grid_scale(&act, cfg), angles, cache: OnceLock::new() })
    }

    pub fn kind(&self) -> BookKind {
        self.kind
    }

    pub fn activation(&self) -> &SparseActivation {
        &self.act
    }

    pub fn array(&self) -> &ArrayConfig {
        &self.cfg
    }

    /// Number of range samples `V`.
    pub fn n_ranges(&self) -> usize {
        self.n_ranges
    }

    /// Range scale `Z`.
    pub fn z_grid(&self) -> f64 {
        self.z_grid
    }

    /// Angle indices `s` present in this book, ascending.
    pub fn angle_indices(&self) -> &[usize] {
        &self.angles
    }

    /// Number of codewords.
    pub fn len(&self) -> usize {
        self.angles.len() * self.n_ranges
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, s: usize, v: usize) -> bool {
        (1..=self.n_ranges).contains(&v) && self.angles.binary_search(&s).is_ok()
    }

    /// `θ_s` on the `QM` grid.
    pub fn angle(&self, s: usize) -> f64 {
        grid_angle(s, self.act.angle_bins())
    }

    /// `r_{s,v} = Z·(1 − θ_s²)/v`.
    pub fn range(&self, s: usize, v: usize) -> f64 {
        let th = self.angle(s);
        self.z_grid * (1.0 - th * th) / v as f64
    }

    pub fn steer(&self, s: usize, v: usize) -> PolarPoint {
        PolarPoint::new(self.range(s, v), self.angle(s)).expect("grid point is a valid polar point")
    }

    /// All `(s, v)` pairs in storage order (angle-major).
    pub fn indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.angles.iter().flat_map(move |&s| (1..=self.n_ranges).map(move |v| (s, v)))
    }

    fn position(&self, s: usize, v: usize) -> Option<usize> {
        if !(1..=self.n_ranges).contains(&v) {
            return None;
        }
        let a = self.angles.binary_search(&s).ok()?;
        Some(a * self.n_ranges + (v - 1))
    }

    /// Builds the weight vector for `(s, v)` without touching the cache.
    pub fn build_codeword(&self, s: usize, v: usize) -> Result<Codeword> {
        if !self.contains(s, v) {
            return Err(Error::Codebook(format!("index ({s}, {v}) not in codebook")));
        }
        let p = self.steer(s, v);
        Ok(match self.kind {
            BookKind::SingleBeam => Codeword::dense_polar(p, &self.cfg),
            BookKind::MultiBeam => Codeword::sparse_multi(p, &self.act, &self.cfg),
        })
    }

    /// Every codeword, materialised once and shared afterwards.
    pub fn codewords(&self) -> &[Codeword] {
        self.cache.get_or_init(|| self.indices().map(|(s, v)| self.build_codeword(s, v).expect("own index")).collect())
    }

    /// Cached codeword for `(s, v)`.
    pub fn get(&self, s: usize, v: usize) -> Option<&Codeword> {
        self.position(s, v).map(|i| &self.codewords()[i])
    }
}

/// Dense single-beam codebook: `w_{s,v} = b(r_{s,v}, θ_s)` for all `QM·V`
/// grid points.
pub fn build_single_beam_codebook(act: &SparseActivation, n_ranges: usize, cfg: &ArrayConfig) -> Result<PolarCodebook> {
    PolarCodebook::new(BookKind::SingleBeam, *act, n_ranges, cfg, (1..=act.angle_bins()).collect())
}

/// Central sector `G = {(Q(M−1)+1)/2, …, (Q(M+1)−1)/2}`.
pub fn central_sector(act: &SparseActivation) -> Result<Vec<usize>> {
    let (q, m) = (act.active_count(), act.interval());
    let lo2 = q * (m - 1) + 1;
    let hi2 = q * (m + 1) - 1;
    if lo2 % 2 != 0 || hi2 % 2 != 0 {
        return Err(Error::Codebook(format!("central sector needs Q odd and M even (Q = {q}, M = {m})")));
    }
    let g: Vec<usize> = (lo2 / 2..=hi2 / 2).collect();
    if g.len() != q {
        return Err(Error::Codebook(format!("central sector has {} indices, expected {q}", g.len())));
    }
    Ok(g)
}

/// Sparse multi-beam codebook: `Q·V` codewords `b_SLA(r_{g,v}, θ_g)`,
/// `g ∈ G`, each also covering the grid points `s = g + mQ` through its
/// grating lobes.
pub fn build_multi_beam_codebook(act: &SparseActivation, n_ranges: usize, cfg: &ArrayConfig) -> Result<PolarCodebook> {
    PolarCodebook::new(BookKind::MultiBeam, *act, n_ranges, cfg, central_sector(act)?)
}

/// Far-field codebook over the uniform grid `θ_s = (2s − G − 1)/G`.
pub fn build_dft_codebook(cfg: &ArrayConfig, grid_size: usize) -> Vec<Codeword> {
    if grid_size < cfg.n_antennas() {
        log::warn!("DFT grid of {grid_size} angles is coarser than the array resolution");
    }
    (1..=grid_size).map(|s| Codeword::far_field(grid_angle(s, grid_size), cfg)).collect()
}

/// Array-division multi-arm codeword: sub-array `i` (ρ = (N−1)/M̃
/// antennas) steers a planar beam towards `angles[i]`.
///
/// N is odd, so the last antenna is left idle and the sub-arrays tile the
/// remaining `N−1`. Phases reference the absolute antenna position, so each
/// arm is a slice of the full-array far-field codeword.
pub fn build_array_division_codeword(angles: &[f64], n_subarrays: usize, cfg: &ArrayConfig) -> Result<Codeword> {
    if n_subarrays == 0 || angles.len() != n_subarrays {
        return Err(Error::Dimension { expected: n_subarrays, got: angles.len() });
    }
    let n = cfg.n_antennas();
    let used = n - 1;
    if used == 0 || !used.is_multiple_of(n_subarrays) {
        return Err(Error::Codebook(format!("{n_subarrays} sub-arrays do not tile {used} antennas")));
    }
    let rho = used / n_subarrays;
    let scale = 1.0 / (used as f64).sqrt();
    let mut weights = vec![Complex64::new(0.0, 0.0); n];
    for (i, w) in weights.iter_mut().enumerate().take(used) {
        let pos = cfg.antenna_index(i) as f64;
        *w = scale * Complex64::from_polar(1.0, PI * pos * angles[i / rho]);
    }
    Ok(Codeword {
        weights,
        support: (0..used).collect(),
        steer: Steer::Angles(angles.to_vec()),
        kind: CodewordKind::ArrayDivision,
    })
}
