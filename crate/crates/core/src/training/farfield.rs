//! Far-field benchmarks and channel-estimation baselines.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::{complex_noise, CodewordId, GridIndex, MeasurementModel, Sweep, TrainingOutcome};
use crate::channel::ChannelRealization;
use crate::codebook::{build_array_division_codeword, Codeword, Steer};
use crate::error::{Error, Result};
use crate::geometry::{rayleigh_distance, ArrayConfig, PolarPoint, SparseActivation};

/// Nearest index `s` of the grid `θ_s = (2s − bins − 1)/bins`.
pub fn nearest_grid_index(theta: f64, bins: usize) -> usize {
    let b = bins as f64;
    let s = ((theta * b + b + 1.0) / 2.0).round();
    s.clamp(1.0, b) as usize
}

/// Angle bins resolved by the array-division scheme: the `N − 1` antennas
/// that the sub-arrays tile.
pub fn subarray_grid_size(cfg: &ArrayConfig) -> usize {
    cfg.n_antennas() - 1
}

fn far_field_estimate(theta: f64, cfg: &ArrayConfig) -> PolarPoint {
    PolarPoint::new(rayleigh_distance(cfg), theta).expect("grid angle inside [-1, 1]")
}

/// Single DFT sweep, strongest codeword wins. `selected.s` is the nearest
/// index on the `QM` single-beam angle grid.
pub fn run_farfield_dft<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    dft: &[Codeword],
    act: &SparseActivation,
    cfg: &ArrayConfig,
    model: &MeasurementModel,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    if dft.is_empty() {
        return Err(Error::Codebook("empty DFT codebook".into()));
    }
    let mut sweep = Sweep::new(channel, model, rng);
    let items = dft.iter().enumerate().map(|(i, w)| (CodewordId::Dft { s: i + 1 }, w));
    let (_, beam, _) = sweep.best(items).expect("non-empty");
    let theta = beam.steer().angle().expect("DFT codewords carry an angle");
    Ok(TrainingOutcome {
        selected: GridIndex { s: nearest_grid_index(theta, act.angle_bins()), v: None },
        estimate: far_field_estimate(theta, cfg),
        pilots_used: sweep.trace.len(),
        phase_trace: sweep.trace,
        beam: beam.clone(),
    })
}

/// Array-division multi-beam training with `M̃` sub-arrays.
///
/// The `N′ = N − 1` angle bins `θ_b = −1 + (2b+1)/N′` are swept with
/// `N′/M̃` codewords whose arms sit at bins `j, j + N′/M̃, …`. A second
/// sweep groups `M̃` adjacent bins per codeword and decides which of the
/// `M̃` ambiguous arms of the first-round winner carries the user.
///
/// Supports `M̃ ∈ {1, 4}`; `M̃ = 1` is a plain far-field sweep.
pub fn run_subarray_multibeam<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    n_subarrays: usize,
    act: &SparseActivation,
    cfg: &ArrayConfig,
    model: &MeasurementModel,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    if n_subarrays != 1 && n_subarrays != 4 {
        return Err(Error::Infeasible(format!(
            "array-division training supports 1 or 4 sub-arrays, got {n_subarrays}"
        )));
    }
    let bins = subarray_grid_size(cfg);
    if !bins.is_multiple_of(n_subarrays * n_subarrays) {
        return Err(Error::Infeasible(format!("{bins} angle bins do not split into {n_subarrays}² groups")));
    }
    let theta = |b: usize| -1.0 + (2 * b + 1) as f64 / bins as f64;
    let stride = bins / n_subarrays;
    let mut sweep = Sweep::new(channel, model, rng);

    let mut first = (0, f64::NEG_INFINITY);
    for j in 0..stride {
        let angles: Vec<f64> = (0..n_subarrays).map(|i| theta(j + stride * i)).collect();
        let w = build_array_division_codeword(&angles, n_subarrays, cfg)?;
        let p = sweep.probe(CodewordId::ArrayDivision { round: 1, index: j }, &w);
        if p > first.1 {
            first = (j, p);
        }
    }
    let mut bin = first.0;
    if n_subarrays > 1 {
        let powers: Vec<f64> = (0..stride)
            .map(|c| {
                let angles: Vec<f64> = (0..n_subarrays).map(|i| theta(c * n_subarrays + i)).collect();
                let w = build_array_division_codeword(&angles, n_subarrays, cfg).expect("tiles");
                sweep.probe(CodewordId::ArrayDivision { round: 2, index: c }, &w)
            })
            .collect();
        let mut best = f64::NEG_INFINITY;
        for i in 0..n_subarrays {
            let b = first.0 + stride * i;
            let p = powers[b / n_subarrays];
            if p > best {
                best = p;
                bin = b;
            }
        }
    }
    let th = theta(bin);
    Ok(TrainingOutcome {
        selected: GridIndex { s: nearest_grid_index(th, act.angle_bins()), v: None },
        estimate: far_field_estimate(th, cfg),
        pilots_used: sweep.trace.len(),
        phase_trace: sweep.trace,
        beam: Codeword::far_field(th, cfg),
    })
}

/// Least-squares channel estimate and the beam matched to it.
#[derive(Debug, Clone, PartialEq)]
pub struct LsEstimate {
    pub h_hat: Vec<Complex64>,
    pub pilots_used: usize,
    pub beam: Codeword,
}

/// Unit-modulus beam `exp(j∠h)/√N` maximising `|hᴴw|`.
fn phase_matched(h: &[Complex64]) -> Codeword {
    let n = h.len() as f64;
    let w = h.iter().map(|z| Complex64::from_polar(1.0 / n.sqrt(), z.arg())).collect();
    Codeword::custom(w, Steer::Channel).expect("unit-modulus weights")
}

/// LS estimation with `N` unitary DFT pilots `f_t[n] = exp(−j2πtn/N)/√N`:
/// `ĥ = F·yᴴ/√P`.
pub fn run_ls_estimation<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    model: &MeasurementModel,
    rng: &mut R,
) -> Result<LsEstimate> {
    let n = channel.h.len();
    if model.tx_power() <= 0.0 {
        return Err(Error::Config("LS estimation needs positive pilot power".into()));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let twiddle: Vec<Complex64> =
        (0..n).map(|k| scale * Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64)).collect();
    let amp = model.tx_power().sqrt();
    let y: Vec<Complex64> = (0..n)
        .map(|t| {
            let clean: Complex64 = channel.h.iter().enumerate().map(|(i, h)| h.conj() * twiddle[(t * i) % n]).sum();
            let z =
                if model.is_noiseless() { Complex64::new(0.0, 0.0) } else { complex_noise(model.noise_power(), rng) };
            clean * amp + z
        })
        .collect();
    let h_hat: Vec<Complex64> = (0..n)
        .map(|i| y.iter().enumerate().map(|(t, yt)| twiddle[(t * i) % n] * yt.conj()).sum::<Complex64>() / amp)
        .collect();
    let beam = phase_matched(&h_hat);
    Ok(LsEstimate { h_hat, pilots_used: n, beam })
}

/// Beam matched to the true channel phases.
pub fn perfect_csi_beam(channel: &ChannelRealization) -> Codeword {
    phase_matched(&channel.h)
}
