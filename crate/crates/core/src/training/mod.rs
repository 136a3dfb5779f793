//! Beam training over noisy pilot measurements.
//!
//! Every scheme sweeps a sequence of codewords, records the received power
//! of each pilot and selects by maximum power. Ties go to the codeword that
//! was swept first.

mod farfield;
mod optimize;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::codebook::{BookKind, Codeword, PolarCodebook};
use crate::error::{Error, Result};
use crate::geometry::{PolarPoint, SparseActivation};

pub use farfield::{
    nearest_grid_index, perfect_csi_beam, run_farfield_dft, run_ls_estimation, run_subarray_multibeam,
    subarray_grid_size, LsEstimate,
};
pub use optimize::{optimize_activation, ActivationPlan};

/// Transmit and noise power seen by one pilot symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementModel {
    tx_power: f64,
    noise_power: f64,
    noiseless: bool,
}

impl MeasurementModel {
    pub fn new(tx_power: f64, noise_power: f64) -> Result<Self> {
        if !(tx_power >= 0.0 && noise_power >= 0.0 && tx_power.is_finite() && noise_power.is_finite()) {
            return Err(Error::Config(format!(
                "powers must be finite and non-negative (tx {tx_power} W, noise {noise_power} W)"
            )));
        }
        Ok(Self { tx_power, noise_power, noiseless: false })
    }

    /// Same transmit power, noise switched off.
    pub fn noiseless(tx_power: f64) -> Result<Self> {
        Ok(Self { noiseless: true, ..Self::new(tx_power, 0.0)? })
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }

    pub fn noise_power(&self) -> f64 {
        if self.noiseless {
            0.0
        } else {
            self.noise_power
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.noiseless || self.noise_power == 0.0
    }
}

/// Circularly-symmetric complex Gaussian sample with variance `power`.
pub(crate) fn complex_noise<R: Rng + ?Sized>(power: f64, rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * (power / 2.0).sqrt()
}

/// One pilot: `y = hᴴ·w·√P + z`.
pub fn measure<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    codeword: &Codeword,
    model: &MeasurementModel,
    rng: &mut R,
) -> Complex64 {
    let signal = channel.response_on(codeword.weights(), codeword.support()) * model.tx_power.sqrt();
    if model.is_noiseless() {
        signal
    } else {
        signal + complex_noise(model.noise_power, rng)
    }
}

/// Training schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Sparse-activation multi-beam sweep followed by a single-beam sweep
    /// over the grating-lobe candidates.
    Proposed,
    /// Full sweep of the dense polar codebook.
    Exhaustive,
    /// DFT angle sweep, then a range sweep on the best angles.
    TwoPhase,
    /// Far-field array-division multi-beam sweep.
    Subarray,
    /// Far-field DFT sweep.
    Dft,
    /// Least-squares channel estimation with orthogonal pilots.
    Ls,
    /// Analog beams matched to the true channel; no pilots.
    PerfectCsi,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Proposed,
        Scheme::Exhaustive,
        Scheme::TwoPhase,
        Scheme::Subarray,
        Scheme::Dft,
        Scheme::Ls,
        Scheme::PerfectCsi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Exhaustive => "exhaustive",
            Scheme::TwoPhase => "two-phase",
            Scheme::Subarray => "subarray",
            Scheme::Dft => "dft",
            Scheme::Ls => "ls",
            Scheme::PerfectCsi => "perfect-csi",
        }
    }

    /// Whether the scheme selects a codebook entry that can be compared to
    /// the exhaustive oracle.
    pub fn has_selection(self) -> bool {
        !matches!(self, Scheme::Ls | Scheme::PerfectCsi)
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| Error::Config(format!("unknown scheme `{s}`")))
    }
}

/// Index into the single-beam grid. Far-field schemes leave `v` empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridIndex {
    pub s: usize,
    pub v: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodewordId {
    Multi { s: usize, v: usize },
    Single { s: usize, v: usize },
    Dft { s: usize },
    ArrayDivision { round: usize, index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingOutcome {
    pub selected: GridIndex,
    pub estimate: PolarPoint,
    pub pilots_used: usize,
    /// Every pilot in transmission order with its received power.
    pub phase_trace: Vec<(CodewordId, f64)>,
    /// Analog beam for data transmission.
    pub beam: Codeword,
}

/// Pilot counts of each scheme for `K` users.
///
/// Sweeps that every user can listen to at once (the proposed phase 1, the
/// exhaustive and DFT sweeps, LS pilots) are counted once.
pub mod pilots {
    use crate::geometry::SparseActivation;

    pub fn proposed(act: &SparseActivation, n_ranges: usize, users: usize) -> usize {
        act.active_count() * n_ranges + users * act.interval()
    }

    pub fn exhaustive(act: &SparseActivation, n_ranges: usize) -> usize {
        act.angle_bins() * n_ranges
    }

    pub fn two_phase(act: &SparseActivation, n_ranges: usize, chi: usize, users: usize) -> usize {
        act.angle_bins() + chi * users * n_ranges
    }

    /// `(N′/M̃)(1 + log₂M̃/2)` with `N′ = N − 1`.
    pub fn subarray(n_antennas: usize, n_subarrays: usize) -> usize {
        let used = n_antennas - 1;
        let rounds = n_subarrays.trailing_zeros() as usize / 2;
        used / n_subarrays * (1 + rounds)
    }

    pub fn dft(act: &SparseActivation) -> usize {
        act.angle_bins()
    }

    pub fn ls(n_antennas: usize) -> usize {
        n_antennas
    }
}

struct Sweep<'a, R: Rng + ?Sized> {
    channel: &'a ChannelRealization,
    model: &'a MeasurementModel,
    rng: &'a mut R,
    trace: Vec<(CodewordId, f64)>,
}

impl<'a, R: Rng + ?Sized> Sweep<'a, R> {
    fn new(channel: &'a ChannelRealization, model: &'a MeasurementModel, rng: &'a mut R) -> Self {
        Self { channel, model, rng, trace: Vec::new() }
    }

    fn probe(&mut self, id: CodewordId, w: &Codeword) -> f64 {
        let power = measure(self.channel, w, self.model, self.rng).norm_sqr();
        self.trace.push((id, power));
        power
    }

    /// Probes every `(id, w)` and returns the first strongest.
    fn best<'w, I>(&mut self, items: I) -> Option<(CodewordId, &'w Codeword, f64)>
    where
        I: IntoIterator<Item = (CodewordId, &'w Codeword)>,
    {
        let mut best: Option<(CodewordId, &Codeword, f64)> = None;
        for (id, w) in items {
            let p = self.probe(id, w);
            if best.is_none_or(|b| p > b.2) {
                best = Some((id, w, p));
            }
        }
        best
    }
}

fn check_books(multi: &PolarCodebook, single: &PolarCodebook) -> Result<()> {
    if multi.kind() != BookKind::MultiBeam || single.kind() != BookKind::SingleBeam {
        return Err(Error::Codebook("expected a multi-beam and a single-beam codebook".into()));
    }
    if multi.activation() != single.activation() || multi.n_ranges() != single.n_ranges() {
        return Err(Error::Codebook("codebooks built with different activation or range grids".into()));
    }
    Ok(())
}

/// Single-beam candidates `s = g + mQ` inside `1..=QM`.
pub fn phase_two_candidates(g: usize, act: &SparseActivation) -> Vec<usize> {
    let q = act.active_count();
    let first = (g - 1) % q + 1;
    (first..=act.angle_bins()).step_by(q).collect()
}

/// Proposed two-phase training for one user.
///
/// Phase 1 sweeps the `Q·V` sparse multi-beam codewords; phase 2 sweeps the
/// `M` dense codewords sitting on the grating lobes of the phase-1 winner.
pub fn run_proposed_multibeam<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    multi: &PolarCodebook,
    single: &PolarCodebook,
    model: &MeasurementModel,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    run_proposed(channel, multi, single, model, None, rng)
}

/// Multi-path variant: every phase-1 codeword within `tau` of the best
/// power spawns its own phase-2 sweep.
pub fn run_proposed_multipath<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    multi: &PolarCodebook,
    single: &PolarCodebook,
    model: &MeasurementModel,
    tau: f64,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(Error::Config(format!("multi-path threshold must lie in [0, 1], got {tau}")));
    }
    run_proposed(channel, multi, single, model, Some(tau), rng)
}

fn run_proposed<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    multi: &PolarCodebook,
    single: &PolarCodebook,
    model: &MeasurementModel,
    tau: Option<f64>,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    check_books(multi, single)?;
    let act = *multi.activation();
    let mut sweep = Sweep::new(channel, model, rng);

    let words = multi.codewords();
    let phase1: Vec<(usize, usize, f64)> =
        multi.indices().zip(words).map(|((s, v), w)| (s, v, sweep.probe(CodewordId::Multi { s, v }, w))).collect();
    let best = phase1.iter().fold(&phase1[0], |a, b| if b.2 > a.2 { b } else { a });
    let winners: Vec<(usize, usize)> = match tau {
        None => vec![(best.0, best.1)],
        Some(t) => phase1.iter().filter(|x| x.2 >= t * best.2).map(|x| (x.0, x.1)).collect(),
    };
    log::trace!("phase 1 winners {winners:?}");

    let candidates = winners.iter().flat_map(|&(g, v)| phase_two_candidates(g, &act).into_iter().map(move |s| (s, v)));
    let items: Vec<(CodewordId, &Codeword)> =
        candidates.map(|(s, v)| (CodewordId::Single { s, v }, single.get(s, v).expect("candidate on grid"))).collect();
    let (id, beam, _) = sweep.best(items).expect("at least one candidate");
    let CodewordId::Single { s, v } = id else { unreachable!() };
    let pilots_used = sweep.trace.len();
    Ok(TrainingOutcome {
        selected: GridIndex { s, v: Some(v) },
        estimate: single.steer(s, v),
        pilots_used,
        phase_trace: sweep.trace,
        beam: beam.clone(),
    })
}

/// Exhaustive sweep of the dense polar codebook.
pub fn run_exhaustive<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    single: &PolarCodebook,
    model: &MeasurementModel,
    rng: &mut R,
) -> TrainingOutcome {
    let mut sweep = Sweep::new(channel, model, rng);
    let items = single.indices().zip(single.codewords()).map(|((s, v), w)| (CodewordId::Single { s, v }, w));
    let (id, beam, _) = sweep.best(items).expect("non-empty codebook");
    let CodewordId::Single { s, v } = id else { unreachable!() };
    TrainingOutcome {
        selected: GridIndex { s, v: Some(v) },
        estimate: single.steer(s, v),
        pilots_used: sweep.trace.len(),
        phase_trace: sweep.trace,
        beam: beam.clone(),
    }
}

/// DFT angle sweep, then `V` polar codewords on each of the `χ` strongest
/// angles.
///
/// The DFT book must use the single-beam angle grid (`QM` angles).
pub fn run_two_phase<R: Rng + ?Sized>(
    channel: &ChannelRealization,
    dft: &[Codeword],
    single: &PolarCodebook,
    chi: usize,
    model: &MeasurementModel,
    rng: &mut R,
) -> Result<TrainingOutcome> {
    let bins = single.activation().angle_bins();
    if dft.len() != bins {
        return Err(Error::Dimension { expected: bins, got: dft.len() });
    }
    if chi == 0 || chi > bins {
        return Err(Error::Config(format!("candidate count χ = {chi} outside 1..={bins}")));
    }
    let mut sweep = Sweep::new(channel, model, rng);
    let mut powers: Vec<(usize, f64)> =
        dft.iter().enumerate().map(|(i, w)| (i + 1, sweep.probe(CodewordId::Dft { s: i + 1 }, w))).collect();
    // stable: equal powers keep index order
    powers.sort_by(|a, b| b.1.total_cmp(&a.1));
    let items: Vec<(CodewordId, &Codeword)> = powers[..chi]
        .iter()
        .flat_map(|&(s, _)| (1..=single.n_ranges()).map(move |v| (s, v)))
        .map(|(s, v)| (CodewordId::Single { s, v }, single.get(s, v).expect("grid index")))
        .collect();
    let (id, beam, _) = sweep.best(items).expect("χ ≥ 1");
    let CodewordId::Single { s, v } = id else { unreachable!() };
    Ok(TrainingOutcome {
        selected: GridIndex { s, v: Some(v) },
        estimate: single.steer(s, v),
        pilots_used: sweep.trace.len(),
        phase_trace: sweep.trace,
        beam: beam.clone(),
    })
}
