//! Monte Carlo orchestration over configured scenarios.
//!
//! Each trial draws its own users, channels and pilot noise from
//! sub-streams keyed by the trial index, so results do not depend on the
//! number of worker threads. Trials run in parallel and are reduced in
//! trial order.
//!
//! The random streams ignore the sweep point: every sweep point sees the
//! same placements and fading, which keeps curves smooth.

pub mod config;
pub mod presets;

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    ArraySection, ChannelSection, FrameSection, PowerSection, SimulationConfig, SweepSection, SweepVariable,
    TrainingSection, UserSection,
};
pub use presets::{preset, preset_names, PRESETS};

use crate::beamforming::{analog_matrix, channel_matrix, effective_rate, sum_rate, Digital, HybridBeamformer};
use crate::channel::{sample_channel_with, tx_power_for_reference_snr, ChannelParams, ChannelRealization};
use crate::codebook::{
    build_dft_codebook, build_multi_beam_codebook, build_single_beam_codebook, Codeword, PolarCodebook,
};
use crate::error::{Error, Result};
use crate::geometry::{fresnel_distance, ArrayConfig, PolarPoint, SparseActivation};
use crate::rng::{sub_rng, Stream};
use crate::training::{
    perfect_csi_beam, pilots, run_exhaustive, run_farfield_dft, run_ls_estimation, run_proposed_multibeam,
    run_proposed_multipath, run_subarray_multibeam, run_two_phase, GridIndex, MeasurementModel, Scheme,
};

/// One line of the results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub scheme: Scheme,
    pub sweep_var: SweepVariable,
    pub sweep_value: Option<f64>,
    pub mean_rate_bps_hz: f64,
    pub mean_eff_rate_bps_hz: f64,
    /// Share of users whose selection matches the noise-free exhaustive
    /// search; empty for schemes without a codebook selection.
    pub success_rate: Option<f64>,
    pub mean_pilots: f64,
    pub trials: usize,
    pub seed: u64,
    pub digital: Digital,
    pub n_antennas: usize,
    pub carrier_hz: f64,
    pub interval: usize,
    pub n_ranges: usize,
    pub users: usize,
    pub chi: usize,
    pub n_subarrays: usize,
    pub rician_factor_db: f64,
    pub n_nlos: usize,
    /// Fixed transmit power; empty when it follows a reference SNR.
    pub tx_power_dbm: Option<f64>,
    pub reference_snr_db: Option<f64>,
    pub noise_power_dbm: f64,
    pub absorption_db_per_m: f64,
    /// Trials in which ZF met a rank-deficient channel and MMSE was used.
    pub zf_fallbacks: usize,
}

/// Per-user outcome of one training run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainRecord {
    pub trial: u64,
    pub user: usize,
    pub scheme: Scheme,
    pub pilots: usize,
    pub selected_s: Option<usize>,
    pub selected_v: Option<usize>,
    pub est_theta: Option<f64>,
    pub est_r: Option<f64>,
    pub user_theta: f64,
    pub user_r: f64,
    pub success: Option<bool>,
}

/// Everything a trial needs at one sweep point, shared read-only.
struct Point {
    sim: SimulationConfig,
    cfg: ArrayConfig,
    act: SparseActivation,
    params: ChannelParams,
    single: PolarCodebook,
    multi: Option<PolarCodebook>,
    dft: Option<Vec<Codeword>>,
    grid: Vec<PolarPoint>,
}

impl Point {
    fn new(sim: SimulationConfig) -> Result<Self> {
        let cfg = sim.array_config()?;
        let act = SparseActivation::new(sim.training.interval, &cfg)?;
        let params = sim.channel_params()?;
        let t = &sim.training;
        let has = |s: Scheme| t.schemes.contains(&s);
        let single = build_single_beam_codebook(&act, t.n_ranges, &cfg)?;
        let multi = if has(Scheme::Proposed) { Some(build_multi_beam_codebook(&act, t.n_ranges, &cfg)?) } else { None };
        let dft = (has(Scheme::TwoPhase) || has(Scheme::Dft)).then(|| build_dft_codebook(&cfg, act.angle_bins()));

        let grid = if sim.users.on_grid {
            let ([t0, t1], [r0, r1]) = (sim.users.theta, sim.users.range_m);
            let z_f = fresnel_distance(&cfg);
            let pts: Vec<PolarPoint> = single
                .indices()
                .map(|(s, v)| single.steer(s, v))
                .filter(|p| (t0..=t1).contains(&p.spatial_angle()))
                .filter(|p| (r0..=r1).contains(&p.range()) && p.range() >= z_f)
                .collect();
            if pts.is_empty() {
                return Err(Error::Config("no codebook grid point lies inside the user placement region".into()));
            }
            pts
        } else {
            Vec::new()
        };
        // fill the codeword caches before the trials share them
        single.codewords();
        if let Some(m) = &multi {
            m.codewords();
        }
        Ok(Self { sim, cfg, act, params, single, multi, dft, grid })
    }

    fn seed(&self) -> u64 {
        self.sim.seed
    }

    fn place_users(&self, trial: u64) -> Vec<PolarPoint> {
        let mut rng = sub_rng(self.seed(), Stream::Placement, &[trial]);
        let u = &self.sim.users;
        (0..u.count)
            .map(|_| {
                if u.on_grid {
                    self.grid[rng.random_range(0..self.grid.len())]
                } else {
                    let theta = rng.random_range(u.theta[0]..=u.theta[1]);
                    let r = rng.random_range(u.range_m[0]..=u.range_m[1]);
                    PolarPoint::new(r, theta).expect("validated placement region")
                }
            })
            .collect()
    }

    /// Channel parameters of one trial, with the transmit power set from
    /// the reference SNR when one is configured.
    fn trial_params(&self, users: &[PolarPoint]) -> ChannelParams {
        let mut p = self.params;
        if let Some(snr) = self.sim.power.reference_snr_db {
            let mean_r = users.iter().map(|u| u.range()).sum::<f64>() / users.len() as f64;
            p.tx_power_dbm = tx_power_for_reference_snr(snr, mean_r, &p, &self.cfg);
        }
        p
    }

    fn model(&self, params: &ChannelParams) -> Result<MeasurementModel> {
        if self.sim.training.noiseless {
            MeasurementModel::noiseless(params.tx_power_watts())
        } else {
            MeasurementModel::new(params.tx_power_watts(), params.noise_power_watts())
        }
    }

    /// Pilots every user hears at once; per-user extras come on top.
    fn shared_pilots(&self, scheme: Scheme) -> usize {
        match scheme {
            Scheme::Proposed => self.multi.as_ref().map_or(0, |m| m.len()),
            Scheme::Exhaustive => pilots::exhaustive(&self.act, self.sim.training.n_ranges),
            Scheme::TwoPhase | Scheme::Dft => pilots::dft(&self.act),
            Scheme::Subarray => pilots::subarray(self.cfg.n_antennas(), self.sim.training.n_subarrays),
            Scheme::Ls => pilots::ls(self.cfg.n_antennas()),
            Scheme::PerfectCsi => 0,
        }
    }
}

struct Drawn {
    users: Vec<PolarPoint>,
    params: ChannelParams,
    channels: Vec<ChannelRealization>,
    oracle: Option<Vec<GridIndex>>,
}

fn draw(pt: &Point, trial: u64) -> Result<Drawn> {
    let users = pt.place_users(trial);
    let params = pt.trial_params(&users);
    let channels = users
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let mut rng = sub_rng(pt.seed(), Stream::Channel, &[trial, k as u64]);
            sample_channel_with(*u, &params, &pt.cfg, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let oracle = if pt.sim.training.schemes.iter().any(|s| s.has_selection()) {
        let clean = MeasurementModel::noiseless(params.tx_power_watts())?;
        // the noise-free sweep never touches the generator
        let mut rng = sub_rng(pt.seed(), Stream::Estimation, &[trial]);
        Some(channels.iter().map(|ch| run_exhaustive(ch, &pt.single, &clean, &mut rng).selected).collect())
    } else {
        None
    };
    Ok(Drawn { users, params, channels, oracle })
}

fn scheme_tag(scheme: Scheme) -> u64 {
    Scheme::ALL.iter().position(|&s| s == scheme).expect("listed scheme") as u64
}

struct SchemeRun {
    beams: Vec<Codeword>,
    records: Vec<TrainRecord>,
    pilots: usize,
}

fn train(pt: &Point, scheme: Scheme, trial: u64, drawn: &Drawn) -> Result<SchemeRun> {
    let model = pt.model(&drawn.params)?;
    let t = &pt.sim.training;
    let mut beams = Vec::with_capacity(drawn.channels.len());
    let mut records = Vec::with_capacity(drawn.channels.len());
    for (k, ch) in drawn.channels.iter().enumerate() {
        let mut rng = sub_rng(pt.seed(), Stream::Training, &[trial, k as u64, scheme_tag(scheme)]);
        let rng = &mut rng;
        let dft = || pt.dft.as_deref().expect("DFT book built for DFT schemes");
        let outcome = match scheme {
            Scheme::Proposed => {
                let multi = pt.multi.as_ref().expect("multi-beam book built");
                Some(match t.multipath_threshold {
                    Some(tau) => run_proposed_multipath(ch, multi, &pt.single, &model, tau, rng)?,
                    None => run_proposed_multibeam(ch, multi, &pt.single, &model, rng)?,
                })
            }
            Scheme::Exhaustive => Some(run_exhaustive(ch, &pt.single, &model, rng)),
            Scheme::TwoPhase => Some(run_two_phase(ch, dft(), &pt.single, t.chi, &model, rng)?),
            Scheme::Subarray => Some(run_subarray_multibeam(ch, t.n_subarrays, &pt.act, &pt.cfg, &model, rng)?),
            Scheme::Dft => Some(run_farfield_dft(ch, dft(), &pt.act, &pt.cfg, &model, rng)?),
            Scheme::Ls | Scheme::PerfectCsi => None,
        };
        let user = drawn.users[k];
        let mut rec = TrainRecord {
            trial,
            user: k,
            scheme,
            pilots: 0,
            selected_s: None,
            selected_v: None,
            est_theta: None,
            est_r: None,
            user_theta: user.spatial_angle(),
            user_r: user.range(),
            success: None,
        };
        let beam = match (scheme, outcome) {
            (_, Some(o)) => {
                rec.pilots = o.pilots_used;
                rec.selected_s = Some(o.selected.s);
                rec.selected_v = o.selected.v;
                rec.est_theta = Some(o.estimate.spatial_angle());
                rec.est_r = Some(o.estimate.range());
                rec.success = drawn.oracle.as_ref().map(|or| {
                    let best = or[k];
                    match o.selected.v {
                        Some(_) => o.selected == best,
                        None => o.selected.s == best.s,
                    }
                });
                o.beam
            }
            (Scheme::Ls, None) => {
                let est = run_ls_estimation(ch, &model, rng)?;
                rec.pilots = est.pilots_used;
                est.beam
            }
            _ => perfect_csi_beam(ch),
        };
        beams.push(beam);
        records.push(rec);
    }
    let shared = pt.shared_pilots(scheme);
    let pilots = shared + records.iter().map(|r| r.pilots.saturating_sub(shared)).sum::<usize>();
    Ok(SchemeRun { beams, records, pilots })
}

/// Rate of one scheme and digital beamformer in one trial.
#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    rate: f64,
    eff_rate: f64,
    hits: usize,
    pilots: usize,
    fallbacks: usize,
}

fn run_trial(pt: &Point, trial: u64) -> Result<Vec<Tally>> {
    let drawn = draw(pt, trial)?;
    let h = channel_matrix(&drawn.channels);
    let (p, noise) = (drawn.params.tx_power_watts(), drawn.params.noise_power_watts());
    let f = &pt.sim.frame;
    let mut out = Vec::new();
    for &scheme in &pt.sim.training.schemes {
        let run = train(pt, scheme, trial, &drawn)?;
        let hits = run.records.iter().filter(|r| r.success == Some(true)).count();
        let analog = analog_matrix(&run.beams);
        for &kind in &pt.sim.digital {
            let (bf, fallback) = match HybridBeamformer::design(kind, &h, analog.clone(), p, noise) {
                Err(Error::RankDeficient { user, colliding }) if kind == Digital::Zf => {
                    log::debug!(
                        "trial {trial}, {scheme}: ZF rank deficient at user {user} ({colliding:?}); using MMSE"
                    );
                    (HybridBeamformer::design(Digital::Mmse, &h, analog.clone(), p, noise)?, 1)
                }
                other => (other?, 0),
            };
            let rate = sum_rate(&h, &bf, p, noise)?;
            out.push(Tally {
                rate,
                eff_rate: effective_rate(rate, run.pilots, f.symbol_time_s, f.frame_time_s),
                hits,
                pilots: run.pilots,
                fallbacks: fallback,
            });
        }
    }
    Ok(out)
}

fn point_rows(pt: &Point, value: Option<f64>, sweep_var: SweepVariable) -> Result<Vec<ResultRow>> {
    let sim = &pt.sim;
    let trials: Vec<Vec<Tally>> =
        (0..sim.trials as u64).into_par_iter().map(|t| run_trial(pt, t)).collect::<Result<_>>()?;

    let n = sim.trials as f64;
    let mut rows = Vec::new();
    let mut col = 0;
    for &scheme in &sim.training.schemes {
        for &digital in &sim.digital {
            let mut acc = Tally::default();
            for t in &trials {
                let x = t[col];
                acc.rate += x.rate;
                acc.eff_rate += x.eff_rate;
                acc.hits += x.hits;
                acc.pilots += x.pilots;
                acc.fallbacks += x.fallbacks;
            }
            col += 1;
            rows.push(ResultRow {
                scenario: sim.name.clone(),
                scheme,
                sweep_var,
                sweep_value: value,
                mean_rate_bps_hz: acc.rate / n,
                mean_eff_rate_bps_hz: acc.eff_rate / n,
                success_rate: scheme.has_selection().then(|| acc.hits as f64 / (n * sim.users.count as f64)),
                mean_pilots: acc.pilots as f64 / n,
                trials: sim.trials,
                seed: sim.seed,
                digital,
                n_antennas: sim.array.n_antennas,
                carrier_hz: sim.array.carrier_hz,
                interval: sim.training.interval,
                n_ranges: sim.training.n_ranges,
                users: sim.users.count,
                chi: sim.training.chi,
                n_subarrays: sim.training.n_subarrays,
                rician_factor_db: pt.params.rician_factor_db,
                n_nlos: pt.params.n_nlos,
                tx_power_dbm: sim.power.reference_snr_db.is_none().then_some(sim.power.tx_dbm),
                reference_snr_db: sim.power.reference_snr_db,
                noise_power_dbm: sim.power.noise_dbm,
                absorption_db_per_m: sim.channel.absorption_db_per_m,
                zf_fallbacks: acc.fallbacks,
            });
        }
    }
    Ok(rows)
}

/// Runs every sweep point of `config` and returns one row per sweep point,
/// scheme and digital beamformer, in that nesting order.
pub fn run_scenario(config: &SimulationConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut rows = Vec::new();
    for value in config.sweep_points() {
        let pt = Point::new(config.at(value)?)?;
        log::info!("{}: {} = {value:?}, {} trials", config.name, config.sweep.variable, config.trials);
        rows.extend(point_rows(&pt, value, config.sweep.variable)?);
    }
    Ok(rows)
}

/// Per-user training records of every trial at the first sweep point.
pub fn run_training(config: &SimulationConfig) -> Result<Vec<TrainRecord>> {
    config.validate()?;
    let value = config.sweep_points()[0];
    let pt = Point::new(config.at(value)?)?;
    let per_trial: Vec<Vec<TrainRecord>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            let drawn = draw(&pt, t)?;
            let mut recs = Vec::new();
            for &scheme in &pt.sim.training.schemes {
                recs.extend(train(&pt, scheme, t, &drawn)?.records);
            }
            Ok(recs)
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

/// Writes serialisable rows as CSV with a header line.
pub fn write_csv<W: Write, T: Serialize>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Output(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Output(e.to_string()))
}
