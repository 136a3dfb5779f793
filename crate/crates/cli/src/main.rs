use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nearfield::beamforming::Digital;
use nearfield::beampattern::{m_threshold, pattern_grid};
use nearfield::codebook::{
    build_dft_codebook, build_multi_beam_codebook, build_single_beam_codebook, Codeword, PolarCodebook, Steer,
};
use nearfield::geometry::{fresnel_distance, rayleigh_distance, ArrayConfig, PolarPoint, SparseActivation};
use nearfield::harness::{self, SimulationConfig, SweepSection, SweepVariable};
use nearfield::training::{optimize_activation, Scheme};

#[derive(Parser)]
#[command(name = "nearfield", version, about = "Near-field multi-beam training simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Beam pattern of one codeword on a (θ, r) grid, as CSV `theta,r,value`.
    Pattern(PatternArgs),
    /// Codebook inspection.
    Codebook {
        #[command(subcommand)]
        action: CodebookAction,
    },
    /// Per-trial, per-user training outcomes as CSV.
    Train(TrainArgs),
    /// Monte Carlo scenario run; one CSV row per sweep point, scheme and
    /// digital beamformer.
    Simulate(SimulateArgs),
    /// Activation interval minimising the proposed scheme's pilot count.
    OptimizeM(OptimizeArgs),
    /// Lists the built-in scenarios, or prints one as TOML.
    Presets {
        /// Print this preset's full configuration.
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Args)]
struct ArrayArgs {
    /// Antenna count N (odd).
    #[arg(long, default_value_t = 257)]
    n: usize,
    /// Carrier frequency in Hz.
    #[arg(long, default_value_t = 30e9)]
    freq: f64,
}

impl ArrayArgs {
    fn config(&self) -> Result<ArrayConfig> {
        Ok(ArrayConfig::new(self.n, self.freq)?)
    }
}

#[derive(Args)]
struct PatternArgs {
    #[command(flatten)]
    array: ArrayArgs,
    /// Activation interval; 1 gives a dense codeword.
    #[arg(long, default_value_t = 16)]
    m: usize,
    /// Steering angle θ0.
    #[arg(long)]
    theta: f64,
    /// Steering range r0 in metres.
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 401)]
    theta_points: usize,
    /// Lower end of the range axis; defaults to the Fresnel distance.
    #[arg(long)]
    r_min: Option<f64>,
    #[arg(long, default_value_t = 30.0)]
    r_max: f64,
    #[arg(long, default_value_t = 281)]
    r_points: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CodebookAction {
    /// Lists codewords as CSV `kind,s,v,theta,r,support`.
    Dump(DumpArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BookArg {
    Single,
    Multi,
    Dft,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    array: ArrayArgs,
    #[arg(long, default_value_t = 16)]
    m: usize,
    #[arg(long, default_value_t = 4)]
    v: usize,
    #[arg(long, value_enum, default_value_t = BookArg::Multi)]
    kind: BookArg,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Scenario selection and flag overrides shared by `train` and `simulate`.
#[derive(Args)]
struct ScenarioArgs {
    /// TOML configuration file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario name (see `presets`).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    freq: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    v: Option<usize>,
    /// Number of users K.
    #[arg(long)]
    k: Option<usize>,
    /// Fix the reference SNR in dB.
    #[arg(long, conflicts_with = "tx_dbm")]
    snr_db: Option<f64>,
    /// Fix the transmit power in dBm.
    #[arg(long)]
    tx_dbm: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Training schemes, comma separated.
    #[arg(long = "scheme", value_delimiter = ',')]
    schemes: Vec<Scheme>,
    /// Digital beamformers, comma separated.
    #[arg(long, value_delimiter = ',')]
    digital: Vec<Digital>,
    /// Noise-free pilots.
    #[arg(long)]
    noiseless: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<SimulationConfig> {
        let mut c = match (&self.config, &self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                // validated after the flag overrides below
                SimulationConfig::parse_toml(&text).with_context(|| format!("in {}", path.display()))?
            }
            (None, Some(name)) => match harness::preset(name) {
                Some(c) => c,
                None => bail!("unknown preset `{name}`; run `nearfield presets` for the list"),
            },
            (None, None) => SimulationConfig::default(),
        };
        if let Some(n) = self.n {
            c.array.n_antennas = n;
        }
        if let Some(f) = self.freq {
            c.array.carrier_hz = f;
        }
        if let Some(m) = self.m {
            c.training.interval = m;
        }
        if let Some(v) = self.v {
            c.training.n_ranges = v;
        }
        if let Some(k) = self.k {
            c.users.count = k;
        }
        if let Some(snr) = self.snr_db {
            c.power.reference_snr_db = Some(snr);
        }
        if let Some(tx) = self.tx_dbm {
            c.power.tx_dbm = tx;
            c.power.reference_snr_db = None;
        }
        if let Some(t) = self.trials {
            c.trials = t;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if !self.schemes.is_empty() {
            c.training.schemes = self.schemes.clone();
        }
        if !self.digital.is_empty() {
            c.digital = self.digital.clone();
        }
        if self.noiseless {
            c.training.noiseless = true;
        }
        // a flag that pins the swept quantity replaces the sweep
        let pinned = match c.sweep.variable {
            SweepVariable::ReferenceSnrDb | SweepVariable::TxPowerDbm => self.snr_db.or(self.tx_dbm).is_some(),
            SweepVariable::Interval => self.m.is_some(),
            SweepVariable::Users => self.k.is_some(),
            _ => false,
        };
        if pinned {
            c.sweep = SweepSection::default();
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long, default_value_t = 257)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    v: usize,
    #[arg(long, default_value_t = 8)]
    k: usize,
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn pattern(args: &PatternArgs) -> Result<()> {
    let cfg = args.array.config()?;
    let steer = PolarPoint::new(args.r, args.theta)?;
    let act = SparseActivation::new(args.m, &cfg)?;
    let w = if args.m == 1 { Codeword::dense_polar(steer, &cfg) } else { Codeword::sparse_multi(steer, &act, &cfg) };
    let r_min = args.r_min.unwrap_or_else(|| fresnel_distance(&cfg));
    if !(r_min > 0.0 && r_min < args.r_max) {
        bail!("range axis [{r_min}, {}] is empty", args.r_max);
    }
    let rows =
        pattern_grid(&w, &cfg, &linspace(-1.0, 1.0, args.theta_points), &linspace(r_min, args.r_max, args.r_points));
    let mut out = sink(args.output.as_deref())?;
    writeln!(out, "theta,r,value")?;
    for (t, r, f) in rows {
        writeln!(out, "{t},{r},{f}")?;
    }
    out.flush()?;
    Ok(())
}

fn dump_book(out: &mut dyn Write, name: &str, book: &PolarCodebook) -> Result<()> {
    for ((s, v), w) in book.indices().zip(book.codewords()) {
        let p = book.steer(s, v);
        writeln!(out, "{name},{s},{v},{},{},{}", p.spatial_angle(), p.range(), w.support().len())?;
    }
    Ok(())
}

fn codebook_dump(args: &DumpArgs) -> Result<()> {
    let cfg = args.array.config()?;
    let act = SparseActivation::new(args.m, &cfg)?;
    let mut out = sink(args.output.as_deref())?;
    writeln!(out, "kind,s,v,theta,r,support")?;
    match args.kind {
        BookArg::Single => dump_book(&mut out, "single", &build_single_beam_codebook(&act, args.v, &cfg)?)?,
        BookArg::Multi => dump_book(&mut out, "multi", &build_multi_beam_codebook(&act, args.v, &cfg)?)?,
        BookArg::Dft => {
            let z_r = rayleigh_distance(&cfg);
            for (i, w) in build_dft_codebook(&cfg, act.angle_bins()).iter().enumerate() {
                let Steer::Angle(theta) = w.steer() else { unreachable!("DFT codewords steer by angle") };
                writeln!(out, "dft,{},,{theta},{z_r},{}", i + 1, w.support().len())?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn train(args: &TrainArgs) -> Result<()> {
    let cfg = args.scenario.resolve()?;
    let recs = harness::run_training(&cfg)?;
    harness::write_csv(&recs, sink(args.scenario.output.as_deref())?)?;
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = args.scenario.resolve()?;
    let rows = harness::run_scenario(&cfg)?;
    harness::write_csv(&rows, sink(args.scenario.output.as_deref())?)?;
    Ok(())
}

fn optimize(args: &OptimizeArgs) -> Result<()> {
    let integer = optimize_activation(args.n, args.v, args.k, true)?;
    let m_th = m_threshold(&ArrayConfig::new(args.n, 30e9)?);
    let unconstrained = ((args.n - 1) as f64 * args.v as f64 / args.k as f64).sqrt();
    let mut out = io::stdout().lock();
    writeln!(out, "N = {}, V = {}, K = {}", args.n, args.v, args.k)?;
    writeln!(out, "M* = {:.4} (sqrt((N-1)V/K) = {unconstrained:.4}, M_th = {m_th:.4})", integer.m_star)?;
    writeln!(out, "feasible M (divisors of N-1 up to M_th):")?;
    writeln!(out, "{:>6} {:>6} {:>10} {:>8}", "M", "Q", "F(M)", "pilots")?;
    for &(m, f) in &integer.feasible {
        writeln!(out, "{m:>6} {:>6} {f:>10.2} {:>8.0}", (args.n - 1) / m + 1, f + args.v as f64)?;
    }
    writeln!(
        out,
        "chosen M = {} (nearest feasible to M*, ties to the smaller), F = {}, pilots = {}",
        integer.m, integer.objective, integer.pilots
    )?;
    let best = integer.feasible.iter().find(|x| x.0 == integer.minimisers[0]).map(|x| x.1).unwrap_or(f64::NAN);
    if integer.minimisers.len() > 1 {
        let list: Vec<String> = integer.minimisers.iter().map(|m| m.to_string()).collect();
        writeln!(out, "tie: M in {{{}}} all give F = {best}", list.join(", "))?;
    } else {
        writeln!(out, "unique minimiser M = {} with F = {best}", integer.minimisers[0])?;
    }
    Ok(())
}

fn presets(show: Option<&str>) -> Result<()> {
    let mut out = io::stdout().lock();
    match show {
        Some(name) => match harness::preset(name) {
            Some(c) => write!(out, "{}", c.to_toml_string()?)?,
            None => bail!("unknown preset `{name}`"),
        },
        None => {
            for (name, what) in harness::PRESETS {
                writeln!(out, "{name:<24} {what}")?;
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Pattern(a) => pattern(a),
        Command::Codebook { action: CodebookAction::Dump(a) } => codebook_dump(a),
        Command::Train(a) => train(a),
        Command::Simulate(a) => simulate(a),
        Command::OptimizeM(a) => optimize(a),
        Command::Presets { show } => presets(show.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
