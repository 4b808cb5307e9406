//! Command-line front end: argument parsing, JSON run configuration and the
//! five workflow commands.
//!
//! Every command computes all of its outputs in memory first; files are only
//! written once everything has succeeded.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{self, FitDataset, FitEntry, FitOptions, LandscapeOptions, RctMode};
use crate::impedance::{simulate_eis, EisPoint, EisSpectrum, FrequencyGrid};
use crate::io::{self, OutputSet, ParameterFile};
use crate::ocv::{slopes_at_dod, OcvCurve};
use crate::params::IdentifiableParams;
use crate::r0::{estimate_r0, R0Options};
use crate::timedomain::{build_model, simulate, SimulateOptions, DEFAULT_POINTS};

#[derive(Debug, Parser)]
#[command(name = "spm-eis", version, about = "Linearised single-particle model impedance toolkit")]
pub struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long, global = true)]
    pub force: bool,
    /// Seed for measurement noise.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for grid and multi-start evaluation.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesise impedance spectra, one CSV per depth of discharge.
    SimulateEis(SimulateEisArgs),
    /// Series resistance by fixed-slope regression on each spectrum.
    R0(R0Args),
    /// Estimate the two diffusion time constants from several spectra.
    Fit(FitArgs),
    /// Log-loss over a grid of time constants.
    Landscape(LandscapeArgs),
    /// Voltage response to a current profile.
    SimulateTime(SimulateTimeArgs),
}

#[derive(Debug, Args)]
pub struct SimulateEisArgs {
    /// Parameter JSON (physical, grouped or identifiable).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Two-electrode OCV table.
    #[arg(long)]
    pub ocv: Option<PathBuf>,
    /// Depths of discharge, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub dod: Vec<f64>,
    /// Highest frequency, Hz.
    #[arg(long)]
    pub f_max: Option<f64>,
    /// Lowest frequency, Hz.
    #[arg(long)]
    pub f_min: Option<f64>,
    /// Frequencies per decade.
    #[arg(long)]
    pub per_decade: Option<usize>,
    /// Extra series resistance added to every spectrum, ohm.
    #[arg(long)]
    pub r_extra: Option<f64>,
    /// Standard deviation of Gaussian noise on each component, ohm.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct R0Args {
    /// Spectrum CSVs, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eis: Vec<PathBuf>,
    /// R^2 at which point removal stops.
    #[arg(long)]
    pub r2_threshold: Option<f64>,
    /// Fewest points a regression may use.
    #[arg(long)]
    pub min_points: Option<usize>,
    /// Discard points above this frequency instead of at the arc junction.
    #[arg(long)]
    pub hf_cutoff: Option<f64>,
    /// Also write the per-iteration regression trace.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Spectrum CSVs, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eis: Vec<PathBuf>,
    /// Two-electrode OCV table.
    #[arg(long)]
    pub ocv: Option<PathBuf>,
    /// `fixed` uses `r_ct` from the configuration or the R0 regression;
    /// `co-estimate` fits one resistance per spectrum.
    #[arg(long, value_parser = parse_rct)]
    pub rct: Option<RctMode>,
    /// Fixed charge-transfer resistances, one per spectrum.
    #[arg(long, value_delimiter = ',')]
    pub r_ct: Vec<f64>,
}

fn parse_rct(s: &str) -> std::result::Result<RctMode, String> {
    match s {
        "fixed" => Ok(RctMode::Fixed),
        "co-estimate" => Ok(RctMode::CoEstimate),
        _ => Err(format!("expected `fixed` or `co-estimate`, got `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Iteration cap per start.
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// `lo:hi:n` log-spaced cathode axis, s.
    #[arg(long, value_parser = parse_axis)]
    pub tau_plus: Option<AxisSpec>,
    /// `lo:hi:n` log-spaced anode axis, s.
    #[arg(long, value_parser = parse_axis)]
    pub tau_minus: Option<AxisSpec>,
}

#[derive(Debug, Args)]
pub struct SimulateTimeArgs {
    /// Parameter JSON (physical, grouped or identifiable).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Two-electrode OCV table.
    #[arg(long)]
    pub ocv: Option<PathBuf>,
    /// Current profile CSV, A, discharge positive.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Depth of discharge of the operating point.
    #[arg(long)]
    pub dod: Option<f64>,
    /// Time step, s.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Collocation points per electrode.
    #[arg(long)]
    pub n_points: Option<usize>,
    /// Multiplier on the cathode OCV slope.
    #[arg(long)]
    pub slope_scale: Option<f64>,
    /// Series resistance, ohm; defaults to the parameter file's value.
    #[arg(long)]
    pub r0: Option<f64>,
    /// Add surface-stoichiometry columns.
    #[arg(long)]
    pub states: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

fn parse_axis(s: &str) -> std::result::Result<AxisSpec, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(format!("expected lo:hi:n, got `{s}`"));
    };
    Ok(AxisSpec {
        lo: lo.parse().map_err(|_| format!("bad lower bound `{lo}`"))?,
        hi: hi.parse().map_err(|_| format!("bad upper bound `{hi}`"))?,
        n: n.parse().map_err(|_| format!("bad count `{n}`"))?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeConfig {
    pub tau_plus: AxisSpec,
    pub tau_minus: AxisSpec,
    pub floor: f64,
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        let axis = AxisSpec { lo: 1.0, hi: 1e5, n: 50 };
        LandscapeConfig { tau_plus: axis, tau_minus: axis, floor: 1e-30 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub dod: Option<f64>,
    pub dt: f64,
    pub n_points: usize,
    pub slope_scale_plus: f64,
    pub r0: Option<f64>,
    pub states: bool,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig { dod: None, dt: 1.0, n_points: DEFAULT_POINTS, slope_scale_plus: 1.0, r0: None, states: false }
    }
}

/// Everything a command needs. Relative paths in a configuration file are
/// taken relative to that file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub parameters: Option<PathBuf>,
    pub ocv: Option<PathBuf>,
    pub eis: Vec<PathBuf>,
    pub profile: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub f_max_hz: f64,
    pub f_min_hz: f64,
    pub points_per_decade: usize,
    pub dods: Vec<f64>,
    pub r_extra: f64,
    pub noise_std: f64,
    /// Odd moving-average width applied to the OCV curves.
    pub ocv_smoothing: Option<usize>,
    pub r_ct: Vec<f64>,
    pub r0: R0Options,
    pub r0_trace: bool,
    pub fit: FitOptions,
    pub landscape: LandscapeConfig,
    pub time: TimeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            parameters: None,
            ocv: None,
            eis: Vec::new(),
            profile: None,
            out: None,
            seed: 0,
            f_max_hz: 5e3,
            f_min_hz: 2e-4,
            points_per_decade: 6,
            dods: Vec::new(),
            r_extra: 0.0,
            noise_std: 0.0,
            ocv_smoothing: None,
            r_ct: Vec::new(),
            r0: R0Options::default(),
            r0_trace: false,
            fit: FitOptions::default(),
            landscape: LandscapeConfig::default(),
            time: TimeConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.parameters.iter_mut().for_each(fix);
        cfg.ocv.iter_mut().for_each(fix);
        cfg.profile.iter_mut().for_each(fix);
        cfg.out.iter_mut().for_each(fix);
        cfg.eis.iter_mut().for_each(fix);
        Ok(cfg)
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    fn validate_dods(&self) -> Result<()> {
        if let Some(d) = self.dods.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(Error::invalid("dod", format!("must lie in [0, 1], got {d}")));
        }
        Ok(())
    }
}

fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::Configuration(format!("no {what} file given")))
}

fn load_ocv(cfg: &RunConfig) -> Result<(OcvCurve, OcvCurve)> {
    let (p, m) = io::read_ocv_csv(require(&cfg.ocv, "OCV")?)?;
    match cfg.ocv_smoothing {
        Some(w) => Ok((p.smoothed(w)?, m.smoothed(w)?)),
        None => Ok((p, m)),
    }
}

fn load_params(cfg: &RunConfig) -> Result<ParameterFile> {
    io::read_parameter_json(require(&cfg.parameters, "parameter")?)
}

pub fn cmd_simulate_eis(cfg: &RunConfig) -> Result<OutputSet> {
    if cfg.dods.is_empty() {
        return Err(Error::Usage("simulate-eis needs at least one depth of discharge (--dod)".into()));
    }
    cfg.validate_dods()?;
    if !(cfg.noise_std >= 0.0 && cfg.noise_std.is_finite()) {
        return Err(Error::invalid("noise_std", "must be finite and >= 0"));
    }
    let params = load_params(cfg)?;
    let (ocv_p, ocv_m) = load_ocv(cfg)?;
    let grid = FrequencyGrid::log_spaced_hz(cfg.f_max_hz, cfg.f_min_hz, cfg.points_per_decade)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_std.max(f64::MIN_POSITIVE)).expect("positive deviation");
    let mut out = OutputSet::default();
    for &dod in &cfg.dods {
        let slopes = slopes_at_dod(&ocv_p, &ocv_m, dod)?;
        let mut spec = simulate_eis(&params.resolve(dod)?, &slopes, &grid, cfg.r_extra)?;
        if cfg.noise_std > 0.0 {
            let pts = spec
                .points()
                .iter()
                .map(|p| {
                    let mut z = p.z;
                    z.re += noise.sample(&mut rng);
                    z.im += noise.sample(&mut rng);
                    EisPoint { omega: p.omega, z }
                })
                .collect();
            spec = EisSpectrum::new(dod, pts)?;
        }
        out.add(format!("eis_dod_{dod}.csv"), io::render_eis_csv(&spec));
    }
    Ok(out)
}

pub fn cmd_r0(cfg: &RunConfig) -> Result<(OutputSet, String)> {
    if cfg.eis.is_empty() {
        return Err(Error::Usage("r0 needs at least one impedance file (--eis)".into()));
    }
    let mut rows = Vec::new();
    let mut dods = Vec::new();
    for path in &cfg.eis {
        let spec = io::read_eis_csv(path, None)?;
        rows.push(estimate_r0(&spec, &cfg.r0)?);
        dods.push(spec.dod);
    }
    let table = io::render_r0_table(&rows, &dods);
    let mut out = OutputSet::default();
    out.add("r0.csv", table.clone());
    if cfg.r0_trace {
        out.add("r0_trace.csv", io::render_r0_trace(&rows, &dods));
    }
    Ok((out, table))
}

/// Spectra plus slopes, with fixed resistances from the configuration or,
/// failing that, from the R0 regression on each spectrum.
pub fn load_dataset(cfg: &RunConfig, mode: RctMode) -> Result<FitDataset> {
    if cfg.eis.is_empty() {
        return Err(Error::Usage("need at least one impedance file (--eis)".into()));
    }
    if cfg.ocv.is_none() {
        return Err(Error::Configuration("an OCV file is required to obtain the slopes (--ocv)".into()));
    }
    if !cfg.r_ct.is_empty() && cfg.r_ct.len() != cfg.eis.len() {
        return Err(Error::Configuration(format!(
            "{} fixed resistances given for {} spectra",
            cfg.r_ct.len(),
            cfg.eis.len()
        )));
    }
    let (ocv_p, ocv_m) = load_ocv(cfg)?;
    let entries = cfg
        .eis
        .iter()
        .enumerate()
        .map(|(k, path)| {
            let spectrum = io::read_eis_csv(path, None)?;
            let slopes = slopes_at_dod(&ocv_p, &ocv_m, spectrum.dod)?;
            let r_ct_fixed = match (mode, cfg.r_ct.get(k)) {
                (RctMode::CoEstimate, _) => None,
                (RctMode::Fixed, Some(&r)) => Some(r),
                (RctMode::Fixed, None) => Some(estimate_r0(&spectrum, &cfg.r0)?.r0),
            };
            Ok(FitEntry { spectrum, slopes, r_ct_fixed })
        })
        .collect::<Result<Vec<_>>>()?;
    FitDataset::new(entries)
}

pub fn cmd_fit(cfg: &RunConfig) -> Result<OutputSet> {
    let ds = load_dataset(cfg, cfg.fit.rct_mode)?;
    let result = estimate::fit(&ds, &cfg.fit)?;
    let mut out = OutputSet::default();
    let mut json = serde_json::to_string_pretty(&result).map_err(|e| Error::Configuration(e.to_string()))?;
    json.push('\n');
    out.add("fit.json", json);
    for (entry, r) in ds.entries().iter().zip(&result.r_ct_per_dod) {
        let p = IdentifiableParams::new(result.tau_d_plus, result.tau_d_minus, *r)?;
        let rows = estimate::residuals(entry, &p)?;
        out.add(format!("residuals_dod_{}.csv", entry.slopes.dod), io::render_residual_csv(&rows));
    }
    Ok(out)
}

pub fn cmd_landscape(cfg: &RunConfig) -> Result<OutputSet> {
    let ds = load_dataset(cfg, cfg.fit.rct_mode)?;
    let l = &cfg.landscape;
    let tp = estimate::log_axis(l.tau_plus.lo, l.tau_plus.hi, l.tau_plus.n)?;
    let tm = estimate::log_axis(l.tau_minus.lo, l.tau_minus.hi, l.tau_minus.n)?;
    let grid = estimate::landscape(&ds, &tp, &tm, &LandscapeOptions { floor: l.floor, rct_mode: cfg.fit.rct_mode })?;
    let mut out = OutputSet::default();
    out.add("landscape.csv", io::render_landscape_csv(&grid));
    Ok(out)
}

pub fn cmd_simulate_time(cfg: &RunConfig) -> Result<OutputSet> {
    let t = &cfg.time;
    let dod = t.dod.ok_or_else(|| Error::Usage("simulate-time needs a depth of discharge (--dod)".into()))?;
    if !(0.0..=1.0).contains(&dod) {
        return Err(Error::invalid("dod", format!("must lie in [0, 1], got {dod}")));
    }
    let profile = io::read_profile_csv(require(&cfg.profile, "current profile")?)?;
    let params = load_params(cfg)?;
    let (ocv_p, ocv_m) = load_ocv(cfg)?;
    let slopes = slopes_at_dod(&ocv_p, &ocv_m, dod)?;
    let (tp, tm) = params.time_constants();
    let r0 = match t.r0 {
        Some(r) => r,
        None => params.resolve(dod)?.r_ct0,
    };
    let model = build_model(tp, tm, t.n_points)?;
    let opts = SimulateOptions { dt: t.dt, slope_scale_plus: t.slope_scale_plus, ..Default::default() };
    let ts = simulate(&model, &slopes, r0, &profile, &opts)?;
    let mut out = OutputSet::default();
    out.add("time_series.csv", io::render_time_series_csv(&ts, t.states));
    Ok(out)
}

fn merge(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let set = |dst: &mut Option<PathBuf>, src: &Option<PathBuf>| {
        if src.is_some() {
            dst.clone_from(src);
        }
    };
    let data = |cfg: &mut RunConfig, d: &DatasetArgs| {
        if !d.eis.is_empty() {
            cfg.eis.clone_from(&d.eis);
        }
        set(&mut cfg.ocv, &d.ocv);
        if let Some(m) = d.rct {
            cfg.fit.rct_mode = m;
        }
        if !d.r_ct.is_empty() {
            cfg.r_ct.clone_from(&d.r_ct);
        }
    };
    match &cli.command {
        Command::SimulateEis(a) => {
            set(&mut cfg.parameters, &a.params);
            set(&mut cfg.ocv, &a.ocv);
            if !a.dod.is_empty() {
                cfg.dods.clone_from(&a.dod);
            }
            cfg.f_max_hz = a.f_max.unwrap_or(cfg.f_max_hz);
            cfg.f_min_hz = a.f_min.unwrap_or(cfg.f_min_hz);
            cfg.points_per_decade = a.per_decade.unwrap_or(cfg.points_per_decade);
            cfg.r_extra = a.r_extra.unwrap_or(cfg.r_extra);
            cfg.noise_std = a.noise.unwrap_or(cfg.noise_std);
        }
        Command::R0(a) => {
            if !a.eis.is_empty() {
                cfg.eis.clone_from(&a.eis);
            }
            cfg.r0.r2_threshold = a.r2_threshold.unwrap_or(cfg.r0.r2_threshold);
            cfg.r0.min_points = a.min_points.unwrap_or(cfg.r0.min_points);
            if a.hf_cutoff.is_some() {
                cfg.r0.hf_cutoff_hz = a.hf_cutoff;
            }
            cfg.r0_trace |= a.trace;
        }
        Command::Fit(a) => {
            data(&mut cfg, &a.data);
            cfg.fit.max_iter = a.max_iter.unwrap_or(cfg.fit.max_iter);
        }
        Command::Landscape(a) => {
            data(&mut cfg, &a.data);
            cfg.landscape.tau_plus = a.tau_plus.unwrap_or(cfg.landscape.tau_plus);
            cfg.landscape.tau_minus = a.tau_minus.unwrap_or(cfg.landscape.tau_minus);
        }
        Command::SimulateTime(a) => {
            set(&mut cfg.parameters, &a.params);
            set(&mut cfg.ocv, &a.ocv);
            set(&mut cfg.profile, &a.profile);
            let t = &mut cfg.time;
            t.dod = a.dod.or(t.dod);
            t.dt = a.dt.unwrap_or(t.dt);
            t.n_points = a.n_points.unwrap_or(t.n_points);
            t.slope_scale_plus = a.slope_scale.unwrap_or(t.slope_scale_plus);
            t.r0 = a.r0.or(t.r0);
            t.states |= a.states;
        }
    }
    Ok(cfg)
}

/// Runs a parsed command line; returns the written files and any table to
/// print.
pub fn run(cli: &Cli) -> Result<(Vec<PathBuf>, Option<String>)> {
    let cfg = merge(cli)?;
    let work = || -> Result<(OutputSet, Option<String>)> {
        Ok(match &cli.command {
            Command::SimulateEis(_) => (cmd_simulate_eis(&cfg)?, None),
            Command::R0(_) => {
                let (o, t) = cmd_r0(&cfg)?;
                (o, Some(t))
            }
            Command::Fit(_) => (cmd_fit(&cfg)?, None),
            Command::Landscape(_) => (cmd_landscape(&cfg)?, None),
            Command::SimulateTime(_) => (cmd_simulate_time(&cfg)?, None),
        })
    };
    let (outputs, table) = match cli.threads {
        Some(0) => return Err(Error::Usage("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Configuration(e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    let written = outputs.commit(&cfg.out_dir(), cli.force)?;
    Ok((written, table))
}
