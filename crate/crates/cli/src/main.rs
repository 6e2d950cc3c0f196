//! `bosonwalk`: boson-sampling and control experiments from a JSON config.
//!
//! Exit codes: 0 success, 1 usage/parse error, 2 optimizer did not reach the
//! target (best result still written), 3 budget exhausted (partial results
//! written).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use bosonwalk_core::control::{
    grape_optimize_from, infidelity_scan, initial_waveform_steps,
};
use bosonwalk_core::controllability::{
    lie_closure, sample_generators, verify_appendix_identities,
};
use bosonwalk_core::lattice::{band_truncate, ring_propagator, BandNorm};
use bosonwalk_core::linalg::haar_unitary_seeded;
use bosonwalk_core::sampling::{exact_distribution, sample};
use bosonwalk_core::{
    ClosureReport, ComplexMatrix, ControlWaveform, FockState, GradientMethod, GrapeConfig,
    IdentityReport, LatticeModel, RngSeed, ScanRow, UniformRing, UnitaryMatrix,
};

#[derive(Parser)]
#[command(name = "bosonwalk", version, about = "Boson sampling on 1D lattices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Single-walker ring propagator profile and band report.
    Fig1(Common),
    /// Exact output distribution and optional samples.
    Sample(Common),
    /// GRAPE synthesis of a target unitary.
    Grape(Common),
    /// Infidelity scan over Hilbert dimensions.
    Scan(Common),
    /// Lie-algebra closure report.
    Closure(Common),
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    config: PathBuf,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path (default: config `out`, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Csv,
    Json,
}

/// Anything that should abort the run with exit code 1.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<bosonwalk_core::Error> for UsageError {
    fn from(e: bosonwalk_core::Error) -> Self {
        UsageError(e.to_string())
    }
}

impl From<std::io::Error> for UsageError {
    fn from(e: std::io::Error) -> Self {
        UsageError(e.to_string())
    }
}

impl From<std::fmt::Error> for UsageError {
    fn from(e: std::fmt::Error) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, UsageError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.cmd {
        Cmd::Fig1(c) => cmd_fig1(&c),
        Cmd::Sample(c) => cmd_sample(&c),
        Cmd::Grape(c) => cmd_grape(&c),
        Cmd::Scan(c) => cmd_scan(&c),
        Cmd::Closure(c) => cmd_closure(&c),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing

/// 17 significant digits, enough to round-trip an f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// FNV-1a over the raw config bytes; recorded in every output.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

struct Loaded<T> {
    config: T,
    hash: u64,
    out: Option<PathBuf>,
    format: Format,
    seed: u64,
}

/// Read the config file, apply CLI overrides, and record the config hash.
fn load<T>(common: &Common, config_seed: impl Fn(&T) -> u64, config_out: impl Fn(&T) -> Option<PathBuf>) -> CliResult<Loaded<T>>
where
    T: for<'de> Deserialize<'de>,
{
    let bytes = fs::read(&common.config)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", common.config.display())))?;
    let config: T = serde_json::from_slice(&bytes)
        .map_err(|e| UsageError(format!("{}: {e}", common.config.display())))?;
    let seed = common.seed.unwrap_or_else(|| config_seed(&config));
    let out = common.out.clone().or_else(|| config_out(&config));
    Ok(Loaded {
        hash: fnv1a(&bytes),
        format: common.format.unwrap_or(Format::Csv),
        config,
        out,
        seed,
    })
}

fn stamp(hash: u64, seed: u64) -> String {
    format!("# config_hash={hash:016x} seed={seed}\n")
}

fn emit(out: &Option<PathBuf>, content: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| UsageError(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| UsageError(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

// ---------------------------------------------------------------------------
// Model configs

fn default_one() -> f64 {
    1.0
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum ModelConfig {
    /// Spin-dependent lattice; d = 2 * sites.
    Spinor {
        sites: usize,
        #[serde(default = "default_one")]
        rabi: f64,
        /// Defaults to 0.4.
        lamb_dicke: Option<f64>,
        /// Defaults to 0.1 * rabi.
        quadratic: Option<f64>,
    },
    /// Individually addressed lattice; d = sites.
    Microscope {
        sites: usize,
        #[serde(default = "default_one")]
        hopping_scale: f64,
        /// Defaults to +/- 10 * hopping_scale.
        hx_bounds: Option<(f64, f64)>,
        hz_bounds: Option<(f64, f64)>,
    },
}

impl ModelConfig {
    fn build(&self) -> CliResult<LatticeModel> {
        Ok(match *self {
            ModelConfig::Spinor {
                sites,
                rabi,
                lamb_dicke,
                quadratic,
            } => LatticeModel::Spinor(bosonwalk_core::SpinorLatticeModel::new(
                sites,
                rabi,
                lamb_dicke.unwrap_or(0.4),
                quadratic.unwrap_or(0.1 * rabi),
            )?),
            ModelConfig::Microscope {
                sites,
                hopping_scale,
                hx_bounds,
                hz_bounds,
            } => {
                let b = 10.0 * hopping_scale;
                LatticeModel::Microscope(bosonwalk_core::GasMicroscopeModel::new(
                    sites,
                    hopping_scale,
                    hx_bounds.unwrap_or((-b, b)),
                    hz_bounds.unwrap_or((-b, b)),
                )?)
            }
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OptimizerConfig {
    max_iterations: usize,
    initial_step: f64,
    backtracking: f64,
    gradient: GradientMethod,
    stall_threshold: f64,
    target_infidelity: f64,
    perturbation: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let g = GrapeConfig::default();
        Self {
            max_iterations: g.max_iterations,
            initial_step: g.initial_step,
            backtracking: g.backtracking,
            gradient: g.gradient,
            stall_threshold: g.stall_threshold,
            target_infidelity: g.target_infidelity,
            perturbation: g.perturbation,
        }
    }
}

impl OptimizerConfig {
    fn build(&self, seed: u64) -> GrapeConfig {
        GrapeConfig {
            max_iterations: self.max_iterations,
            initial_step: self.initial_step,
            backtracking: self.backtracking,
            gradient: self.gradient,
            stall_threshold: self.stall_threshold,
            target_infidelity: self.target_infidelity,
            seed: RngSeed(seed),
            perturbation: self.perturbation,
        }
    }
}

// ---------------------------------------------------------------------------
// fig1

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Fig1Config {
    sites: usize,
    hopping: f64,
    /// Evolution time; defaults to 80 / hopping.
    time: Option<f64>,
    epsilons: Vec<f64>,
    seed: u64,
    out: Option<PathBuf>,
}

impl Default for Fig1Config {
    fn default() -> Self {
        Self {
            sites: 500,
            hopping: 1.0,
            time: None,
            epsilons: vec![1e-2, 1e-3, 1e-4],
            seed: 0,
            out: None,
        }
    }
}

#[derive(Serialize)]
struct Fig1Band {
    epsilon: f64,
    band: usize,
    cyclic: bool,
}

fn cmd_fig1(common: &Common) -> CliResult<u8> {
    let loaded = load::<Fig1Config>(common, |c| c.seed, |c| c.out.clone())?;
    let cfg = &loaded.config;
    let ring = UniformRing::new(cfg.sites, cfg.hopping)?;
    let t = cfg.time.unwrap_or(80.0 / cfg.hopping);
    let u = ring_propagator(&ring, t);
    let profile = bosonwalk_core::lattice::propagator_profile(&u);
    let bands: Vec<Fig1Band> = cfg
        .epsilons
        .iter()
        .map(|&eps| {
            band_truncate(u.matrix(), eps, BandNorm::Max).map(|(_, spec)| Fig1Band {
                epsilon: spec.epsilon,
                band: spec.band,
                cyclic: spec.cyclic,
            })
        })
        .collect::<bosonwalk_core::Result<_>>()?;

    let content = match loaded.format {
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&stamp(loaded.hash, loaded.seed));
            for b in &bands {
                writeln!(
                    s,
                    "# band epsilon={} band={} cyclic={}",
                    fmt_f64(b.epsilon),
                    b.band,
                    b.cyclic
                )?;
            }
            s.push_str("offset,probability\n");
            for &(offset, p) in &profile {
                writeln!(s, "{offset},{}", fmt_f64(p))?;
            }
            s
        }
        Format::Json => to_json(&serde_json::json!({
            "config_hash": format!("{:016x}", loaded.hash),
            "seed": loaded.seed,
            "sites": cfg.sites,
            "hopping": cfg.hopping,
            "time": t,
            "profile": profile,
            "bands": bands,
        }))?,
    };
    emit(&loaded.out, &content)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// sample

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SampleModel {
    Ring {
        sites: usize,
        #[serde(default = "default_one")]
        hopping: f64,
        time: f64,
    },
    /// 50/50 beamsplitter on two modes.
    Beamsplitter {},
    /// Explicit unitary transition matrix.
    Matrix { unitary: ComplexMatrix },
}

impl SampleModel {
    fn build(&self) -> CliResult<UnitaryMatrix> {
        Ok(match self {
            SampleModel::Ring {
                sites,
                hopping,
                time,
            } => ring_propagator(&UniformRing::new(*sites, *hopping)?, *time),
            SampleModel::Beamsplitter {} => {
                let s = Complex::new(FRAC_1_SQRT_2, 0.0);
                UnitaryMatrix::try_new(ComplexMatrix::from_rows(2, 2, &[s, s, s, -s])?)?
            }
            SampleModel::Matrix { unitary } => UnitaryMatrix::try_new(unitary.clone())?,
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleConfig {
    model: SampleModel,
    /// Input occupation numbers, one per mode.
    input: Vec<usize>,
    /// Number of samples to draw; 0 emits the distribution only.
    #[serde(default)]
    samples: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    out: Option<PathBuf>,
}

fn cmd_sample(common: &Common) -> CliResult<u8> {
    let loaded = load::<SampleConfig>(common, |c| c.seed, |c| c.out.clone())?;
    let cfg = &loaded.config;
    let lambda = cfg.model.build()?;
    let n_in = FockState::new(cfg.input.clone());
    let dist = exact_distribution(&lambda, &n_in)?;
    let mut counts = vec![0usize; dist.len()];
    if cfg.samples > 0 {
        let drawn = sample(&dist, cfg.samples, RngSeed(loaded.seed));
        for state in &drawn {
            let idx = dist
                .basis()
                .iter()
                .position(|b| b == state)
                .expect("sampled state is in the basis");
            counts[idx] += 1;
        }
    }

    let content = match loaded.format {
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&stamp(loaded.hash, loaded.seed));
            s.push_str("state,probability,count\n");
            for (i, state) in dist.basis().iter().enumerate() {
                writeln!(
                    s,
                    "{},{},{}",
                    state.label(),
                    fmt_f64(dist.probabilities()[i]),
                    counts[i]
                )?;
            }
            s
        }
        Format::Json => {
            let rows: Vec<_> = dist
                .basis()
                .iter()
                .enumerate()
                .map(|(i, state)| {
                    serde_json::json!({
                        "state": state.occupations(),
                        "probability": dist.probabilities()[i],
                        "count": counts[i],
                    })
                })
                .collect();
            to_json(&serde_json::json!({
                "config_hash": format!("{:016x}", loaded.hash),
                "seed": loaded.seed,
                "modes": dist.modes(),
                "total": dist.total(),
                "samples": cfg.samples,
                "events": rows,
            }))?
        }
    };
    emit(&loaded.out, &content)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// grape

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum TargetConfig {
    /// Haar-random target drawn from its own seed.
    Haar { seed: u64 },
    /// Explicit target unitary.
    Matrix { unitary: ComplexMatrix },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrapeCommandConfig {
    model: ModelConfig,
    target: TargetConfig,
    /// Steps per channel; defaults to the family's K.
    #[serde(default)]
    steps: Option<usize>,
    #[serde(default)]
    optimizer: OptimizerConfig,
    /// Resume from this waveform instead of the default initial guess.
    #[serde(default)]
    initial_waveform: Option<ControlWaveform>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    out: Option<PathBuf>,
}

/// `GrapeResult` minus the wall time, which would break the byte-identical
/// determinism contract; the wall time goes to stderr instead.
#[derive(Serialize)]
struct GrapeOutput<'a> {
    config_hash: String,
    seed: u64,
    dim: usize,
    final_infidelity: f64,
    converged: bool,
    iterations: usize,
    fidelity_trace: &'a [f64],
    achieved: &'a UnitaryMatrix,
    waveform: &'a ControlWaveform,
}

/// Sibling path `<stem>.waveform.csv` next to the JSON output.
fn waveform_path(out: &Path) -> PathBuf {
    out.with_extension("waveform.csv")
}

fn waveform_csv(hash: u64, seed: u64, wf: &ControlWaveform) -> CliResult<String> {
    let mut s = String::new();
    s.push_str(&stamp(hash, seed));
    s.push_str("step,time");
    for name in wf.channel_names() {
        write!(s, ",{name}")?;
    }
    s.push('\n');
    for k in 0..wf.steps() {
        write!(s, "{k},{}", fmt_f64(k as f64 * wf.dt()))?;
        for c in 0..wf.num_channels() {
            write!(s, ",{}", fmt_f64(wf.get(c, k)))?;
        }
        s.push('\n');
    }
    Ok(s)
}

fn cmd_grape(common: &Common) -> CliResult<u8> {
    let loaded = load::<GrapeCommandConfig>(common, |c| c.seed, |c| c.out.clone())?;
    let cfg = &loaded.config;
    let model = cfg.model.build()?;
    let target = match &cfg.target {
        TargetConfig::Haar { seed } => haar_unitary_seeded(model.dim(), RngSeed(*seed)),
        TargetConfig::Matrix { unitary } => UnitaryMatrix::try_new(unitary.clone())?,
    };
    if target.dim() != model.dim() {
        return Err(UsageError(format!(
            "target dimension {} does not match model dimension {}",
            target.dim(),
            model.dim()
        )));
    }
    let grape_config = cfg.optimizer.build(loaded.seed);
    let guess = match &cfg.initial_waveform {
        Some(wf) => wf.clone(),
        None => initial_waveform_steps(
            &model,
            &grape_config,
            cfg.steps.unwrap_or_else(|| model.default_steps()),
        )?,
    };
    let result = grape_optimize_from(&model, &target, &grape_config, guess)?;

    eprintln!(
        "grape: {} iterations, infidelity {:.3e}, {:.2}s",
        result.iterations, result.final_infidelity, result.wall_time_s
    );
    let json = to_json(&GrapeOutput {
        config_hash: format!("{:016x}", loaded.hash),
        seed: loaded.seed,
        dim: model.dim(),
        final_infidelity: result.final_infidelity,
        converged: result.converged,
        iterations: result.iterations,
        fidelity_trace: &result.fidelity_trace,
        achieved: &result.achieved,
        waveform: &result.waveform,
    })?;
    let csv = waveform_csv(loaded.hash, loaded.seed, &result.waveform)?;
    match &loaded.out {
        Some(path) => {
            emit(&Some(path.clone()), &json)?;
            emit(&Some(waveform_path(path)), &csv)?;
        }
        None => {
            print!("{json}");
            print!("{csv}");
        }
    }
    Ok(if result.converged { 0 } else { 2 })
}

// ---------------------------------------------------------------------------
// scan

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ScanFamily {
    Spinor,
    Microscope,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanConfig {
    family: ScanFamily,
    /// Hilbert dimensions to scan (even for the spinor family).
    dims: Vec<usize>,
    #[serde(default = "default_targets")]
    targets: usize,
    #[serde(default)]
    optimizer: OptimizerConfig,
    /// Wall-clock budget; exceeded mid-scan -> partial results, exit 3.
    #[serde(default)]
    budget_seconds: Option<f64>,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    out: Option<PathBuf>,
}

fn default_targets() -> usize {
    5
}

fn scan_model(family: &ScanFamily, dim: usize) -> CliResult<LatticeModel> {
    Ok(match family {
        ScanFamily::Spinor => {
            if dim % 2 != 0 || dim < 4 {
                return Err(UsageError(format!(
                    "spinor dimension must be even and >= 4, got {dim}"
                )));
            }
            LatticeModel::Spinor(bosonwalk_core::SpinorLatticeModel::with_defaults(
                dim / 2,
                1.0,
            )?)
        }
        ScanFamily::Microscope => LatticeModel::Microscope(
            bosonwalk_core::GasMicroscopeModel::with_defaults(dim, 1.0)?,
        ),
    })
}

fn cmd_scan(common: &Common) -> CliResult<u8> {
    let loaded = load::<ScanConfig>(common, |c| c.seed, |c| c.out.clone())?;
    let cfg = &loaded.config;
    if cfg.dims.is_empty() {
        return Err(UsageError("dims must be nonempty".into()));
    }
    let grape_config = cfg.optimizer.build(loaded.seed);
    let start = Instant::now();
    let mut rows: Vec<ScanRow> = Vec::new();
    let mut partial = false;
    for &dim in &cfg.dims {
        if let Some(budget) = cfg.budget_seconds {
            if start.elapsed().as_secs_f64() > budget {
                partial = true;
                break;
            }
        }
        let model = scan_model(&cfg.family, dim)?;
        rows.extend(infidelity_scan(&[model], cfg.targets, &grape_config)?);
    }
    if partial {
        eprintln!(
            "warning: budget of {}s exhausted after {} of {} dimensions; partial results written",
            cfg.budget_seconds.unwrap_or(0.0),
            rows.len(),
            cfg.dims.len()
        );
    }

    let content = match loaded.format {
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&stamp(loaded.hash, loaded.seed));
            s.push_str(
                "dim,targets,mean_infidelity,median_infidelity,min_infidelity,max_infidelity,mean_iterations\n",
            );
            for r in &rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.dim,
                    r.targets,
                    fmt_f64(r.mean_infidelity),
                    fmt_f64(r.median_infidelity),
                    fmt_f64(r.min_infidelity),
                    fmt_f64(r.max_infidelity),
                    fmt_f64(r.mean_iterations)
                )?;
            }
            s
        }
        Format::Json => to_json(&serde_json::json!({
            "config_hash": format!("{:016x}", loaded.hash),
            "seed": loaded.seed,
            "partial": partial,
            "rows": rows,
        }))?,
    };
    emit(&loaded.out, &content)?;
    Ok(if partial { 3 } else { 0 })
}

// ---------------------------------------------------------------------------
// closure

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClosureConfig {
    model: ModelConfig,
    /// Cap on the closure dimension; defaults to d^2.
    #[serde(default)]
    max_dim: Option<usize>,
    /// Also run the commutator identity checks (spinor family only).
    #[serde(default)]
    identities: bool,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ClosureOutput {
    config_hash: String,
    seed: u64,
    dim: usize,
    generator_labels: Vec<String>,
    closure: ClosureReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    identities: Option<IdentityReport>,
}

fn cmd_closure(common: &Common) -> CliResult<u8> {
    let loaded = load::<ClosureConfig>(common, |c| c.seed, |c| c.out.clone())?;
    let cfg = &loaded.config;
    let model = cfg.model.build()?;
    let d = model.dim();
    let gens = sample_generators(&model)?;
    let closure = lie_closure(&gens, cfg.max_dim.unwrap_or(d * d))?;
    let identities = if cfg.identities {
        match &model {
            LatticeModel::Spinor(m) => Some(verify_appendix_identities(m.sites)?),
            LatticeModel::Microscope(_) => {
                return Err(UsageError(
                    "identity checks are defined for the spinor family only".into(),
                ))
            }
        }
    } else {
        None
    };

    let output = ClosureOutput {
        config_hash: format!("{:016x}", loaded.hash),
        seed: loaded.seed,
        dim: d,
        generator_labels: gens.labels().to_vec(),
        closure,
        identities,
    };
    let content = match common.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&output)?,
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&stamp(loaded.hash, loaded.seed));
            s.push_str("round,dimension\n");
            for (i, dim) in output.closure.rounds.iter().enumerate() {
                writeln!(s, "{i},{dim}")?;
            }
            writeln!(s, "# dimension={}", output.closure.dimension)?;
            writeln!(s, "# saturated={}", output.closure.saturated)?;
            writeln!(s, "# has_identity={}", output.closure.has_identity)?;
            s
        }
    };
    emit(&loaded.out, &content)?;
    Ok(0)
}
