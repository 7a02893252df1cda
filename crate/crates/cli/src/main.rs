mod args;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fel_core::codec::{ConcatConfig, RateCompatible};
use fel_core::exponent::curve::{self, Curve, CurveKind, Units};
use fel_core::exponent::{Engine, OptimizerGrid, PxMode, SaddleConfig};
use fel_core::outer::OuterCodeSpec;
use fel_core::sim::{self, Experiment, ExperimentManifest};
use fel_core::verify::{self, Suite, VerifyOptions};
use fel_core::{Channel, Error, InputDistribution};

use output::Resolved;

/// Exit status: usage error.
const EXIT_USAGE: u8 = 1;
/// Exit status: the configuration cannot be run (rate at or above capacity).
const EXIT_INFEASIBLE: u8 = 2;
/// Exit status: a verification suite failed.
const EXIT_VERIFY: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(m: impl fmt::Display) -> Self {
        CliError { code: EXIT_USAGE, message: m.to_string() }
    }

    pub fn infeasible(m: impl fmt::Display) -> Self {
        CliError { code: EXIT_INFEASIBLE, message: m.to_string() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { code: EXIT_USAGE, message: format!("{}: {e}", path.display()) }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::RateNotAchievable { .. } | Error::Infeasible(_) | Error::OutsideClosedForm(_) => EXIT_INFEASIBLE,
        Error::AtLength { source, .. } => exit_code(source),
        _ => EXIT_USAGE,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError { code: exit_code(&e), message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "fel", version, about = "Fountain error exponents and concatenated fountain code experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent curves as CSV, one file per curve.
    Exponents(ExponentsArgs),
    /// Monte Carlo error-probability sweep.
    Simulate(SimulateArgs),
    /// Consistency suites for the exponent engine and the decoders.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PxModeArg {
    Auto,
    Uniform,
    Search,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    Nats,
    Bits,
}

#[derive(Args)]
struct GridArgs {
    /// Grid points over rho.
    #[arg(long, default_value_t = 128)]
    rho_steps: usize,
    /// Grid points over the outer rate.
    #[arg(long, default_value_t = 128)]
    ro_steps: usize,
    #[arg(long, default_value_t = 1)]
    refine_rounds: usize,
    /// Target accuracy in nats.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value = "auto")]
    px_mode: PxModeArg,
    #[arg(long, default_value_t = 8)]
    px_starts: usize,
}

impl GridArgs {
    fn grid(&self) -> Result<OptimizerGrid, CliError> {
        let g = OptimizerGrid {
            rho_steps: self.rho_steps,
            ro_steps: self.ro_steps,
            refine_rounds: self.refine_rounds,
            tol: self.tol,
            px_mode: match self.px_mode {
                PxModeArg::Auto => PxMode::Auto,
                PxModeArg::Uniform => PxMode::Uniform,
                PxModeArg::Search => PxMode::Search,
            },
            px_starts: self.px_starts,
        };
        g.validate().map_err(CliError::usage)?;
        Ok(g)
    }
}

#[derive(Args)]
struct ExponentsArgs {
    /// `bsc:<p>` or a JSON channel file.
    #[arg(long, default_value = "bsc:0.1")]
    channel: String,
    /// Comma list of efr, efc, efc_tilde, ec, efc_m:<m>, efc_inf, bz_analog, efcs, efc_gamma.
    #[arg(long, default_value = "efc,ec,efc_tilde")]
    curves: String,
    /// Rate grid `lo:hi:n` or comma list, in nats or with suffix `c` for fractions of capacity.
    #[arg(long, default_value = "0.05c:0.99c:32")]
    rates: String,
    /// Normalized-rate grid for efcs and efc_gamma.
    #[arg(long, default_value = "0.02:0.99:50")]
    gammas: String,
    #[arg(long, value_enum, default_value = "nats")]
    units: UnitsArg,
    /// Midpoint-rule steps for the infinite-level integral.
    #[arg(long, default_value_t = curve::DEFAULT_QUAD_STEPS)]
    quad_steps: usize,
    /// Output directory; curves go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "bsc:0.1")]
    channel: String,
    /// Outer code length.
    #[arg(long, default_value_t = 64)]
    n_o: usize,
    /// Outer code dimension.
    #[arg(long, default_value_t = 51)]
    k_o: usize,
    /// Expected symbols per inner code at the design point (default 24 per sub-message).
    #[arg(long)]
    n_i: Option<usize>,
    #[arg(long, default_value_t = 8)]
    field_bits: u32,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Explicit comma list of received-symbol counts N.
    #[arg(long, conflicts_with = "n_factors")]
    n_values: Option<String>,
    /// Multiples of the design length to simulate.
    #[arg(long, default_value = "1,1.04,1.08,1.12,1.16,1.2,1.5")]
    n_factors: String,
    /// prefix, thin:<p_keep> or starve:<fraction>.
    #[arg(long, default_value = "prefix")]
    schedule: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `L=<parts>,known=<l>`: stack L sub-messages, give the decoder the first l.
    #[arg(long, conflicts_with = "random_fountain")]
    rate_compatible: Option<String>,
    /// Simulate a plain random fountain code with this many messages instead.
    #[arg(long)]
    random_fountain: Option<usize>,
    /// Reuse one codebook for all trials instead of redrawing it per trial.
    #[arg(long)]
    fixed_codebook: bool,
    /// Rerun a saved manifest; other experiment flags are ignored.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory for pe.csv and manifest.json; CSV goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "bsc:0.1")]
    channel: String,
    /// Suites to run (saddle, sandwich, mcollapse, limits, gmd); all by default.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    /// Outer rate for single-point saddle runs.
    #[arg(long)]
    ro: Option<f64>,
    /// Overrides every enforced tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, default_value_t = 401)]
    z0_steps: usize,
    #[arg(long, default_value_t = 199)]
    gamma_steps: usize,
    #[arg(long, default_value_t = 256)]
    s_steps: usize,
    #[arg(long, default_value_t = curve::DEFAULT_QUAD_STEPS)]
    quad_steps: usize,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("fel: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

/// Honors `FEL_THREADS` as a cap on worker threads.
fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FEL_THREADS") else { return Ok(()) };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("FEL_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))
}

fn run(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::Exponents(a) => exponents(a),
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify_cmd(a),
    }
}

#[derive(Serialize)]
struct ExponentsConfig<'a> {
    channel: &'a Channel,
    input_dist: Option<&'a InputDistribution>,
    capacity_nats: f64,
    grid: &'a OptimizerGrid,
    curves: Vec<String>,
    rates: Option<&'a [f64]>,
    gammas: Option<&'a [f64]>,
    units: &'a str,
    quad_steps: usize,
}

fn exponents(a: ExponentsArgs) -> Result<u8, CliError> {
    let (ch, px) = args::channel(&a.channel)?;
    let grid = a.grid.grid()?;
    let kinds = a
        .curves
        .split(',')
        .map(|s| s.trim().parse::<CurveKind>().map_err(CliError::usage))
        .collect::<Result<Vec<_>, _>>()?;
    if a.quad_steps < 256 {
        return Err(CliError::usage("--quad-steps must be at least 256"));
    }
    let engine = Engine::new(&ch, grid.clone())?;
    let cap = engine.capacity().get();
    let units = match a.units {
        UnitsArg::Nats => Units::Nats,
        UnitsArg::Bits => Units::Bits,
    };

    let need_rates = kinds.iter().any(|k| !k.is_gamma_curve());
    let need_gammas = kinds.iter().any(|k| k.is_gamma_curve());
    let rates = if need_rates {
        let r = args::grid(&a.rates, |s| args::rate(s, cap))?;
        if cap <= 0.0 {
            return Err(CliError::infeasible("capacity C_F = 0: the feasible rate grid is empty"));
        }
        if let Some(bad) = r.iter().find(|&&r| !(r > 0.0 && r < cap)) {
            return Err(CliError::infeasible(format!(
                "rate {bad} nats lies outside (0, C_F) with C_F = {cap:.9} nats"
            )));
        }
        Some(r)
    } else {
        None
    };
    let gamma_px = px.clone().unwrap_or_else(|| engine.capacity_px().clone());
    let gammas = if need_gammas {
        let g = args::grid(&a.gammas, args::plain)?;
        if cap <= 0.0 {
            return Err(CliError::infeasible("capacity C_F = 0: the feasible gamma grid is empty"));
        }
        if let Some(bad) = g.iter().find(|&&g| !(g > 0.0 && g <= 1.0)) {
            return Err(CliError::usage(format!("gamma {bad} outside (0, 1]")));
        }
        Some(g)
    } else {
        None
    };

    let resolved = Resolved::new(
        "exponents",
        &ExponentsConfig {
            channel: &ch,
            input_dist: px.as_ref(),
            capacity_nats: cap,
            grid: &grid,
            curves: kinds.iter().map(|k| k.to_string()).collect(),
            rates: rates.as_deref(),
            gammas: gammas.as_deref(),
            units: match units {
                Units::Nats => "nats",
                Units::Bits => "bits",
            },
            quad_steps: a.quad_steps,
        },
    );

    for kind in kinds {
        let c: Curve = if kind.is_gamma_curve() {
            engine.gamma_curve(kind, gammas.as_deref().unwrap(), &gamma_px)?
        } else {
            engine.rate_curve(kind, rates.as_deref().unwrap(), a.quad_steps)?
        };
        let mut body = resolved.header().into_bytes();
        curve::write_csv(&c, units, &mut body)?;
        match &a.out {
            Some(dir) => output::write_file(&dir.join(format!("{}.csv", kind.name())), &body)?,
            None => output::stdout(&body)?,
        }
    }
    Ok(0)
}

fn build_manifest(a: &SimulateArgs) -> Result<ExperimentManifest, CliError> {
    if let Some(path) = &a.manifest {
        return ExperimentManifest::load(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())));
    }
    let (ch, px) = args::channel(&a.channel)?;
    let schedule = args::schedule(&a.schedule)?;
    let explicit = a
        .n_values
        .as_deref()
        .map(|s| {
            s.split(',')
                .map(|v| v.trim().parse::<usize>().map_err(|_| CliError::usage(format!("bad N {v:?}"))))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    let factors = args::grid(&a.n_factors, args::plain)?;
    let scale = |base: usize| -> Vec<usize> { factors.iter().map(|f| (f * base as f64).round() as usize).collect() };

    let (experiment, n_values) = if let Some(w) = a.random_fountain {
        let cap = fel_core::channel::capacity(&ch, 1e-12)?.0.get();
        if cap <= 0.0 {
            return Err(CliError::infeasible("capacity C_F = 0"));
        }
        let n0 = ((w as f64).ln() / (0.5 * cap)).ceil() as usize;
        let n_values = explicit.unwrap_or_else(|| (0..4).map(|i| n0 << i).collect());
        (Experiment::RandomFountain { channel: ch, px, messages: w }, n_values)
    } else {
        let rc = a.rate_compatible.as_deref().map(args::rate_compatible).transpose()?;
        let parts = rc.as_ref().map_or(1, |r| r.parts);
        let n_i = a.n_i.unwrap_or(24 * parts);
        let outer = OuterCodeSpec::new(a.n_o, a.k_o, a.field_bits).map_err(CliError::usage)?;
        let mut config = ConcatConfig::new(outer, n_i, ch, a.seed);
        if let Some(px) = px {
            config.px = px;
        }
        let n_values = match explicit {
            Some(v) => v,
            None => match &rc {
                Some(spec) => scale(RateCompatible::new(&config, parts)?.decode_length(parts - spec.known.len())),
                None => scale(config.design_length()),
            },
        };
        (Experiment::Concatenated { config, rate_compatible: rc }, n_values)
    };
    let m = ExperimentManifest {
        experiment,
        schedule,
        n_values,
        trials_per_point: a.trials,
        master_seed: a.seed,
        fresh_codebook: !a.fixed_codebook,
    };
    m.validate().map_err(CliError::usage)?;
    Ok(m)
}

#[derive(Serialize)]
struct SimulateConfig<'a> {
    manifest: &'a ExperimentManifest,
}

fn simulate(a: SimulateArgs) -> Result<u8, CliError> {
    let m = build_manifest(&a)?;
    let resolved = Resolved::new("simulate", &SimulateConfig { manifest: &m });
    let est = sim::run_sweep(&m)?;
    let mut body = resolved.header().into_bytes();
    sim::write_csv(&est, &mut body).map_err(|e| CliError::io(Path::new("<buffer>"), e))?;
    match &a.out {
        Some(dir) => {
            output::write_file(&dir.join("pe.csv"), &body)?;
            output::write_file(&dir.join("manifest.json"), (m.to_json() + "\n").as_bytes())?;
        }
        None => output::stdout(&body)?,
    }
    match sim::fit_exponent(&est) {
        Ok(f) => eprintln!(
            "fit: slope {:.6e} nats/symbol, SE {:.2e}, from N = {:?}",
            f.slope, f.se, f.used
        ),
        Err(e) => eprintln!("fit: {e}"),
    }
    Ok(0)
}

#[derive(Serialize)]
struct VerifyConfig<'a> {
    channel: &'a Channel,
    grid: &'a OptimizerGrid,
    suites: Vec<&'static str>,
    ro: Option<f64>,
    tolerance: Option<f64>,
    saddle: &'a SaddleConfig,
    quad_steps: usize,
}

fn verify_cmd(a: VerifyArgs) -> Result<u8, CliError> {
    let (ch, _) = args::channel(&a.channel)?;
    let grid = a.grid.grid()?;
    let suites: Vec<Suite> = if a.suite.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.suite.iter().map(|s| s.parse().map_err(CliError::usage)).collect::<Result<_, _>>()?
    };
    let mut opts = VerifyOptions::new(ch);
    opts.grid = grid;
    opts.saddle = SaddleConfig { z0_steps: a.z0_steps, gamma_steps: a.gamma_steps, s_steps: a.s_steps, s_max: None };
    opts.tolerance = a.tolerance;
    opts.ro = a.ro;
    opts.quad_steps = a.quad_steps;
    if a.quad_steps < 256 {
        return Err(CliError::usage("--quad-steps must be at least 256"));
    }
    let resolved = Resolved::new(
        "verify",
        &VerifyConfig {
            channel: &opts.channel,
            grid: &opts.grid,
            suites: suites.iter().map(|s| s.name()).collect(),
            ro: opts.ro,
            tolerance: opts.tolerance,
            saddle: &opts.saddle,
            quad_steps: opts.quad_steps,
        },
    );
    let report = verify::run(&suites, &opts)?;
    print!("{}", report.summary());
    if let Some(path) = &a.out {
        let doc = serde_json::json!({
            "config_sha256": resolved.hash,
            "config": resolved.value(),
            "report": report,
        });
        let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
        output::write_file(path, text.as_bytes())?;
    }
    if report.passed {
        Ok(0)
    } else {
        for r in &report.suites {
            for c in r.failures() {
                eprintln!("fel: {} failed: {c}", r.suite);
            }
        }
        Ok(EXIT_VERIFY)
    }
}
