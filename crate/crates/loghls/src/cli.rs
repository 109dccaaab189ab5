//! Command-line interface.
//!
//! Every subcommand writes its tables and reports under the output directory
//! (`--out`, replaced by `LOGHLS_OUT` when that is set) and echoes the main
//! table to standard output. Exit codes: 0 on success, 2 when a checked
//! property fails, 1 for usage and runtime errors.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use loghls_core::flow::{run_flow, FlowAbort, FlowConfig, FlowKind, FlowTrace, Scheme};
use loghls_core::functionals::{dissipation, log_slope, onofri_gap, scaling_curve};
use loghls_core::greens::interaction_integral;
use loghls_core::grid::{DEFAULT_NODES, DEFAULT_RMAX, DEFAULT_STRETCH};
use loghls_core::stationary::{j_functional, solve_stationary, solve_stationary_from, DEFAULT_DAMPING};
use loghls_core::{Coupling, Density, Field, FunctionalReport, Profile, RadialGrid};

use crate::error::{HarnessError, Result};
use crate::io::{self, emit, fmt_float, Csv, Report};
use crate::oracle::{monte_carlo_interaction, translated_free_energies, CartesianPatch, TRANSLATION_SHIFTS};
use crate::parse::{self, DensitySpec};
use crate::scenarios::{self, Settings};

pub const OUT_ENV: &str = "LOGHLS_OUT";

#[derive(Debug, Parser)]
#[command(name = "loghls", version, about = "Numerical laboratory for the logarithmic HLS inequality and its flows")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Output directory for tables and reports.
    #[arg(long, global = true, default_value = "loghls-out")]
    pub out: PathBuf,
    /// Flat JSON file of flag values; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Number of radial nodes.
    #[arg(long, global = true, default_value_t = DEFAULT_NODES)]
    pub n: usize,
    /// Outer radius of the grid.
    #[arg(long, global = true, default_value_t = DEFAULT_RMAX, value_parser = number)]
    pub rmax: f64,
    /// Node clustering towards the origin.
    #[arg(long, global = true, default_value_t = DEFAULT_STRETCH, value_parser = number)]
    pub stretch: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Deficit, entropy and interaction of one density at several masses.
    Deficit(DeficitArgs),
    /// Integrate the nonlinear flow and record deficits.
    Flow(FlowArgs),
    /// Integrate the drift-diffusion-Poisson flow and record the free energy.
    Ddp(DdpArgs),
    /// Solve for the repulsive stationary state.
    Stationary(StationaryArgs),
    /// Free energy along dilations of a profile.
    Sweep(SweepArgs),
    /// Dissipation decomposition of one density.
    Dissipation(DissipationArgs),
    /// Onofri-type dual gap of a test field.
    Dual(DualArgs),
    /// Cartesian double sum, Monte-Carlo and translation oracles.
    Oracle(OracleArgs),
    /// Run the scenario registry.
    Scenarios(ScenarioArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Deficit(_) => "deficit",
            Command::Flow(_) => "flow",
            Command::Ddp(_) => "ddp",
            Command::Stationary(_) => "stationary",
            Command::Sweep(_) => "sweep",
            Command::Dissipation(_) => "dissipation",
            Command::Dual(_) => "dual",
            Command::Oracle(_) => "oracle",
            Command::Scenarios(_) => "scenarios",
        }
    }
}

fn number(s: &str) -> std::result::Result<f64, String> {
    parse::number(s).map_err(|e| e.to_string())
}

fn density(s: &str) -> std::result::Result<DensitySpec, String> {
    parse::density_spec(s).map_err(|e| e.to_string())
}

fn field(s: &str) -> std::result::Result<parse::FieldSpec, String> {
    parse::field_spec(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct DeficitArgs {
    /// Density profile, e.g. gaussian:1, mu, bump:0.5:2, file:path.
    #[arg(long, default_value = "gaussian:1", value_parser = density)]
    pub density: DensitySpec,
    /// Comma-separated α values.
    #[arg(long, default_value = "0,1,2", value_delimiter = ',', value_parser = number)]
    pub alpha: Vec<f64>,
    /// Comma-separated masses.
    #[arg(long = "M", default_value = "1", value_delimiter = ',', value_parser = number)]
    pub mass: Vec<f64>,
    /// Also report the free energy at this β.
    #[arg(long, value_parser = number)]
    pub beta: Option<f64>,
    /// Coupling sign for the free energy, +1 or -1.
    #[arg(long, default_value = "1", value_parser = number, allow_hyphen_values = true)]
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    SemiImplicit,
    Explicit,
}

#[derive(Debug, Args)]
pub struct StepArgs {
    #[arg(long, value_enum, default_value = "semi-implicit")]
    pub scheme: SchemeArg,
    #[arg(long, value_parser = number)]
    pub t_end: Option<f64>,
    #[arg(long, value_parser = number)]
    pub dt_init: Option<f64>,
    #[arg(long, value_parser = number)]
    pub dt_max: Option<f64>,
    #[arg(long, value_parser = number)]
    pub cfl_safety: Option<f64>,
    /// Mobility floor relative to the initial peak.
    #[arg(long, value_parser = number)]
    pub floor: Option<f64>,
    #[arg(long)]
    pub record_every: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub picard_sweeps: Option<usize>,
    #[arg(long, value_parser = number)]
    pub max_relative_change: Option<f64>,
}

impl StepArgs {
    pub fn config(&self) -> FlowConfig {
        let d = FlowConfig::default();
        FlowConfig {
            scheme: match self.scheme {
                SchemeArg::SemiImplicit => Scheme::SemiImplicit,
                SchemeArg::Explicit => Scheme::Explicit,
            },
            t_end: self.t_end.unwrap_or(d.t_end),
            dt_init: self.dt_init.unwrap_or(d.dt_init),
            dt_max: self.dt_max.unwrap_or(d.dt_max),
            cfl_safety: self.cfl_safety.unwrap_or(d.cfl_safety),
            floor: self.floor.unwrap_or(d.floor),
            record_every: self.record_every.unwrap_or(d.record_every),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            picard_sweeps: self.picard_sweeps.unwrap_or(d.picard_sweeps),
            max_relative_change: self.max_relative_change.unwrap_or(d.max_relative_change),
            supercritical: false,
        }
    }
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long, default_value = "gaussian:0.5", value_parser = density)]
    pub density: DensitySpec,
    #[arg(long = "M", default_value = "1", value_parser = number)]
    pub mass: f64,
    #[arg(long, default_value = "0,1,2", value_delimiter = ',', value_parser = number)]
    pub alpha: Vec<f64>,
    #[command(flatten)]
    pub step: StepArgs,
}

#[derive(Debug, Args)]
pub struct DdpArgs {
    #[arg(long, default_value = "gaussian:1", value_parser = density)]
    pub density: DensitySpec,
    #[arg(long = "M", default_value = "1", value_parser = number)]
    pub mass: f64,
    #[arg(long, default_value = "1+1/(8pi)", value_parser = number)]
    pub beta: f64,
    #[arg(long, default_value = "1", value_parser = number, allow_hyphen_values = true)]
    pub eps: f64,
    /// Allow attractive runs at or above the critical mass.
    #[arg(long)]
    pub supercritical: bool,
    #[command(flatten)]
    pub step: StepArgs,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[arg(long = "M", default_value = "1", value_parser = number)]
    pub mass: f64,
    #[arg(long, default_value = "1+1/(8pi)", value_parser = number)]
    pub beta: f64,
    #[arg(long, default_value_t = DEFAULT_DAMPING, value_parser = number)]
    pub damping: f64,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
    /// Starting density (rescaled to mass M); the reference profile by default.
    #[arg(long, value_parser = density)]
    pub start: Option<DensitySpec>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "mu", value_parser = density)]
    pub density: DensitySpec,
    #[arg(long = "M", default_value = "16pi", value_parser = number)]
    pub mass: f64,
    #[arg(long, default_value = "0", value_parser = number, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value = "-1", value_parser = number, allow_hyphen_values = true)]
    pub eps: f64,
    /// Explicit dilation factors.
    #[arg(long, value_delimiter = ',', value_parser = number, conflicts_with = "lambda_geom")]
    pub lambda: Option<Vec<f64>>,
    /// Geometric range start:end[:factor].
    #[arg(long, default_value = "1:2^-8")]
    pub lambda_geom: String,
}

#[derive(Debug, Args)]
pub struct DissipationArgs {
    #[arg(long, default_value = "gaussian:1", value_parser = density)]
    pub density: DensitySpec,
    #[arg(long = "M", default_value = "1", value_parser = number)]
    pub mass: f64,
    #[arg(long, default_value = "0,1,2", value_delimiter = ',', value_parser = number)]
    pub alpha: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct DualArgs {
    /// zero, const:c, gauss:a:w or logdecay:t.
    #[arg(long, default_value = "gauss:1:1", value_parser = field)]
    pub field: parse::FieldSpec,
    #[arg(long, default_value = "0,0.5,0.9", value_delimiter = ',', value_parser = number)]
    pub alpha: Vec<f64>,
    #[arg(long = "M", default_value = "1", value_parser = number)]
    pub mass: f64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// A profile with a closed form.
    #[arg(long, default_value = "mu", value_parser = density)]
    pub density: DensitySpec,
    #[arg(long = "M", default_value = "1", value_parser = number)]
    pub mass: f64,
    /// Cells per side of the Cartesian patch (at most 128).
    #[arg(long, default_value_t = 64)]
    pub patch: usize,
    #[arg(long, default_value = "20", value_parser = number)]
    pub half_width: f64,
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Fail (exit 2) when the double sum and the radial value differ by more.
    #[arg(long, value_parser = number)]
    pub tolerance: Option<f64>,
    /// Also tabulate the free energy of a translated unit Gaussian at this β.
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub translate_beta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Run every registered scenario.
    #[arg(long, conflicts_with = "name")]
    pub all: bool,
    /// List scenarios and exit.
    #[arg(long)]
    pub list: bool,
    /// Comma-separated scenario names.
    #[arg(long, value_delimiter = ',')]
    pub name: Vec<String>,
    /// Scenarios run at the same time.
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// Parses `argv` (program name first), applies the config file and runs.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse_with_config(&argv) {
        Ok(cli) => cli,
        Err(Failure::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
        Err(Failure::Harness(e)) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(&cli, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

enum Failure {
    Clap(clap::Error),
    Harness(HarnessError),
}

fn parse_with_config(argv: &[OsString]) -> std::result::Result<Cli, Failure> {
    let command = Cli::command();
    let matches = command.clone().try_get_matches_from(argv).map_err(Failure::Clap)?;
    let Some(path) = matches.get_one::<PathBuf>("config").cloned() else {
        return Cli::from_arg_matches(&matches).map_err(Failure::Clap);
    };
    let sub = matches.subcommand_name().expect("subcommand is required").to_string();
    let cfg = crate::config::read(&path).map_err(Failure::Harness)?;
    let extra = crate::config::extra_args(&path, &cfg, &command, &matches, &sub).map_err(Failure::Harness)?;
    let mut full = argv.to_vec();
    full.extend(extra.into_iter().map(OsString::from));
    let matches = command.try_get_matches_from(full).map_err(Failure::Clap)?;
    Cli::from_arg_matches(&matches).map_err(Failure::Clap)
}

/// Output directory after applying the environment override.
pub fn output_dir(cli: &Cli) -> PathBuf {
    match std::env::var_os(OUT_ENV) {
        Some(v) if !v.is_empty() => PathBuf::from(v),
        _ => cli.out.clone(),
    }
}

impl Cli {
    pub fn settings(&self) -> Settings {
        Settings { nodes: self.n, r_max: self.rmax, stretch: self.stretch }
    }

    pub fn grid(&self) -> Result<Arc<RadialGrid>> {
        Ok(Arc::new(RadialGrid::build(self.n, self.rmax, self.stretch)?))
    }
}

fn load(spec: &DensitySpec, grid: &Arc<RadialGrid>, mass: f64) -> Result<Density> {
    match spec {
        DensitySpec::Profile(p) => Ok(p.density(grid, mass)?),
        DensitySpec::File(path) => Ok(io::read_density(path)?.with_mass(mass)?),
    }
}

fn closed_form(spec: &DensitySpec) -> Result<Profile> {
    match spec {
        DensitySpec::Profile(p) if p.unit_value(0.0).is_some() => Ok(p.clone()),
        _ => Err(HarnessError::Usage("this command needs a profile with a closed form".into())),
    }
}

pub fn execute(cli: &Cli, stdout: &mut dyn std::io::Write) -> Result<()> {
    let out = output_dir(cli);
    let echo = |stdout: &mut dyn std::io::Write, text: &str| -> Result<()> {
        stdout.write_all(text.as_bytes()).map_err(|e| HarnessError::io("<stdout>", e))
    };
    match &cli.command {
        Command::Deficit(a) => {
            let grid = cli.grid()?;
            let free = a.beta.map(|b| Ok::<_, HarnessError>((b, Coupling::from_epsilon(a.eps)?))).transpose()?;
            let reports = a
                .mass
                .iter()
                .map(|&m| Ok(FunctionalReport::evaluate(&load(&a.density, &grid, m)?, &a.alpha, free)?))
                .collect::<Result<Vec<_>>>()?;
            let csv = io::functional_csv(&reports, &a.alpha).to_string();
            emit(&out, "deficit.csv", &csv)?;
            echo(stdout, &csv)
        }
        Command::Flow(a) => {
            let grid = cli.grid()?;
            let f0 = load(&a.density, &grid, a.mass)?;
            let kind = FlowKind::Proof { alphas: a.alpha.clone() };
            flow_outputs(&out, "flow", &kind, run_flow(&f0, &kind, &a.step.config()), stdout)
        }
        Command::Ddp(a) => {
            let grid = cli.grid()?;
            let f0 = load(&a.density, &grid, a.mass)?;
            let kind = FlowKind::Ddp { beta: a.beta, coupling: Coupling::from_epsilon(a.eps)? };
            let config = FlowConfig { supercritical: a.supercritical, ..a.step.config() };
            flow_outputs(&out, "ddp", &kind, run_flow(&f0, &kind, &config), stdout)
        }
        Command::Stationary(a) => {
            let grid = cli.grid()?;
            let result = match &a.start {
                None => solve_stationary(&grid, a.mass, a.beta, a.damping, a.max_iter)?,
                Some(spec) => solve_stationary_from(&load(spec, &grid, a.mass)?, a.beta, a.damping, a.max_iter)?,
            };
            let j = result.reduced_potential().and_then(|psi| j_functional(&psi, result.mass(), result.gamma())).ok();
            let mut report = io::stationary_report(&result, j);
            report.num("inner_reduced_residual", scenarios::inner_residual(&result)?);
            let text = report.to_string();
            emit(&out, "stationary_density.txt", &io::density_to_string(&result.f_stat))?;
            emit(&out, "stationary_report.txt", &text)?;
            echo(stdout, &text)?;
            if !result.converged {
                return Err(HarnessError::Assertion(format!("no convergence in {} iterations", result.iterations)));
            }
            Ok(())
        }
        Command::Sweep(a) => {
            let grid = cli.grid()?;
            let profile = match &a.density {
                DensitySpec::Profile(p) => p.clone(),
                DensitySpec::File(_) => return Err(HarnessError::Usage("sweep needs a named profile".into())),
            };
            let lambdas = match &a.lambda {
                Some(l) => l.clone(),
                None => parse::geometric(&a.lambda_geom)?,
            };
            if lambdas.len() < 2 {
                return Err(HarnessError::Usage("a sweep needs at least two dilations".into()));
            }
            let coupling = Coupling::from_epsilon(a.eps)?;
            let curve = scaling_curve(&profile, a.mass, &grid, a.beta, coupling, &lambdas)?;
            let mut csv = Csv::new(["lambda", "log_lambda", "free_energy"]);
            for (l, f) in &curve {
                csv.push([*l, l.ln(), *f]);
            }
            let mut report = Report::new();
            report
                .num("M", a.mass)
                .num("beta", a.beta)
                .num("eps", a.eps)
                .num("slope", log_slope(&curve))
                .num("entropy_interaction_slope", -2.0 * a.mass - a.eps * a.mass * a.mass / (4.0 * PI));
            let csv = csv.to_string();
            emit(&out, "sweep.csv", &csv)?;
            emit(&out, "sweep_report.txt", &report.to_string())?;
            echo(stdout, &csv)?;
            echo(stdout, &report.to_string())
        }
        Command::Dissipation(a) => {
            let grid = cli.grid()?;
            let f = load(&a.density, &grid, a.mass)?;
            let mut csv = Csv::new(["alpha", "gn_part", "phi_part", "convexity", "dFdt"]);
            for &alpha in &a.alpha {
                let d = dissipation(&f, alpha)?;
                csv.push([alpha, d.gn_part, d.phi_part, d.convexity, d.total()]);
            }
            let csv = csv.to_string();
            emit(&out, "dissipation.csv", &csv)?;
            echo(stdout, &csv)
        }
        Command::Dual(a) => {
            let grid = cli.grid()?;
            let g = Field::from_fn(&grid, |r| a.field.value(r), None)?;
            let mut csv = Csv::new(["alpha", "gap"]);
            for &alpha in &a.alpha {
                csv.push([alpha, onofri_gap(&g, alpha, a.mass)?]);
            }
            let csv = csv.to_string();
            emit(&out, "dual.csv", &csv)?;
            echo(stdout, &csv)
        }
        Command::Oracle(a) => oracle(cli, a, &out, stdout),
        Command::Scenarios(a) => run_scenarios(cli, a, &out, stdout),
    }
}

fn flow_outputs(
    out: &Path,
    stem: &str,
    kind: &FlowKind,
    result: std::result::Result<FlowTrace, FlowAbort>,
    stdout: &mut dyn std::io::Write,
) -> Result<()> {
    let (trace, error) = match result {
        Ok(trace) => (trace, None),
        Err(abort) => (abort.trace, Some(abort.error)),
    };
    let csv = io::flow_csv(&trace, kind).to_string();
    emit(out, &format!("{stem}.csv"), &csv)?;
    if let Some(f) = &trace.final_state {
        emit(out, &format!("{stem}_final.txt"), &io::density_to_string(f))?;
    }
    let mut report = Report::new();
    report
        .num("t_final", trace.times.last().copied().unwrap_or(0.0))
        .text("records", trace.times.len())
        .text("accepted_steps", trace.accepted_steps)
        .text("rejected_steps", trace.rejected_steps)
        .num("clipped_mass", trace.clipped_mass);
    if let Some(e) = &error {
        report.text("stopped", e);
    }
    let text = report.to_string();
    emit(out, &format!("{stem}_report.txt"), &text)?;
    stdout.write_all(text.as_bytes()).map_err(|e| HarnessError::io("<stdout>", e))?;
    match error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn oracle(cli: &Cli, a: &OracleArgs, out: &Path, stdout: &mut dyn std::io::Write) -> Result<()> {
    let profile = closed_form(&a.density)?;
    let grid = cli.grid()?;
    let f = profile.density(&grid, a.mass)?;
    let radial = interaction_integral(&f)?;
    let cartesian = CartesianPatch::radial(&profile, a.mass, a.patch, a.half_width, 0.0)?.interaction();
    let mc = monte_carlo_interaction(&f, a.samples, a.seed)?;
    let mut report = Report::new();
    report
        .num("radial", radial)
        .num("cartesian", cartesian)
        .num("cartesian_minus_radial", cartesian - radial)
        .num("monte_carlo", mc.estimate)
        .num("monte_carlo_std_error", mc.std_error)
        .text("samples", mc.samples)
        .text("seed", a.seed);
    if let Some(beta) = a.translate_beta {
        let t = translated_free_energies(beta, 1.0, &TRANSLATION_SHIFTS, 128, 32.0)?;
        let mut csv = Csv::new(["shift", "free_energy"]);
        for (y, fe) in t.shifts.iter().zip(&t.free_energies) {
            csv.push([*y, *fe]);
        }
        emit(out, "translated.csv", &csv.to_string())?;
        report
            .num("translate_beta", beta)
            .text("translated_strictly_decreasing", t.strictly_decreasing())
            .text("translated_strictly_increasing", t.strictly_increasing());
    }
    let text = report.to_string();
    emit(out, "oracle_report.txt", &text)?;
    stdout.write_all(text.as_bytes()).map_err(|e| HarnessError::io("<stdout>", e))?;
    if let Some(tol) = a.tolerance {
        if !((cartesian - radial).abs() <= tol) {
            return Err(HarnessError::Assertion(format!(
                "double sum {} differs from the radial value {} by more than {tol}",
                fmt_float(cartesian),
                fmt_float(radial)
            )));
        }
    }
    Ok(())
}

fn run_scenarios(cli: &Cli, a: &ScenarioArgs, out: &Path, stdout: &mut dyn std::io::Write) -> Result<()> {
    let write = |stdout: &mut dyn std::io::Write, line: String| {
        writeln!(stdout, "{line}").map_err(|e| HarnessError::io("<stdout>", e))
    };
    let registry = scenarios::registry();
    if a.list {
        for s in &registry {
            let tag = s.criterion.map(|c| format!("criterion {c}")).unwrap_or_else(|| "extra".into());
            write(stdout, format!("{:<26} {tag:<12} {}", s.name, s.title))?;
        }
        return Ok(());
    }
    let selected: Vec<_> = if a.all {
        registry
    } else if !a.name.is_empty() {
        a.name
            .iter()
            .map(|n| scenarios::find(n).ok_or_else(|| HarnessError::Usage(format!("unknown scenario {n:?}; see --list"))))
            .collect::<Result<_>>()?
    } else {
        return Err(HarnessError::Usage("pass --all, --list or --name".into()));
    };
    let jobs = a.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let results = scenarios::run_all(&selected, &cli.settings(), jobs);
    let dir = out.join("scenarios");
    let mut failed = Vec::new();
    let mut summary = String::new();
    for (s, result) in results {
        let line = match result {
            Ok(outcome) => {
                emit(&dir, &format!("{}.txt", s.name), &outcome.report().to_string())?;
                if !outcome.passed() {
                    failed.push(s.name);
                }
                outcome.line()
            }
            Err(e) => {
                failed.push(s.name);
                format!("scenario    FAIL {}: error: {e}", s.name)
            }
        };
        summary.push_str(&line);
        summary.push('\n');
        write(stdout, line)?;
    }
    emit(&dir, "summary.txt", &summary)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(HarnessError::Assertion(format!("failed scenarios: {}", failed.join(", "))))
    }
}
