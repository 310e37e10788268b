//! Command-line surface: closed-form moments and spectra, samplers,
//! trajectory dumps, stationary densities, verification suites, and one
//! exploratory experiment.
//!
//! Exit codes: 0 on success, 2 on usage or domain errors, 1 when a
//! verification suite runs to completion but fails. Errors leave as one
//! JSON object `{"error": ...}` on stderr. Every stochastic command
//! reports the seed actually used (`seed=N` on stderr, and embedded in
//! JSON payloads), so undocumented runs stay reproducible. `PDLAB_THREADS`
//! caps the worker pool used by the Monte Carlo suites.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::density::{two_type_density, MarginalDensity, TwoTypeParams};
use crate::diffusion::{TwoTypeDiffusion, UnlabeledConfig, UnlabeledDiffusion, UpDownChain};
use crate::error::{Error, Result};
use crate::partitions::IntegerPartition;
use crate::powersum::{dirichlet_form, parse_poly, pd_expectation, spectrum};
use crate::rng::{RngStream, DEFAULT_SEED};
use crate::sampling::{sample_ranked, sample_symmetric_dirichlet_ranked};
use crate::verify::{self, Report};
use crate::PdParams;

/// Dumps larger than this many rows are refused; thin with --record-every.
const MAX_DUMP_ROWS: usize = 1_000_000;
/// Single-trajectory step budget; raise --dt or lower --t-end past this.
const MAX_STEPS: u64 = 10_000_000;

#[derive(Parser)]
#[command(
    name = "pdlab",
    version,
    about = "Samplers, moments, spectra, diffusions, and densities for the \
             two-parameter Poisson-Dirichlet family, with verification suites",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form stationary mean of a power-sum polynomial
    Moment(MomentArgs),
    /// Energy form between power-sum polynomials
    Form(FormArgs),
    /// Exact generator spectrum up to a degree cap
    Spectrum(SpectrumArgs),
    /// Ranked weight draws from the stationary law
    Sample(SampleArgs),
    /// Closed-form densities evaluated on a grid
    #[command(subcommand)]
    Density(DensityCmd),
    /// Trajectory dumps from the diffusion and chain simulators
    #[command(subcommand)]
    Simulate(SimulateCmd),
    /// Run a verification suite and report every check
    Verify(VerifyArgs),
    /// Exploratory experiments without a pass/fail contract
    #[command(subcommand)]
    Explore(ExploreCmd),
}

/// Parameters accepting both regimes: `--alpha`/`--theta` for the
/// two-parameter family, `--theta`/`--m` for the symmetric finite model
/// with concentration `theta / m` per type.
#[derive(Args)]
struct ParamArgs {
    /// Discount parameter
    #[arg(
        long,
        allow_hyphen_values = true,
        required_unless_present = "m",
        conflicts_with = "m"
    )]
    alpha: Option<f64>,
    /// Strength parameter
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    /// Type count for the symmetric finite regime
    #[arg(long)]
    m: Option<u32>,
}

impl ParamArgs {
    fn params(&self) -> Result<PdParams> {
        match self.m {
            Some(0) => Err(Error::Domain("m must be positive".into())),
            Some(m) => PdParams::new_finite_case(self.theta / f64::from(m), m),
            None => {
                let alpha = self.alpha.expect("clap requires alpha without m");
                PdParams::new_two_param(alpha, self.theta)
            }
        }
    }
}

/// Parameters for operations implemented only in the two-parameter regime.
#[derive(Args)]
struct TwoParamArgs {
    /// Discount parameter
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    /// Strength parameter
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
}

impl TwoParamArgs {
    fn params(&self) -> Result<PdParams> {
        PdParams::new_two_param(self.alpha, self.theta)
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct MomentArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Polynomial in the power sums, e.g. "3*phi2*phi3 - phi4 + 1"
    #[arg(long)]
    poly: String,
    /// Write the payload here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FormArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Polynomial argument; once for E(u, u), twice for E(u, v)
    #[arg(long, required = true)]
    poly: Vec<String>,
    /// Write the payload here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Strength parameter
    #[arg(long, allow_hyphen_values = true)]
    theta: f64,
    /// Discount parameter; the spectrum does not depend on it
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.2)]
    alpha: f64,
    /// Largest observable degree included
    #[arg(long, default_value_t = 8)]
    max_degree: u32,
    /// Write the payload here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Number of draws
    #[arg(long, default_value_t = 100)]
    paths: usize,
    /// Ranked sticks kept per draw in the two-parameter regime (default 64)
    #[arg(long, conflicts_with = "m")]
    truncation: Option<usize>,
    /// Seed for the draw stream
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Payload format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write the payload here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DensityCmd {
    /// Joint density of the n largest ranked weights
    H(DensityHArgs),
    /// Stationary density of one tracked cell against the rest
    TwoType(DensityTwoTypeArgs),
}

#[derive(Args)]
struct DensityHArgs {
    #[command(flatten)]
    params: TwoParamArgs,
    /// Number of leading ranked coordinates
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Decreasing coordinates, comma separated, e.g. "0.5,0.3"
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
    x: Option<String>,
    /// Evaluation grid start:stop:count for the n = 1 density
    #[arg(long)]
    grid: Option<String>,
    /// Payload format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write the payload here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityTwoTypeArgs {
    #[command(flatten)]
    params: TwoParamArgs,
    /// Seed mass of the tracked cell
    #[arg(long, allow_hyphen_values = true)]
    p: f64,
    /// Evaluation grid start:stop:count
    #[arg(long, default_value = "0.01:0.99:99")]
    grid: String,
    /// Payload format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write the payload here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SimulateCmd {
    /// Ranked-atom diffusion of the whole mass partition
    Unlabeled(SimulateUnlabeledArgs),
    /// Mass of one tracked cell against the rest
    TwoType(SimulateTwoTypeArgs),
    /// Grow-then-shrink partition chain at fixed size
    Updown(SimulateUpdownArgs),
}

#[derive(Args)]
struct SimulateUnlabeledArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Simulated horizon
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Euler step
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Ranked weight columns in the dump
    #[arg(long, default_value_t = 8)]
    truncation: usize,
    /// Record every k-th step
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Seed for the noise stream
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Payload format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write the payload here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateTwoTypeArgs {
    #[command(flatten)]
    params: TwoParamArgs,
    /// Seed mass of the tracked cell; also the starting state
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.5)]
    p: f64,
    /// Simulated horizon
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Euler step
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Record every k-th step
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Seed for the noise stream
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Payload format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write the payload here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateUpdownArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Partition size held fixed by the chain
    #[arg(long, default_value_t = 20)]
    n: u32,
    /// Number of chain steps (the chain runs in discrete time)
    #[arg(long, default_value_t = 1000.0)]
    t_end: f64,
    /// Record every k-th step
    #[arg(long, default_value_t = 1)]
    record_every: usize,
    /// Seed for the move stream
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Payload format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write the payload here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum SuiteName {
    /// Partition-law total mass over sizes and parameters
    Epsf,
    /// Mean block count, enumeration vs closed form, plus its growth law
    AuxIdentity,
    /// Zero stationary means and energy-form symmetry
    Generator,
    /// Triangular action, eigenvalues, multiplicities, discount invariance
    Spectrum,
    /// Stationary moments against the ranked sampler
    MomentsMc,
    /// Ensemble power-sum means against the exact moment flow
    DiffusionOde,
    /// Two-cell stationary density: special cases, mass, laws, zero flux
    TwoTypeDensity,
    /// Detailed balance and occupation of the grow-then-shrink chain
    UpdownBalance,
    /// Largest-atom law against the marginal density
    RankedMarginal,
    /// Fitness-tilted ensembles against the weighted law
    Selection,
    /// Every suite at default sizes
    All,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run
    #[arg(value_enum)]
    suite: SuiteName,
    /// Focus on one parameter point (give --theta too)
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Focus on one parameter point (give --alpha too; alone for spectrum)
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Largest size for the exhaustive partition sums (epsf)
    #[arg(long)]
    n: Option<u32>,
    /// Largest size for the block-count identity (aux-identity)
    #[arg(long)]
    n_max: Option<u32>,
    /// Degree cap for the generator and spectrum sweeps
    #[arg(long)]
    max_degree: Option<u32>,
    /// Monte Carlo size: draws, paths, or chain steps depending on the suite
    #[arg(long)]
    paths: Option<usize>,
    /// Euler step for a focused diffusion-ode run
    #[arg(long)]
    dt: Option<f64>,
    /// Seed for the Monte Carlo suites
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExploreCmd {
    /// How close ranked prefixes come to swallowing all mass
    Hitting(ExploreHittingArgs),
}

#[derive(Args)]
struct ExploreHittingArgs {
    #[command(flatten)]
    params: TwoParamArgs,
    /// Independent trajectories
    #[arg(long, default_value_t = 200)]
    paths: usize,
    /// Simulated horizon per trajectory
    #[arg(long, default_value_t = 1.0)]
    t_end: f64,
    /// Euler step
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Sticks kept in each stationary starting draw
    #[arg(long, default_value_t = 64)]
    truncation: usize,
    /// Seed; trajectory i uses stream i of this seed
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the payload here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point behind `main`: parse, dispatch, and map every outcome to
/// an exit code instead of panicking or returning an error.
pub fn run<I: IntoIterator<Item = String>>(argv: I) -> i32 {
    if let Err(err) = configure_threads() {
        report_error(&err.to_string());
        return 2;
    }
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = err.print();
                    0
                }
                _ => {
                    report_error(&err.to_string());
                    2
                }
            };
        }
    };
    match dispatch(&cli.command) {
        Ok(code) => code,
        Err(err) => {
            report_error(&err.to_string());
            2
        }
    }
}

fn dispatch(command: &Command) -> Result<i32> {
    match command {
        Command::Moment(args) => run_moment(args).map(|()| 0),
        Command::Form(args) => run_form(args).map(|()| 0),
        Command::Spectrum(args) => run_spectrum(args).map(|()| 0),
        Command::Sample(args) => run_sample(args).map(|()| 0),
        Command::Density(DensityCmd::H(args)) => run_density_h(args).map(|()| 0),
        Command::Density(DensityCmd::TwoType(args)) => run_density_two_type(args).map(|()| 0),
        Command::Simulate(SimulateCmd::Unlabeled(args)) => {
            run_simulate_unlabeled(args).map(|()| 0)
        }
        Command::Simulate(SimulateCmd::TwoType(args)) => run_simulate_two_type(args).map(|()| 0),
        Command::Simulate(SimulateCmd::Updown(args)) => run_simulate_updown(args).map(|()| 0),
        Command::Verify(args) => run_verify(args),
        Command::Explore(ExploreCmd::Hitting(args)) => run_explore_hitting(args).map(|()| 0),
    }
}

fn configure_threads() -> Result<()> {
    match std::env::var("PDLAB_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw.trim().parse().map_err(|_| {
                Error::Parse(format!(
                    "PDLAB_THREADS must be a positive integer, got '{raw}'"
                ))
            })?;
            if n == 0 {
                return Err(Error::Parse("PDLAB_THREADS must be at least 1".into()));
            }
            // ignore failure: the global pool may already be initialized
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(())
        }
    }
}

fn report_error(message: &str) {
    let payload = serde_json::json!({ "error": message });
    eprintln!("{payload}");
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json values serialize")
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            // a closed pipe downstream ends the dump, not the process
            if let Err(err) = writeln!(stdout, "{text}") {
                if err.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(err.into());
                }
            }
        }
    }
    Ok(())
}

/// Columns plus numeric rows; renders as CSV or as a JSON object with an
/// optional embedded seed.
struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn render(&self, format: OutputFormat, seed: Option<u64>) -> String {
        match format {
            OutputFormat::Csv => {
                let mut text = self.columns.join(",");
                for row in &self.rows {
                    text.push('\n');
                    let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                    text.push_str(&cells.join(","));
                }
                text
            }
            OutputFormat::Json => {
                let mut payload = serde_json::json!({
                    "columns": self.columns,
                    "rows": self.rows,
                });
                if let Some(seed) = seed {
                    payload["seed"] = seed.into();
                }
                pretty(&payload)
            }
        }
    }
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!(
            "grid must look like start:stop:count, got '{spec}'"
        )));
    }
    let start: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad grid start '{}'", parts[0].trim())))?;
    let stop: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad grid stop '{}'", parts[1].trim())))?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad grid count '{}'", parts[2].trim())))?;
    if !start.is_finite() || !stop.is_finite() {
        return Err(Error::Parse(format!("grid endpoints must be finite in '{spec}'")));
    }
    if count == 0 || count > 100_000 {
        return Err(Error::Parse(format!(
            "grid count must lie in 1..=100000, got {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    if !(stop > start) {
        return Err(Error::Parse(format!(
            "grid stop must exceed start for count > 1, got '{spec}'"
        )));
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

fn parse_coords(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad coordinate '{}'", tok.trim())))
        })
        .collect()
}

fn run_moment(args: &MomentArgs) -> Result<()> {
    let params = args.params.params()?;
    let poly = parse_poly(&args.poly)?;
    let value = pd_expectation(&params, &poly)?;
    let payload = serde_json::json!({
        "input": args.poly,
        "value": value,
        "method": "closed-form stationary moment",
    });
    emit(&pretty(&payload), &args.out)
}

fn run_form(args: &FormArgs) -> Result<()> {
    let params = args.params.params()?;
    let (u, v, input) = match args.poly.as_slice() {
        [one] => {
            let u = parse_poly(one)?;
            (u.clone(), u, format!("E({one}, {one})"))
        }
        [first, second] => (
            parse_poly(first)?,
            parse_poly(second)?,
            format!("E({first}, {second})"),
        ),
        _ => {
            return Err(Error::Domain(
                "give --poly once for E(u, u) or twice for E(u, v)".into(),
            ))
        }
    };
    let value = dirichlet_form(&params, &u, &v)?;
    let payload = serde_json::json!({
        "input": input,
        "value": value,
        "method": "energy form assembled from the generator action",
    });
    emit(&pretty(&payload), &args.out)
}

fn run_spectrum(args: &SpectrumArgs) -> Result<()> {
    let params = PdParams::new_two_param(args.alpha, args.theta)?;
    let lines = spectrum(&params, args.max_degree)?;
    let value: Vec<serde_json::Value> = lines
        .iter()
        .enumerate()
        .map(|(idx, line)| {
            let degree = if idx == 0 { 0 } else { idx as u32 + 1 };
            serde_json::json!({
                "degree": degree,
                "eigenvalue": line.eigenvalue,
                "multiplicity": line.multiplicity,
            })
        })
        .collect();
    let payload = serde_json::json!({
        "input": format!("theta={}, max_degree={}", args.theta, args.max_degree),
        "value": value,
        "method": "eigenvalues -m(m - 1 + theta)/2 with unit-free partition multiplicities",
    });
    emit(&pretty(&payload), &args.out)
}

fn run_sample(args: &SampleArgs) -> Result<()> {
    let params = args.params.params()?;
    if args.paths == 0 {
        return Err(Error::Domain("need at least one draw".into()));
    }
    if args.paths > MAX_DUMP_ROWS {
        return Err(Error::Domain(format!(
            "dump would exceed {MAX_DUMP_ROWS} rows"
        )));
    }
    let width = match params {
        PdParams::FiniteCase { m, .. } => m as usize,
        PdParams::TwoParam { .. } => args.truncation.unwrap_or(64),
    };
    if width == 0 || width > 100_000 {
        return Err(Error::Domain("truncation must lie in 1..=100000".into()));
    }
    let mut rng = RngStream::new(args.seed, 0).rng();
    let mut rows = Vec::with_capacity(args.paths);
    for _ in 0..args.paths {
        let draw = match params {
            PdParams::FiniteCase { kappa, m } => {
                sample_symmetric_dirichlet_ranked(kappa, m, &mut rng)?
            }
            PdParams::TwoParam { .. } => sample_ranked(&params, width, &mut rng)?,
        };
        let mut row = draw.weights().to_vec();
        row.resize(width, 0.0);
        row.push(draw.residual());
        rows.push(row);
    }
    let mut columns: Vec<String> = (1..=width).map(|i| format!("w{i}")).collect();
    columns.push("residual".into());
    let table = Table { columns, rows };
    eprintln!("seed={}", args.seed);
    emit(&table.render(args.format, Some(args.seed)), &args.out)
}

fn run_density_h(args: &DensityHArgs) -> Result<()> {
    let params = args.params.params()?;
    let points: Vec<Vec<f64>> = if let Some(x) = &args.x {
        vec![parse_coords(x)?]
    } else if let Some(grid) = &args.grid {
        if args.n != 1 {
            return Err(Error::Domain(
                "--grid sweeps the n = 1 density; give --x for joint points".into(),
            ));
        }
        parse_grid(grid)?.into_iter().map(|v| vec![v]).collect()
    } else {
        return Err(Error::Domain("give --x or --grid".into()));
    };
    for point in &points {
        if point.len() != args.n {
            return Err(Error::Domain(format!(
                "expected {} coordinates, got {}",
                args.n,
                point.len()
            )));
        }
    }
    // one tail table sized for the deepest query
    let mut reach = 2.0_f64;
    for point in &points {
        let sum: f64 = point.iter().sum();
        let last = *point.last().expect("points are nonempty");
        if last > 0.0 && sum < 1.0 {
            reach = reach.max((1.0 - sum) / last + 1.5);
        }
    }
    let density = MarginalDensity::new(&params, args.n, reach.clamp(2.0, 80.0))?;
    let mut rows = Vec::with_capacity(points.len());
    for point in points {
        let q = density.density(&point)?;
        let mut row = point;
        row.push(q);
        rows.push(row);
    }
    let mut columns: Vec<String> = if args.n == 1 {
        vec!["x".into()]
    } else {
        (1..=args.n).map(|i| format!("x{i}")).collect()
    };
    columns.push("q".into());
    let table = Table { columns, rows };
    emit(&table.render(args.format, None), &args.out)
}

fn run_density_two_type(args: &DensityTwoTypeArgs) -> Result<()> {
    let tp = TwoTypeParams::new(args.params.alpha, args.params.theta, args.p)?;
    let mut rows = Vec::new();
    for x in parse_grid(&args.grid)? {
        rows.push(vec![x, two_type_density(&tp, x)?]);
    }
    let table = Table {
        columns: vec!["x".into(), "q".into()],
        rows,
    };
    emit(&table.render(args.format, None), &args.out)
}

/// Shared row budget check for the trajectory dumps.
fn dump_budget(steps: u64, record_every: usize) -> Result<()> {
    if record_every == 0 {
        return Err(Error::Domain("record-every must be positive".into()));
    }
    if steps == 0 {
        return Err(Error::Domain("horizon shorter than one step".into()));
    }
    if steps > MAX_STEPS {
        return Err(Error::Domain(format!(
            "horizon needs {steps} steps, over the {MAX_STEPS} budget; raise --dt or lower --t-end"
        )));
    }
    if steps / record_every as u64 >= MAX_DUMP_ROWS as u64 {
        return Err(Error::Domain(format!(
            "dump would exceed {MAX_DUMP_ROWS} rows; raise --record-every"
        )));
    }
    Ok(())
}

fn trajectory_steps(t_end: f64, dt: f64) -> Result<u64> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(Error::Domain(format!(
            "t-end must be positive and finite, got {t_end}"
        )));
    }
    Ok((t_end / dt).round().max(1.0) as u64)
}

fn run_simulate_unlabeled(args: &SimulateUnlabeledArgs) -> Result<()> {
    let params = args.params.params()?;
    if args.truncation == 0 || args.truncation > 1000 {
        return Err(Error::Domain("truncation must lie in 1..=1000".into()));
    }
    let cfg = UnlabeledConfig {
        dt: args.dt,
        ..UnlabeledConfig::default()
    };
    let mut state = UnlabeledDiffusion::new(&params, &[1.0], cfg)?;
    let steps = trajectory_steps(args.t_end, args.dt)?;
    dump_budget(steps, args.record_every)?;
    let mut rng = RngStream::new(args.seed, 0).rng();
    let width = args.truncation;
    let mut rows = Vec::new();
    let record = |state: &UnlabeledDiffusion, rows: &mut Vec<Vec<f64>>| -> Result<()> {
        let ranked = state.ranked_state()?;
        let mut row = Vec::with_capacity(width + 2);
        row.push(state.time());
        let mut kept = 0.0;
        for i in 0..width {
            let w = ranked.weights().get(i).copied().unwrap_or(0.0);
            kept += w;
            row.push(w);
        }
        row.push((1.0 - kept).max(0.0));
        rows.push(row);
        Ok(())
    };
    record(&state, &mut rows)?;
    for step in 1..=steps {
        state.step(&mut rng)?;
        if step % args.record_every as u64 == 0 || step == steps {
            record(&state, &mut rows)?;
        }
    }
    let mut columns = vec!["t".to_string()];
    columns.extend((1..=width).map(|i| format!("w{i}")));
    columns.push("residual".into());
    let table = Table { columns, rows };
    eprintln!("seed={}", args.seed);
    emit(&table.render(args.format, Some(args.seed)), &args.out)
}

fn run_simulate_two_type(args: &SimulateTwoTypeArgs) -> Result<()> {
    let tp = TwoTypeParams::new(args.params.alpha, args.params.theta, args.p)?;
    let mut state = TwoTypeDiffusion::new(&tp, args.dt, args.p)?;
    let steps = trajectory_steps(args.t_end, args.dt)?;
    dump_budget(steps, args.record_every)?;
    let mut rng = RngStream::new(args.seed, 0).rng();
    let mut rows = vec![vec![state.time(), state.position()]];
    for step in 1..=steps {
        state.step(&mut rng)?;
        if step % args.record_every as u64 == 0 || step == steps {
            rows.push(vec![state.time(), state.position()]);
        }
    }
    let table = Table {
        columns: vec!["t".into(), "x".into()],
        rows,
    };
    eprintln!("seed={}", args.seed);
    emit(&table.render(args.format, Some(args.seed)), &args.out)
}

fn run_simulate_updown(args: &SimulateUpdownArgs) -> Result<()> {
    let params = args.params.params()?;
    let chain = UpDownChain::new(&params, args.n)?;
    if !(args.t_end >= 1.0) || !args.t_end.is_finite() || args.t_end > MAX_STEPS as f64 {
        return Err(Error::Domain(format!(
            "t-end counts chain steps and must lie in 1..={MAX_STEPS}, got {}",
            args.t_end
        )));
    }
    let steps = args.t_end.round() as u64;
    dump_budget(steps, args.record_every)?;
    let mut rng = RngStream::new(args.seed, 0).rng();
    let mut state = IntegerPartition::single_block(args.n)?;
    let mut rows = vec![vec![0.0, state.len() as f64]];
    for step in 1..=steps {
        state = chain.step(&state, &mut rng)?;
        if step % args.record_every as u64 == 0 || step == steps {
            rows.push(vec![step as f64, state.len() as f64]);
        }
    }
    let table = Table {
        columns: vec!["t".into(), "blocks".into()],
        rows,
    };
    eprintln!("seed={}", args.seed);
    emit(&table.render(args.format, Some(args.seed)), &args.out)
}

impl VerifyArgs {
    /// The focused parameter point, when both halves are present.
    fn focus(&self) -> Result<Option<PdParams>> {
        match (self.alpha, self.theta) {
            (Some(alpha), Some(theta)) => Ok(Some(PdParams::new_two_param(alpha, theta)?)),
            (None, None) => Ok(None),
            _ => Err(Error::Domain(
                "give both --alpha and --theta to focus a suite, or neither for the built-in grid"
                    .into(),
            )),
        }
    }

    /// Reject flags the chosen suite cannot honor.
    fn reject_unused(&self, allowed: &[&str]) -> Result<()> {
        let given = [
            ("--alpha", self.alpha.is_some()),
            ("--theta", self.theta.is_some()),
            ("--n", self.n.is_some()),
            ("--n-max", self.n_max.is_some()),
            ("--max-degree", self.max_degree.is_some()),
            ("--paths", self.paths.is_some()),
            ("--dt", self.dt.is_some()),
        ];
        for (name, present) in given {
            if present && !allowed.contains(&name) {
                return Err(Error::Domain(format!(
                    "{name} does not apply to this suite"
                )));
            }
        }
        Ok(())
    }
}

fn run_verify(args: &VerifyArgs) -> Result<i32> {
    let reports: Vec<Report> = match args.suite {
        SuiteName::Epsf => {
            args.reject_unused(&["--alpha", "--theta", "--n"])?;
            vec![match args.focus()? {
                Some(params) => verify::epsf_point_suite(&params, args.n.unwrap_or(20))?,
                None if args.n.is_some() => {
                    return Err(Error::Domain(
                        "--n needs a focused point; give --alpha and --theta".into(),
                    ))
                }
                None => verify::epsf_suite()?,
            }]
        }
        SuiteName::AuxIdentity => {
            args.reject_unused(&["--alpha", "--theta", "--n-max"])?;
            vec![match args.focus()? {
                Some(params) => {
                    verify::aux_identity_point_suite(&params, args.n_max.unwrap_or(40))?
                }
                None if args.n_max.is_some() => {
                    return Err(Error::Domain(
                        "--n-max needs a focused point; give --alpha and --theta".into(),
                    ))
                }
                None => verify::aux_identity_suite()?,
            }]
        }
        SuiteName::Generator => {
            args.reject_unused(&["--alpha", "--theta", "--max-degree"])?;
            vec![match args.focus()? {
                Some(params) => {
                    verify::generator_point_suite(&params, args.max_degree.unwrap_or(6))?
                }
                None if args.max_degree.is_some() => {
                    return Err(Error::Domain(
                        "--max-degree needs a focused point; give --alpha and --theta".into(),
                    ))
                }
                None => verify::generator_suite()?,
            }]
        }
        SuiteName::Spectrum => {
            args.reject_unused(&["--alpha", "--theta", "--max-degree"])?;
            let focused = args.theta.is_some() || args.alpha.is_some() || args.max_degree.is_some();
            vec![if focused {
                let theta = args.theta.ok_or_else(|| {
                    Error::Domain("a focused spectrum needs --theta".into())
                })?;
                verify::spectrum_point_suite(
                    args.alpha.unwrap_or(0.2),
                    theta,
                    args.max_degree.unwrap_or(8),
                )?
            } else {
                verify::spectrum_suite()?
            }]
        }
        SuiteName::MomentsMc => {
            args.reject_unused(&["--paths"])?;
            vec![verify::moments_mc_suite(
                args.paths.unwrap_or(verify::DEFAULT_MOMENT_DRAWS),
                args.seed,
            )?]
        }
        SuiteName::DiffusionOde => {
            args.reject_unused(&["--alpha", "--theta", "--paths", "--dt"])?;
            vec![match args.focus()? {
                Some(params) => verify::diffusion_ode_point_suite(
                    &params,
                    args.paths.unwrap_or(verify::DEFAULT_ODE_PATHS),
                    args.dt.unwrap_or(2.5e-4),
                    args.seed,
                )?,
                None if args.dt.is_some() => {
                    return Err(Error::Domain(
                        "--dt needs a focused point; give --alpha and --theta".into(),
                    ))
                }
                None => verify::diffusion_ode_suite(
                    args.paths.unwrap_or(verify::DEFAULT_ODE_PATHS),
                    args.seed,
                )?,
            }]
        }
        SuiteName::TwoTypeDensity => {
            args.reject_unused(&["--paths"])?;
            vec![verify::two_type_suite(
                args.paths.unwrap_or(verify::DEFAULT_TWO_TYPE_PATHS),
                args.seed,
            )?]
        }
        SuiteName::UpdownBalance => {
            args.reject_unused(&["--paths"])?;
            vec![verify::updown_suite(
                args.paths.map(|p| p as u64).unwrap_or(verify::DEFAULT_UPDOWN_STEPS),
                args.seed,
            )?]
        }
        SuiteName::RankedMarginal => {
            args.reject_unused(&["--paths"])?;
            vec![verify::ranked_marginal_suite(
                args.paths.unwrap_or(verify::DEFAULT_MARGINAL_DRAWS),
                args.seed,
            )?]
        }
        SuiteName::Selection => {
            args.reject_unused(&["--paths"])?;
            vec![verify::selection_suite(
                args.paths.unwrap_or(verify::DEFAULT_SELECTION_PATHS),
                args.seed,
            )?]
        }
        SuiteName::All => {
            args.reject_unused(&[])?;
            verify::all_suites(args.seed)?
        }
    };
    let pass = reports.iter().all(|r| r.pass);
    let text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0]).expect("reports serialize")
    } else {
        let value = serde_json::json!({ "pass": pass, "suites": reports });
        pretty(&value)
    };
    emit(&text, &args.out)?;
    Ok(if pass { 0 } else { 1 })
}

fn run_explore_hitting(args: &ExploreHittingArgs) -> Result<()> {
    let params = args.params.params()?;
    if args.paths == 0 || args.paths > 100_000 {
        return Err(Error::Domain("paths must lie in 1..=100000".into()));
    }
    if args.truncation < 4 || args.truncation > 10_000 {
        return Err(Error::Domain("truncation must lie in 4..=10000".into()));
    }
    let steps = trajectory_steps(args.t_end, args.dt)?;
    if steps > MAX_STEPS {
        return Err(Error::Domain(format!(
            "horizon needs {steps} steps, over the {MAX_STEPS} budget"
        )));
    }
    let thresholds = [0.9, 0.99, 0.999];
    let cfg = UnlabeledConfig {
        dt: args.dt,
        ..UnlabeledConfig::default()
    };
    // running max over each path of the leading-1, -2, -3 mass prefixes,
    // starting from an independent stationary draw
    let maxes: Vec<[f64; 3]> = (0..args.paths)
        .into_par_iter()
        .map(|path| -> Result<[f64; 3]> {
            let mut rng = RngStream::new(args.seed, path as u64 + 1).rng();
            let start = sample_ranked(&params, args.truncation, &mut rng)?;
            let mut state = UnlabeledDiffusion::new(&params, start.weights(), cfg)?;
            let mut best = [0.0_f64; 3];
            let mut track = |state: &UnlabeledDiffusion| -> Result<()> {
                let ranked = state.ranked_state()?;
                let mut prefix = 0.0;
                for (k, slot) in best.iter_mut().enumerate() {
                    prefix += ranked.weights().get(k).copied().unwrap_or(0.0);
                    *slot = slot.max(prefix);
                }
                Ok(())
            };
            track(&state)?;
            for _ in 0..steps {
                state.step(&mut rng)?;
                track(&state)?;
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let counts: Vec<serde_json::Value> = (0..3)
        .map(|k| {
            let above: Vec<usize> = thresholds
                .iter()
                .map(|&th| maxes.iter().filter(|m| m[k] >= th).count())
                .collect();
            serde_json::json!({ "k": k + 1, "above": above })
        })
        .collect();
    let payload = serde_json::json!({
        "seed": args.seed,
        "paths": args.paths,
        "t_end": args.t_end,
        "dt": args.dt,
        "thresholds": thresholds,
        "counts": counts,
        "note": "paths whose largest k atoms ever jointly held at least the \
                 threshold mass; exploratory, no pass or fail",
    });
    eprintln!("seed={}", args.seed);
    emit(&pretty(&payload), &args.out)
}
