#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cvconc::concurrence::{concurrence_report, decide_separability, Route, DEFAULT_THRESHOLD};
use cvconc::gaussian::{
    closed_form_concurrence, closed_form_normalization, gaussian_concurrence, gaussian_separability,
    linspace, sweep_concurrence, Branch, TwoModeGaussianSpec,
};
use cvconc::io::{read_state, write_grid_state, write_sweep_csv, StateFile};
use cvconc::state::{discretize, Bipartition, GaussianPureState, GridAxis, GridState};
use cvconc::verify::verify_state;
use cvconc::Error;

/// Route disagreement above this is an internal-consistency failure.
const ROUTE_GAP_LIMIT: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "cvconc", version, about = "Generalized concurrence of pure continuous-variable states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GridOpts {
    /// Points per axis when discretizing a Gaussian state file
    #[arg(long, default_value_t = 48)]
    grid: usize,
    /// Half-width of the box `[-box, box]` on every axis
    #[arg(long = "box", default_value_t = 6.0)]
    half_width: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form E² and normalization of the two-mode Gaussian family
    Gaussian {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        c: f64,
        /// `real` or `imag` (c holds m for c = i m)
        #[arg(long, default_value = "real")]
        branch: String,
    },
    /// Writes `c,E2,norm` rows of the closed form to a CSV file
    Sweep {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value = "real")]
        branch: String,
        #[arg(long, allow_negative_numbers = true)]
        c_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        c_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Concurrence report for a state file
    Concurrence {
        state: PathBuf,
        /// Comma-separated axis indices of M
        #[arg(long = "M", default_value = "0")]
        m: String,
        /// Comma-separated routes (a, b, c, lambda, d, e) or `all`
        #[arg(long, default_value = "a,b,c,lambda")]
        routes: String,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// Runs every identity check and prints a verification report
    Verify {
        state: PathBuf,
        #[arg(long = "M", default_value = "0")]
        m: String,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        grid: GridOpts,
    },
    /// Splits a separable state into its two normalized factors
    Factor {
        state: PathBuf,
        #[arg(long = "M", default_value = "0")]
        m: String,
        #[arg(long)]
        out_m: PathBuf,
        #[arg(long)]
        out_rest: PathBuf,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        grid: GridOpts,
    },
}

/// A library error, or an exit code with a message for stderr.
enum Failure {
    Error(Error),
    Exit(u8, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidState(_) | Error::Degenerate(_) => 2,
        _ => 1,
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn parse_routes(spec: &str) -> Result<Vec<Route>, Error> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(Route::ALL.to_vec());
    }
    let mut routes = spec
        .split(',')
        .map(str::parse::<Route>)
        .collect::<Result<Vec<_>, _>>()?;
    routes.sort();
    routes.dedup();
    Ok(routes)
}

/// Loads a state file as a grid, discretizing Gaussians with `grid`.
fn load_grid(path: &PathBuf, grid: &GridOpts) -> Result<(GridState, Vec<String>, Option<GaussianPureState>), Error> {
    match read_state(path)? {
        StateFile::Grid(g) => Ok((g, Vec::new(), None)),
        StateFile::Gaussian(gs) => {
            let axis = GridAxis::symmetric(grid.half_width, grid.grid)?;
            let d = discretize(&gs, &vec![axis; gs.n()])?;
            Ok((d.state, d.warnings, Some(gs)))
        }
    }
}

fn cmd_gaussian(a: f64, b: f64, c: f64, branch: &str) -> Result<(), Failure> {
    let spec = TwoModeGaussianSpec::new(a, b, c, branch.parse::<Branch>()?)?;
    let e2 = closed_form_concurrence(&spec)?;
    let norm = closed_form_normalization(&spec)?;
    let sep = gaussian_separability(spec.to_state()?.precision(), &Bipartition::new(2, [0])?)?;
    print_json(&json!({
        "a": a,
        "b": b,
        "c": c,
        "branch": spec.branch,
        "E2": e2,
        "norm": norm,
        "verdict": if sep.separable { "separable" } else { "entangled" },
    }));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(a: f64, b: f64, branch: &str, c_min: f64, c_max: f64, steps: usize, out: &PathBuf) -> Result<(), Failure> {
    let branch = branch.parse::<Branch>()?;
    let rows = sweep_concurrence(a, b, branch, &linspace(c_min, c_max, steps)?)?;
    if let Some(bad) = rows.iter().find(|r| !r.is_physical()) {
        return Err(Error::Unphysical(format!("c = {} lies outside the normalizable range", bad.c)).into());
    }
    let file = File::create(out).map_err(Error::from)?;
    write_sweep_csv(BufWriter::new(file), &rows)?;
    Ok(())
}

fn cmd_concurrence(path: &PathBuf, m: &str, routes: &str, threshold: f64, grid: &GridOpts) -> Result<(), Failure> {
    let routes = parse_routes(routes)?;
    let (state, warnings, gaussian) = load_grid(path, grid)?;
    let bip = Bipartition::parse(m, state.n_axes())?;
    let mut report = concurrence_report(&state, &bip, &routes, threshold)?;
    report.warnings.splice(0..0, warnings);
    let mut out = serde_json::to_value(&report).expect("serializable");
    if let Some(g) = gaussian {
        out["exact_E2"] = json!(gaussian_concurrence(&g, &bip)?);
    }
    print_json(&out);
    if !(report.max_pairwise_gap <= ROUTE_GAP_LIMIT) {
        return Err(Failure::Exit(
            3,
            format!("routes disagree by {:e} (limit {ROUTE_GAP_LIMIT:e})", report.max_pairwise_gap),
        ));
    }
    Ok(())
}

fn cmd_verify(path: &PathBuf, m: &str, threshold: f64, grid: &GridOpts) -> Result<(), Failure> {
    let (state, _, _) = load_grid(path, grid)?;
    let bip = Bipartition::parse(m, state.n_axes())?;
    let report = verify_state(&state, &bip, threshold)?;
    print_json(&serde_json::to_value(&report).expect("serializable"));
    if !report.state_valid {
        return Err(Failure::Exit(2, "state is not normalized".into()));
    }
    if !report.pass {
        let names: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        return Err(Failure::Exit(3, format!("failed checks: {}", names.join(", "))));
    }
    Ok(())
}

fn cmd_factor(path: &PathBuf, m: &str, out_m: &PathBuf, out_rest: &PathBuf, threshold: f64, grid: &GridOpts) -> Result<(), Failure> {
    let (state, _, _) = load_grid(path, grid)?;
    let bip = Bipartition::parse(m, state.n_axes())?;
    let state = GridState::on_rule(state.rule().clone(), state.amplitudes().to_vec())?;
    let cert = decide_separability(&state, &bip, threshold)?;
    if let Some(w) = cert.witness() {
        return Err(Failure::Exit(
            1,
            format!("state is entangled; witness: {}", serde_json::to_string(w).expect("serializable")),
        ));
    }
    let f = cert.factors().expect("separable certificates carry factors");
    write_grid_state(out_m, &f.m_state)?;
    write_grid_state(out_rest, &f.rest_state)?;
    print_json(&json!({
        "verdict": cert.verdict,
        "max_wedge_coefficient": cert.max_coefficient,
        "reference_slice": f.reference_slice,
        "reconstruction_error": f.reconstruction_error,
    }));
    Ok(())
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("CVCONC_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::Input(format!("CVCONC_THREADS must be a non-negative integer, got {v:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Input(format!("cannot configure thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Gaussian { a, b, c, branch } => cmd_gaussian(*a, *b, *c, branch),
        Command::Sweep { a, b, branch, c_min, c_max, steps, out } => {
            cmd_sweep(*a, *b, branch, *c_min, *c_max, *steps, out)
        }
        Command::Concurrence { state, m, routes, threshold, grid } => {
            cmd_concurrence(state, m, routes, *threshold, grid)
        }
        Command::Verify { state, m, threshold, grid } => cmd_verify(state, m, *threshold, grid),
        Command::Factor { state, m, out_m, out_rest, threshold, grid } => {
            cmd_factor(state, m, out_m, out_rest, *threshold, grid)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Exit(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
