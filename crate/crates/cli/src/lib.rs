//! Command-line front end for `diter-core`: single solves, profile dumps,
//! instance generation and benchmark matrices.

pub mod bench;
pub mod instances;
pub mod solvers;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use diter_core::directional::{write_field_csv, write_ode_csv, HeatProblem, Ode2Problem};
use diter_core::problem_file::{parse_problem, write_problem};
use diter_core::report::SolveReport;
use diter_core::stencil::{assemble_system, spectral_radius_estimate, Stability};
use diter_core::{validate_stability, CatalystProfile};

use bench::{run_bench, BenchConfig, Suite};
use instances::{generate_instance, InstanceKind, InstanceParams};
use solvers::{solve_instance, Budget, Instance, SolverId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "diter", version, about = "D-iteration solvers for stencil fixed-point systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a 1D/2D stencil problem read from a file or generated from a seed.
    Solve2d(Solve2dArgs),
    /// Implicit heat equation on [0, 1] with a sin(πx) initial profile.
    Heat1d(Heat1dArgs),
    /// Two-point problem y'' + αy' + βy = f on [0, length].
    Ode2(Ode2Args),
    /// Print the catalyst profiles φ, φ^N and normalized φ̃ for one stencil.
    CatalystDump(CatalystArgs),
    /// Run every selected solver on every instance of a suite.
    Bench(BenchArgs),
    /// Write a generated problem file.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct SolveOpts {
    /// Residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Cap on elementary site updates.
    #[arg(long, default_value_t = 2_000_000_000)]
    max_work: u64,
    /// Directory for CSV artifacts; nothing is written when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SolveOpts {
    fn budget(&self) -> Budget {
        Budget {
            tolerance: self.tol,
            max_work: self.max_work,
        }
    }
}

#[derive(Debug, Args)]
struct Solve2dArgs {
    /// Problem file (see README for the format).
    #[arg(long, conflicts_with = "seed")]
    problem: Option<PathBuf>,
    /// Generate a random 2D instance with this seed instead of reading a file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "di-sweep")]
    solver: SolverId,
    #[arg(long)]
    allow_unstable: bool,
    #[command(flatten)]
    opts: SolveOpts,
}

#[derive(Debug, Args)]
struct Heat1dArgs {
    /// dt / dx².
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Number of space intervals.
    #[arg(long, default_value_t = 50)]
    lx: usize,
    /// Number of time steps.
    #[arg(long = "t", default_value_t = 50)]
    steps: usize,
    #[arg(long, default_value = "di-directional")]
    solver: SolverId,
    #[command(flatten)]
    opts: SolveOpts,
}

#[derive(Debug, Args)]
struct Ode2Args {
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 64)]
    intervals: usize,
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    /// Constant right-hand side.
    #[arg(long = "f", default_value_t = 1.0, allow_hyphen_values = true)]
    f_const: f64,
    #[arg(long = "y0", default_value_t = 0.0, allow_hyphen_values = true)]
    y_start: f64,
    #[arg(long = "y1", default_value_t = 0.0, allow_hyphen_values = true)]
    y_end: f64,
    #[arg(long, default_value = "di-directional")]
    solver: SolverId,
    #[arg(long)]
    allow_unstable: bool,
    #[command(flatten)]
    opts: SolveOpts,
}

#[derive(Debug, Args)]
struct CatalystArgs {
    #[arg(long, allow_hyphen_values = true)]
    a_plus: f64,
    #[arg(long, allow_hyphen_values = true)]
    a_minus: f64,
    /// Bound N of the truncated profile.
    #[arg(long)]
    n: usize,
    /// Write `catalyst.csv` here instead of printing to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value = "heat")]
    suite: Suite,
    /// Comma-separated solver ids; defaults depend on the suite.
    #[arg(long)]
    solvers: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 200)]
    lx: usize,
    /// Comma-separated time-step counts of the heat suite.
    #[arg(long = "t", default_value = "100,250,500")]
    steps: String,
    #[arg(long, default_value_t = 64)]
    intervals: usize,
    /// Number of random instances.
    #[arg(long, default_value_t = 10)]
    instances: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run instances concurrently.
    #[arg(long)]
    parallel: bool,
    /// Use --tol as the residual target of iterative solvers instead of
    /// scaling it by the instance's error amplification bound.
    #[arg(long)]
    residual_tol: bool,
    #[command(flatten)]
    opts: SolveOpts,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    kind: InstanceKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 50)]
    lx: usize,
    #[arg(long = "t", default_value_t = 50)]
    steps: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 64)]
    intervals: usize,
    #[arg(long = "f", default_value_t = 1.0, allow_hyphen_values = true)]
    f_const: f64,
    /// Target |α| for random instances (rescaled to at most 0.95 otherwise).
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    allow_unstable: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_NOT_CONVERGED,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INPUT
        }
    }
}

fn execute(command: Command) -> Result<bool> {
    match command {
        Command::Solve2d(a) => solve2d(a),
        Command::Heat1d(a) => heat1d(a),
        Command::Ode2(a) => ode2(a),
        Command::CatalystDump(a) => catalyst_dump(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Generate(a) => generate(a),
    }
}

fn prepare_out(dir: &Option<PathBuf>) -> Result<Option<&Path>> {
    match dir {
        Some(d) => {
            fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
            Ok(Some(d.as_path()))
        }
        None => Ok(None),
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn finish(report: &SolveReport, out: Option<&Path>) -> Result<bool> {
    println!("{}", report.summary_line());
    for note in &report.notes {
        println!("  note: {note}");
    }
    if let Some(dir) = out {
        let mut w = create(dir, &format!("trace_{}.csv", report.solver))?;
        report.write_trace_csv(&mut w)?;
        w.flush()?;
    }
    Ok(report.converged)
}

fn solve2d(a: Solve2dArgs) -> Result<bool> {
    let problem = match (&a.problem, a.seed) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            parse_problem(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(seed)) => {
            let params = InstanceParams {
                allow_unstable: a.allow_unstable,
                ..Default::default()
            };
            generate_instance(InstanceKind::RandomDd2d, &params, seed)?
        }
        _ => bail!("exactly one of --problem or --seed is required"),
    };
    let verdict = validate_stability(&problem.weights())?;
    if verdict == Stability::Unstable && !a.allow_unstable {
        bail!(
            "stencil has |α| = {} > 1 (pass --allow-unstable to override)",
            problem.weights().total_mass()
        );
    }
    let out = prepare_out(&a.opts.out)?;
    let system = assemble_system(&problem)?;
    if verdict != Stability::Strict {
        // |α| ≥ 1 alone does not decide contraction; the domain does
        let rho = spectral_radius_estimate(&system, 500);
        println!("  note: |α| = {}, spectral radius estimate {rho:.6}", problem.weights().total_mass());
    }
    let report = solve_instance(&Instance::Grid(problem), a.solver, a.opts.budget())?;
    if let Some(dir) = out {
        let mut w = create(dir, "solution.csv")?;
        writeln!(w, "n,m,u")?;
        for (i, u) in report.solution.iter().enumerate() {
            let s = system.site(i).context("solution longer than the system")?;
            writeln!(w, "{},{},{:e}", s.n, s.m, u)?;
        }
        w.flush()?;
    }
    finish(&report, out)
}

fn heat1d(a: Heat1dArgs) -> Result<bool> {
    let problem = HeatProblem::sine(a.lx, a.steps, a.k)?;
    let out = prepare_out(&a.opts.out)?;
    let report = solve_instance(&Instance::Heat(problem.clone()), a.solver, a.opts.budget())?;
    if let Some(dir) = out {
        let field = problem.field_from_interior(&report.solution);
        let mut w = create(dir, "field.csv")?;
        write_field_csv(&problem, &field, &mut w)?;
        w.flush()?;
    }
    finish(&report, out)
}

fn ode2(a: Ode2Args) -> Result<bool> {
    let c = a.f_const;
    let problem =
        Ode2Problem::from_fn(a.alpha, a.beta, a.length, a.intervals, |_| c, a.y_start, a.y_end)?;
    if !problem.within_stability_bound() && !a.allow_unstable {
        bail!(
            "dx = {} exceeds the stability bound {:?} (pass --allow-unstable to override)",
            problem.dx,
            problem.stability_bound()
        );
    }
    let out = prepare_out(&a.opts.out)?;
    let report = solve_instance(&Instance::Ode2(problem.clone()), a.solver, a.opts.budget())?;
    if let Some(dir) = out {
        let mut y = Vec::with_capacity(report.solution.len() + 2);
        y.push(problem.y_start);
        y.extend_from_slice(&report.solution);
        y.push(problem.y_end);
        let mut w = create(dir, "ode.csv")?;
        write_ode_csv(&problem, &y, &mut w)?;
        w.flush()?;
    }
    finish(&report, out)
}

fn catalyst_dump(a: CatalystArgs) -> Result<bool> {
    let profile = CatalystProfile::new(a.a_plus, a.a_minus)?;
    match prepare_out(&a.out)? {
        Some(dir) => {
            let mut w = create(dir, "catalyst.csv")?;
            profile.write_dump_csv(a.n, &mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            profile.write_dump_csv(a.n, stdout.lock())?;
        }
    }
    Ok(true)
}

fn default_solvers(suite: Suite) -> Vec<SolverId> {
    use SolverId::*;
    match suite {
        Suite::Heat => vec![DiDirectional, Gs, Direct],
        Suite::Ode2 => vec![DiDirectional, DiSweep, Gs, Direct],
        Suite::Random => vec![DiSweep, DiGreedy, Gs, Jacobi],
    }
}

fn bench_cmd(a: BenchArgs) -> Result<bool> {
    let solvers = match &a.solvers {
        Some(list) => SolverId::parse_list(list)?,
        None => default_solvers(a.suite),
    };
    let steps_list = a
        .steps
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad step count `{s}`")))
        .collect::<Result<Vec<_>>>()?;
    let mut config = BenchConfig::new(a.suite, solvers);
    config.budget = a.opts.budget();
    config.params.k = a.k;
    config.params.lx = a.lx;
    config.params.intervals = a.intervals;
    config.steps_list = steps_list;
    config.instances = a.instances;
    config.seed = a.seed;
    config.parallel = a.parallel;
    config.error_control = !a.residual_tol;

    let out = prepare_out(&a.opts.out)?;
    let report = run_bench(&config)?;
    for o in &report.outcomes {
        for r in &o.rows {
            println!("instance={} {}", o.instance, r.report.summary_line());
        }
    }
    let discrepancy = report.max_discrepancy();
    let limit = 10.0 * a.opts.tol;
    println!("max_discrepancy={discrepancy:e} limit={limit:e}");
    if let Some(dir) = out {
        let mut w = create(dir, "bench.csv")?;
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    Ok(report.all_converged() && discrepancy <= limit)
}

fn generate(a: GenerateArgs) -> Result<bool> {
    let params = InstanceParams {
        k: a.k,
        lx: a.lx,
        steps: a.steps,
        alpha: a.alpha,
        beta: a.beta,
        intervals: a.intervals,
        f_const: a.f_const,
        mass: a.mass,
        allow_unstable: a.allow_unstable,
        ..Default::default()
    };
    let text = write_problem(&generate_instance(a.kind, &params, a.seed)?);
    match &a.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(true)
}
