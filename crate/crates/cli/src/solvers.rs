//! Dispatch from solver ids to the library solvers.

use anyhow::{bail, Result};
use diter_core::baselines::{self, implicit_heat_direct, tridiagonal_solve, BaselineConfig, Method};
use diter_core::directional::{solve_heat_directional, solve_ode2, HeatProblem, Ode2Problem};
use diter_core::report::{ResidualNorm, SolveReport};
use diter_core::stencil::{assemble_system, GridProblem, LinearSystem};
use diter_core::{init_fluid, run, Schedule, Strategy};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverId {
    DiSweep,
    DiGreedy,
    DiDirectional,
    Gs,
    Jacobi,
    Direct,
}

impl SolverId {
    pub const ALL: [SolverId; 6] = [
        SolverId::DiSweep,
        SolverId::DiGreedy,
        SolverId::DiDirectional,
        SolverId::Gs,
        SolverId::Jacobi,
        SolverId::Direct,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            SolverId::DiSweep => "di-sweep",
            SolverId::DiGreedy => "di-greedy",
            SolverId::DiDirectional => "di-directional",
            SolverId::Gs => "gs",
            SolverId::Jacobi => "jacobi",
            SolverId::Direct => "direct",
        }
    }

    /// Solvers that stop on a residual tolerance.
    pub fn is_iterative(&self) -> bool {
        matches!(self, SolverId::DiSweep | SolverId::DiGreedy | SolverId::Gs | SolverId::Jacobi)
    }

    pub fn parse_list(list: &str) -> Result<Vec<SolverId>> {
        list.split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl std::str::FromStr for SolverId {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverId::ALL
            .into_iter()
            .find(|id| id.id() == s)
            .ok_or_else(|| {
                anyhow::anyhow!(
                    "unknown solver `{s}` (di-sweep, di-greedy, di-directional, gs, jacobi, direct)"
                )
            })
    }
}

impl std::fmt::Display for SolverId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

/// Stopping parameters shared by every solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub tolerance: f64,
    /// Cap on elementary operations (site updates).
    pub max_work: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_work: 2_000_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Grid(GridProblem),
    Heat(HeatProblem),
    Ode2(Ode2Problem),
}

impl Instance {
    pub fn label(&self) -> String {
        match self {
            Instance::Grid(p) => {
                let (ln, lm) = p.shape();
                format!("dd2d-{ln}x{lm}")
            }
            Instance::Heat(h) => format!("heat-k{}-lx{}-t{}", h.k, h.lx, h.steps),
            Instance::Ode2(o) => format!("ode2-a{}-b{}-n{}", o.alpha, o.beta, o.intervals()),
        }
    }
}

/// The assembled fixed-point system of an instance, in the ordering used by
/// every report's solution vector.
pub fn instance_system(instance: &Instance) -> Result<LinearSystem> {
    Ok(match instance {
        Instance::Grid(p) => assemble_system(p)?,
        Instance::Heat(h) => assemble_system(&h.grid_problem()?)?,
        Instance::Ode2(o) => assemble_system(&o.grid_problem()?)?,
    })
}

pub fn run_iterative(system: &LinearSystem, solver: SolverId, budget: Budget) -> Result<SolveReport> {
    let dim = system.dimension().max(1) as u64;
    let max_sweeps = (budget.max_work / dim).max(1) as usize;
    Ok(match solver {
        SolverId::DiSweep | SolverId::DiGreedy => {
            let strategy = if solver == SolverId::DiSweep {
                Strategy::Sweep
            } else {
                Strategy::Greedy
            };
            let schedule = Schedule::new(strategy, budget.tolerance, budget.max_work)?;
            let mut state = init_fluid(system);
            run(&mut state, system, &schedule)?
        }
        SolverId::Gs => baselines::solve(
            system,
            &BaselineConfig::new(Method::GaussSeidel, budget.tolerance, max_sweeps)?,
        )?,
        SolverId::Jacobi => baselines::solve(
            system,
            &BaselineConfig::new(Method::Jacobi, budget.tolerance, max_sweeps)?,
        )?,
        SolverId::DiDirectional | SolverId::Direct => {
            bail!("{solver} is not an iterative solver")
        }
    })
}

fn exact_report(solver: SolverId, tolerance: f64, solution: Vec<f64>, system: &LinearSystem, start: Instant) -> SolveReport {
    let wall = start.elapsed();
    let residual = system.fixed_point_residual(&solution);
    let mut report = SolveReport::new(solver.id(), tolerance);
    report.residual_norm = ResidualNorm::Exact;
    report.residual_l1 = residual.iter().map(|r| r.abs()).sum();
    report.residual_linf = residual.iter().fold(0.0, |a: f64, r| a.max(r.abs()));
    report.converged = report.residual_linf <= tolerance;
    report.ops = solution.len() as u64;
    report.sweeps = 1.0;
    report.wall = wall;
    report.peak_memory_bytes = 4 * solution.len() * std::mem::size_of::<f64>();
    report.solution = solution;
    report
}

/// Direct solve of a 1D system `(I - P)·X = B` with the Thomas algorithm.
fn direct_one_d(system: &LinearSystem, tolerance: f64) -> Result<SolveReport> {
    let n = system.dimension();
    let start = Instant::now();
    let lower: Vec<f64> = (0..n).map(|i| if i > 0 { -system.entry(i, i - 1) } else { 0.0 }).collect();
    let upper: Vec<f64> = (0..n).map(|i| if i + 1 < n { -system.entry(i, i + 1) } else { 0.0 }).collect();
    let diag: Vec<f64> = (0..n).map(|i| 1.0 - system.entry(i, i)).collect();
    let x = tridiagonal_solve(&lower, &diag, &upper, system.b())?;
    Ok(exact_report(SolverId::Direct, tolerance, x, system, start))
}

/// Runs `solver` on `instance`. The report's solution is ordered like the
/// instance's assembled system (time-major for heat, interior sites for ODEs).
pub fn solve_instance(instance: &Instance, solver: SolverId, budget: Budget) -> Result<SolveReport> {
    match instance {
        Instance::Grid(problem) => {
            let system = assemble_system(problem)?;
            match solver {
                SolverId::DiDirectional => bail!("di-directional needs a heat1d or ode2 problem"),
                SolverId::Direct if problem.is_one_d() => direct_one_d(&system, budget.tolerance),
                SolverId::Direct => bail!("direct solver is only available for 1D problems"),
                _ => run_iterative(&system, solver, budget),
            }
        }
        Instance::Heat(heat) => match solver {
            SolverId::DiDirectional => Ok(solve_heat_directional(heat, budget.tolerance)?.report),
            SolverId::Direct => {
                if heat.left.iter().chain(&heat.right).any(|v| *v != 0.0) {
                    bail!("direct heat stepping assumes zero end values");
                }
                let start = Instant::now();
                let field = implicit_heat_direct(&heat.u0, heat.k, heat.steps)?;
                let solution: Vec<f64> = field[1..]
                    .iter()
                    .flat_map(|r| r[1..heat.lx].iter().copied())
                    .collect();
                let system = assemble_system(&heat.grid_problem()?)?;
                Ok(exact_report(SolverId::Direct, budget.tolerance, solution, &system, start))
            }
            _ => {
                let system = assemble_system(&heat.grid_problem()?)?;
                run_iterative(&system, solver, budget)
            }
        },
        Instance::Ode2(ode) => match solver {
            SolverId::DiDirectional => Ok(solve_ode2(ode, budget.tolerance)?.report),
            SolverId::Direct => direct_one_d(&assemble_system(&ode.grid_problem()?)?, budget.tolerance),
            _ => run_iterative(&assemble_system(&ode.grid_problem()?)?, solver, budget),
        },
    }
}
