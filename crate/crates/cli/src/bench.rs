//! Benchmark matrices: every requested solver on every instance of a suite,
//! with work counts and cross-solver agreement.

use std::io::{self, Write};

use anyhow::{bail, Result};
use diter_core::error_amplification_bound;
use diter_core::report::SolveReport;
use rayon::prelude::*;

use crate::instances::{generate_instance, InstanceKind, InstanceParams};
use crate::solvers::{instance_system, solve_instance, Budget, Instance, SolverId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// `sin(πx)` heat instances, one per entry of `steps_list`.
    Heat,
    /// Poisson and one asymmetric two-point problem.
    Ode2,
    /// Seeded random 2D stencil problems.
    Random,
}

impl std::str::FromStr for Suite {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "heat" => Suite::Heat,
            "ode2" => Suite::Ode2,
            "random" | "random-dd2d" => Suite::Random,
            other => bail!("unknown suite `{other}` (heat, ode2, random)"),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub suite: Suite,
    pub solvers: Vec<SolverId>,
    pub budget: Budget,
    pub params: InstanceParams,
    /// Time-step counts of the heat suite.
    pub steps_list: Vec<usize>,
    /// Number of random instances.
    pub instances: usize,
    pub seed: u64,
    pub parallel: bool,
    /// Run iterative solvers to residual `tolerance / κ`, where `κ` bounds
    /// `‖(I - P)⁻¹‖∞`, so every solution is within `tolerance` of the exact
    /// one. Off means `tolerance` is used as the residual target directly.
    pub error_control: bool,
}

impl BenchConfig {
    pub fn new(suite: Suite, solvers: Vec<SolverId>) -> Self {
        Self {
            suite,
            solvers,
            budget: Budget::default(),
            params: InstanceParams {
                lx: 200,
                ..Default::default()
            },
            steps_list: vec![100, 250, 500],
            instances: 10,
            seed: 0,
            parallel: false,
            error_control: true,
        }
    }

    pub fn instances(&self) -> Result<Vec<Instance>> {
        Ok(match self.suite {
            Suite::Heat => self
                .steps_list
                .iter()
                .map(|&steps| {
                    let params = InstanceParams {
                        steps,
                        ..self.params.clone()
                    };
                    params.heat_problem().map(Instance::Heat)
                })
                .collect::<Result<_>>()?,
            Suite::Ode2 => {
                let poisson = InstanceParams {
                    alpha: 0.0,
                    beta: 0.0,
                    f_const: 1.0,
                    ..self.params.clone()
                };
                let skewed = InstanceParams {
                    alpha: 1.0,
                    beta: -1.0,
                    f_const: 1.0,
                    ..self.params.clone()
                };
                vec![
                    Instance::Ode2(poisson.ode2_problem()?),
                    Instance::Ode2(skewed.ode2_problem()?),
                ]
            }
            Suite::Random => (0..self.instances as u64)
                .map(|i| {
                    generate_instance(InstanceKind::RandomDd2d, &self.params, self.seed + i)
                        .map(Instance::Grid)
                })
                .collect::<Result<_>>()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub instance: String,
    pub solver: SolverId,
    pub report: SolveReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceOutcome {
    pub instance: String,
    pub rows: Vec<BenchRow>,
    /// Largest pairwise L∞ distance between solver outputs.
    pub max_discrepancy: f64,
    /// Bound on `‖(I - P)⁻¹‖∞` when error control was applied.
    pub amplification: Option<f64>,
}

impl InstanceOutcome {
    pub fn report(&self, solver: SolverId) -> Option<&SolveReport> {
        self.rows.iter().find(|r| r.solver == solver).map(|r| &r.report)
    }

    /// `ops(numerator) / ops(denominator)`.
    pub fn work_ratio(&self, numerator: SolverId, denominator: SolverId) -> Option<f64> {
        let a = self.report(numerator)?.ops as f64;
        let b = self.report(denominator)?.ops as f64;
        (b > 0.0).then(|| a / b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub outcomes: Vec<InstanceOutcome>,
}

impl BenchReport {
    pub fn max_discrepancy(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.max_discrepancy)
            .fold(0.0, f64::max)
    }

    pub fn all_converged(&self) -> bool {
        self.outcomes
            .iter()
            .flat_map(|o| &o.rows)
            .all(|r| r.report.converged)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "instance,solver,converged,ops,sweeps,tolerance,l1_residual,linf_residual,wall_ns,peak_memory_bytes,max_discrepancy,amplification"
        )?;
        for o in &self.outcomes {
            for r in &o.rows {
                let rep = &r.report;
                writeln!(
                    out,
                    "{},{},{},{},{},{:e},{:e},{:e},{},{},{:e},{}",
                    o.instance,
                    r.solver,
                    rep.converged,
                    rep.ops,
                    rep.sweeps,
                    rep.tolerance,
                    rep.residual_l1,
                    rep.residual_linf,
                    rep.wall.as_nanos(),
                    rep.peak_memory_bytes,
                    o.max_discrepancy,
                    o.amplification.map_or(String::new(), |k| format!("{k:e}"))
                )?;
            }
        }
        Ok(())
    }
}

fn max_pairwise_discrepancy(rows: &[BenchRow]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in rows.iter().enumerate() {
        for b in &rows[i + 1..] {
            let d = a
                .report
                .solution
                .iter()
                .zip(&b.report.solution)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            worst = worst.max(d);
        }
    }
    worst
}

fn run_one(instance: &Instance, config: &BenchConfig) -> Result<InstanceOutcome> {
    let amplification = if config.error_control && config.solvers.iter().any(SolverId::is_iterative) {
        let system = instance_system(instance)?;
        let kappa = error_amplification_bound(&system, config.budget.max_work)?;
        if kappa.is_none() {
            bail!("{}: |P| does not contract, no error bound available", instance.label());
        }
        kappa
    } else {
        None
    };
    let rows = config
        .solvers
        .iter()
        .map(|&solver| {
            let mut budget = config.budget;
            if let (Some(kappa), true) = (amplification, solver.is_iterative()) {
                budget.tolerance /= kappa;
            }
            solve_instance(instance, solver, budget).map(|report| BenchRow {
                instance: instance.label(),
                solver,
                report,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InstanceOutcome {
        instance: instance.label(),
        max_discrepancy: max_pairwise_discrepancy(&rows),
        rows,
        amplification,
    })
}

pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    if config.solvers.is_empty() {
        bail!("no solvers selected");
    }
    let instances = config.instances()?;
    let outcomes = if config.parallel {
        instances
            .par_iter()
            .map(|i| run_one(i, config))
            .collect::<Result<Vec<_>>>()?
    } else {
        instances
            .iter()
            .map(|i| run_one(i, config))
            .collect::<Result<Vec<_>>>()?
    };
    Ok(BenchReport { outcomes })
}
