//! Per-run solver records and the residual-trace CSV schema shared by all solvers.

use std::io::{self, Write};
use std::time::Duration;

/// Column header of residual-trace CSV files.
pub const TRACE_CSV_HEADER: &str = "ops,sweep_equiv,l1_residual,linf_residual,wall_ns";

/// One sample of a residual trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub ops: u64,
    pub sweep_equiv: f64,
    pub l1_residual: f64,
    pub linf_residual: f64,
    pub wall_ns: u128,
}

/// Which norm a solver's stopping rule is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualNorm {
    /// Σ|F|, remaining fluid (diffusion solvers).
    L1Fluid,
    /// max |P·X + B - X| after a sweep (row-based iterations).
    LinfResidual,
    /// Exact solution up to rounding (direct and closed-form solvers).
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solver: String,
    pub converged: bool,
    /// Elementary operations: one diffusion, one row update or one site solved.
    pub ops: u64,
    /// Full passes over the unknowns (`ops / dimension` for diffusion solvers).
    pub sweeps: f64,
    pub residual_l1: f64,
    pub residual_linf: f64,
    /// Norm the stopping rule uses; `converged` implies the matching residual
    /// is at most the tolerance.
    pub residual_norm: ResidualNorm,
    pub tolerance: f64,
    pub wall: Duration,
    /// Bytes held by the solver's working vectors.
    pub peak_memory_bytes: usize,
    pub trace: Vec<TracePoint>,
    pub solution: Vec<f64>,
    /// Free-form annotations (e.g. a fallback taken).
    pub notes: Vec<String>,
}

impl SolveReport {
    pub fn new(solver: impl Into<String>, tolerance: f64) -> Self {
        Self {
            solver: solver.into(),
            converged: false,
            ops: 0,
            sweeps: 0.0,
            residual_l1: f64::NAN,
            residual_linf: f64::NAN,
            residual_norm: ResidualNorm::L1Fluid,
            tolerance,
            wall: Duration::ZERO,
            peak_memory_bytes: 0,
            trace: Vec::new(),
            solution: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Residual measured in the solver's own stopping norm.
    pub fn stopping_residual(&self) -> f64 {
        match self.residual_norm {
            ResidualNorm::L1Fluid => self.residual_l1,
            ResidualNorm::LinfResidual | ResidualNorm::Exact => self.residual_linf,
        }
    }

    /// `converged ⇒ stopping residual ≤ tolerance`.
    pub fn is_consistent(&self) -> bool {
        !self.converged || self.stopping_residual() <= self.tolerance
    }

    /// `solver=<id> converged=<bool> ops=<n> sweeps=<n> l1=<r> wall_ms=<t>`
    pub fn summary_line(&self) -> String {
        format!(
            "solver={} converged={} ops={} sweeps={} l1={:e} wall_ms={:.3}",
            self.solver,
            self.converged,
            self.ops,
            self.sweeps.ceil() as u64,
            self.residual_l1,
            self.wall.as_secs_f64() * 1e3
        )
    }

    pub fn write_trace_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_trace_csv(&self.trace, out)
    }
}

pub fn write_trace_csv<W: Write>(trace: &[TracePoint], mut out: W) -> io::Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for p in trace {
        writeln!(
            out,
            "{},{},{:e},{:e},{}",
            p.ops, p.sweep_equiv, p.l1_residual, p.linf_residual, p.wall_ns
        )?;
    }
    Ok(())
}

pub(crate) fn norms(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((0.0, 0.0), |(l1, linf): (f64, f64), x| (l1 + x.abs(), linf.max(x.abs())))
}
