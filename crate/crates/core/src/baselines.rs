//! Row-based ("collection") iterations and a direct tridiagonal solver, used as
//! comparators and oracles for the diffusion solvers.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::report::{norms, ResidualNorm, SolveReport, TracePoint};
use crate::stencil::LinearSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Jacobi,
    GaussSeidel,
}

impl Method {
    pub fn id(&self) -> &'static str {
        match self {
            Method::Jacobi => "jacobi",
            Method::GaussSeidel => "gs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub method: Method,
    /// Threshold on the L∞ norm of `P·X + B - X` after a sweep.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl BaselineConfig {
    pub fn new(method: Method, tolerance: f64, max_sweeps: usize) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be > 0, got {tolerance}"
            )));
        }
        if max_sweeps == 0 {
            return Err(Error::InvalidInput("max_sweeps must be >= 1".into()));
        }
        Ok(Self {
            method,
            tolerance,
            max_sweeps,
        })
    }
}

/// Sweeps over which a tenfold growth of the residual counts as divergence.
const DIVERGENCE_WINDOW: usize = 100;

pub fn gauss_seidel(system: &LinearSystem, tolerance: f64, max_sweeps: usize) -> Result<SolveReport> {
    solve(system, &BaselineConfig::new(Method::GaussSeidel, tolerance, max_sweeps)?)
}

pub fn jacobi(system: &LinearSystem, tolerance: f64, max_sweeps: usize) -> Result<SolveReport> {
    solve(system, &BaselineConfig::new(Method::Jacobi, tolerance, max_sweeps)?)
}

/// Iterates `X ← P·X + B` from `X = 0`, in place (Gauss-Seidel, ascending
/// index) or from the previous iterate (Jacobi), until the fixed-point
/// residual after a sweep is at most the tolerance in L∞.
///
/// The post-sweep residual is recovered from the sweep's update vector
/// (`P·δ`, restricted to `j ≥ i` for Gauss-Seidel) rather than by a fresh
/// evaluation. Divergence and the sweep cap are reported through
/// `converged = false`.
pub fn solve(system: &LinearSystem, config: &BaselineConfig) -> Result<SolveReport> {
    let dim = system.dimension();
    let mut report = SolveReport::new(config.method.id(), config.tolerance);
    report.residual_norm = ResidualNorm::LinfResidual;
    let start = Instant::now();
    let mut x = vec![0.0; dim];
    let mut prev = vec![0.0; dim];
    let mut update = vec![0.0; dim];
    let mut residual = vec![0.0; dim];
    let mut history: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut sweeps = 0usize;
    let rows = system.rows();
    let b = system.b();

    while sweeps < config.max_sweeps {
        match config.method {
            Method::GaussSeidel => {
                for i in 0..dim {
                    let v: f64 = rows.row(i).map(|(j, p)| p * x[j]).sum::<f64>() + b[i];
                    update[i] = v - x[i];
                    x[i] = v;
                }
                // rows j < i were already current when row i was evaluated
                for i in 0..dim {
                    residual[i] = rows
                        .row(i)
                        .filter(|(j, _)| *j >= i)
                        .map(|(j, p)| p * update[j])
                        .sum();
                }
            }
            Method::Jacobi => {
                prev.copy_from_slice(&x);
                for i in 0..dim {
                    let v: f64 = rows.row(i).map(|(j, p)| p * prev[j]).sum::<f64>() + b[i];
                    update[i] = v - prev[i];
                    x[i] = v;
                }
                for i in 0..dim {
                    residual[i] = rows.row(i).map(|(j, p)| p * update[j]).sum();
                }
            }
        }
        sweeps += 1;
        let (l1, linf) = norms(&residual);
        if !linf.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "{} residual norm became {linf}",
                config.method.id()
            )));
        }
        report.trace.push(TracePoint {
            ops: (sweeps * dim) as u64,
            sweep_equiv: sweeps as f64,
            l1_residual: l1,
            linf_residual: linf,
            wall_ns: start.elapsed().as_nanos(),
        });
        history.push(linf);
        report.residual_l1 = l1;
        report.residual_linf = linf;
        if linf <= config.tolerance {
            converged = true;
            break;
        }
        if history.len() > DIVERGENCE_WINDOW {
            let past = history[history.len() - 1 - DIVERGENCE_WINDOW];
            if linf > 10.0 * past {
                report.notes.push(format!("diverging after {sweeps} sweeps"));
                break;
            }
        }
    }
    if dim == 0 {
        converged = true;
        report.residual_l1 = 0.0;
        report.residual_linf = 0.0;
    }
    report.wall = start.elapsed();
    report.converged = converged;
    report.ops = (sweeps * dim) as u64;
    report.sweeps = sweeps as f64;
    report.peak_memory_bytes = 4 * dim * std::mem::size_of::<f64>()
        + rows.nnz() * (std::mem::size_of::<f64>() + std::mem::size_of::<usize>());
    report.solution = x;
    Ok(report)
}

/// Thomas algorithm for `lower[i]·x[i-1] + diag[i]·x[i] + upper[i]·x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn tridiagonal_solve(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n {
        return Err(Error::InvalidInput(format!(
            "band lengths differ: lower={}, diag={n}, upper={}, rhs={}",
            lower.len(),
            upper.len(),
            rhs.len()
        )));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut pivot;
    for i in 0..n {
        let l = if i > 0 { lower[i] } else { 0.0 };
        pivot = diag[i] - if i > 0 { l * c[i - 1] } else { 0.0 };
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularMatrix(i));
        }
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - if i > 0 { l * d[i - 1] } else { 0.0 }) / pivot;
    }
    for i in (0..n).rev() {
        x[i] = d[i] - if i + 1 < n { c[i] * x[i + 1] } else { 0.0 };
    }
    Ok(x)
}

/// Time-steps the implicit heat scheme
/// `(1 + 2k)·U(t,x) - k·(U(t,x-1) + U(t,x+1)) = U(t-1,x)` with zero ends,
/// one tridiagonal solve per step. Returns rows `0..=steps`, each of length
/// `u0.len()`.
pub fn implicit_heat_direct(u0: &[f64], k: f64, steps: usize) -> Result<Vec<Vec<f64>>> {
    let len = u0.len();
    let mut field = Vec::with_capacity(steps + 1);
    field.push(u0.to_vec());
    if len < 3 {
        field.extend((0..steps).map(|_| vec![0.0; len]));
        return Ok(field);
    }
    let m = len - 2;
    let lower = vec![-k; m];
    let diag = vec![1.0 + 2.0 * k; m];
    let upper = vec![-k; m];
    for t in 1..=steps {
        let rhs = &field[t - 1][1..len - 1];
        let inner = tridiagonal_solve(&lower, &diag, &upper, rhs)?;
        let mut row = vec![0.0; len];
        row[1..len - 1].copy_from_slice(&inner);
        field.push(row);
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::{assemble_system, GridProblem, Site, StencilWeights};
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_matrix_one_sweep() {
        let sys = LinearSystem::from_triplets(&[], vec![1.0, -2.0]).unwrap();
        for method in [Method::GaussSeidel, Method::Jacobi] {
            let r = solve(&sys, &BaselineConfig::new(method, 1e-12, 10).unwrap()).unwrap();
            assert!(r.converged);
            assert_eq!(r.solution, vec![1.0, -2.0]);
            assert_eq!(r.sweeps, 1.0);
        }
    }

    #[test]
    fn zero_b_zero_solution() {
        let sys = LinearSystem::from_triplets(&[(0, 1, 0.4), (1, 0, 0.4)], vec![0.0, 0.0]).unwrap();
        let r = jacobi(&sys, 1e-12, 10).unwrap();
        assert!(r.converged);
        assert_eq!(r.sweeps, 1.0);
        assert_eq!(r.solution, vec![0.0, 0.0]);
    }

    #[test]
    fn config_validation() {
        assert!(BaselineConfig::new(Method::Jacobi, 0.0, 1).is_err());
        assert!(BaselineConfig::new(Method::Jacobi, 1e-3, 0).is_err());
    }

    #[test]
    fn divergence_is_flagged() {
        let sys = LinearSystem::from_triplets(&[(0, 0, 1.1)], vec![1.0]).unwrap();
        let r = gauss_seidel(&sys, 1e-12, 10_000).unwrap();
        assert!(!r.converged);
        assert!(r.sweeps < 10_000.0);
        assert!(r.notes.iter().any(|n| n.contains("diverging")));
    }

    #[test]
    fn jacobi_needs_more_sweeps_than_gs() {
        let p = {
            let mut p = GridProblem::dd1d(30, StencilWeights::one_d(0.5, 0.5)).unwrap();
            p.set_boundary(Site::new(0, 0), 1.0).unwrap();
            p
        };
        let sys = assemble_system(&p).unwrap();
        let gs = gauss_seidel(&sys, 1e-8, 1_000_000).unwrap();
        let jac = jacobi(&sys, 1e-8, 1_000_000).unwrap();
        assert!(gs.converged && jac.converged);
        assert!(jac.sweeps >= gs.sweeps);
        // ρ_GS = ρ_J² for consistently ordered matrices: roughly twice the sweeps
        assert!(jac.sweeps / gs.sweeps > 1.5);
    }

    #[test]
    fn thomas_identity() {
        let n = 5;
        let rhs: Vec<f64> = (0..n).map(|i| i as f64 - 1.5).collect();
        let x = tridiagonal_solve(&vec![0.0; n], &vec![1.0; n], &vec![0.0; n], &rhs).unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn thomas_poisson_parabola() {
        let n = 9;
        let dx: f64 = 0.1;
        let x = tridiagonal_solve(
            &vec![-1.0; n],
            &vec![2.0; n],
            &vec![-1.0; n],
            &vec![dx * dx; n],
        )
        .unwrap();
        assert_abs_diff_eq!(x[4], 0.125, epsilon = 1e-14);
        for (i, v) in x.iter().enumerate() {
            let xi = (i + 1) as f64 * dx;
            assert_abs_diff_eq!(*v, xi * (1.0 - xi) / 2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn thomas_zero_pivot() {
        assert!(matches!(
            tridiagonal_solve(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]),
            Err(Error::SingularMatrix(1))
        ));
        assert!(tridiagonal_solve(&[0.0], &[1.0, 1.0], &[0.0], &[1.0]).is_err());
    }
}
