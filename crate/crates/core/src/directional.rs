//! Direction-by-direction solvers built on the 1D catalyst profiles: the
//! implicit heat equation (one time layer at a time, each layer relaxed
//! exactly along x) and the general second-order linear two-point problem.

use std::io::{self, Write};
use std::time::Instant;

use crate::catalyst::{apply_profile_row_into, CatalystProfile, Compensation};
use crate::diffusion::{init_fluid, run, Schedule, Strategy};
use crate::error::{Error, Result};
use crate::report::{norms, ResidualNorm, SolveReport};
use crate::stencil::{assemble_system, GridProblem, Rect, Site, StencilWeights};

/// Stencil of the implicit heat scheme with time along `n` and space along `m`:
/// `a_east = 1/(1+2k)` (time), `a_north = a_south = k/(1+2k)`, `a_west = 0`.
pub fn heat_coefficients(k: f64) -> Result<StencilWeights> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidInput(format!("k must be finite and > 0, got {k}")));
    }
    let denom = 1.0 + 2.0 * k;
    let a_x = k / denom;
    Ok(StencilWeights::new(1.0 / denom, 0.0, a_x, a_x))
}

/// `∂_t U = ∂_x² U` on `[0, 1]`, discretized with `lx` intervals and `steps`
/// implicit time steps of size `dt = k·dx²`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatProblem {
    pub lx: usize,
    pub steps: usize,
    pub dx: f64,
    pub dt: f64,
    pub k: f64,
    /// Initial profile on sites `0..=lx`.
    pub u0: Vec<f64>,
    /// `U(t, 0)` for `t = 0..=steps`.
    pub left: Vec<f64>,
    /// `U(t, lx)` for `t = 0..=steps`.
    pub right: Vec<f64>,
}

impl HeatProblem {
    pub fn new(lx: usize, steps: usize, k: f64, u0: Vec<f64>) -> Result<Self> {
        if lx < 2 {
            return Err(Error::InvalidInput(format!("lx must be >= 2, got {lx}")));
        }
        if u0.len() != lx + 1 {
            return Err(Error::InvalidInput(format!(
                "u0 has {} values, expected {}",
                u0.len(),
                lx + 1
            )));
        }
        if u0.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("u0 is not finite".into()));
        }
        heat_coefficients(k)?;
        let dx = 1.0 / lx as f64;
        let mut left = vec![0.0; steps + 1];
        let mut right = vec![0.0; steps + 1];
        left[0] = u0[0];
        right[0] = u0[lx];
        Ok(Self {
            lx,
            steps,
            dx,
            dt: k * dx * dx,
            k,
            u0,
            left,
            right,
        })
    }

    /// `U(0, x) = sin(πx)` with zero ends.
    pub fn sine(lx: usize, steps: usize, k: f64) -> Result<Self> {
        let u0 = (0..=lx)
            .map(|i| {
                if i == 0 || i == lx {
                    0.0
                } else {
                    (std::f64::consts::PI * i as f64 / lx as f64).sin()
                }
            })
            .collect();
        Self::new(lx, steps, k, u0)
    }

    /// Prescribed end values for `t ≥ 1`; `t = 0` keeps `u0`'s ends.
    pub fn with_boundary_values(mut self, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if left.len() != self.steps + 1 || right.len() != self.steps + 1 {
            return Err(Error::InvalidInput(format!(
                "boundary series need {} values",
                self.steps + 1
            )));
        }
        self.left = left;
        self.right = right;
        self.left[0] = self.u0[0];
        self.right[0] = self.u0[self.lx];
        Ok(self)
    }

    pub fn weights(&self) -> StencilWeights {
        heat_coefficients(self.k).expect("validated at construction")
    }

    /// Unknowns of the full space-time system.
    pub fn dimension(&self) -> usize {
        self.steps * (self.lx - 1)
    }

    /// The whole space-time problem as a grid problem: `n` is time (`0..=steps`,
    /// row 0 is boundary), `m` is space (`0..=lx`, columns 0 and `lx` are boundary).
    pub fn grid_problem(&self) -> Result<GridProblem> {
        let interior = Rect::new(1, self.steps + 1, 1, self.lx);
        let mut p = GridProblem::new((self.steps + 1, self.lx + 1), interior, self.weights())?;
        for x in 1..self.lx {
            p.set_boundary(Site::new(0, x), self.u0[x])?;
        }
        for t in 1..=self.steps {
            p.set_boundary(Site::new(t, 0), self.left[t])?;
            p.set_boundary(Site::new(t, self.lx), self.right[t])?;
        }
        Ok(p)
    }

    /// Lays out interior values of the full system (time-major) as a field with
    /// boundary values filled in.
    pub fn field_from_interior(&self, interior: &[f64]) -> Vec<Vec<f64>> {
        let m = self.lx - 1;
        assert_eq!(interior.len(), self.steps * m);
        let mut field = Vec::with_capacity(self.steps + 1);
        field.push(self.u0.clone());
        for t in 1..=self.steps {
            let mut row = vec![0.0; self.lx + 1];
            row[0] = self.left[t];
            row[self.lx] = self.right[t];
            row[1..self.lx].copy_from_slice(&interior[(t - 1) * m..t * m]);
            field.push(row);
        }
        field
    }
}

/// Largest violation of the implicit scheme
/// `(U(t,n) - U(t-1,n))/dt = (U(t,n+1) + U(t,n-1) - 2U(t,n))/dx²` over
/// `t ≥ 1` and interior `n`.
pub fn heat_scheme_residual(problem: &HeatProblem, field: &[Vec<f64>]) -> f64 {
    let (dt, dx2) = (problem.dt, problem.dx * problem.dx);
    let mut worst: f64 = 0.0;
    for t in 1..field.len() {
        let (prev, row) = (&field[t - 1], &field[t]);
        for n in 1..problem.lx {
            let lhs = (row[n] - prev[n]) / dt;
            let rhs = (row[n + 1] + row[n - 1] - 2.0 * row[n]) / dx2;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    worst
}

/// Largest violation of the fixed-point form
/// `U(t,n) = a_time·U(t-1,n) + a_x·(U(t,n+1) + U(t,n-1))`, as `(L1, L∞)`.
fn heat_fixed_point_residual(problem: &HeatProblem, field: &[Vec<f64>]) -> (f64, f64) {
    let w = problem.weights();
    let mut l1 = 0.0;
    let mut linf: f64 = 0.0;
    for t in 1..field.len() {
        let (prev, row) = (&field[t - 1], &field[t]);
        for n in 1..problem.lx {
            let r = (row[n] - w.a_east * prev[n] - w.a_north * (row[n + 1] + row[n - 1])).abs();
            l1 += r;
            linf = linf.max(r);
        }
    }
    (l1, linf)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatSolution {
    /// `field[t][x]` for `t = 0..=steps`, `x = 0..=lx`.
    pub field: Vec<Vec<f64>>,
    pub report: SolveReport,
}

/// Time-marches the heat problem: each layer receives `a_time·H(t-1, ·)` as
/// fluid, which is then diffused along x to its exact limit with the
/// symmetric catalyst profile of `a_x`.
///
/// `ops` counts one site update per interior site per layer; the report's
/// residual is the fixed-point residual of the full space-time system.
pub fn solve_heat_directional(problem: &HeatProblem, tolerance: f64) -> Result<HeatSolution> {
    solve_heat_directional_with(problem, tolerance, Compensation::ClosedForm)
}

pub fn solve_heat_directional_with(
    problem: &HeatProblem,
    tolerance: f64,
    compensation: Compensation,
) -> Result<HeatSolution> {
    let w = problem.weights();
    let lx = problem.lx;
    let mut profile = CatalystProfile::symmetric(w.a_north)?;
    if compensation == Compensation::Iterative {
        profile.normalize(None)?;
    }
    let mut report = SolveReport::new("di-directional", tolerance);
    report.residual_norm = ResidualNorm::Exact;
    let start = Instant::now();

    let mut field = Vec::with_capacity(problem.steps + 1);
    field.push(problem.u0.clone());
    let mut fluid = vec![0.0; lx + 1];
    let mut row = vec![0.0; lx + 1];
    for t in 1..=problem.steps {
        let prev: &Vec<f64> = field.last().expect("row 0 present");
        for x in 1..lx {
            fluid[x] = w.a_east * prev[x];
        }
        fluid[1] += w.a_north * problem.left[t];
        fluid[lx - 1] += w.a_south * problem.right[t];
        apply_profile_row_into(&fluid, &profile, tolerance, compensation, &mut row)?;
        row[0] = problem.left[t];
        row[lx] = problem.right[t];
        field.push(row.clone());
    }
    report.wall = start.elapsed();

    let dim = problem.dimension();
    let (l1, linf) = heat_fixed_point_residual(problem, &field);
    report.ops = dim as u64;
    report.sweeps = if dim > 0 { 1.0 } else { 0.0 };
    report.residual_l1 = l1;
    report.residual_linf = linf;
    report.converged = linf <= tolerance;
    report.peak_memory_bytes =
        (field.len() * (lx + 1) + 2 * (lx + 1)) * std::mem::size_of::<f64>();
    report
        .notes
        .push(format!("row_applies={}", problem.steps));
    report.solution = field[1..]
        .iter()
        .flat_map(|r| r[1..lx].iter().copied())
        .collect();
    Ok(HeatSolution { field, report })
}

/// Writes `t,x,u` rows with physical coordinates.
pub fn write_field_csv<W: Write>(problem: &HeatProblem, field: &[Vec<f64>], mut out: W) -> io::Result<()> {
    writeln!(out, "t,x,u")?;
    for (t, row) in field.iter().enumerate() {
        for (x, u) in row.iter().enumerate() {
            writeln!(
                out,
                "{},{},{:e}",
                t as f64 * problem.dt,
                x as f64 * problem.dx,
                u
            )?;
        }
    }
    Ok(())
}

/// `y'' + alpha·y' + beta·y = f` on `[0, n·dx]` with Dirichlet ends, `y'`
/// discretized by the backward difference `(y(n) - y(n-1))/dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ode2Problem {
    pub alpha: f64,
    pub beta: f64,
    pub dx: f64,
    /// `f` on sites `0..=n`.
    pub rhs: Vec<f64>,
    pub y_start: f64,
    pub y_end: f64,
}

impl Ode2Problem {
    pub fn new(alpha: f64, beta: f64, dx: f64, rhs: Vec<f64>, y_start: f64, y_end: f64) -> Result<Self> {
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(Error::InvalidInput(format!("dx must be > 0, got {dx}")));
        }
        if rhs.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "need at least 3 sites, got {}",
                rhs.len()
            )));
        }
        if ![alpha, beta, y_start, y_end].iter().all(|v| v.is_finite())
            || rhs.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidInput("non-finite ODE data".into()));
        }
        Ok(Self {
            alpha,
            beta,
            dx,
            rhs,
            y_start,
            y_end,
        })
    }

    /// Samples `f` on `intervals + 1` equispaced sites of `[0, length]`.
    pub fn from_fn(
        alpha: f64,
        beta: f64,
        length: f64,
        intervals: usize,
        f: impl Fn(f64) -> f64,
        y_start: f64,
        y_end: f64,
    ) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 intervals, got {intervals}"
            )));
        }
        let dx = length / intervals as f64;
        let rhs = (0..=intervals).map(|i| f(i as f64 * dx)).collect();
        Self::new(alpha, beta, dx, rhs, y_start, y_end)
    }

    pub fn intervals(&self) -> usize {
        self.rhs.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.dx * self.intervals() as f64
    }

    /// `min(2|alpha|/|beta|, 1/|alpha|, 1/√|beta|)`, dropping terms with a zero
    /// denominator; `None` when every term is dropped.
    pub fn stability_bound(&self) -> Option<f64> {
        let (a, b) = (self.alpha.abs(), self.beta.abs());
        let mut terms = Vec::with_capacity(3);
        if b > 0.0 {
            terms.push(2.0 * a / b);
            terms.push(1.0 / b.sqrt());
        }
        if a > 0.0 {
            terms.push(1.0 / a);
        }
        terms.into_iter().reduce(f64::min)
    }

    pub fn within_stability_bound(&self) -> bool {
        self.stability_bound().is_none_or(|bound| self.dx <= bound)
    }

    /// The discretization as a 1D grid problem on sites `0..=n`.
    pub fn grid_problem(&self) -> Result<GridProblem> {
        let d = discretize_ode2(self)?;
        let n = self.intervals();
        let mut p = GridProblem::dd1d(n + 1, d.weights)?;
        for x in 1..n {
            p.set_source(Site::new(x, 0), -d.gamma * self.rhs[x])?;
        }
        p.set_boundary(Site::new(0, 0), self.y_start)?;
        p.set_boundary(Site::new(n, 0), self.y_end)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ode2Discretization {
    /// `a_plus` multiplies `y(n-1)`, `a_minus` multiplies `y(n+1)`.
    pub weights: StencilWeights,
    pub gamma: f64,
    /// Fluid on interior sites `1..n`: `-γ·f` plus boundary inflow.
    pub b: Vec<f64>,
    /// Set when `dx` exceeds the sufficient stability bound.
    pub stability_warning: bool,
}

/// Solves the difference equation for `y(n)`:
///
/// ```text
/// y(n) = a_minus·y(n+1) + a_plus·y(n-1) - γ·f(n)
/// pivot   = 2 - alpha·dx - beta·dx²
/// a_minus = 1 / pivot
/// a_plus  = (1 - alpha·dx) / pivot
/// γ       = dx² / pivot
/// ```
pub fn discretize_ode2(problem: &Ode2Problem) -> Result<Ode2Discretization> {
    let dx = problem.dx;
    let pivot = 2.0 - problem.alpha * dx - problem.beta * dx * dx;
    if pivot == 0.0 || !pivot.is_finite() {
        return Err(Error::SingularDiscretization(pivot));
    }
    let a_minus = 1.0 / pivot;
    let a_plus = (1.0 - problem.alpha * dx) / pivot;
    let gamma = dx * dx / pivot;
    let n = problem.intervals();
    let mut b: Vec<f64> = problem.rhs[1..n].iter().map(|f| -gamma * f).collect();
    b[0] += a_plus * problem.y_start;
    b[n - 2] += a_minus * problem.y_end;
    Ok(Ode2Discretization {
        weights: StencilWeights::one_d(a_plus, a_minus),
        gamma,
        b,
        stability_warning: !problem.within_stability_bound(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ode2Solution {
    /// `y` on sites `0..=n`, ends included.
    pub y: Vec<f64>,
    pub report: SolveReport,
}

/// Distributes all fluid of the discretized problem in one catalyst row pass.
/// When the profile has complex roots or cannot be normalized, falls back to
/// a sweep-scheduled D-iteration and notes it in the report.
pub fn solve_ode2(problem: &Ode2Problem, tolerance: f64) -> Result<Ode2Solution> {
    let d = discretize_ode2(problem)?;
    let n = problem.intervals();
    let start = Instant::now();
    let mut report = SolveReport::new("di-directional", tolerance);
    if d.stability_warning {
        report.notes.push(format!(
            "dx={} exceeds the sufficient stability bound {:?}",
            problem.dx,
            problem.stability_bound()
        ));
    }

    let direct = CatalystProfile::new(d.weights.a_plus(), d.weights.a_minus()).and_then(|profile| {
        let mut fluid = vec![0.0; n + 1];
        fluid[1..n].copy_from_slice(&d.b);
        let mut out = vec![0.0; n + 1];
        apply_profile_row_into(&fluid, &profile, tolerance, Compensation::ClosedForm, &mut out)?;
        Ok(out)
    });

    let mut y = match direct {
        Ok(y) => {
            report.residual_norm = ResidualNorm::Exact;
            report.ops = (n - 1) as u64;
            report.sweeps = 1.0;
            y
        }
        Err(e @ (Error::ComplexRoots(_) | Error::UnstableProfile(_))) => {
            report.notes.push(format!("catalyst unavailable ({e}); fell back to di-sweep"));
            let system = assemble_system(&problem.grid_problem()?)?;
            let mut state = init_fluid(&system);
            let dim = system.dimension() as u64;
            let schedule = Schedule::new(Strategy::Sweep, tolerance, dim.saturating_mul(1_000_000))?;
            let sub = run(&mut state, &system, &schedule)?;
            report.solver = "di-sweep".into();
            report.residual_norm = ResidualNorm::L1Fluid;
            report.ops = sub.ops;
            report.sweeps = sub.sweeps;
            report.trace = sub.trace;
            let mut y = vec![0.0; n + 1];
            y[1..n].copy_from_slice(&state.history);
            y
        }
        Err(e) => return Err(e),
    };
    y[0] = problem.y_start;
    y[n] = problem.y_end;
    report.wall = start.elapsed();

    let residual: Vec<f64> = (1..n)
        .map(|x| {
            y[x] - d.weights.a_minus() * y[x + 1] - d.weights.a_plus() * y[x - 1]
                + d.gamma * problem.rhs[x]
        })
        .collect();
    let (l1, linf) = norms(&residual);
    report.residual_l1 = l1;
    report.residual_linf = linf;
    report.converged = report.stopping_residual() <= tolerance;
    report.peak_memory_bytes = 3 * (n + 1) * std::mem::size_of::<f64>();
    report.solution = y[1..n].to_vec();
    Ok(Ode2Solution { y, report })
}

/// Writes `x,y` rows.
pub fn write_ode_csv<W: Write>(problem: &Ode2Problem, y: &[f64], mut out: W) -> io::Result<()> {
    writeln!(out, "x,y")?;
    for (i, v) in y.iter().enumerate() {
        writeln!(out, "{},{:e}", i as f64 * problem.dx, v)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{implicit_heat_direct, tridiagonal_solve};
    use approx::assert_abs_diff_eq;

    #[test]
    fn heat_weights() {
        let w = heat_coefficients(1.0).unwrap();
        assert_eq!(w, StencilWeights::new(1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0));
        let w = heat_coefficients(0.5).unwrap();
        assert_eq!((w.a_east, w.a_north), (0.5, 0.25));
        let w = heat_coefficients(1e-12).unwrap();
        assert_abs_diff_eq!(w.a_east, 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(w.a_north, 0.0, epsilon = 1e-11);
        for k in [0.1, 0.5, 1.0, 2.0, 37.0] {
            let w = heat_coefficients(k).unwrap();
            assert_abs_diff_eq!(w.a_east + w.a_north + w.a_south, 1.0, epsilon = 1e-15);
        }
        assert!(heat_coefficients(0.0).is_err());
        assert!(heat_coefficients(-1.0).is_err());
    }

    #[test]
    fn heat_zero_initial() {
        let p = HeatProblem::new(10, 5, 1.0, vec![0.0; 11]).unwrap();
        let sol = solve_heat_directional(&p, 1e-12).unwrap();
        assert!(sol.field.iter().flatten().all(|v| *v == 0.0));
        assert!(sol.report.converged);
    }

    #[test]
    fn heat_matches_tridiagonal_stepping() {
        let p = HeatProblem::sine(32, 20, 1.0).unwrap();
        let sol = solve_heat_directional(&p, 1e-12).unwrap();
        let direct = implicit_heat_direct(&p.u0, p.k, p.steps).unwrap();
        for (a, b) in sol.field.iter().zip(&direct) {
            for (u, v) in a.iter().zip(b) {
                assert_abs_diff_eq!(*u, *v, epsilon = 1e-12);
            }
        }
        assert!(heat_scheme_residual(&p, &sol.field) < 1e-9);
        assert_eq!(sol.report.ops, 20 * 31);
    }

    #[test]
    fn heat_iterative_compensation_agrees() {
        let p = HeatProblem::sine(24, 10, 2.0).unwrap();
        let a = solve_heat_directional(&p, 1e-14).unwrap();
        let b = solve_heat_directional_with(&p, 1e-14, Compensation::Iterative).unwrap();
        for (u, v) in a.field.iter().flatten().zip(b.field.iter().flatten()) {
            assert_abs_diff_eq!(*u, *v, epsilon = 1e-12);
        }
    }

    #[test]
    fn heat_with_boundary_values_matches_full_system() {
        let p = HeatProblem::new(8, 4, 0.7, vec![0.0; 9])
            .unwrap()
            .with_boundary_values(vec![0.0, 1.0, 1.0, 0.5, 0.0], vec![0.0, 0.0, -1.0, -1.0, 2.0])
            .unwrap();
        let sol = solve_heat_directional(&p, 1e-12).unwrap();
        let grid = p.grid_problem().unwrap();
        let interior: Vec<f64> = sol.field[1..]
            .iter()
            .flat_map(|r| r[1..8].iter().copied())
            .collect();
        let res = grid.scheme_residual(&interior);
        assert!(res.iter().all(|r| r.abs() < 1e-13));
        assert_eq!(p.field_from_interior(&interior), sol.field);
    }

    #[test]
    fn field_csv_layout() {
        let p = HeatProblem::sine(2, 1, 1.0).unwrap();
        let sol = solve_heat_directional(&p, 1e-12).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&p, &sol.field, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("t,x,u"));
        assert_eq!(text.lines().count(), 1 + 2 * 3);
    }

    fn ode(alpha: f64, beta: f64, intervals: usize, f: impl Fn(f64) -> f64, y0: f64, y1: f64) -> Ode2Problem {
        Ode2Problem::from_fn(alpha, beta, 1.0, intervals, f, y0, y1).unwrap()
    }

    #[test]
    fn laplacian_averaging_weights() {
        let p = ode(0.0, 0.0, 10, |_| 0.0, 0.0, 0.0);
        let d = discretize_ode2(&p).unwrap();
        assert_eq!(d.weights.a_plus(), 0.5);
        assert_eq!(d.weights.a_minus(), 0.5);
        assert_abs_diff_eq!(d.gamma, 0.01 / 2.0, epsilon = 1e-18);
        assert!(!d.stability_warning);
    }

    #[test]
    fn negative_beta_symmetric_weights() {
        let beta = -3.0;
        let p = ode(0.0, beta, 10, |_| 0.0, 0.0, 0.0);
        let d = discretize_ode2(&p).unwrap();
        let expected = 1.0 / (2.0 - beta * 0.01);
        assert_abs_diff_eq!(d.weights.a_plus(), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(d.weights.a_minus(), expected, epsilon = 1e-15);
        assert!(d.weights.a_plus() < 0.5);
        // constant y = 1 with f = beta satisfies both forms
        let lhs = 1.0;
        let rhs = d.weights.a_plus() + d.weights.a_minus() - d.gamma * beta;
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-15);
    }

    #[test]
    fn substitution_on_quadratics() {
        // y = c0 + c1 x + c2 x²: the recurrence must reproduce the difference equation exactly
        for &(alpha, beta, dx) in &[(0.0, 0.0, 0.1), (1.0, -1.0, 0.05), (-2.0, 3.0, 0.2), (0.5, 0.0, 0.25)] {
            let p = Ode2Problem::new(alpha, beta, dx, vec![0.0; 5], 0.0, 0.0).unwrap();
            let d = discretize_ode2(&p).unwrap();
            let y = |x: f64| 0.3 - 1.7 * x + 2.2 * x * x;
            for n in 1..4 {
                let x = n as f64 * dx;
                let (ym, y0, yp) = (y(x - dx), y(x), y(x + dx));
                let f = (yp + ym - 2.0 * y0) / (dx * dx) + alpha * (y0 - ym) / dx + beta * y0;
                let recon = d.weights.a_minus() * yp + d.weights.a_plus() * ym - d.gamma * f;
                assert_abs_diff_eq!(recon, y0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn singular_pivot() {
        // pivot = 2 - alpha·dx with dx = 0.5, alpha = 4
        let p = Ode2Problem::new(4.0, 0.0, 0.5, vec![0.0; 4], 0.0, 0.0).unwrap();
        assert!(matches!(discretize_ode2(&p), Err(Error::SingularDiscretization(_))));
    }

    #[test]
    fn stability_bound_conventions() {
        let p = ode(1.0, -1.0, 64, |_| 0.0, 0.0, 0.0);
        assert_eq!(p.stability_bound(), Some(1.0));
        let p = ode(0.0, 0.0, 64, |_| 0.0, 0.0, 0.0);
        assert_eq!(p.stability_bound(), None);
        let p = ode(0.0, -4.0, 64, |_| 0.0, 0.0, 0.0);
        assert_eq!(p.stability_bound(), Some(0.0));
        let p = ode(2.0, 0.0, 64, |_| 0.0, 0.0, 0.0);
        assert_eq!(p.stability_bound(), Some(0.5));
        let p = Ode2Problem::new(4.0, 0.0, 0.3, vec![0.0; 4], 0.0, 0.0).unwrap();
        assert!(discretize_ode2(&p).unwrap().stability_warning);
    }

    #[test]
    fn ode_zero_data() {
        let p = ode(1.0, -1.0, 32, |_| 0.0, 0.0, 0.0);
        let sol = solve_ode2(&p, 1e-12).unwrap();
        assert!(sol.y.iter().all(|v| *v == 0.0));
        assert!(sol.report.converged);
    }

    #[test]
    fn manufactured_linear_solution() {
        // y = x solves y'' + alpha y' + beta y = alpha + beta x; the backward
        // difference is exact on linear functions
        for &(alpha, beta) in &[(1.0, -1.0), (0.5, 2.0), (0.0, -3.0)] {
            let p = ode(alpha, beta, 50, |x| alpha + beta * x, 0.0, 1.0);
            let sol = solve_ode2(&p, 1e-12).unwrap();
            for (i, v) in sol.y.iter().enumerate() {
                assert_abs_diff_eq!(*v, i as f64 * p.dx, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn poisson_matches_thomas() {
        let p = ode(0.0, 0.0, 64, |_| 1.0, 0.0, 0.0);
        let sol = solve_ode2(&p, 1e-12).unwrap();
        let m = 63;
        let dx2 = p.dx * p.dx;
        let x = tridiagonal_solve(&vec![1.0; m], &vec![-2.0; m], &vec![1.0; m], &vec![dx2; m]).unwrap();
        for i in 0..m {
            assert_abs_diff_eq!(sol.y[i + 1], x[i], epsilon = 1e-12);
            let xi = (i + 1) as f64 * p.dx;
            assert_abs_diff_eq!(sol.y[i + 1], xi * (xi - 1.0) / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn complex_roots_fall_back() {
        // positive beta·dx² makes 4·a_plus·a_minus exceed 1; two interior
        // sites keep ρ(P) = √(a_plus·a_minus) < 1
        let q = Ode2Problem::new(0.0, 2.0, 0.5, vec![1.0; 4], 1.0, 0.0).unwrap();
        let d = discretize_ode2(&q).unwrap();
        let (ap, am) = (d.weights.a_plus(), d.weights.a_minus());
        assert!(4.0 * ap * am > 1.0, "a_plus={ap} a_minus={am}");
        let sol = solve_ode2(&q, 1e-12);
        match sol {
            Ok(sol) => {
                assert!(sol.report.notes.iter().any(|n| n.contains("fell back")));
                assert_eq!(sol.report.solver, "di-sweep");
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }
}
