//! The D-iteration: a history vector `H` accumulates diffused mass while the
//! fluid vector `F` carries what is left to diffuse.
//!
//! The invariant `F = B + (P - I)·H` holds after every elementary diffusion,
//! so `Σ|F|` measures how far `H` is from the fixed point of `X = P·X + B`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::report::{norms, ResidualNorm, SolveReport, TracePoint};
use crate::stencil::LinearSystem;

/// Fluid magnitudes below this are flushed to zero.
pub const FLUSH_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub history: Vec<f64>,
    pub fluid: Vec<f64>,
    pub op_count: u64,
}

impl FluidState {
    pub fn dimension(&self) -> usize {
        self.fluid.len()
    }

    /// `max_i |F_i - (B + (P - I)·H)_i|`.
    pub fn identity_defect(&self, system: &LinearSystem) -> f64 {
        let expected = system.fixed_point_residual(&self.history);
        self.fluid
            .iter()
            .zip(expected)
            .map(|(f, e)| (f - e).abs())
            .fold(0.0, f64::max)
    }
}

pub fn init_fluid(system: &LinearSystem) -> FluidState {
    FluidState {
        history: vec![0.0; system.dimension()],
        fluid: system.b().to_vec(),
        op_count: 0,
    }
}

/// Σ|F|.
pub fn residual_norm(state: &FluidState) -> f64 {
    state.fluid.iter().map(|f| f.abs()).sum()
}

/// Applies one elementary diffusion at `site` and returns the amount diffused.
///
/// Fluid sent toward a boundary neighbor has no entry in `P` and is absorbed.
pub fn diffuse_site(state: &mut FluidState, system: &LinearSystem, site: usize) -> Result<f64> {
    let dimension = state.dimension();
    if site >= dimension {
        return Err(Error::IndexOutOfRange {
            index: site,
            dimension,
        });
    }
    Ok(diffuse_unchecked(state, system, site))
}

#[inline]
fn diffuse_unchecked(state: &mut FluidState, system: &LinearSystem, site: usize) -> f64 {
    let amount = state.fluid[site];
    state.op_count += 1;
    if amount == 0.0 {
        return 0.0;
    }
    state.history[site] += amount;
    state.fluid[site] = 0.0;
    for (target, weight) in system.pushes().row(site) {
        let f = &mut state.fluid[target];
        *f += weight * amount;
        if f.abs() < FLUSH_THRESHOLD {
            *f = 0.0;
        }
    }
    amount
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    /// Cyclic ascending index order; sites without fluid are skipped.
    Sweep,
    /// Always the site with the largest `|F|`; ties go to the lowest index.
    Greedy,
    /// Explicit site sequence, repeated cyclically.
    Custom(Vec<usize>),
}

impl Strategy {
    pub fn id(&self) -> &'static str {
        match self {
            Strategy::Sweep => "di-sweep",
            Strategy::Greedy => "di-greedy",
            Strategy::Custom(_) => "di-custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub strategy: Strategy,
    pub tolerance: f64,
    pub max_ops: u64,
}

impl Schedule {
    pub fn new(strategy: Strategy, tolerance: f64, max_ops: u64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance must be > 0, got {tolerance}"
            )));
        }
        if max_ops == 0 {
            return Err(Error::InvalidInput("max_ops must be >= 1".into()));
        }
        if let Strategy::Custom(seq) = &strategy {
            if seq.is_empty() {
                return Err(Error::InvalidInput("custom schedule is empty".into()));
            }
        }
        Ok(Self {
            strategy,
            tolerance,
            max_ops,
        })
    }
}

struct Tracer {
    start: Instant,
    dimension: usize,
    next_sample: u64,
    points: Vec<TracePoint>,
}

impl Tracer {
    fn new(dimension: usize) -> Self {
        Self {
            start: Instant::now(),
            dimension: dimension.max(1),
            next_sample: 0,
            points: Vec::new(),
        }
    }

    /// Records a sample if `ops` reached the next multiple of the dimension.
    fn maybe_sample(&mut self, state: &FluidState) -> Option<(f64, f64)> {
        if state.op_count < self.next_sample {
            return None;
        }
        let sample = self.sample(state);
        let step = self.dimension as u64;
        self.next_sample = (state.op_count / step + 1) * step;
        Some(sample)
    }

    fn sample(&mut self, state: &FluidState) -> (f64, f64) {
        let (l1, linf) = norms(&state.fluid);
        self.points.push(TracePoint {
            ops: state.op_count,
            sweep_equiv: state.op_count as f64 / self.dimension as f64,
            l1_residual: l1,
            linf_residual: linf,
            wall_ns: self.start.elapsed().as_nanos(),
        });
        (l1, linf)
    }
}

/// Runs the D-iteration from `state` until `Σ|F| ≤ tolerance` or the
/// operation cap is hit.
///
/// The trace is sampled every `dimension` elementary operations and at exit.
/// Hitting `max_ops` is reported through `converged = false`, not as an error.
pub fn run(
    state: &mut FluidState,
    system: &LinearSystem,
    schedule: &Schedule,
) -> Result<SolveReport> {
    let dimension = system.dimension();
    if state.dimension() != dimension {
        return Err(Error::InvalidInput(format!(
            "state dimension {} does not match system dimension {dimension}",
            state.dimension()
        )));
    }
    let mut report = SolveReport::new(schedule.strategy.id(), schedule.tolerance);
    report.residual_norm = ResidualNorm::L1Fluid;
    let mut tracer = Tracer::new(dimension);
    let start_ops = state.op_count;
    let budget_end = start_ops.saturating_add(schedule.max_ops);

    let converged = match &schedule.strategy {
        Strategy::Sweep => run_cyclic(state, system, schedule, &mut tracer, budget_end, None)?,
        Strategy::Custom(seq) => {
            if let Some(&bad) = seq.iter().find(|&&s| s >= dimension) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    dimension,
                });
            }
            run_cyclic(state, system, schedule, &mut tracer, budget_end, Some(seq))?
        }
        Strategy::Greedy => run_greedy(state, system, schedule, &mut tracer, budget_end)?,
    };

    let (l1, linf) = tracer.sample(state);
    check_finite(l1)?;
    report.wall = tracer.start.elapsed();
    report.converged = converged && l1 <= schedule.tolerance;
    report.ops = state.op_count - start_ops;
    report.sweeps = report.ops as f64 / dimension.max(1) as f64;
    report.residual_l1 = l1;
    report.residual_linf = linf;
    report.trace = tracer.points;
    report.solution = state.history.clone();
    report.peak_memory_bytes = 2 * dimension * std::mem::size_of::<f64>()
        + system.rows().nnz() * 2 * (std::mem::size_of::<f64>() + std::mem::size_of::<usize>());
    Ok(report)
}

fn check_finite(l1: f64) -> Result<()> {
    if l1.is_finite() {
        Ok(())
    } else {
        Err(Error::NumericalFailure(format!("fluid norm became {l1}")))
    }
}

fn run_cyclic(
    state: &mut FluidState,
    system: &LinearSystem,
    schedule: &Schedule,
    tracer: &mut Tracer,
    budget_end: u64,
    order: Option<&[usize]>,
) -> Result<bool> {
    let dimension = system.dimension();
    if dimension == 0 {
        return Ok(true);
    }
    let len = order.map_or(dimension, |o| o.len());
    loop {
        let l1 = residual_norm(state);
        check_finite(l1)?;
        if l1 <= schedule.tolerance {
            return Ok(true);
        }
        let mut progressed = false;
        for k in 0..len {
            let site = order.map_or(k, |o| o[k]);
            if state.fluid[site] == 0.0 {
                continue;
            }
            if state.op_count >= budget_end {
                return Ok(false);
            }
            diffuse_unchecked(state, system, site);
            progressed = true;
            tracer.maybe_sample(state);
        }
        if !progressed {
            // custom order that never touches the remaining fluid
            return Ok(residual_norm(state) <= schedule.tolerance);
        }
    }
}

/// Heap entry; ordered by `|F|` then by lowest index.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    magnitude: f64,
    site: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.magnitude
            .total_cmp(&other.magnitude)
            .then_with(|| other.site.cmp(&self.site))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn run_greedy(
    state: &mut FluidState,
    system: &LinearSystem,
    schedule: &Schedule,
    tracer: &mut Tracer,
    budget_end: u64,
) -> Result<bool> {
    let mut heap: BinaryHeap<Candidate> = state
        .fluid
        .iter()
        .enumerate()
        .filter(|(_, f)| **f != 0.0)
        .map(|(site, f)| Candidate {
            magnitude: f.abs(),
            site,
        })
        .collect();
    let mut l1 = residual_norm(state);
    check_finite(l1)?;
    // running Σ|F| drifts; it is refreshed exactly at every trace sample
    loop {
        if l1 <= schedule.tolerance {
            l1 = residual_norm(state);
            if l1 <= schedule.tolerance {
                return Ok(true);
            }
        }
        if state.op_count >= budget_end {
            return Ok(false);
        }
        let Some(top) = heap.pop() else {
            return Ok(residual_norm(state) <= schedule.tolerance);
        };
        // lazy deletion: stale entries no longer match the current fluid
        if state.fluid[top.site].abs() != top.magnitude || top.magnitude == 0.0 {
            continue;
        }
        let amount = state.fluid[top.site];
        l1 -= amount.abs();
        state.history[top.site] += amount;
        state.fluid[top.site] = 0.0;
        state.op_count += 1;
        for (target, weight) in system.pushes().row(top.site) {
            let f = &mut state.fluid[target];
            let before = f.abs();
            *f += weight * amount;
            if f.abs() < FLUSH_THRESHOLD {
                *f = 0.0;
            }
            l1 += f.abs() - before;
            if *f != 0.0 {
                heap.push(Candidate {
                    magnitude: f.abs(),
                    site: target,
                });
            }
        }
        if let Some((exact, _)) = tracer.maybe_sample(state) {
            check_finite(exact)?;
            l1 = exact;
        }
        if heap.len() > 8 * state.dimension() + 64 {
            heap = rebuild_heap(state);
        }
    }
}

fn rebuild_heap(state: &FluidState) -> BinaryHeap<Candidate> {
    state
        .fluid
        .iter()
        .enumerate()
        .filter(|(_, f)| **f != 0.0)
        .map(|(site, f)| Candidate {
            magnitude: f.abs(),
            site,
        })
        .collect()
}

/// Upper bound on `‖(I - P)⁻¹‖∞`, used to turn a residual into an error bound.
///
/// Diffuses a unit fluid on every site through `|P|`. With nonnegative fluid
/// left after stopping, `z = (I - |P|)⁻¹·1` satisfies
/// `‖z‖∞ ≤ ‖H‖∞ / (1 - ‖F‖∞)`, and `‖(I - P)⁻¹‖∞ ≤ ‖z‖∞`. Returns `None` when
/// `|P|` does not settle within `max_ops` elementary diffusions.
pub fn error_amplification_bound(system: &LinearSystem, max_ops: u64) -> Result<Option<f64>> {
    let dim = system.dimension();
    if dim == 0 {
        return Ok(Some(1.0));
    }
    let triplets: Vec<_> = system
        .rows()
        .to_triplets()
        .into_iter()
        .map(|(i, j, v)| (i, j, v.abs()))
        .collect();
    let magnitude = LinearSystem::from_triplets(&triplets, vec![1.0; dim])?;
    let mut state = init_fluid(&magnitude);
    let schedule = Schedule::new(Strategy::Sweep, 0.1, max_ops)?;
    let report = run(&mut state, &magnitude, &schedule)?;
    if !report.converged {
        return Ok(None);
    }
    let (_, h_inf) = norms(&state.history);
    let (_, f_inf) = norms(&state.fluid);
    Ok(Some((h_inf / (1.0 - f_inf)).max(1.0)))
}
