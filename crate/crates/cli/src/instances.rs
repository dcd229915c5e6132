//! Problem instances the CLI and benchmark suites work on.

use anyhow::{bail, Context, Result};
use diter_core::directional::{Ode2Problem, HeatProblem};
use diter_core::stencil::{GridProblem, Site, Stability, StencilWeights};
use diter_core::validate_stability;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Heat,
    Ode2,
    RandomDd2d,
}

impl std::str::FromStr for InstanceKind {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "heat" => Self::Heat,
            "ode2" => Self::Ode2,
            "random-dd2d" => Self::RandomDd2d,
            other => bail!("unknown instance kind `{other}` (heat, ode2, random-dd2d)"),
        })
    }
}

/// Generator parameters; fields a kind does not use are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParams {
    pub k: f64,
    pub lx: usize,
    pub steps: usize,
    pub alpha: f64,
    pub beta: f64,
    pub intervals: usize,
    pub length: f64,
    pub f_const: f64,
    pub y_start: f64,
    pub y_end: f64,
    /// Largest interior extent per axis for random instances.
    pub max_extent: usize,
    /// Target `|α|` for random instances; `None` draws and rescales to ≤ 0.95.
    pub mass: Option<f64>,
    pub allow_unstable: bool,
}

impl Default for InstanceParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            lx: 50,
            steps: 50,
            alpha: 0.0,
            beta: 0.0,
            intervals: 64,
            length: 1.0,
            f_const: 1.0,
            y_start: 0.0,
            y_end: 0.0,
            max_extent: 40,
            mass: None,
            allow_unstable: false,
        }
    }
}

impl InstanceParams {
    pub fn heat_problem(&self) -> Result<HeatProblem> {
        Ok(HeatProblem::sine(self.lx, self.steps, self.k)?)
    }

    pub fn ode2_problem(&self) -> Result<Ode2Problem> {
        let c = self.f_const;
        Ok(Ode2Problem::from_fn(
            self.alpha,
            self.beta,
            self.length,
            self.intervals,
            |_| c,
            self.y_start,
            self.y_end,
        )?)
    }
}

/// Largest `|α|` a drawn random stencil is rescaled to.
pub const RANDOM_MASS_CAP: f64 = 0.95;

pub fn generate_instance(kind: InstanceKind, params: &InstanceParams, seed: u64) -> Result<GridProblem> {
    let problem = match kind {
        InstanceKind::Heat => params.heat_problem()?.grid_problem()?,
        InstanceKind::Ode2 => {
            let ode = params.ode2_problem()?;
            if !ode.within_stability_bound() && !params.allow_unstable {
                bail!(
                    "dx = {} exceeds the stability bound {:?} (pass --allow-unstable to override)",
                    ode.dx,
                    ode.stability_bound()
                );
            }
            ode.grid_problem()?
        }
        InstanceKind::RandomDd2d => random_dd2d(params, seed)?,
    };
    let verdict = validate_stability(&problem.weights())?;
    if verdict == Stability::Unstable && !params.allow_unstable {
        bail!(
            "stencil {:?} has |α| = {} > 1 (pass --allow-unstable to override)",
            problem.weights(),
            problem.weights().total_mass()
        );
    }
    Ok(problem)
}

fn random_dd2d(params: &InstanceParams, seed: u64) -> Result<GridProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max = params.max_extent.max(1);
    let ni = rng.gen_range(1..=max);
    let mi = rng.gen_range(1..=max);
    let mut a: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
    let total: f64 = a.iter().map(|v| v.abs()).sum();
    let scale = match params.mass {
        Some(target) => target / total,
        None if total > RANDOM_MASS_CAP => RANDOM_MASS_CAP / total,
        None => 1.0,
    };
    a.iter_mut().for_each(|v| *v *= scale);
    let weights = StencilWeights::new(a[0], a[1], a[2], a[3]);
    let mut problem = GridProblem::dd2d(ni + 2, mi + 2, weights)
        .context("building random instance")?;
    for site in problem.interior().sites().collect::<Vec<_>>() {
        problem.set_source(site, rng.gen_range(-1.0..1.0))?;
    }
    for site in problem.boundary_sites().collect::<Vec<Site>>() {
        problem.set_boundary(site, rng.gen_range(-1.0..1.0))?;
    }
    Ok(problem)
}
