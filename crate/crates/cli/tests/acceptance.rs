//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use diter_cli::bench::{run_bench, BenchConfig, Suite};
use diter_cli::instances::{generate_instance, InstanceKind, InstanceParams};
use diter_cli::solvers::{run_iterative, Budget, SolverId};
use diter_core::baselines::{implicit_heat_direct, tridiagonal_solve};
use diter_core::directional::{heat_scheme_residual, solve_heat_directional, solve_ode2};
use diter_core::stencil::{assemble_system, GridProblem, LinearSystem};
use diter_core::{compute_roots, diffuse_site, init_fluid, CatalystProfile, HeatProblem, Ode2Problem};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn linf_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Diffuses one unit from site 0 of `[-N, N]`, with 0 absorbing everything
/// that comes back and `±N` absorbing as zero boundaries. Returns the
/// accumulated history indexed by `n + N`.
fn brute_force_profile(a_plus: f64, a_minus: f64, bound: usize) -> Vec<f64> {
    let width = 2 * bound + 1;
    let origin = bound;
    let mut history = vec![0.0; width];
    let mut fluid = vec![0.0; width];
    history[origin] = 1.0;
    if origin + 1 < width - 1 {
        fluid[origin + 1] += a_plus;
    }
    if origin >= 2 {
        fluid[origin - 1] += a_minus;
    }
    loop {
        let mass: f64 = fluid.iter().map(|f| f.abs()).sum();
        if mass <= 1e-13 {
            break;
        }
        for i in 1..width - 1 {
            if i == origin {
                continue;
            }
            let f = std::mem::take(&mut fluid[i]);
            if f == 0.0 {
                continue;
            }
            history[i] += f;
            for (j, w) in [(i + 1, a_plus), (i - 1, a_minus)] {
                if j != origin && j != 0 && j != width - 1 {
                    fluid[j] += w * f;
                }
            }
        }
    }
    history
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for &ap in &grid {
        for &am in &grid {
            if 4.0 * ap * am > 1.0 + 1e-12 {
                continue;
            }
            let profile = CatalystProfile::new(ap, am).map_err(|e| e.to_string())?;
            for bound in [2usize, 5, 10, 20] {
                let brute = brute_force_profile(ap, am, bound);
                for n in -(bound as i64)..=bound as i64 {
                    let closed = profile.phi_bounded(bound, n).map_err(|e| e.to_string())?;
                    worst = worst.max((closed - brute[(n + bound as i64) as usize]).abs());
                }
                cases += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-10 && elapsed < Duration::from_secs(10),
        format!("{cases} cases, max error {worst:.2e}, {elapsed:.2?}"),
    )
}

fn random_systems(count: u64) -> Result<Vec<(GridProblem, LinearSystem)>, String> {
    let params = InstanceParams::default();
    (0..count)
        .map(|seed| {
            let p = generate_instance(InstanceKind::RandomDd2d, &params, 1000 + seed)
                .map_err(|e| e.to_string())?;
            let s = assemble_system(&p).map_err(|e| e.to_string())?;
            Ok((p, s))
        })
        .collect()
}

fn criterion_2(systems: &[(GridProblem, LinearSystem)]) -> Outcome {
    let start = Instant::now();
    let mut worst_ratio: f64 = 0.0;
    let mut checks = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (_, system) in systems {
        let dim = system.dimension();
        let mut state = init_fluid(system);
        let mut order: Vec<usize> = (0..dim).collect();
        let total_ops = (20 * dim).max(5000);
        let mut k = 0;
        while (state.op_count as usize) < total_ops {
            // alternate between cyclic and shuffled passes
            if k % dim == 0 && (k / dim) % 2 == 1 {
                order.shuffle(&mut rng);
            }
            diffuse_site(&mut state, system, order[k % dim]).map_err(|e| e.to_string())?;
            k += 1;
            if state.op_count.is_multiple_of(1000) {
                let h_inf = state.history.iter().fold(0.0, |a: f64, h| a.max(h.abs()));
                let defect = state.identity_defect(system);
                worst_ratio = worst_ratio.max(defect / (1e-12 * (1.0 + h_inf)));
                checks += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    check(
        worst_ratio <= 1.0 && elapsed < Duration::from_secs(30),
        format!(
            "{} instances, {checks} checks, worst defect {worst_ratio:.3} x bound, {elapsed:.2?}",
            systems.len()
        ),
    )
}

fn criterion_3(systems: &[(GridProblem, LinearSystem)]) -> Outcome {
    let budget = Budget {
        tolerance: 1e-9,
        max_work: 2_000_000_000,
    };
    let solvers = [SolverId::DiSweep, SolverId::DiGreedy, SolverId::Jacobi, SolverId::Gs];
    let mut worst: f64 = 0.0;
    for (_, system) in systems {
        let mut solutions = Vec::new();
        for solver in solvers {
            let report = run_iterative(system, solver, budget).map_err(|e| e.to_string())?;
            if !report.converged {
                return Err(format!("{solver} did not converge on a {}-site instance", system.dimension()));
            }
            solutions.push(report.solution);
        }
        for i in 0..solutions.len() {
            for j in i + 1..solutions.len() {
                worst = worst.max(linf_diff(&solutions[i], &solutions[j]));
            }
        }
    }
    check(
        worst <= 1e-7,
        format!("{} instances x 4 solvers, max pairwise L-inf {worst:.2e}", systems.len()),
    )
}

fn criterion_4() -> Outcome {
    let mut worst_field: f64 = 0.0;
    let mut worst_scheme: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for k in [0.5, 1.0, 2.0] {
        for lx in [50usize, 200] {
            let problem = HeatProblem::sine(lx, 200, k).map_err(|e| e.to_string())?;
            let start = Instant::now();
            let solution = solve_heat_directional(&problem, 1e-12).map_err(|e| e.to_string())?;
            slowest = slowest.max(start.elapsed());
            let direct = implicit_heat_direct(&problem.u0, k, 200).map_err(|e| e.to_string())?;
            for (a, b) in solution.field.iter().zip(&direct) {
                worst_field = worst_field.max(linf_diff(a, b));
            }
            worst_scheme = worst_scheme.max(heat_scheme_residual(&problem, &solution.field));
        }
    }
    check(
        worst_field <= 1e-9 && worst_scheme <= 1e-9 && slowest < Duration::from_secs(5),
        format!(
            "6 cases, field error {worst_field:.2e}, scheme residual {worst_scheme:.2e}, slowest {slowest:.2?}"
        ),
    )
}

/// `-ln(max U(T) / max U(0)) / (T·dt)` for the sine initial profile.
fn decay_rate(lx: usize, k: f64, steps: usize) -> Result<f64, String> {
    let problem = HeatProblem::sine(lx, steps, k).map_err(|e| e.to_string())?;
    let field = solve_heat_directional(&problem, 1e-14)
        .map_err(|e| e.to_string())?
        .field;
    let max = |row: &[f64]| row.iter().fold(0.0, |a: f64, v| a.max(*v));
    let ratio = max(&field[steps]) / max(&field[0]);
    Ok(-ratio.ln() / (steps as f64 * problem.dt))
}

fn criterion_5() -> Outcome {
    let pi2 = std::f64::consts::PI.powi(2);
    let steps = 20;

    // dt halving at fixed dx = 1/40
    let lx = 40;
    let dx2 = 1.0 / (lx * lx) as f64;
    let dts = [4e-3, 2e-3, 1e-3];
    let rates_t: Vec<f64> = dts
        .iter()
        .map(|dt| decay_rate(lx, dt / dx2, steps))
        .collect::<Result<_, _>>()?;
    let ratio_t = (rates_t[0] - rates_t[1]) / (rates_t[1] - rates_t[2]);

    // dx halving at fixed dt = 1e-4
    let dt = 1e-4;
    let lxs = [20usize, 40, 80];
    let rates_x: Vec<f64> = lxs
        .iter()
        .map(|&l| decay_rate(l, dt * (l * l) as f64, steps))
        .collect::<Result<_, _>>()?;
    let ratio_x = (rates_x[0] - rates_x[1]) / (rates_x[1] - rates_x[2]);

    // joint refinement approaches π²
    let errors: Vec<f64> = [(20usize, 4e-3), (40, 1e-3), (80, 2.5e-4), (160, 6.25e-5)]
        .iter()
        .map(|&(l, dt)| decay_rate(l, dt * (l * l) as f64, steps).map(|r| (r - pi2).abs()))
        .collect::<Result<_, _>>()?;
    let shrinking = errors.windows(2).all(|w| w[1] < w[0]);
    let finest = errors[errors.len() - 1] / pi2;

    check(
        (ratio_t - 2.0).abs() <= 0.5 && (ratio_x - 4.0).abs() <= 1.0 && shrinking && finest < 1e-3,
        format!(
            "dt ratio {ratio_t:.3}, dx ratio {ratio_x:.3}, relative error at finest grid {finest:.2e}"
        ),
    )
}

/// Independent discretization of `y'' + αy' + βy = f` with a backward
/// first difference, solved as a tridiagonal system.
fn ode_oracle(alpha: f64, beta: f64, intervals: usize, length: f64, f: f64) -> Result<Vec<f64>, String> {
    let dx = length / intervals as f64;
    let n = intervals - 1;
    let lower = vec![1.0 - alpha * dx; n];
    let diag = vec![-2.0 + alpha * dx + beta * dx * dx; n];
    let upper = vec![1.0; n];
    let rhs = vec![dx * dx * f; n];
    tridiagonal_solve(&lower, &diag, &upper, &rhs).map_err(|e| e.to_string())
}

fn criterion_6() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (alpha, beta) in [(0.0, 0.0), (1.0, -1.0)] {
        let problem = Ode2Problem::from_fn(alpha, beta, 1.0, 64, |_| 1.0, 0.0, 0.0)
            .map_err(|e| e.to_string())?;
        if !problem.within_stability_bound() {
            return Err(format!("dx out of the stability bound for alpha={alpha}, beta={beta}"));
        }
        let y = solve_ode2(&problem, 1e-12).map_err(|e| e.to_string())?.y;
        let oracle = ode_oracle(alpha, beta, 64, 1.0, 1.0)?;
        let err = linf_diff(&y[1..64], &oracle);
        ok &= err <= 1e-9;
        details.push(format!("alpha={alpha} beta={beta}: {err:.2e}"));
    }
    check(ok, details.join(", "))
}

fn criterion_7() -> Outcome {
    let mut config = BenchConfig::new(Suite::Heat, vec![SolverId::DiDirectional, SolverId::Gs]);
    config.budget.tolerance = 1e-8;
    config.error_control = false;
    config.params.k = 1.0;
    config.params.lx = 200;
    config.steps_list = vec![100, 250, 500];
    let report = run_bench(&config).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = report
        .outcomes
        .iter()
        .map(|o| o.work_ratio(SolverId::Gs, SolverId::DiDirectional).unwrap_or(0.0))
        .collect();
    let widening = ratios.windows(2).all(|w| w[1] > w[0]);
    check(
        report.all_converged() && ratios[2] >= 10.0 && widening,
        format!(
            "gs/directional op ratios for T=100,250,500: {:.0}, {:.0}, {:.0}",
            ratios[0], ratios[1], ratios[2]
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    let mut expect = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_string());
        }
    };
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;

    let marginal = CatalystProfile::symmetric(0.5).unwrap();
    expect("marginal flag", marginal.is_marginal());
    for bound in [1usize, 4, 10] {
        for n in -(bound as i64)..=bound as i64 {
            let linear = (bound as f64 - n.abs() as f64) / bound as f64;
            expect("marginal linear limit", close(marginal.phi_bounded(bound, n).unwrap(), linear));
        }
    }
    let (rp, rm) = compute_roots(0.3, 0.0).unwrap();
    expect("a_minus = 0 roots", close(rp, 0.3) && rm == 0.0);
    let (rp, rm) = compute_roots(0.0, 0.4).unwrap();
    expect("a_plus = 0 roots", rp == 0.0 && close(rm, 0.4));
    let (rp, rm) = compute_roots(0.0, 0.0).unwrap();
    expect("zero stencil roots", rp == 0.0 && rm == 0.0);
    expect("complex roots rejected", compute_roots(0.6, 0.6).is_err());
    let one_sided = CatalystProfile::new(0.3, 0.0).unwrap();
    expect("one-sided phi", close(one_sided.phi_unbounded(2), 0.09) && one_sided.phi_unbounded(-1) == 0.0);
    expect("out of bound", one_sided.phi_bounded(3, 4).is_err());
    let mut unstable = CatalystProfile::symmetric(0.5).unwrap();
    expect("unbounded marginal norm rejected", unstable.normalize(None).is_err());
    let mut bounded = CatalystProfile::symmetric(0.5).unwrap();
    expect("bounded marginal norm", close(bounded.normalize(Some(4)).unwrap(), 0.25));

    check(
        failures.is_empty(),
        if failures.is_empty() {
            "all edge branches behave as specified".into()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn main() {
    let systems = random_systems(50);
    let results: Vec<(usize, &str, Outcome)> = vec![
        (1, "catalyst closed form vs brute force", criterion_1()),
        (
            2,
            "residual identity during diffusion",
            systems.as_ref().map_err(Clone::clone).and_then(|s| criterion_2(s)),
        ),
        (
            3,
            "cross-solver fixed-point agreement",
            systems.as_ref().map_err(Clone::clone).and_then(|s| criterion_3(s)),
        ),
        (4, "directional heat exactness", criterion_4()),
        (5, "heat decay rate and convergence orders", criterion_5()),
        (6, "ODE solver vs tridiagonal oracle", criterion_6()),
        (7, "directional DI work vs Gauss-Seidel", criterion_7()),
        (8, "degenerate and edge branches", criterion_8()),
    ];
    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {id} ({name}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {id} ({name}): {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
