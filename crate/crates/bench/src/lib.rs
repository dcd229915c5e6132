//! Workloads shared by the criterion benchmarks.

use diter_cli::instances::{generate_instance, InstanceKind, InstanceParams};
use diter_cli::solvers::Instance;
use diter_core::{assemble_system, HeatProblem, LinearSystem};

/// `sin(πx)` heat instances with `lx = 200` for each time-step count.
pub fn heat_instances(steps: &[usize]) -> Vec<(usize, Instance)> {
    steps
        .iter()
        .map(|&t| (t, Instance::Heat(HeatProblem::sine(200, t, 1.0).expect("valid heat instance"))))
        .collect()
}

/// Assembled random 2D systems of at most `extent × extent` interior sites.
pub fn random_systems(seeds: std::ops::Range<u64>, extent: usize) -> Vec<(u64, LinearSystem)> {
    let params = InstanceParams {
        max_extent: extent,
        ..Default::default()
    };
    seeds
        .map(|seed| {
            let p = generate_instance(InstanceKind::RandomDd2d, &params, seed).expect("stable instance");
            (seed, assemble_system(&p).expect("well-formed instance"))
        })
        .collect()
}
