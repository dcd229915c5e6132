#![allow(dead_code)]

use diter_core::stencil::{GridProblem, Site, StencilWeights};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

/// Rescales raw weights so that `|α| ≤ mass`.
pub fn weights_with_mass(raw: [f64; 4], mass: f64) -> StencilWeights {
    let total: f64 = raw.iter().map(|v| v.abs()).sum();
    let s = if total > mass { mass / total } else { 1.0 };
    StencilWeights::new(raw[0] * s, raw[1] * s, raw[2] * s, raw[3] * s)
}

/// Full 2D problem with every `f` and `g` value set from `values`, cycling.
pub fn build_problem(ni: usize, mi: usize, w: StencilWeights, values: &[f64]) -> GridProblem {
    let mut p = GridProblem::dd2d(ni + 2, mi + 2, w).unwrap();
    let mut it = values.iter().cycle();
    for s in p.interior().sites().collect::<Vec<_>>() {
        p.set_source(s, *it.next().unwrap()).unwrap();
    }
    for s in p.boundary_sites().collect::<Vec<_>>() {
        p.set_boundary(s, *it.next().unwrap()).unwrap();
    }
    p
}

prop_compose! {
    pub fn stable_problem(max_extent: usize, mass: f64)
        (ni in 1..=max_extent, mi in 1..=max_extent,
         raw in prop::array::uniform4(-1.0f64..1.0),
         values in prop::collection::vec(-1.0f64..1.0, 1..64))
        -> GridProblem
    {
        build_problem(ni, mi, weights_with_mass(raw, mass), &values)
    }
}

prop_compose! {
    pub fn nonnegative_problem(max_extent: usize)
        (ni in 1..=max_extent, mi in 1..=max_extent,
         raw in prop::array::uniform4(0.0f64..1.0),
         values in prop::collection::vec(0.0f64..1.0, 1..64))
        -> GridProblem
    {
        build_problem(ni, mi, weights_with_mass(raw, 0.9), &values)
    }
}

/// Dense `(I - P, rhs)` written straight from the stencil equation
/// `U(n,m) = a_e U(n-1,m) + a_w U(n+1,m) + a_n U(n,m-1) + a_s U(n,m+1) + f`.
pub fn dense_equations(p: &GridProblem) -> (DMatrix<f64>, DVector<f64>) {
    let omega = p.interior();
    let dim = omega.len();
    let w = p.weights();
    let mut a = DMatrix::<f64>::identity(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for (row, s) in omega.sites().enumerate() {
        rhs[row] = p.source(s).unwrap();
        let pulls = [
            (s.n as isize - 1, s.m as isize, w.a_east),
            (s.n as isize + 1, s.m as isize, w.a_west),
            (s.n as isize, s.m as isize - 1, w.a_north),
            (s.n as isize, s.m as isize + 1, w.a_south),
        ];
        for (n, m, coef) in pulls {
            if coef == 0.0 {
                continue;
            }
            let site = Site::new(n as usize, m as usize);
            match omega.index_of(site) {
                Some(col) => a[(row, col)] -= coef,
                None => rhs[row] += coef * p.boundary(site).expect("pull neighbor on the boundary"),
            }
        }
    }
    (a, rhs)
}

pub fn dense_solution(p: &GridProblem) -> Vec<f64> {
    let (a, rhs) = dense_equations(p);
    a.lu().solve(&rhs).expect("nonsingular").iter().copied().collect()
}

pub fn linf_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn linf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Dense solve of `H(x) = a_plus H(x-1) + a_minus H(x+1) + f(x)` on `0 < x < L`
/// with `H(0) = H(L) = 0`.
pub fn dense_row(a_plus: f64, a_minus: f64, fluid: &[f64]) -> Vec<f64> {
    let l = fluid.len() - 1;
    let n = l - 1;
    let mut a = DMatrix::<f64>::identity(n, n);
    for i in 0..n {
        if i > 0 {
            a[(i, i - 1)] = -a_plus;
        }
        if i + 1 < n {
            a[(i, i + 1)] = -a_minus;
        }
    }
    let rhs = DVector::from_iterator(n, fluid[1..l].iter().copied());
    let x = a.lu().solve(&rhs).expect("nonsingular");
    let mut out = vec![0.0; l + 1];
    out[1..l].copy_from_slice(x.as_slice());
    out
}
