//! Closed-form limits of 1D elementary diffusion ("catalyst" profiles).
//!
//! With `a_plus` pushed to `n+1` and `a_minus` to `n-1`, a unit of fluid
//! diffused once at the origin, which then absorbs everything that comes back,
//! leaves the history `φ(n) = r_plus^n` for `n ≥ 0` and `r_minus^{|n|}` for
//! `n < 0`, where `r_plus` is the small root of `a_minus·x² - x + a_plus = 0`
//! and `r_minus` the small root of the mirrored quadratic. On `[-N, N]` with
//! zero values at `±N` the profile becomes
//! `φ^N(n) = r^{|n|}·(1 - ρ^{N-|n|}) / (1 - ρ^N)` with `ρ = r_plus·r_minus`.
//!
//! Dividing by `1 - a_minus·φ(1) - a_plus·φ(-1)` turns the absorbing origin
//! into an ordinary site: that denominator is the fluid that never returns.

use std::io::{self, Write};

use crate::error::{Error, Result};

/// `|ρ - 1|` below which the marginal (linear) branch is taken.
pub const MARGINAL_PRODUCT_TOLERANCE: f64 = 1e-12;

/// Returns `(r_plus, r_minus)`.
///
/// Evaluated as `2a/(1 + √(1 - 4·a_plus·a_minus))`, which equals the textbook
/// small root and stays finite when the quadratic degenerates (`a_minus = 0`
/// gives `r_plus = a_plus`).
pub fn compute_roots(a_plus: f64, a_minus: f64) -> Result<(f64, f64)> {
    if !a_plus.is_finite() || !a_minus.is_finite() {
        return Err(Error::InvalidInput(format!(
            "non-finite coefficients a_plus={a_plus}, a_minus={a_minus}"
        )));
    }
    let product = 4.0 * a_plus * a_minus;
    if product > 1.0 {
        return Err(Error::ComplexRoots(product));
    }
    let denom = 1.0 + (1.0 - product).sqrt();
    Ok((2.0 * a_plus / denom, 2.0 * a_minus / denom))
}

/// `1 - ρ^k`, or `k` on the marginal branch.
#[inline]
fn gap(rho: f64, marginal: bool, k: usize) -> f64 {
    if marginal {
        k as f64
    } else if rho > 0.0 {
        -(k as f64 * rho.ln()).exp_m1()
    } else {
        1.0 - rho.powi(k as i32)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalystProfile {
    pub a_plus: f64,
    pub a_minus: f64,
    pub r_plus: f64,
    pub r_minus: f64,
    /// Half-width `N` of the symmetric interval `[-N, N]`, if bounded.
    pub bound: Option<usize>,
    /// Cached `1 - a_minus·φ(1) - a_plus·φ(-1)`, once [`CatalystProfile::normalize`] ran.
    pub norm: Option<f64>,
}

impl CatalystProfile {
    pub fn new(a_plus: f64, a_minus: f64) -> Result<Self> {
        let (r_plus, r_minus) = compute_roots(a_plus, a_minus)?;
        Ok(Self {
            a_plus,
            a_minus,
            r_plus,
            r_minus,
            bound: None,
            norm: None,
        })
    }

    pub fn symmetric(a: f64) -> Result<Self> {
        Self::new(a, a)
    }

    pub fn with_bound(mut self, bound: usize) -> Self {
        self.bound = Some(bound);
        self.norm = None;
        self
    }

    /// `ρ = r_plus·r_minus`.
    pub fn root_product(&self) -> f64 {
        self.r_plus * self.r_minus
    }

    pub fn is_marginal(&self) -> bool {
        (self.root_product() - 1.0).abs() <= MARGINAL_PRODUCT_TOLERANCE
    }

    pub fn phi_unbounded(&self, n: i64) -> f64 {
        match n {
            0 => 1.0,
            n if n > 0 => self.r_plus.powi(n as i32),
            n => self.r_minus.powi((-n) as i32),
        }
    }

    /// Profile on `[-N, N]`; zero at `±N`.
    pub fn phi_bounded(&self, bound: usize, n: i64) -> Result<f64> {
        let dist = n.unsigned_abs() as usize;
        if dist > bound {
            return Err(Error::OutOfBound { n, bound });
        }
        let r = if n >= 0 { self.r_plus } else { self.r_minus };
        Ok(self.one_sided(r, dist, bound))
    }

    /// `r^d·(1 - ρ^{len-d}) / (1 - ρ^len)` for a source `len` sites away from a
    /// zero boundary.
    #[inline]
    fn one_sided(&self, r: f64, d: usize, len: usize) -> f64 {
        if d >= len {
            return 0.0;
        }
        let rho = self.root_product();
        let marginal = self.is_marginal();
        r.powi(d as i32) * gap(rho, marginal, len - d) / gap(rho, marginal, len)
    }

    /// Uses [`CatalystProfile::bound`] when set.
    pub fn phi(&self, n: i64) -> Result<f64> {
        match self.bound {
            Some(b) => self.phi_bounded(b, n),
            None => Ok(self.phi_unbounded(n)),
        }
    }

    /// Computes and caches `1 - a_minus·φ(1) - a_plus·φ(-1)`; `bound` overrides
    /// the profile's own bound.
    pub fn normalize(&mut self, bound: Option<usize>) -> Result<f64> {
        let bound = bound.or(self.bound);
        let (up, down) = match bound {
            Some(b) if b >= 1 => (self.phi_bounded(b, 1)?, self.phi_bounded(b, -1)?),
            Some(_) => (0.0, 0.0),
            None => (self.phi_unbounded(1), self.phi_unbounded(-1)),
        };
        let norm = 1.0 - self.a_minus * up - self.a_plus * down;
        if !(norm > 0.0) {
            return Err(Error::UnstableProfile(norm));
        }
        self.bound = bound;
        self.norm = Some(norm);
        Ok(norm)
    }

    fn cached_norm(&self) -> Result<f64> {
        match self.norm {
            Some(n) => Ok(n),
            None => {
                let mut copy = *self;
                copy.normalize(None)
            }
        }
    }

    /// `φ̃(n) = φ(n) / norm`.
    pub fn phi_tilde(&self, n: i64) -> Result<f64> {
        Ok(self.phi(n)? / self.cached_norm()?)
    }

    /// Writes `n,phi,phi_bounded,phi_tilde` for `n` in `[-N, N]`. `phi_tilde`
    /// uses the bounded normalization.
    pub fn write_dump_csv<W: Write>(&self, bound: usize, mut out: W) -> io::Result<()> {
        let mut bounded = self.with_bound(bound);
        let norm = bounded
            .normalize(None)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e.to_string()))?;
        writeln!(out, "n,phi,phi_bounded,phi_tilde")?;
        for n in -(bound as i64)..=bound as i64 {
            let phib = bounded.phi_bounded(bound, n).expect("within bound");
            writeln!(
                out,
                "{n},{:e},{:e},{:e}",
                self.phi_unbounded(n),
                phib,
                phib / norm
            )?;
        }
        Ok(())
    }

    /// Truncated successive-compensation series for `φ_+^N(n)`, `0 ≤ n ≤ N`:
    /// `r+^n + Σ_{j=1}^{terms} ρ^{jN}·(r+^n - r-^{-n})`.
    pub fn compensation_series(&self, bound: usize, n: usize, terms: usize) -> f64 {
        let rho_n = self.root_product().powi(bound as i32);
        let up = self.r_plus.powi(n as i32);
        let down = self.r_minus.powi(-(n as i32));
        let mut total = up;
        let mut scale = 1.0;
        for _ in 0..terms {
            scale *= rho_n;
            total += scale * (up - down);
        }
        total
    }
}

/// How surplus at the two zero boundaries is cancelled in [`apply_profile_row`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Compensation {
    /// Two-sided bounded profiles per source; the reflection series is summed
    /// analytically.
    #[default]
    ClosedForm,
    /// Unbounded `φ̃` superposition followed by alternating reflections until
    /// the uncompensated boundary mass drops below `tolerance·Σ|f|`.
    Iterative,
}

/// Exact x-axis diffusion limit of a row with zero values at `0` and `L`.
///
/// Solves `H(x) = a_plus·H(x-1) + a_minus·H(x+1) + f(x)` for `0 < x < L`,
/// `H(0) = H(L) = 0`, with `L = fluid_row.len() - 1`. Entries `0` and `L` of
/// `fluid_row` are ignored.
pub fn apply_profile_row(
    fluid_row: &[f64],
    profile: &CatalystProfile,
    tolerance: f64,
) -> Result<Vec<f64>> {
    apply_profile_row_with(fluid_row, profile, tolerance, Compensation::ClosedForm)
}

pub fn apply_profile_row_with(
    fluid_row: &[f64],
    profile: &CatalystProfile,
    tolerance: f64,
    compensation: Compensation,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; fluid_row.len()];
    apply_profile_row_into(fluid_row, profile, tolerance, compensation, &mut out)?;
    Ok(out)
}

/// As [`apply_profile_row_with`], writing into `out` (same length as `fluid_row`).
pub fn apply_profile_row_into(
    fluid_row: &[f64],
    profile: &CatalystProfile,
    tolerance: f64,
    compensation: Compensation,
    out: &mut [f64],
) -> Result<()> {
    assert_eq!(out.len(), fluid_row.len());
    if fluid_row.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite fluid in row".into()));
    }
    if ![profile.a_plus, profile.a_minus, profile.r_plus, profile.r_minus]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(Error::NumericalFailure("non-finite profile".into()));
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    if fluid_row.len() < 3 {
        return Ok(());
    }
    match compensation {
        Compensation::ClosedForm => closed_form_row(fluid_row, profile, out),
        Compensation::Iterative => iterative_row(fluid_row, profile, tolerance, out),
    }
}

/// Source `s` at distance `s` from 0 and `L - s` from `L` contributes
/// `f_s/norm_s · r_plus^{x-s}·gap(L-x)/gap(L-s)` for `x ≥ s` and
/// `f_s/norm_s · r_minus^{s-x}·gap(x)/gap(s)` for `x < s`. Both sums are
/// running geometric sums, so the row costs O(L).
fn closed_form_row(fluid: &[f64], p: &CatalystProfile, out: &mut [f64]) -> Result<()> {
    let len = fluid.len() - 1;
    let rho = p.root_product();
    let marginal = p.is_marginal();
    let gaps: Vec<f64> = (0..=len).map(|k| gap(rho, marginal, k)).collect();

    // per-source normalization of the two-sided bounded profile
    let norm_at = |s: usize| -> Result<f64> {
        let right = p.one_sided(p.r_plus, 1, len - s);
        let left = p.one_sided(p.r_minus, 1, s);
        let norm = 1.0 - p.a_minus * right - p.a_plus * left;
        if norm > 0.0 {
            Ok(norm)
        } else {
            Err(Error::UnstableProfile(norm))
        }
    };

    // forward: A(x) = r_plus·A(x-1) + f_x/(norm_x·gap(L-x))
    let mut acc = 0.0;
    for x in 1..len {
        let w = if fluid[x] != 0.0 {
            fluid[x] / (norm_at(x)? * gaps[len - x])
        } else {
            0.0
        };
        acc = p.r_plus * acc + w;
        out[x] = gaps[len - x] * acc;
    }
    // backward: C(x) = r_minus·(C(x+1) + f_{x+1}/(norm·gap(x+1)))
    let mut acc = 0.0;
    for x in (1..len - 1).rev() {
        let s = x + 1;
        let v = if fluid[s] != 0.0 {
            fluid[s] / (norm_at(s)? * gaps[s])
        } else {
            0.0
        };
        acc = p.r_minus * (acc + v);
        out[x] += gaps[x] * acc;
    }
    Ok(())
}

fn iterative_row(
    fluid: &[f64],
    p: &CatalystProfile,
    tolerance: f64,
    out: &mut [f64],
) -> Result<()> {
    let len = fluid.len() - 1;
    let mut unbounded = *p;
    unbounded.bound = None;
    let norm = unbounded.normalize(None)?;
    // unbounded superposition over the whole closed row [0, L]
    let mut acc = 0.0;
    for x in 0..=len {
        let f = if (1..len).contains(&x) { fluid[x] } else { 0.0 };
        acc = p.r_plus * acc + f;
        out[x] = acc;
    }
    let mut acc = 0.0;
    for x in (0..len).rev() {
        let f = if (1..len).contains(&(x + 1)) { fluid[x + 1] } else { 0.0 };
        acc = p.r_minus * (acc + f);
        out[x] += acc;
    }
    out.iter_mut().for_each(|v| *v /= norm);

    // reflections: r_plus^x cancels the value at 0, r_minus^{L-x} the value at L
    let mass: f64 = fluid[1..len].iter().map(|f| f.abs()).sum();
    let threshold = tolerance.max(0.0) * mass;
    let reach_plus = p.r_plus.powi(len as i32);
    let reach_minus = p.r_minus.powi(len as i32);
    let (mut c_left, mut c_right) = (0.0, 0.0);
    let (mut e_left, mut e_right) = (out[0], out[len]);
    let mut rounds = 0usize;
    while e_left.abs() > threshold || e_right.abs() > threshold {
        c_left -= e_left;
        e_right -= e_left * reach_plus;
        e_left = 0.0;
        c_right -= e_right;
        e_left -= e_right * reach_minus;
        e_right = 0.0;
        rounds += 1;
        if rounds > 100_000 || !e_left.is_finite() {
            return Err(Error::NumericalFailure(
                "boundary compensation did not settle".into(),
            ));
        }
    }
    let mut up = 1.0;
    for v in out.iter_mut() {
        *v += c_left * up;
        up *= p.r_plus;
    }
    let mut down = 1.0;
    for v in out.iter_mut().rev() {
        *v += c_right * down;
        down *= p.r_minus;
    }
    out[0] = 0.0;
    out[len] = 0.0;
    Ok(())
}
