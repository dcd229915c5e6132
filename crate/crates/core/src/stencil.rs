//! Stencil problems on 1D/2D lattices and their fixed-point form `X = P·X + B`.
//!
//! A site `(n, m)` of the problem satisfies
//!
//! ```text
//! U(n,m) = a_east U(n-1,m) + a_north U(n,m-1) + a_west U(n+1,m) + a_south U(n,m+1) + f(n,m)
//! ```
//!
//! Read from the diffusion side, `a_east` is the share of fluid a site pushes to
//! its `+n` neighbor, `a_west` to `-n`, `a_north` to `+m` and `a_south` to `-m`.
//! 1D problems live on a lattice with a single column (`L_m = 1`) and only use
//! `a_plus = a_east` and `a_minus = a_west`.

use crate::error::{Error, Result};

/// Absolute tolerance for classifying a stencil as marginally stable.
pub const MARGINAL_TOLERANCE: f64 = 1e-12;

/// The four directed stencil coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StencilWeights {
    /// Pushed toward `+n`; multiplies `U(n-1, m)`.
    pub a_east: f64,
    /// Pushed toward `-n`; multiplies `U(n+1, m)`.
    pub a_west: f64,
    /// Pushed toward `+m`; multiplies `U(n, m-1)`.
    pub a_north: f64,
    /// Pushed toward `-m`; multiplies `U(n, m+1)`.
    pub a_south: f64,
}

impl StencilWeights {
    pub fn new(a_east: f64, a_west: f64, a_north: f64, a_south: f64) -> Self {
        Self {
            a_east,
            a_west,
            a_north,
            a_south,
        }
    }

    /// 1D stencil: `a_plus` is pushed toward `n+1`, `a_minus` toward `n-1`.
    pub fn one_d(a_plus: f64, a_minus: f64) -> Self {
        Self::new(a_plus, a_minus, 0.0, 0.0)
    }

    pub fn a_plus(&self) -> f64 {
        self.a_east
    }

    pub fn a_minus(&self) -> f64 {
        self.a_west
    }

    pub fn total_mass(&self) -> f64 {
        self.a_east.abs() + self.a_west.abs() + self.a_north.abs() + self.a_south.abs()
    }

    pub fn is_stable(&self) -> bool {
        matches!(
            validate_stability(self),
            Ok(Stability::Strict) | Ok(Stability::Marginal)
        )
    }

    /// `(offset, weight)` pairs in push direction: fluid at `site` moves to `site + offset`.
    pub fn push_offsets(&self) -> [((isize, isize), f64); 4] {
        [
            ((1, 0), self.a_east),
            ((-1, 0), self.a_west),
            ((0, 1), self.a_north),
            ((0, -1), self.a_south),
        ]
    }

    fn is_finite(&self) -> bool {
        [self.a_east, self.a_west, self.a_north, self.a_south]
            .iter()
            .all(|a| a.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    /// `|α| < 1`.
    Strict,
    /// `|α| = 1` within [`MARGINAL_TOLERANCE`].
    Marginal,
    Unstable,
}

pub fn validate_stability(weights: &StencilWeights) -> Result<Stability> {
    if !weights.is_finite() {
        return Err(Error::InvalidInput(format!(
            "non-finite stencil coefficient in {weights:?}"
        )));
    }
    let total = weights.total_mass();
    Ok(if (total - 1.0).abs() <= MARGINAL_TOLERANCE {
        Stability::Marginal
    } else if total < 1.0 {
        Stability::Strict
    } else {
        Stability::Unstable
    })
}

/// Lattice coordinate `(n, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    pub n: usize,
    pub m: usize,
}

impl Site {
    pub fn new(n: usize, m: usize) -> Self {
        Self { n, m }
    }

    fn offset(&self, (dn, dm): (isize, isize)) -> (isize, isize) {
        (self.n as isize + dn, self.m as isize + dm)
    }
}

/// Half-open axis-aligned rectangle `[n0, n1) × [m0, m1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rect {
    pub n0: usize,
    pub n1: usize,
    pub m0: usize,
    pub m1: usize,
}

impl Rect {
    pub fn new(n0: usize, n1: usize, m0: usize, m1: usize) -> Self {
        Self { n0, n1, m0, m1 }
    }

    pub fn rows(&self) -> usize {
        self.n1.saturating_sub(self.n0)
    }

    pub fn cols(&self) -> usize {
        self.m1.saturating_sub(self.m0)
    }

    pub fn len(&self) -> usize {
        self.rows() * self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, site: Site) -> bool {
        (self.n0..self.n1).contains(&site.n) && (self.m0..self.m1).contains(&site.m)
    }

    fn contains_signed(&self, (n, m): (isize, isize)) -> bool {
        n >= 0 && m >= 0 && self.contains(Site::new(n as usize, m as usize))
    }

    /// Row-major index of `site`, if inside.
    pub fn index_of(&self, site: Site) -> Option<usize> {
        self.contains(site)
            .then(|| (site.n - self.n0) * self.cols() + (site.m - self.m0))
    }

    pub fn site_at(&self, index: usize) -> Site {
        Site::new(self.n0 + index / self.cols(), self.m0 + index % self.cols())
    }

    /// Sites in row-major order.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (self.n0..self.n1).flat_map(move |n| (self.m0..self.m1).map(move |m| Site::new(n, m)))
    }
}

/// A stencil problem: rectangular interior Ω inside an `L_n × L_m` lattice,
/// source `f` on Ω and boundary values `g` on ∂Ω.
///
/// ∂Ω is the set of lattice sites outside Ω that share an edge with Ω.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProblem {
    shape: (usize, usize),
    interior: Rect,
    weights: StencilWeights,
    source: Vec<f64>,
    boundary_values: Vec<f64>,
    boundary_mask: Vec<bool>,
}

impl GridProblem {
    pub fn new(shape: (usize, usize), interior: Rect, weights: StencilWeights) -> Result<Self> {
        let (ln, lm) = shape;
        if interior.is_empty() {
            return Err(Error::MalformedDomain("interior is empty".into()));
        }
        if interior.n1 > ln || interior.m1 > lm {
            return Err(Error::MalformedDomain(format!(
                "interior {interior:?} exceeds lattice {ln}x{lm}"
            )));
        }
        if !weights.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite stencil coefficient in {weights:?}"
            )));
        }
        let lattice = Rect::new(0, ln, 0, lm);
        let mut boundary_mask = vec![false; ln * lm];
        for site in interior.sites() {
            for (offset, _) in weights.push_offsets() {
                let nb = site.offset(offset);
                if lattice.contains_signed(nb) && !interior.contains_signed(nb) {
                    boundary_mask[nb.0 as usize * lm + nb.1 as usize] = true;
                }
            }
        }
        Ok(Self {
            shape,
            interior,
            weights,
            source: vec![0.0; interior.len()],
            boundary_values: vec![0.0; ln * lm],
            boundary_mask,
        })
    }

    /// 1D problem on sites `0..len` with boundary `{0, len-1}`.
    pub fn dd1d(len: usize, weights: StencilWeights) -> Result<Self> {
        if len < 3 {
            return Err(Error::MalformedDomain(format!(
                "1D lattice needs at least 3 sites, got {len}"
            )));
        }
        Self::new((len, 1), Rect::new(1, len - 1, 0, 1), weights)
    }

    /// 2D problem on an `ln × lm` lattice whose outer frame is the boundary.
    pub fn dd2d(ln: usize, lm: usize, weights: StencilWeights) -> Result<Self> {
        if ln < 3 || lm < 3 {
            return Err(Error::MalformedDomain(format!(
                "2D lattice needs at least 3x3 sites, got {ln}x{lm}"
            )));
        }
        Self::new((ln, lm), Rect::new(1, ln - 1, 1, lm - 1), weights)
    }

    pub fn shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn interior(&self) -> Rect {
        self.interior
    }

    pub fn weights(&self) -> StencilWeights {
        self.weights
    }

    pub fn is_one_d(&self) -> bool {
        self.shape.1 == 1
    }

    pub fn is_boundary(&self, site: Site) -> bool {
        site.n < self.shape.0
            && site.m < self.shape.1
            && self.boundary_mask[site.n * self.shape.1 + site.m]
    }

    /// Boundary sites in row-major order.
    pub fn boundary_sites(&self) -> impl Iterator<Item = Site> + '_ {
        Rect::new(0, self.shape.0, 0, self.shape.1)
            .sites()
            .filter(move |s| self.is_boundary(*s))
            .collect::<Vec<_>>()
            .into_iter()
    }

    pub fn set_source(&mut self, site: Site, value: f64) -> Result<()> {
        let index = self
            .interior
            .index_of(site)
            .ok_or_else(|| Error::InvalidInput(format!("source site {site:?} is not in Ω")))?;
        self.source[index] = value;
        Ok(())
    }

    pub fn set_boundary(&mut self, site: Site, value: f64) -> Result<()> {
        if !self.is_boundary(site) {
            return Err(Error::InvalidInput(format!(
                "boundary site {site:?} is not in ∂Ω"
            )));
        }
        self.boundary_values[site.n * self.shape.1 + site.m] = value;
        Ok(())
    }

    pub fn source(&self, site: Site) -> Option<f64> {
        self.interior.index_of(site).map(|i| self.source[i])
    }

    pub fn boundary(&self, site: Site) -> Option<f64> {
        self.is_boundary(site)
            .then(|| self.boundary_values[site.n * self.shape.1 + site.m])
    }

    /// Source values over Ω in row-major order.
    pub fn source_values(&self) -> &[f64] {
        &self.source
    }

    /// Copy of the problem with `g ≡ 0`.
    pub fn without_boundary_values(&self) -> Self {
        let mut p = self.clone();
        p.boundary_values.iter_mut().for_each(|v| *v = 0.0);
        p
    }

    /// Copy of the problem with `f ≡ 0`.
    pub fn without_source(&self) -> Self {
        let mut p = self.clone();
        p.source.iter_mut().for_each(|v| *v = 0.0);
        p
    }

    /// Value of `U` at `site`, reading Ω from `interior_values` (row-major) and
    /// ∂Ω from `g`; zero elsewhere.
    fn lattice_value(&self, interior_values: &[f64], (n, m): (isize, isize)) -> f64 {
        if n < 0 || m < 0 {
            return 0.0;
        }
        let site = Site::new(n as usize, m as usize);
        if let Some(i) = self.interior.index_of(site) {
            interior_values[i]
        } else {
            self.boundary(site).unwrap_or(0.0)
        }
    }

    /// Residual of the stencil equation at each interior site, computed on the
    /// lattice directly: `U(s) - Σ α·U(neighbor) - f(s)`.
    pub fn scheme_residual(&self, interior_values: &[f64]) -> Vec<f64> {
        assert_eq!(interior_values.len(), self.interior.len());
        let w = self.weights;
        // pull direction is the opposite of the push offset
        let pulls = [
            ((-1, 0), w.a_east),
            ((1, 0), w.a_west),
            ((0, -1), w.a_north),
            ((0, 1), w.a_south),
        ];
        self.interior
            .sites()
            .enumerate()
            .map(|(i, s)| {
                let inflow: f64 = pulls
                    .iter()
                    .filter(|(_, a)| *a != 0.0)
                    .map(|&((dn, dm), a)| {
                        a * self.lattice_value(
                            interior_values,
                            (s.n as isize + dn, s.m as isize + dm),
                        )
                    })
                    .sum();
                interior_values[i] - inflow - self.source[i]
            })
            .collect()
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsrMatrix {
    nrows: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets; entries are sorted by `(row, col)`
    /// and duplicates summed.
    pub fn from_triplets(nrows: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut sorted: Vec<_> = triplets.to_vec();
        sorted.sort_by_key(|t| (t.0, t.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indptr[r + 1] += 1;
            indices.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            nrows,
            indptr,
            indices,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn transpose(&self, ncols: usize) -> Self {
        let triplets: Vec<_> = (0..self.nrows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (c, r, v)))
            .collect();
        Self::from_triplets(ncols, &triplets)
    }

    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.nrows)
            .flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v)))
            .collect()
    }
}

/// `X = P·X + B` over the interior sites of a problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    /// Row `i` lists `(j, P_ij)`: `X_i` pulls from `X_j`.
    rows: CsrMatrix,
    /// Row `j` lists `(i, P_ij)`: fluid at `j` is pushed to `i`.
    pushes: CsrMatrix,
    b: Vec<f64>,
    layout: Option<Rect>,
}

impl LinearSystem {
    pub fn from_triplets(triplets: &[(usize, usize, f64)], b: Vec<f64>) -> Result<Self> {
        let dim = b.len();
        if let Some(&(i, j, _)) = triplets.iter().find(|(i, j, _)| *i >= dim || *j >= dim) {
            return Err(Error::InvalidInput(format!(
                "entry ({i}, {j}) outside dimension {dim}"
            )));
        }
        if let Some(&(i, j, v)) = triplets.iter().find(|t| !t.2.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite entry P({i},{j}) = {v}")));
        }
        let rows = CsrMatrix::from_triplets(dim, triplets);
        let pushes = rows.transpose(dim);
        Ok(Self {
            rows,
            pushes,
            b,
            layout: None,
        })
    }

    pub fn dimension(&self) -> usize {
        self.b.len()
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn rows(&self) -> &CsrMatrix {
        &self.rows
    }

    pub fn pushes(&self) -> &CsrMatrix {
        &self.pushes
    }

    /// Interior rectangle the indices refer to, when assembled from a grid.
    pub fn layout(&self) -> Option<Rect> {
        self.layout
    }

    pub fn site_index(&self, site: Site) -> Option<usize> {
        self.layout.and_then(|r| r.index_of(site))
    }

    pub fn site(&self, index: usize) -> Option<Site> {
        self.layout
            .filter(|_| index < self.dimension())
            .map(|r| r.site_at(index))
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.rows
            .row(i)
            .filter(|(c, _)| *c == j)
            .map(|(_, v)| v)
            .sum()
    }

    /// `P·x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dimension())
            .map(|i| self.rows.row(i).map(|(j, p)| p * x[j]).sum())
            .collect()
    }

    /// `P·x + B - x`.
    pub fn fixed_point_residual(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x)
            .into_iter()
            .zip(&self.b)
            .zip(x)
            .map(|((px, b), xi)| px + b - xi)
            .collect()
    }
}

/// Assembles the fixed-point system of a grid problem. Indices follow the
/// row-major order of Ω.
pub fn assemble_system(problem: &GridProblem) -> Result<LinearSystem> {
    let interior = problem.interior;
    let lattice = Rect::new(0, problem.shape.0, 0, problem.shape.1);
    let mut b = problem.source.clone();
    let mut triplets = Vec::with_capacity(4 * interior.len());
    for (j, site) in interior.sites().enumerate() {
        for (offset, w) in problem.weights.push_offsets() {
            if w == 0.0 {
                continue;
            }
            // fluid pushed out of Ω is absorbed
            let nb = site.offset(offset);
            if interior.contains_signed(nb) {
                let i = interior
                    .index_of(Site::new(nb.0 as usize, nb.1 as usize))
                    .expect("inside interior");
                triplets.push((i, j, w));
            }
        }
    }
    // boundary inflow: g at a boundary site is pushed into its interior neighbors
    for site in interior.sites() {
        let i = interior.index_of(site).expect("inside interior");
        let pulls = [
            ((-1, 0), problem.weights.a_east),
            ((1, 0), problem.weights.a_west),
            ((0, -1), problem.weights.a_north),
            ((0, 1), problem.weights.a_south),
        ];
        for ((dn, dm), w) in pulls {
            if w == 0.0 {
                continue;
            }
            let (n, m) = (site.n as isize + dn, site.m as isize + dm);
            if !lattice.contains_signed((n, m)) {
                return Err(Error::MalformedDomain(format!(
                    "site {site:?} has neighbor ({n}, {m}) in neither Ω nor ∂Ω"
                )));
            }
            if let Some(g) = problem.boundary(Site::new(n as usize, m as usize)) {
                b[i] += w * g;
            }
        }
    }
    let rows = CsrMatrix::from_triplets(interior.len(), &triplets);
    let pushes = rows.transpose(interior.len());
    Ok(LinearSystem {
        rows,
        pushes,
        b,
        layout: Some(interior),
    })
}

/// Power-iteration estimate of `ρ(|P|)`.
///
/// Iterates the lazy matrix `(I + |P|)/2`, whose Perron root `(1 + ρ)/2` is
/// strictly dominant even when `|P|` is periodic (bipartite stencils), starting
/// from the all-ones vector. The returned value converges to `ρ(|P|)` from
/// below for symmetric `|P|`; for non-symmetric matrices it converges without a
/// sign guarantee on the bias.
pub fn spectral_radius_estimate(system: &LinearSystem, iterations: usize) -> f64 {
    let dim = system.dimension();
    if dim == 0 || system.rows.nnz() == 0 {
        return 0.0;
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = vec![1.0 / (dim as f64).sqrt(); dim];
    let mut mu = 0.0;
    for _ in 0..iterations.max(1) {
        let y: Vec<f64> = (0..dim)
            .map(|i| {
                let px: f64 = system.rows.row(i).map(|(j, p)| p.abs() * x[j]).sum();
                0.5 * (x[i] + px)
            })
            .collect();
        mu = norm(&y);
        if mu == 0.0 {
            return 0.0;
        }
        x = y.into_iter().map(|v| v / mu).collect();
    }
    (2.0 * mu - 1.0).max(0.0)
}
