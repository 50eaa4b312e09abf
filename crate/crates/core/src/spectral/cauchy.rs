//! Solutions of the fractional backward and Fokker-Planck Cauchy problems,
//! and a finite-difference residual check of the backward equation.

use serde::{Deserialize, Serialize};

use super::modes::RG_Z_MAX;
use super::table::{SpectralTable, TimeSlice};
use super::QuadConfig;
use crate::error::{Error, Result};
use crate::pearson::{DiffusionParams, Kind};
use crate::quad::gauss_legendre;
use crate::specialfn::gamma::gamma;

const GL_ORDER: usize = 16;
const MAX_PANEL: f64 = 0.25;
// oscillations of the highest band mode allowed per panel
const PERIODS_PER_PANEL: f64 = 2.5;

/// Integration range `[lo, hi] ⊂ (0, ∞)` of a test function, with points
/// where it is not smooth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Support {
    pub lo: f64,
    pub hi: f64,
    pub breaks: Vec<f64>,
}

impl Support {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::domain(format!(
                "support [{lo}, {hi}] must satisfy 0 < lo < hi < inf"
            )));
        }
        Ok(Self {
            lo,
            hi,
            breaks: vec![],
        })
    }

    pub fn with_breaks(mut self, breaks: &[f64]) -> Self {
        self.breaks.extend_from_slice(breaks);
        self
    }

    /// Range holding all but `1e-14` of the invariant mass in each tail.
    pub fn invariant(params: &DiffusionParams) -> Self {
        let mut lo = params.quantile(1e-14);
        if params.kind == Kind::Rg {
            lo = lo.max(params.gamma / RG_Z_MAX);
        }
        Self {
            lo,
            hi: params.quantile_upper(1e-14),
            breaks: vec![],
        }
    }
}

/// Composite Gauss-Legendre rule in `ln x`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerProductGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl InnerProductGrid {
    /// Panels of width at most `width` in `ln x`, split at every break.
    pub fn log_panels(support: &Support, width: f64, order: usize) -> Result<Self> {
        Support::new(support.lo, support.hi)?;
        if !(width > 0.0) || order == 0 {
            return Err(Error::domain(
                "inner-product grid needs width > 0 and order > 0",
            ));
        }
        let mut cuts: Vec<f64> = vec![support.lo.ln(), support.hi.ln()];
        cuts.extend(
            support
                .breaks
                .iter()
                .filter(|&&b| b > support.lo && b < support.hi)
                .map(|b| b.ln()),
        );
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();
        let (gx, gw) = gauss_legendre(order);
        let mut nodes = vec![];
        let mut weights = vec![];
        for w in cuts.windows(2) {
            let n = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / n as f64;
            for p in 0..n {
                let a = w[0] + h * p as f64;
                for (x, wt) in gx.iter().zip(&gw) {
                    let u = a + 0.5 * h * (x + 1.0);
                    let e = u.exp();
                    nodes.push(e);
                    weights.push(0.5 * h * wt * e);
                }
            }
        }
        Ok(Self { nodes, weights })
    }
}

// Builds the table on a grid fine enough to resolve every band mode that
// matters at time t.
fn table_on_grid(
    support: &Support,
    t: f64,
    tol: f64,
    build: impl Fn(&InnerProductGrid) -> Result<SpectralTable>,
) -> Result<(InnerProductGrid, SpectralTable, TimeSlice)> {
    let mut width = MAX_PANEL;
    loop {
        let grid = InnerProductGrid::log_panels(support, width, GL_ORDER)?;
        let table = build(&grid)?;
        let slice = table.slice(t)?;
        let k_sig = table.k_significant(&slice, 1e-2 * tol);
        let needed = PERIODS_PER_PANEL * 2.0 * std::f64::consts::PI / k_sig;
        if width <= needed * (1.0 + 1e-12) {
            return Ok((grid, table, slice));
        }
        width = needed;
    }
}

/// `q(t; y) = ∫ p_α(x, t; y) g(x) dx` over the bulk of the invariant law.
pub fn backward_solution(
    params: &DiffusionParams,
    alpha: f64,
    g: &dyn Fn(f64) -> f64,
    t: f64,
    y: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    backward_solution_on(params, alpha, g, &Support::invariant(params), t, y, cfg)
}

/// `q(t; y) = ∫ p_α(x, t; y) g(x) dx` with `g` vanishing outside `support`.
/// Each band mode is paired with `g` first, then integrated over the band.
pub fn backward_solution_on(
    params: &DiffusionParams,
    alpha: f64,
    g: &dyn Fn(f64) -> f64,
    support: &Support,
    t: f64,
    y: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    Ok(backward_solutions(params, alpha, g, support, &[t], &[y], cfg)?[0][0])
}

/// `q(t; y)` for every `t` in `ts` (rows) and `y` in `ys` (columns) from one
/// spectral table.
pub fn backward_solutions(
    params: &DiffusionParams,
    alpha: f64,
    g: &dyn Fn(f64) -> f64,
    support: &Support,
    ts: &[f64],
    ys: &[f64],
    cfg: &QuadConfig,
) -> Result<Vec<Vec<f64>>> {
    if ts.is_empty() || ys.is_empty() {
        return Err(Error::domain(
            "backward_solutions needs nonempty t and y lists",
        ));
    }
    let t_min = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let mut breaks = ys.to_vec();
    breaks.push(1.0);
    let support = support.clone().with_breaks(&breaks);
    let ones = vec![1.0; ys.len()];
    let (grid, table, _) = table_on_grid(&support, t_min, cfg.abs_tol, |grid| {
        let wx = weighted(grid, g)?;
        SpectralTable::build_weighted(params, alpha, &grid.nodes, ys, &wx, &ones, t_min, cfg)
    })?;
    let wx = weighted(&grid, g)?;
    let mut onehot = vec![0.0; ys.len()];
    ts.iter()
        .map(|&t| {
            let slice = table.slice(t)?;
            (0..ys.len())
                .map(|j| {
                    onehot[j] = 1.0;
                    let v = table.contract(&wx, &onehot, &slice);
                    onehot[j] = 0.0;
                    Ok(v?.value)
                })
                .collect()
        })
        .collect()
}

/// `q(x, t) = ∫ p_α(x, t; y) f(y) dy` for an initial density `f` vanishing
/// outside `support`.
pub fn fokker_planck_solution(
    params: &DiffusionParams,
    alpha: f64,
    f: &dyn Fn(f64) -> f64,
    support: &Support,
    x: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    let support = support.clone().with_breaks(&[x, 1.0]);
    let (grid, table, slice) = table_on_grid(&support, t, cfg.abs_tol, |grid| {
        let wy = weighted(grid, f)?;
        SpectralTable::build_weighted(params, alpha, &[x], &grid.nodes, &[1.0], &wy, t, cfg)
    })?;
    let wy = weighted(&grid, f)?;
    Ok(table.contract(&[1.0], &wy, &slice)?.value)
}

fn weighted(grid: &InnerProductGrid, g: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
    grid.nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&x, &w)| {
            let v = g(x);
            if v.is_finite() {
                Ok(w * v)
            } else {
                Err(Error::domain(format!("test function not finite at {x}")))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaputoReport {
    /// Max over the grid of `|∂^α_t q - G_y q|`.
    pub residual: f64,
    /// Same residual on the grid with both steps doubled.
    pub coarse_residual: f64,
    /// Set when doubling the steps changes the residual by less than 1.5×,
    /// so the residual is not dominated by the discretization.
    pub inconclusive: bool,
    pub t_at_max: f64,
    pub y_at_max: f64,
}

/// Residual of the fractional backward equation for `q(t, y) = p_α(x, t; y)`:
/// L1 Caputo scheme in `t` started from `q(0, y) = 0` and central
/// differences in `y`. `t_grid` must be uniform with `t₀` a multiple of its
/// step; `x` must lie outside the `y` range.
pub fn caputo_residual(
    params: &DiffusionParams,
    alpha: f64,
    x: f64,
    t_grid: &[f64],
    y_grid: &[f64],
    cfg: &QuadConfig,
) -> Result<CaputoReport> {
    if t_grid.len() < 3 || y_grid.len() < 5 {
        return Err(Error::domain(
            "caputo_residual needs at least 3 times and 5 space points",
        ));
    }
    let dt = t_grid[1] - t_grid[0];
    let h = y_grid[1] - y_grid[0];
    if !(dt > 0.0 && h > 0.0) {
        return Err(Error::domain("grids must be increasing"));
    }
    let uniform = |g: &[f64], s: f64| g.windows(2).all(|w| ((w[1] - w[0]) - s).abs() <= 1e-9 * s);
    if !uniform(t_grid, dt) || !uniform(y_grid, h) {
        return Err(Error::domain("grids must be uniform"));
    }
    let k0 = (t_grid[0] / dt).round();
    if k0 < 1.0 || (k0 * dt - t_grid[0]).abs() > 1e-9 * dt {
        return Err(Error::domain(
            "t grid must start at a positive multiple of its step",
        ));
    }
    if x >= y_grid[0] && x <= y_grid[y_grid.len() - 1] {
        return Err(Error::domain("x must lie outside the y grid"));
    }
    let k0 = k0 as usize;
    let n_t = k0 + t_grid.len() - 1;
    let table = SpectralTable::build(params, alpha, &[x], y_grid, dt, cfg)?;
    // q[k][i] at t = k dt; q[0] = 0
    let mut q = vec![vec![0.0; y_grid.len()]; n_t + 1];
    for (k, row) in q.iter_mut().enumerate().skip(1) {
        let s = table.slice(k as f64 * dt)?;
        for (i, v) in row.iter_mut().enumerate() {
            let d = table.eval(0, i, &s)?;
            *v = d.discrete_part + d.continuous_part;
        }
    }
    let fine = residual_on(params, alpha, &q, y_grid, dt, k0, 1)?;
    let coarse = residual_on(params, alpha, &q, y_grid, dt, k0, 2)?;
    Ok(CaputoReport {
        residual: fine.0,
        coarse_residual: coarse.0,
        inconclusive: coarse.0 < 1.5 * fine.0,
        t_at_max: fine.1,
        y_at_max: fine.2,
    })
}

// Residual using every `stride`-th time level and space point.
fn residual_on(
    params: &DiffusionParams,
    alpha: f64,
    q: &[Vec<f64>],
    y_grid: &[f64],
    dt: f64,
    k0: usize,
    stride: usize,
) -> Result<(f64, f64, f64)> {
    let dt = dt * stride as f64;
    let ys: Vec<usize> = (0..y_grid.len()).step_by(stride).collect();
    let ks: Vec<usize> = (0..q.len()).step_by(stride).collect();
    if ys.len() < 3 {
        return Err(Error::domain("y grid too short for the coarse residual"));
    }
    let h = y_grid[ys[1]] - y_grid[ys[0]];
    // L1 weights; b₀ = 1 also covers α = 1, where 0⁰ would cancel it
    let b: Vec<f64> = (0..ks.len())
        .map(|j| {
            if j == 0 {
                1.0
            } else {
                ((j + 1) as f64).powf(1.0 - alpha) - (j as f64).powf(1.0 - alpha)
            }
        })
        .collect();
    let scale = dt.powf(-alpha) / gamma(2.0 - alpha);
    let mut worst = (0.0f64, 0.0, 0.0);
    for (n, &kn) in ks.iter().enumerate().skip(1) {
        if kn < k0 {
            continue;
        }
        for w in 1..ys.len() - 1 {
            let (im, i, ip) = (ys[w - 1], ys[w], ys[w + 1]);
            let caputo = scale
                * (0..n)
                    .map(|j| b[j] * (q[ks[n - j]][i] - q[ks[n - j - 1]][i]))
                    .sum::<f64>();
            let y = y_grid[i];
            let d1 = (q[kn][ip] - q[kn][im]) / (2.0 * h);
            let d2 = (q[kn][ip] - 2.0 * q[kn][i] + q[kn][im]) / (h * h);
            let gq = params.drift_unchecked(y) * d1 + 0.5 * params.diffusion_sq_unchecked(y) * d2;
            let r = (caputo - gq).abs();
            if r > worst.0 {
                worst = (r, kn as f64 * dt / stride as f64, y);
            }
        }
    }
    Ok(worst)
}
