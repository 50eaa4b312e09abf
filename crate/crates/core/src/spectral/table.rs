use statrs::function::erf::erfc;

use super::modes::{KGrid, ModeFamily, RG_Z_MAX};
use super::potential::GreenPotential;
use super::{DensityEval, QuadConfig, TimeWeight, WeightMode};
use crate::error::{Error, Result};
use crate::pearson::{DiffusionParams, Kind};
use crate::quad::Compensated;
use crate::specialfn::gamma::rgamma;
use crate::specialfn::SeriesConfig;

const PANEL_WIDTH: f64 = 0.5;
// terms of the Mittag-Leffler expansion handled through the Green potentials
const ML_ORDER: usize = 2;

/// Band modes, eigenpolynomials and invariant density tabulated at a fixed
/// set of forward points `xs` and starting points `x0s`, reusable for any
/// `t ≥ t_min`.
#[derive(Debug, Clone)]
pub struct SpectralTable {
    params: DiffusionParams,
    weight: TimeWeight,
    cfg: QuadConfig,
    grid: KGrid,
    points: Vec<f64>,
    xs_idx: Vec<usize>,
    x0s_idx: Vec<usize>,
    m: Vec<f64>,
    poly: Vec<Vec<f64>>,
    eig: Vec<f64>,
    u: Vec<Vec<f64>>,
    // (K, node count, envelope over [K/2, K]) after each doubling
    levels: Vec<(f64, usize, Vec<f64>)>,
    green: Option<GreenPotential>,
    in_green: Vec<bool>,
    t_min: f64,
    // contraction weights over (xs, x0s) that set the truncation level
    target: Option<(Vec<f64>, Vec<f64>)>,
}

/// Per-time weights shared by every pair of a table.
#[derive(Debug, Clone)]
pub struct TimeSlice {
    pub t: f64,
    node_w: Vec<f64>,
    disc_w: Vec<f64>,
    zc_coef: [f64; 2],
    tail_factor: f64,
    level: usize,
}

fn check_point(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "spectral evaluation point {x} outside (0, inf)"
        )))
    }
}

impl SpectralTable {
    pub fn build(
        params: &DiffusionParams,
        alpha: f64,
        xs: &[f64],
        x0s: &[f64],
        t_min: f64,
        cfg: &QuadConfig,
    ) -> Result<Self> {
        Self::build_inner(params, alpha, xs, x0s, None, t_min, cfg)
    }

    /// Table whose band truncation is chosen for [`Self::contract`] with
    /// the given weights rather than for every single pair of points.
    #[allow(clippy::too_many_arguments)]
    pub fn build_weighted(
        params: &DiffusionParams,
        alpha: f64,
        xs: &[f64],
        x0s: &[f64],
        wx: &[f64],
        wx0: &[f64],
        t_min: f64,
        cfg: &QuadConfig,
    ) -> Result<Self> {
        if wx.len() != xs.len() || wx0.len() != x0s.len() {
            return Err(Error::domain(
                "weight lengths do not match the evaluation points",
            ));
        }
        Self::build_inner(
            params,
            alpha,
            xs,
            x0s,
            Some((wx.to_vec(), wx0.to_vec())),
            t_min,
            cfg,
        )
    }

    fn build_inner(
        params: &DiffusionParams,
        alpha: f64,
        xs: &[f64],
        x0s: &[f64],
        target: Option<(Vec<f64>, Vec<f64>)>,
        t_min: f64,
        cfg: &QuadConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let weight = TimeWeight::new(alpha)?;
        let family = ModeFamily::new(params)?;
        if !(t_min > 0.0) {
            return Err(Error::domain("t must be > 0"));
        }
        if xs.is_empty() || x0s.is_empty() {
            return Err(Error::domain("empty evaluation grid"));
        }
        for &x in xs.iter().chain(x0s) {
            check_point(x)?;
        }
        if params.kind == Kind::Rg {
            if let Some(x0) = x0s.iter().find(|&&x0| params.gamma / x0 > RG_Z_MAX) {
                return Err(Error::domain(format!(
                    "starting point {x0} below gamma/{RG_Z_MAX}, outside the evaluated range"
                )));
            }
        }
        let mut points: Vec<f64> = xs.iter().chain(x0s).copied().collect();
        points.sort_by(|a, b| a.total_cmp(b));
        points.dedup();
        let find = |x: &f64| {
            points
                .binary_search_by(|p| p.total_cmp(x))
                .expect("point present")
        };
        let xs_idx: Vec<usize> = xs.iter().map(find).collect();
        let x0s_idx: Vec<usize> = x0s.iter().map(find).collect();

        let spectrum = params.spectrum();
        let basis: Vec<_> = (0..=spectrum.n_max)
            .map(|n| params.poly_basis(n))
            .collect::<Result<_>>()?;
        let m: Vec<f64> = points
            .iter()
            .map(|&x| params.density_unchecked(x))
            .collect();
        let poly: Vec<Vec<f64>> = points
            .iter()
            .map(|&x| basis.iter().map(|b| b.eval(x)).collect())
            .collect();

        let series = SeriesConfig::default();
        let mut grid = KGrid::new(PANEL_WIDTH, cfg.k_max_init);
        let mut u = family.table(&grid, 0, &points, &series, cfg.exec)?;
        let mut table = Self {
            params: *params,
            weight,
            cfg: *cfg,
            grid: grid.clone(),
            points: points.clone(),
            xs_idx,
            x0s_idx,
            m,
            poly,
            eig: spectrum.eigenvalues,
            u: vec![],
            levels: vec![],
            green: None,
            in_green: vec![],
            t_min,
            target,
        };
        for r in 0..=cfg.max_refinements {
            let k_max = grid.k_max();
            let env = envelope(&grid, &u, points.len());
            let bound = table.tail_factor(k_max, t_min)? * table.envelope_scale(&env);
            table.levels.push((k_max, grid.nodes.len(), env));
            if bound <= 0.1 * cfg.abs_tol || r == cfg.max_refinements {
                break;
            }
            let from = grid.extend_to(2.0 * k_max);
            u.extend(family.table(&grid, from, &points, &series, cfg.exec)?);
        }
        table.grid = grid;
        table.u = u;
        if weight.mode == WeightMode::ML {
            // the potential overflows where the RG modes are cut off; the
            // density there is below m(x) ~ e^{-100} anyway
            table.in_green = points
                .iter()
                .map(|&x| params.kind != Kind::Rg || params.gamma / x <= RG_Z_MAX)
                .collect();
            let gp: Vec<f64> = points
                .iter()
                .zip(&table.in_green)
                .filter(|p| *p.1)
                .map(|p| *p.0)
                .collect();
            table.green = Some(GreenPotential::new(params, &gp, true)?);
        }
        Ok(table)
    }

    pub fn params(&self) -> &DiffusionParams {
        &self.params
    }

    pub fn k_max(&self) -> f64 {
        self.grid.k_max()
    }

    pub fn n_nodes(&self) -> usize {
        self.grid.nodes.len()
    }

    // Worst pair m(x)·env(x)·env(x₀), or the weighted sums for a contraction target.
    fn envelope_scale(&self, env: &[f64]) -> f64 {
        match &self.target {
            None => {
                let ex = self
                    .xs_idx
                    .iter()
                    .map(|&i| self.m[i] * env[i])
                    .fold(0.0, f64::max);
                let e0 = self.x0s_idx.iter().map(|&i| env[i]).fold(0.0, f64::max);
                ex * e0
            }
            Some((wx, wx0)) => {
                let ex: f64 = self
                    .xs_idx
                    .iter()
                    .zip(wx)
                    .map(|(&i, w)| (w * self.m[i]).abs() * env[i])
                    .sum();
                let e0: f64 = self
                    .x0s_idx
                    .iter()
                    .zip(wx0)
                    .map(|(&j, w)| w.abs() * env[j])
                    .sum();
                ex * e0
            }
        }
    }

    // Bound on ∫_K^∞ |w(λ(k),t)| dk per unit envelope.
    fn tail_factor(&self, k: f64, t: f64) -> Result<f64> {
        let c = self.params.band_scale();
        let lam_k = self.params.lambda_of_k(k);
        match self.weight.mode {
            WeightMode::Exp => {
                let ct = c * t;
                Ok((-self.params.cutoff() * t).exp()
                    * 0.5
                    * (std::f64::consts::PI / ct).sqrt()
                    * erfc(k * ct.sqrt()))
            }
            WeightMode::ML => {
                let a = self.weight.alpha;
                let xk = lam_k * t.powf(a);
                if xk < 10.0 {
                    return Ok(f64::INFINITY);
                }
                let r = self.weight.remainder(lam_k, t, ML_ORDER)?.abs() * xk.powi(3);
                let lim = rgamma(1.0 - 3.0 * a).abs();
                let sup = 1.5 * r.max(lim) / t.powf(3.0 * a);
                Ok(sup / (5.0 * c.powi(3) * k.powi(5)))
            }
        }
    }

    pub fn slice(&self, t: f64) -> Result<TimeSlice> {
        if !(t >= self.t_min * (1.0 - 1e-12)) {
            return Err(Error::domain(format!(
                "t={t} below the table's t_min={}",
                self.t_min
            )));
        }
        // the smallest truncation that already meets the tolerance at this t
        let mut level = self.levels.len() - 1;
        for (l, (k, _, env)) in self.levels.iter().enumerate() {
            if self.tail_factor(*k, t)? * self.envelope_scale(env) <= 0.1 * self.cfg.abs_tol {
                level = l;
                break;
            }
        }
        let (k_max, n_active, _) = self.levels[level];
        let nodes = &self.grid.nodes;
        let w = self.weight;
        let p = self.params;
        let node_w = self.cfg.exec.try_map(n_active, |i| {
            w.remainder(p.lambda_of_k(nodes[i].k), t, ML_ORDER)
        })?;
        let disc_w = self
            .eig
            .iter()
            .map(|&l| w.eval(l, t))
            .collect::<Result<Vec<_>>>()?;
        let zc_coef = match w.mode {
            WeightMode::Exp => [0.0, 0.0],
            WeightMode::ML => {
                let ta = t.powf(w.alpha);
                [
                    rgamma(1.0 - w.alpha) / ta,
                    -rgamma(1.0 - 2.0 * w.alpha) / (ta * ta),
                ]
            }
        };
        let tail_factor = self.tail_factor(k_max, t)?;
        Ok(TimeSlice {
            t,
            node_w,
            disc_w,
            zc_coef,
            tail_factor,
            level,
        })
    }

    /// `p_α(xs[i], t; x0s[j])`.
    pub fn eval(&self, i: usize, j: usize, s: &TimeSlice) -> Result<DensityEval> {
        let (pi, pj) = (self.xs_idx[i], self.x0s_idx[j]);
        let m = self.m[pi];
        let disc: f64 = m
            * (0..self.eig.len())
                .map(|n| self.poly[pi][n] * self.poly[pj][n] * s.disc_w[n])
                .sum::<f64>();

        let mut total = Compensated::new();
        let mut err = 0.0;
        let (mut pk, mut pg, mut panel) = (0.0f64, 0.0f64, 0usize);
        for (n, node) in self.grid.nodes.iter().take(s.node_w.len()).enumerate() {
            if node.panel != panel {
                err += (pk - pg).abs();
                pk = 0.0;
                pg = 0.0;
                panel = node.panel;
            }
            let f = s.node_w[n] * self.u[n][pi] * self.u[n][pj];
            total.add(node.wk * f);
            pk += node.wk * f;
            pg += node.wg * f;
        }
        err += (pk - pg).abs();
        let mut cont = m * total.value();
        let mut quad_error = m * err + m * self.env(s)[pi] * self.env(s)[pj] * s.tail_factor;

        let (gv, ge) = self.green_term(pi, pj, s);
        cont += m * gv;
        quad_error += m * ge;
        let raw = disc + cont;
        let out = DensityEval {
            value: raw.max(0.0),
            discrete_part: disc,
            continuous_part: cont,
            quad_error,
            n_quad_nodes: s.node_w.len(),
        };
        if !(quad_error <= self.cfg.abs_tol) {
            return Err(Error::numeric(
                format!(
                    "transition density error estimate {quad_error:e} exceeds abs_tol {:e} (k_max={})",
                    self.cfg.abs_tol,
                    self.grid.k_max()
                ),
                Some(out.value),
            ));
        }
        Ok(out)
    }
}

impl SpectralTable {
    fn env(&self, s: &TimeSlice) -> &[f64] {
        &self.levels[s.level].2
    }

    // (Zc, Z2c) contribution divided by m(x), with its error
    fn green_term(&self, pi: usize, pj: usize, s: &TimeSlice) -> (f64, f64) {
        let Some(g) = &self.green else {
            return (0.0, 0.0);
        };
        if !(self.in_green[pi] && self.in_green[pj]) {
            return (0.0, 0.0);
        }
        let (x, x0) = (self.points[pi], self.points[pj]);
        let pp = |n: usize| self.poly[pi][n] * self.poly[pj][n];
        let d1: f64 = (1..self.eig.len()).map(|n| pp(n) / self.eig[n]).sum();
        let d2: f64 = (1..self.eig.len())
            .map(|n| pp(n) / (self.eig[n] * self.eig[n]))
            .sum();
        let (z1, e1) = g.reduced(x, x0);
        let (z2, e2) = g.reduced2(x, x0).expect("second potential built");
        (
            s.zc_coef[0] * (z1 - d1) + s.zc_coef[1] * (z2 - d2),
            s.zc_coef[0].abs() * e1 + s.zc_coef[1].abs() * e2,
        )
    }

    /// Largest tabulated `k` whose mode still contributes more than `tol`
    /// to some pair at this time.
    pub fn k_significant(&self, s: &TimeSlice, tol: f64) -> f64 {
        let mut k_sig = 0.0f64;
        for (n, node) in self.grid.nodes.iter().take(s.node_w.len()).enumerate() {
            let umax = self.u[n].iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if (s.node_w[n] * umax * umax).abs() * node.wk > tol {
                k_sig = k_sig.max(node.k);
            }
        }
        k_sig
    }

    /// `Σᵢ Σⱼ wx[i] wx0[j] p_α(xs[i], t; x0s[j])`, contracting each mode
    /// with the weights before the band integral.
    pub fn contract(&self, wx: &[f64], wx0: &[f64], s: &TimeSlice) -> Result<DensityEval> {
        if wx.len() != self.xs_idx.len() || wx0.len() != self.x0s_idx.len() {
            return Err(Error::domain(
                "contract: weight lengths do not match the table",
            ));
        }
        let a: Vec<(usize, f64)> = self
            .xs_idx
            .iter()
            .zip(wx)
            .map(|(&i, &w)| (i, w * self.m[i]))
            .collect();
        let b: Vec<(usize, f64)> = self
            .x0s_idx
            .iter()
            .copied()
            .zip(wx0.iter().copied())
            .collect();
        let side = |w: &[(usize, f64)], f: &dyn Fn(usize) -> f64| -> f64 {
            crate::quad::compensated_sum(w.iter().map(|&(i, c)| c * f(i)))
        };
        let disc = crate::quad::compensated_sum((0..self.eig.len()).map(|n| {
            s.disc_w[n] * side(&a, &|i| self.poly[i][n]) * side(&b, &|j| self.poly[j][n])
        }));

        let mut total = Compensated::new();
        let mut err = 0.0;
        let (mut pk, mut pg, mut panel) = (0.0f64, 0.0f64, 0usize);
        for (n, node) in self.grid.nodes.iter().take(s.node_w.len()).enumerate() {
            if node.panel != panel {
                err += (pk - pg).abs();
                pk = 0.0;
                pg = 0.0;
                panel = node.panel;
            }
            let row = &self.u[n];
            let f = s.node_w[n] * side(&a, &|i| row[i]) * side(&b, &|j| row[j]);
            total.add(node.wk * f);
            pk += node.wk * f;
            pg += node.wg * f;
        }
        err += (pk - pg).abs();
        let ea: f64 = a.iter().map(|&(i, c)| c.abs() * self.env(s)[i]).sum();
        let eb: f64 = b.iter().map(|&(j, c)| c.abs() * self.env(s)[j]).sum();
        let mut cont = total.value();
        let mut quad_error = err + ea * eb * s.tail_factor;
        for &(i, ca) in &a {
            for &(j, cb) in &b {
                let (gv, ge) = self.green_term(i, j, s);
                cont += ca * cb * gv;
                quad_error += (ca * cb).abs() * ge;
            }
        }
        let out = DensityEval {
            value: disc + cont,
            discrete_part: disc,
            continuous_part: cont,
            quad_error,
            n_quad_nodes: s.node_w.len(),
        };
        if !(quad_error <= self.cfg.abs_tol) {
            return Err(Error::numeric(
                format!(
                    "weighted density sum error estimate {quad_error:e} exceeds abs_tol {:e}",
                    self.cfg.abs_tol
                ),
                Some(out.value),
            ));
        }
        Ok(out)
    }
}

fn envelope(grid: &KGrid, u: &[Vec<f64>], n_points: usize) -> Vec<f64> {
    let half = 0.5 * grid.k_max();
    let mut env = vec![0.0f64; n_points];
    for (node, row) in grid.nodes.iter().zip(u) {
        if node.k >= half {
            for (e, v) in env.iter_mut().zip(row) {
                *e = e.max(v.abs());
            }
        }
    }
    env
}

/// Transition density `p_α(x, t; x₀)` of the fractional diffusion.
pub fn transition_density(
    params: &DiffusionParams,
    alpha: f64,
    x: f64,
    t: f64,
    x0: f64,
    cfg: &QuadConfig,
) -> Result<DensityEval> {
    let table = SpectralTable::build(params, alpha, &[x], &[x0], t, cfg)?;
    table.eval(0, 0, &table.slice(t)?)
}

/// Band integrand `h(λ)`, normalized so that the continuous part of the
/// density is `m(x) ∫_Λ^∞ h(λ) dλ`.
pub fn continuous_integrand(
    params: &DiffusionParams,
    alpha: f64,
    x: f64,
    x0: f64,
    t: f64,
    lambda: f64,
) -> Result<f64> {
    check_point(x)?;
    check_point(x0)?;
    let k = params.k_of_lambda(lambda)?;
    let family = ModeFamily::new(params)?;
    let u = family.eval_k(k, &[x, x0], &SeriesConfig::default())?;
    let w = TimeWeight::new(alpha)?.eval(lambda, t)?;
    Ok(w * u[0] * u[1] / (2.0 * params.band_scale() * k))
}
