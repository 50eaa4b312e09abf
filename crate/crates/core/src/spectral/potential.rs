//! Time-integrated transition density `Z(x₀; x) = ∫₀^∞ (p(x,t;x₀) - m(x)) dt`
//! and its iterate `Z₂(x₀; x) = ∫ Z(z; x) Z(x₀; z) dz`, from the scale and
//! speed densities.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::pearson::DiffusionParams;
use crate::quad::{gk21_rule, integrate_log, AdaptiveOpts};

#[derive(Debug, Clone, Copy, Default)]
struct Prims {
    // ∫₁^y φF, ∫₁^y φ(1-F), ∫₁^y φF(1-F), ∫_y^∞ φ(1-F)², ∫₀^y φF²
    p1: f64,
    r: f64,
    p3: f64,
    p4: f64,
    p5: f64,
}

fn opts() -> AdaptiveOpts {
    AdaptiveOpts {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        max_intervals: 2000,
    }
}

// Ga, Gb such that Z(x₀; z)/m(z) = Ga(z) - R(x₀) for x₀ > z, Gb(z) + P1(x₀) otherwise.
fn split(p: &Prims, hi: &Prims, lo: &Prims, z: f64) -> (f64, f64) {
    let a = hi.p3 - hi.p4;
    let b = lo.p5 + lo.p3;
    if z >= 1.0 {
        (p.p1 + p.r - a + b, -a + b)
    } else {
        (-a + b, -p.r - p.p1 - a + b)
    }
}

const N_FUN: usize = 9;
// m, mP1, mR, mGa, mGb, mP1Ga, mP1Gb, mRGa, mRGb
const M: usize = 0;
const M_P1: usize = 1;
const M_R: usize = 2;
const M_GA: usize = 3;
const M_GB: usize = 4;
const M_P1GA: usize = 5;
const M_P1GB: usize = 6;
const M_RGA: usize = 7;
const M_RGB: usize = 8;

#[derive(Debug, Clone)]
struct Moments {
    edges: Vec<f64>,
    // cumulative from the lowest edge, and from the highest edge downward
    pre: Vec<[f64; N_FUN]>,
    pre_err: Vec<[f64; N_FUN]>,
    suf: Vec<[f64; N_FUN]>,
    suf_err: Vec<[f64; N_FUN]>,
}

impl Moments {
    fn idx(&self, z: f64) -> usize {
        self.edges
            .binary_search_by(|p| p.total_cmp(&z))
            .expect("edge present")
    }
}

#[derive(Debug, Clone)]
pub(crate) struct GreenPotential {
    points: Vec<f64>,
    prims: Vec<Prims>,
    errs: Vec<Prims>,
    moments: Option<Moments>,
}

impl GreenPotential {
    /// Potential at `pts`; with `second`, also the iterate `Z₂`.
    pub fn new(params: &DiffusionParams, pts: &[f64], second: bool) -> Result<Self> {
        let mut edges: Vec<f64> = pts.to_vec();
        edges.push(1.0);
        let mut nodes = vec![];
        if second {
            let lo = params
                .quantile(1e-30)
                .min(pts.iter().copied().fold(f64::INFINITY, f64::min));
            let hi = 1e24 * pts.iter().copied().fold(params.mean().max(1.0), f64::max);
            let (ul, uh) = (lo.ln(), hi.ln());
            let n = ((uh - ul) / 0.25).ceil() as usize;
            edges.extend((0..=n).map(|i| (ul + (uh - ul) * i as f64 / n as f64).exp()));
        }
        sort_unique(&mut edges);
        let mut all = edges.clone();
        if second {
            for w in edges.windows(2) {
                for (u, _, _) in gk21_rule(w[0].ln(), w[1].ln()) {
                    nodes.push(u.exp());
                }
            }
            all.extend(nodes.iter().copied());
            sort_unique(&mut all);
        }
        let (prims, errs) = primitives(params, &all)?;
        let mut g = Self {
            points: all,
            prims,
            errs,
            moments: None,
        };
        if second {
            g.moments = Some(g.moments(params, edges)?);
        }
        Ok(g)
    }

    fn index(&self, y: f64) -> usize {
        self.points
            .binary_search_by(|p| p.total_cmp(&y))
            .expect("potential evaluated at a tabulated point")
    }

    fn at(&self, y: f64) -> &Prims {
        &self.prims[self.index(y)]
    }

    fn err_at(&self, y: f64) -> &Prims {
        &self.errs[self.index(y)]
    }

    fn ga_gb(&self, z: f64) -> (f64, f64) {
        split(self.at(z), self.at(z.max(1.0)), self.at(z.min(1.0)), z)
    }

    fn ga_gb_err(&self, z: f64) -> f64 {
        let (p, hi, lo) = (
            self.err_at(z),
            self.err_at(z.max(1.0)),
            self.err_at(z.min(1.0)),
        );
        p.p1 + p.r + hi.p3 + hi.p4 + lo.p5 + lo.p3
    }

    fn moments(&self, params: &DiffusionParams, edges: Vec<f64>) -> Result<Moments> {
        let ne = edges.len();
        let mut per = vec![[0.0; N_FUN]; ne - 1];
        let mut per_err = vec![[0.0; N_FUN]; ne - 1];
        for (i, w) in edges.windows(2).enumerate() {
            let mut k = [0.0; N_FUN];
            let mut g = [0.0; N_FUN];
            for (u, wk, wg) in gk21_rule(w[0].ln(), w[1].ln()) {
                let z = u.exp();
                let mz = z * params.density_unchecked(z);
                let p = self.at(z);
                let (ga, gb) = self.ga_gb(z);
                let f = [
                    mz,
                    mz * p.p1,
                    mz * p.r,
                    mz * ga,
                    mz * gb,
                    mz * p.p1 * ga,
                    mz * p.p1 * gb,
                    mz * p.r * ga,
                    mz * p.r * gb,
                ];
                for j in 0..N_FUN {
                    k[j] += wk * f[j];
                    g[j] += wg * f[j];
                }
            }
            for j in 0..N_FUN {
                if !k[j].is_finite() {
                    return Err(Error::numeric("second potential quadrature overflow", None));
                }
                per[i][j] = k[j];
                per_err[i][j] = (k[j] - g[j]).abs();
            }
        }
        let mut pre = vec![[0.0; N_FUN]; ne];
        let mut pre_err = vec![[0.0; N_FUN]; ne];
        for i in 1..ne {
            for j in 0..N_FUN {
                pre[i][j] = pre[i - 1][j] + per[i - 1][j];
                pre_err[i][j] = pre_err[i - 1][j] + per_err[i - 1][j];
            }
        }
        let mut suf = vec![[0.0; N_FUN]; ne];
        let mut suf_err = vec![[0.0; N_FUN]; ne];
        for i in (0..ne - 1).rev() {
            for j in 0..N_FUN {
                suf[i][j] = suf[i + 1][j] + per[i][j];
                suf_err[i][j] = suf_err[i + 1][j] + per_err[i][j];
            }
        }
        Ok(Moments {
            edges,
            pre,
            pre_err,
            suf,
            suf_err,
        })
    }

    /// `Z(x₀; x) / m(x)` and an error bound.
    pub fn reduced(&self, x: f64, x0: f64) -> (f64, f64) {
        let (ga, gb) = self.ga_gb(x);
        let p0 = self.at(x0);
        let e0 = self.err_at(x0);
        let e = self.ga_gb_err(x);
        if x0 > x {
            (ga - p0.r, e + e0.r)
        } else {
            (gb + p0.p1, e + e0.p1)
        }
    }

    /// `Z₂(x₀; x) / m(x)` and an error bound; `None` unless built with `second`.
    pub fn reduced2(&self, x: f64, x0: f64) -> Option<(f64, f64)> {
        let mo = self.moments.as_ref()?;
        let (ga, gb) = self.ga_gb(x);
        let p0 = self.at(x0);
        let (r0, q0) = (p0.r, p0.p1);
        let (ia, ib) = (mo.idx(x.min(x0)), mo.idx(x.max(x0)));
        let lower = |j: usize| (mo.pre[ia][j], mo.pre_err[ia][j]);
        let mid = |j: usize| {
            (
                mo.pre[ib][j] - mo.pre[ia][j],
                mo.pre_err[ib][j] - mo.pre_err[ia][j],
            )
        };
        let upper = |j: usize| (mo.suf[ib][j], mo.suf_err[ib][j]);
        // Σ c_j I_j with matching error Σ |c_j| e_j
        let comb = |terms: &[(f64, (f64, f64))]| {
            terms.iter().fold((0.0, 0.0), |(v, e), &(c, (iv, ie))| {
                (v + c * iv, e + c.abs() * ie)
            })
        };
        let lo = comb(&[
            (gb, lower(M_GA)),
            (-gb * r0, lower(M)),
            (1.0, lower(M_P1GA)),
            (-r0, lower(M_P1)),
        ]);
        let up = comb(&[
            (ga, upper(M_GB)),
            (ga * q0, upper(M)),
            (-1.0, upper(M_RGB)),
            (-q0, upper(M_R)),
        ]);
        let md = if x0 <= x {
            comb(&[
                (gb, mid(M_GB)),
                (gb * q0, mid(M)),
                (1.0, mid(M_P1GB)),
                (q0, mid(M_P1)),
            ])
        } else {
            comb(&[
                (ga, mid(M_GA)),
                (-ga * r0, mid(M)),
                (-1.0, mid(M_RGA)),
                (r0, mid(M_R)),
            ])
        };
        Some((lo.0 + md.0 + up.0, lo.1 + md.1 + up.1))
    }
}

fn sort_unique(v: &mut Vec<f64>) {
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
}

fn primitives(params: &DiffusionParams, points: &[f64]) -> Result<(Vec<Prims>, Vec<Prims>)> {
    let p = *params;
    // ln φ = ln 2 - ln σ² - ln m
    let ln_phi = move |v: f64| LN_2 - p.diffusion_sq_unchecked(v).ln() - p.ln_density_unchecked(v);
    let cdf = move |v: f64| p.invariant_cdf(v);
    let sf = move |v: f64| p.invariant_sf(v);
    let f1 = move |v: f64| (ln_phi(v) + cdf(v).ln()).exp();
    let fr = move |v: f64| (ln_phi(v) + sf(v).ln()).exp();
    let f3 = move |v: f64| (ln_phi(v) + cdf(v).ln() + sf(v).ln()).exp();
    let f4 = move |v: f64| (ln_phi(v) + 2.0 * sf(v).ln()).exp();
    let f5 = move |v: f64| (ln_phi(v) + 2.0 * cdf(v).ln()).exp();

    let n = points.len();
    let one = points
        .iter()
        .position(|&x| x == 1.0)
        .expect("1 is inserted");
    let mut prims = vec![Prims::default(); n];
    let mut errs = vec![Prims::default(); n];
    // signed integral from a to b and its error
    let step = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| -> Result<(f64, f64)> {
        let (lo, hi, s) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
        let r = integrate_log(f, lo, hi, &[], opts());
        if !r.value.is_finite() {
            return Err(Error::numeric("Green potential quadrature overflow", None));
        }
        Ok((s * r.value, r.abs_err))
    };
    let sweep = |i: usize, j: usize, prims: &mut [Prims], errs: &mut [Prims]| -> Result<()> {
        let (a, b) = (points[j], points[i]);
        let (v1, e1) = step(&f1, a, b)?;
        let (vr, er) = step(&fr, a, b)?;
        let (v3, e3) = step(&f3, a, b)?;
        prims[i].p1 = prims[j].p1 + v1;
        prims[i].r = prims[j].r + vr;
        prims[i].p3 = prims[j].p3 + v3;
        errs[i].p1 = errs[j].p1 + e1;
        errs[i].r = errs[j].r + er;
        errs[i].p3 = errs[j].p3 + e3;
        Ok(())
    };
    for i in one + 1..n {
        sweep(i, i - 1, &mut prims, &mut errs)?;
    }
    for i in (0..one).rev() {
        sweep(i, i + 1, &mut prims, &mut errs)?;
    }
    let top = points[n - 1];
    let (mut acc, mut acc_e) = step(&f4, top, top * 1e24)?;
    prims[n - 1].p4 = acc;
    errs[n - 1].p4 = acc_e;
    for i in (0..n - 1).rev() {
        let (v, e) = step(&f4, points[i], points[i + 1])?;
        acc += v;
        acc_e += e;
        prims[i].p4 = acc;
        errs[i].p4 = acc_e;
    }
    let bottom = params.quantile(1e-40).min(points[0]);
    let (mut acc, mut acc_e) = step(&f5, bottom, points[0])?;
    prims[0].p5 = acc;
    errs[0].p5 = acc_e;
    for i in 1..n {
        let (v, e) = step(&f5, points[i - 1], points[i])?;
        acc += v;
        acc_e += e;
        prims[i].p5 = acc;
        errs[i].p5 = acc_e;
    }
    Ok((prims, errs))
}
