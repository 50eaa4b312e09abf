//! Acceptance suite: numbered criteria, each a set of measured quantities
//! compared against fixed thresholds.
//!
//! Reports hold no timings, so a given mode and seed always yield the same report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{acf_asymptote, acf_fractional, fit_slope, stationary_gaps, AcfQuery};
use crate::error::Result;
use crate::exec::Execution;
use crate::pearson::DiffusionParams;
use crate::quad::{integrate_log, AdaptiveOpts};
use crate::simulate::{
    empirical_acf, empirical_density, fractional_paths, inverse_subordinator_paths, SimConfig,
    Start,
};
use crate::specialfn::gamma::gamma;
use crate::specialfn::mittag_leffler;
use crate::spectral::{
    backward_solution_on, backward_solutions, caputo_residual, transition_density,
    InnerProductGrid, QuadConfig, SpectralTable, Support, TimeWeight,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// Reduced sample sizes and parameter subsets.
    Quick,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Below,
    Above,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::Above => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, measured: f64, relation: Relation, threshold: f64) -> Self {
        let pass = match relation {
            Relation::Below => measured < threshold,
            Relation::Above => measured > threshold,
        };
        Self {
            name: name.into(),
            measured,
            threshold,
            relation,
            pass,
        }
    }

    fn below(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, Relation::Below, threshold)
    }

    fn above(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self::new(name, measured, Relation::Above, threshold)
    }

    fn failed(name: impl Into<String>, err: &crate::Error) -> Self {
        Self {
            name: format!("{} [error: {err}]", name.into()),
            measured: f64::NAN,
            threshold: 0.0,
            relation: Relation::Below,
            pass: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub mode: Mode,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }
}

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "special functions"),
    (2, "eigensystem"),
    (3, "density normalization"),
    (4, "Markov vs non-Markov"),
    (5, "Monte Carlo cross-validation"),
    (6, "backward-equation residual"),
    (7, "autocorrelation"),
    (8, "stationarity"),
    (9, "Cauchy solutions"),
    (10, "determinism"),
];

/// Runs one criterion.
pub fn run_criterion(id: u32, mode: Mode, seed: u64) -> Option<CriterionResult> {
    let name = CRITERIA.iter().find(|c| c.0 == id)?.1;
    let checks = match id {
        1 => special_functions(seed),
        2 => eigensystem(),
        3 => normalization(mode),
        4 => markov(mode),
        5 => monte_carlo(mode, seed),
        6 => caputo(mode),
        7 => autocorrelation(mode, seed),
        8 => stationarity(),
        9 => cauchy(mode),
        10 => determinism(seed),
        _ => return None,
    };
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    Some(CriterionResult {
        id,
        name: name.to_string(),
        checks,
        pass,
    })
}

pub fn run(mode: Mode, seed: u64) -> Report {
    let criteria = CRITERIA
        .iter()
        .filter_map(|&(id, _)| run_criterion(id, mode, seed))
        .collect();
    Report {
        mode,
        seed,
        criteria,
    }
}

fn guard(name: &str, r: Result<Vec<Check>>) -> Vec<Check> {
    r.unwrap_or_else(|e| vec![Check::failed(name, &e)])
}

fn rg() -> DiffusionParams {
    DiffusionParams::rg(1.0, 5.0, 2.0).expect("valid")
}

fn fs() -> DiffusionParams {
    DiffusionParams::fs(1.0, 10.0, 5.0).expect("valid")
}

fn special_functions(seed: u64) -> Vec<Check> {
    guard(
        "special functions",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0f64;
            for _ in 0..1000 {
                let alpha = rng.gen_range(0.05..0.95);
                let x = 1e3 * rng.gen::<f64>();
                let e = mittag_leffler(alpha, x)?;
                let lower = 1.0 / (1.0 + gamma(1.0 - alpha) * x);
                let upper = 1.0 / (1.0 + x / gamma(1.0 + alpha));
                worst = worst.max((lower - e) / lower).max((e - upper) / upper);
            }
            let mut exp_err = 0.0f64;
            for i in 0..=200 {
                let x = 0.25 * i as f64;
                exp_err = exp_err.max((mittag_leffler(1.0, x)? / (-x).exp() - 1.0).abs());
            }
            let half = std::f64::consts::E * statrs::function::erf::erfc(1.0);
            let half_err = (mittag_leffler(0.5, 1.0)? / half - 1.0).abs();
            Ok(vec![
                Check::below(
                    "relative bound violation, 1000 random (alpha, x)",
                    worst,
                    1e-12,
                ),
                Check::below("E_1(-x) vs exp(-x), max rel err on [0, 50]", exp_err, 1e-10),
                Check::below("E_1/2(-1) vs e*erfc(1), rel err", half_err, 1e-10),
            ])
        })(),
    )
}

fn eigensystem() -> Vec<Check> {
    let mut out = vec![];
    for (label, p) in [
        ("RG (1,9,3)", DiffusionParams::rg(1.0, 9.0, 3.0)),
        ("FS (1,10,6)", DiffusionParams::fs(1.0, 10.0, 6.0)),
    ] {
        out.extend(guard(
            label,
            (|| {
                let p = p?;
                let sp = p.spectrum();
                let basis = (0..=sp.n_max)
                    .map(|n| p.poly_basis(n))
                    .collect::<Result<Vec<_>>>()?;
                let m = p.mean();
                let opts = AdaptiveOpts {
                    abs_tol: 1e-13,
                    rel_tol: 1e-13,
                    max_intervals: 4000,
                };
                let (mut orth, mut resid) = (0.0f64, 0.0f64);
                for (n, pn) in basis.iter().enumerate() {
                    for (k, pk) in basis.iter().enumerate().skip(n) {
                        let f = |x: f64| {
                            pn.eval(x) * pk.eval(x) * p.invariant_density(x).unwrap_or(0.0)
                        };
                        let v = integrate_log(
                            f,
                            1e-6 * m,
                            1e24 * m,
                            &[0.1 * m, m, 10.0 * m, 1e3 * m],
                            opts,
                        )
                        .value;
                        orth = orth.max((v - if n == k { 1.0 } else { 0.0 }).abs());
                    }
                    let lam = sp.eigenvalues[n];
                    for i in 1..40 {
                        let y = 0.1 * i as f64;
                        let g = p.generator_apply_fd(|x| pn.eval(x), y, 1e-4 * y)?;
                        resid = resid
                            .max((g + lam * pn.eval(y)).abs() / (1.0 + (lam * pn.eval(y)).abs()));
                    }
                }
                Ok(vec![
                    Check::below(format!("{label} orthonormality max deviation"), orth, 1e-8),
                    Check::below(
                        format!("{label} generator eigen-residual (relative)"),
                        resid,
                        1e-6,
                    ),
                ])
            })(),
        ));
    }
    out
}

fn normalization(mode: Mode) -> Vec<Check> {
    let alphas: &[f64] = match mode {
        Mode::Quick => &[1.0, 0.7],
        Mode::Full => &[1.0, 0.7, 0.5],
    };
    let x0 = 1.0;
    let mut out = vec![];
    for (label, p) in [("RG (1,5,2)", rg()), ("FS (1,10,5)", fs())] {
        for &alpha in alphas {
            out.extend(guard(
                label,
                (|| {
                    let grid = InnerProductGrid::log_panels(
                        &Support::invariant(&p).with_breaks(&[x0]),
                        0.5,
                        16,
                    )?;
                    let table = SpectralTable::build(
                        &p,
                        alpha,
                        &grid.nodes,
                        &[x0],
                        0.5,
                        &QuadConfig::default(),
                    )?;
                    let mut worst = 0.0f64;
                    for t in [0.5, 1.0, 5.0] {
                        let s = table.slice(t)?;
                        let mut mass = 0.0;
                        for (i, w) in grid.weights.iter().enumerate() {
                            mass += w * table.eval(i, 0, &s)?.value;
                        }
                        worst = worst.max((mass - 1.0).abs());
                    }
                    Ok(vec![Check::below(
                        format!("{label} alpha={alpha} max |mass - 1| over t in {{0.5,1,5}}"),
                        worst,
                        1e-4,
                    )])
                })(),
            ));
        }
    }
    out
}

fn ck_residual(p: &DiffusionParams, alpha: f64) -> Result<f64> {
    let (x, y, t, s) = (0.6, 0.5, 0.3, 0.3);
    let cfg = QuadConfig::default();
    let support = Support::new(p.quantile(1e-9), p.quantile_upper(1e-9))?.with_breaks(&[x, y]);
    let g = InnerProductGrid::log_panels(&support, 0.5, 16)?;
    let a = SpectralTable::build(p, alpha, &[x], &g.nodes, t, &cfg)?;
    let b = SpectralTable::build(p, alpha, &g.nodes, &[y], s, &cfg)?;
    let (sa, sb) = (a.slice(t)?, b.slice(s)?);
    let mut lhs = 0.0;
    for (j, w) in g.weights.iter().enumerate() {
        lhs += w * a.eval(0, j, &sa)?.value * b.eval(j, 0, &sb)?.value;
    }
    Ok((lhs - transition_density(p, alpha, x, t + s, y, &cfg)?.value).abs())
}

fn markov(mode: Mode) -> Vec<Check> {
    let cases: Vec<(&str, DiffusionParams)> = match mode {
        Mode::Quick => vec![("RG (1,5,2)", rg())],
        Mode::Full => vec![("RG (1,5,2)", rg()), ("FS (1,10,5)", fs())],
    };
    let mut out = vec![];
    for (label, p) in cases {
        out.extend(guard(
            label,
            (|| {
                let r1 = ck_residual(&p, 1.0)?;
                let r06 = ck_residual(&p, 0.6)?;
                Ok(vec![
                    Check::below(
                        format!("{label} Chapman-Kolmogorov residual, alpha=1"),
                        r1,
                        1e-3,
                    ),
                    Check::above(
                        format!("{label} Chapman-Kolmogorov residual, alpha=0.6"),
                        r06,
                        1e-2,
                    ),
                ])
            })(),
        ));
    }
    out
}

fn bin_means(table: &SpectralTable, edges: &[f64], t: f64) -> Result<Vec<f64>> {
    let s = table.slice(t)?;
    let (_, w) = crate::quad::gauss_legendre(4);
    (0..edges.len() - 1)
        .map(|b| {
            (0..4)
                .map(|k| Ok(0.5 * w[k] * table.eval(4 * b + k, 0, &s)?.value))
                .sum()
        })
        .collect()
}

fn histogram_l1(p: &DiffusionParams, edges: &[f64], n: usize, dt: f64, seed: u64) -> Result<f64> {
    let (alpha, x0, t) = (0.7, 1.0, 1.0);
    let cfg = SimConfig {
        dt,
        n_paths: n,
        ..SimConfig::default()
    };
    let paths = fractional_paths(p, alpha, &[0.0, t], Start::Fixed(x0), &cfg, seed)?;
    let h = empirical_density(&paths, t, edges)?;
    let (u, _) = crate::quad::gauss_legendre(4);
    let nodes: Vec<f64> = edges
        .windows(2)
        .flat_map(|e| {
            u.iter()
                .map(move |u| 0.5 * (e[0] + e[1]) + 0.5 * (e[1] - e[0]) * u)
        })
        .collect();
    let table = SpectralTable::build(p, alpha, &nodes, &[x0], t, &QuadConfig::default())?;
    h.l1_distance(&bin_means(&table, edges, t)?)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

fn monte_carlo(mode: Mode, seed: u64) -> Vec<Check> {
    let (cases, dt, n_ml): (Vec<(&str, DiffusionParams, Vec<f64>)>, f64, usize) = match mode {
        Mode::Quick => (
            vec![("RG (1,5,2)", rg(), linspace(0.04, 3.04, 50))],
            1e-2,
            20_000,
        ),
        Mode::Full => (
            vec![
                ("RG (1,5,2)", rg(), linspace(0.04, 3.04, 50)),
                ("FS (1,10,5)", fs(), linspace(0.0, 5.0, 50)),
            ],
            1e-3,
            100_000,
        ),
    };
    let mut out = vec![];
    for (k, (label, p, edges)) in cases.into_iter().enumerate() {
        out.extend(guard(
            label,
            (|| {
                let l1 = histogram_l1(&p, &edges, 100_000, dt, seed.wrapping_add(k as u64))?;
                Ok(vec![Check::below(
                    format!("{label} L1(histogram, spectral) at alpha=0.7, t=1, 1e5 paths"),
                    l1,
                    0.05,
                )])
            })(),
        ));
    }
    out.extend(guard(
        "Mittag-Leffler identity",
        (|| {
            let (s, t, alpha) = (1.0, 1.0, 0.7);
            let paths = inverse_subordinator_paths(
                alpha,
                &[0.0, t],
                1e-3,
                n_ml,
                seed.wrapping_add(100),
                Execution::default(),
            )?;
            let v: Vec<f64> = paths.iter().map(|p| (-s * p.values[1]).exp()).collect();
            let nf = v.len() as f64;
            let mean = v.iter().sum::<f64>() / nf;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
            let z = (mean - mittag_leffler(alpha, s * t.powf(alpha))?).abs() / (sd / nf.sqrt());
            Ok(vec![Check::below(
                format!("|mean e^(-sE_t) - E_a(-st^a)| / stderr, (s,t,a)=(1,1,0.7), {n_ml} paths"),
                z,
                3.0,
            )])
        })(),
    ));
    out
}

fn caputo(mode: Mode) -> Vec<Check> {
    guard(
        "Caputo residual",
        (|| {
            let cfg = QuadConfig {
                max_refinements: 12,
                ..QuadConfig::default()
            };
            let grids = |n: usize| {
                let dt = 1.0 / n as f64;
                let ts: Vec<f64> = (0..n).map(|i| (n + i) as f64 * dt).collect();
                let ys: Vec<f64> = (0..n).map(|i| 1.5 + i as f64 / (n - 1) as f64).collect();
                (ts, ys)
            };
            let (ts, ys) = grids(100);
            let r = caputo_residual(&rg(), 0.7, 1.0, &ts, &ys, &cfg)?;
            let mut out = vec![Check::below(
                "RG alpha=0.7 residual, 100x100 grid",
                r.residual,
                2e-2,
            )];
            match mode {
                Mode::Quick => out.push(Check::above(
                    "residual ratio, 50x50 to 100x100 (steps halved)",
                    r.coarse_residual / r.residual,
                    2.0,
                )),
                Mode::Full => {
                    let (ts, ys) = grids(200);
                    let fine = caputo_residual(&rg(), 0.7, 1.0, &ts, &ys, &cfg)?;
                    out.push(Check::above(
                        "residual ratio, 100x100 to 200x200",
                        r.residual / fine.residual,
                        2.0,
                    ));
                }
            }
            Ok(out)
        })(),
    )
}

fn autocorrelation(mode: Mode, seed: u64) -> Vec<Check> {
    let mut out = guard(
        "ACF formula",
        (|| {
            let mut exact = 0.0f64;
            for theta in [0.3, 1.0, 2.5] {
                for (s, t) in [(1.0, 3.0), (0.5, 0.7), (2.0, 10.0), (1.0, 1.0)] {
                    let v = acf_fractional(&AcfQuery::new(theta, 1.0, s, t)?)?;
                    exact = exact.max((v - (-theta * (t - s)).exp()).abs());
                }
            }
            let (theta, alpha, s, t) = (1.0, 0.6, 1.0, 1e3);
            let ratio = acf_fractional(&AcfQuery::new(theta, alpha, s, t)?)?
                / acf_asymptote(theta, alpha, s, t)?;
            Ok(vec![
                Check::below(
                    "alpha=1 reduction to exp(-theta(t-s)), max abs err",
                    exact,
                    1e-8,
                ),
                Check::below(
                    "|ACF/asymptote - 1| at t=1e3, alpha=0.6",
                    (ratio - 1.0).abs(),
                    5e-2,
                ),
            ])
        })(),
    );
    let n = match mode {
        Mode::Quick => 20_000,
        Mode::Full => 100_000,
    };
    out.extend(guard(
        "Monte Carlo ACF",
        (|| {
            let p = rg();
            let (alpha, s) = (0.7, 1.0);
            let ts = [2.0, 4.0, 8.0];
            let cfg = SimConfig {
                dt: 1e-2,
                n_paths: n,
                ..SimConfig::default()
            };
            let paths = fractional_paths(
                &p,
                alpha,
                &[0.0, s, 2.0, 4.0, 8.0],
                Start::Stationary,
                &cfg,
                seed.wrapping_add(200),
            )?;
            let mc = empirical_acf(&paths, s, &ts)?;
            let mut worst = 0.0f64;
            for (t, e) in ts.iter().zip(&mc) {
                let exact = acf_fractional(&AcfQuery::for_diffusion(&p, alpha, s, *t)?)?;
                worst = worst.max((e.value - exact).abs() / e.stderr);
            }
            Ok(vec![Check::below(
                format!("max |MC - formula| / stderr, t in {{2,4,8}}, {n} paths"),
                worst,
                3.0,
            )])
        })(),
    ));
    out
}

fn stationarity() -> Vec<Check> {
    guard(
        "stationary gap",
        (|| {
            let alpha = 0.7;
            let ts: Vec<f64> = (0..=8).map(|i| 10f64.powf(1.0 + i as f64 / 8.0)).collect();
            let g = stationary_gaps(&rg(), alpha, 1.0, 2.0, &ts, &QuadConfig::default())?;
            let lx: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
            let ly: Vec<f64> = g.iter().map(|v| v.ln()).collect();
            let slope = fit_slope(&lx, &ly)?;
            Ok(vec![Check::below(
                "|log-log slope + alpha| over t in [10,100], alpha=0.7",
                (slope + alpha).abs(),
                0.15,
            )])
        })(),
    )
}

fn cauchy(mode: Mode) -> Vec<Check> {
    let alphas: &[f64] = match mode {
        Mode::Quick => &[0.7],
        Mode::Full => &[1.0, 0.7],
    };
    let mut out = vec![];
    let cfg = QuadConfig::default();
    for &alpha in alphas {
        out.extend(guard(
            "g = 1",
            (|| {
                let p = rg();
                let q = backward_solutions(
                    &p,
                    alpha,
                    &|_| 1.0,
                    &Support::invariant(&p),
                    &[0.5, 1.0],
                    &[0.7, 1.6],
                    &cfg,
                )?;
                let worst = q
                    .iter()
                    .flatten()
                    .map(|v| (v - 1.0).abs())
                    .fold(0.0, f64::max);
                Ok(vec![Check::below(
                    format!("RG alpha={alpha} max |q - 1|"),
                    worst,
                    1e-4,
                )])
            })(),
        ));
        out.extend(guard(
            "g = P1",
            (|| {
                let p = rg();
                let p1 = p.poly_basis(1)?;
                let lam1 = p.spectrum().eigenvalues[1];
                let (ts, ys) = ([0.5, 2.0], [0.6, 1.4]);
                let g = |x: f64| p1.eval(x);
                let q = backward_solutions(&p, alpha, &g, &Support::invariant(&p), &ts, &ys, &cfg)?;
                let w = TimeWeight::new(alpha)?;
                let mut worst = 0.0f64;
                for (row, t) in q.iter().zip(ts) {
                    for (v, y) in row.iter().zip(ys) {
                        worst = worst.max((v - w.eval(lam1, t)? * g(y)).abs());
                    }
                }
                Ok(vec![Check::below(
                    format!("RG alpha={alpha} max |q - w(lambda1,t) P1(y)|"),
                    worst,
                    1e-5,
                )])
            })(),
        ));
    }
    out.extend(guard(
        "t -> 0",
        (|| {
            let bump = |x: f64| {
                let u = x - 2.0;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - u * u)).exp()
                }
            };
            let s = Support::new(1.0, 3.0)?;
            let cfg = QuadConfig {
                abs_tol: 1e-6,
                max_refinements: 12,
                ..QuadConfig::default()
            };
            let mut worst = 0.0f64;
            for y in [1.8, 2.0, 2.3] {
                let q = backward_solution_on(&rg(), 1.0, &bump, &s, 1e-3, y, &cfg)?;
                worst = worst.max((q - bump(y)).abs() / bump(y));
            }
            Ok(vec![Check::below(
                "RG alpha=1 bump, max rel |q - g| at t=1e-3",
                worst,
                1e-2,
            )])
        })(),
    ));
    out
}

fn determinism(seed: u64) -> Vec<Check> {
    guard(
        "determinism",
        (|| {
            let grid = [0.0, 0.5, 1.0, 2.0];
            let cfg = SimConfig {
                dt: 1e-2,
                n_paths: 64,
                ..SimConfig::default()
            };
            let a = fractional_paths(&rg(), 0.7, &grid, Start::Stationary, &cfg, seed)?;
            let b = fractional_paths(&rg(), 0.7, &grid, Start::Stationary, &cfg, seed)?;
            let c = fractional_paths(
                &rg(),
                0.7,
                &grid,
                Start::Stationary,
                &SimConfig {
                    exec: Execution::Sequential,
                    ..cfg
                },
                seed,
            )?;
            let differing = a
                .iter()
                .zip(&b)
                .zip(&c)
                .flat_map(|((a, b), c)| a.values.iter().zip(&b.values).zip(&c.values))
                .filter(|((x, y), z)| x.to_bits() != y.to_bits() || x.to_bits() != z.to_bits())
                .count();
            Ok(vec![Check::below(
                "path values differing across repeated and sequential runs",
                differing as f64,
                0.5,
            )])
        })(),
    )
}
