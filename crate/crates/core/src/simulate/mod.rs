//! Monte Carlo paths: stable subordinator, its inverse, Pearson SDE paths and
//! their time change.

mod io;
mod stats;

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, FisherF, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pearson::{DiffusionParams, Kind};

pub use io::{read_binary, write_binary, write_csv, BinaryDump};
pub use stats::{empirical_acf, empirical_density, Estimate, Histogram, MIN_PATHS};

/// Floor applied to the state inside the drift and diffusion coefficients.
pub const POSITIVITY_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathKind {
    Subordinator,
    InverseSubordinator,
    Diffusion,
    Fractional,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub seed: u64,
    pub kind: PathKind,
    /// Euler steps whose proposal fell below the positivity floor.
    pub truncated_steps: u64,
    pub steps: u64,
}

impl Path {
    /// Value at a time of the grid.
    pub fn at(&self, t: f64) -> Result<f64> {
        let i = self
            .times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0))
            .ok_or_else(|| Error::domain(format!("time {t} is not on the path grid")))?;
        Ok(self.values[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    EulerMaruyama,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Positivity {
    FullTruncation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub n_paths: usize,
    pub scheme: Scheme,
    pub positivity: Positivity,
    /// Multiplies the diffusion coefficient; 0 gives the deterministic relaxation.
    pub noise_scale: f64,
    pub exec: Execution,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            n_paths: 1000,
            scheme: Scheme::EulerMaruyama,
            positivity: Positivity::FullTruncation,
            noise_scale: 1.0,
            exec: Execution::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt={} must be > 0", self.dt)));
        }
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be >= 1".into()));
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::Config("noise_scale must be >= 0".into()));
        }
        Ok(())
    }
}

/// Initial state of a diffusion path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Start {
    Fixed(f64),
    /// Drawn from the invariant law.
    Stationary,
}

impl From<f64> for Start {
    fn from(x: f64) -> Self {
        Start::Fixed(x)
    }
}

// Sub-streams of one master seed; distinct (path, role) pairs never share a stream.
#[derive(Clone, Copy)]
enum Role {
    Clock = 0,
    Diffusion = 1,
    Start = 2,
}

fn stream(seed: u64, path: u64, role: Role) -> ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path * 4 + role as u64);
    rng
}

fn check_alpha_open(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("alpha={alpha} must lie in (0,1)")))
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::domain("empty time grid"));
    }
    if !(t_grid[0] >= 0.0)
        || t_grid.windows(2).any(|w| !(w[1] > w[0]))
        || !t_grid[t_grid.len() - 1].is_finite()
    {
        return Err(Error::domain(
            "time grid must be finite, nonnegative and strictly increasing",
        ));
    }
    Ok(())
}

/// One-sided stable variate with `E[e^{-sS}] = e^{-s^α}` (Kanter's representation).
pub fn stable_variate<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = PI * rng.gen::<f64>();
    let u = if u == 0.0 { f64::MIN_POSITIVE } else { u };
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = ((1.0 - alpha) * u).sin() / e;
    a * b.powf((1.0 - alpha) / alpha)
}

/// Draw from the invariant law: `γ/G` with `G ~ Gamma(β, 1)` for RG, an
/// F(γ, β) variate for FS.
pub fn sample_invariant<R: Rng + ?Sized>(params: &DiffusionParams, rng: &mut R) -> Result<f64> {
    match params.kind {
        Kind::Rg => {
            let g = Gamma::new(params.beta, 1.0).map_err(|e| Error::domain(e.to_string()))?;
            Ok(params.gamma / g.sample(rng))
        }
        Kind::Fs => {
            let f = FisherF::new(params.gamma, params.beta)
                .map_err(|e| Error::domain(e.to_string()))?;
            Ok(f.sample(rng))
        }
    }
}

/// `D` on `0, dt, 2dt, …` up to `t_end`, with increments `dt^{1/α} S`.
pub fn stable_subordinator_path(alpha: f64, t_end: f64, dt: f64, seed: u64) -> Result<Path> {
    stable_subordinator_stream(alpha, t_end, dt, seed, 0)
}

fn stable_subordinator_stream(
    alpha: f64,
    t_end: f64,
    dt: f64,
    seed: u64,
    index: u64,
) -> Result<Path> {
    check_alpha_open(alpha)?;
    if !(dt > 0.0 && t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::domain(
            "stable_subordinator_path needs dt > 0 and t_end > 0",
        ));
    }
    let n = (t_end / dt).round().max(1.0) as usize;
    let scale = dt.powf(1.0 / alpha);
    let mut rng = stream(seed, index, Role::Clock);
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    let mut d = 0.0;
    times.push(0.0);
    values.push(0.0);
    for i in 1..=n {
        d += scale * stable_variate(alpha, &mut rng);
        times.push(i as f64 * dt);
        values.push(d);
    }
    Ok(Path {
        times,
        values,
        seed,
        kind: PathKind::Subordinator,
        truncated_steps: 0,
        steps: n as u64,
    })
}

const MAX_CLOCK_STEPS: usize = 200_000_000;

/// `E_t = inf{x > 0 : D_x > t}` on `t_grid`, taken as the first lattice
/// point `j·dt_inner` where the sampled `D` exceeds `t`. Grid times that `D`
/// jumps over together get the same value.
pub fn inverse_subordinator_path(
    alpha: f64,
    t_grid: &[f64],
    dt_inner: f64,
    seed: u64,
) -> Result<Path> {
    inverse_subordinator_stream(alpha, t_grid, dt_inner, seed, 0)
}

fn inverse_subordinator_stream(
    alpha: f64,
    t_grid: &[f64],
    dt_inner: f64,
    seed: u64,
    index: u64,
) -> Result<Path> {
    check_alpha_open(alpha)?;
    check_grid(t_grid)?;
    if !(dt_inner > 0.0) {
        return Err(Error::domain("dt_inner must be > 0"));
    }
    let min_gap = t_grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if min_gap.is_finite() && dt_inner > min_gap / 10.0 * (1.0 + 1e-9) {
        return Err(Error::domain(format!(
            "dt_inner={dt_inner} does not resolve the grid spacing {min_gap} (needs <= spacing/10)"
        )));
    }
    let scale = dt_inner.powf(1.0 / alpha);
    let mut rng = stream(seed, index, Role::Clock);
    let mut values = Vec::with_capacity(t_grid.len());
    let (mut d, mut j) = (0.0f64, 0usize);
    for &t in t_grid {
        if t == 0.0 {
            values.push(0.0);
            continue;
        }
        while d <= t {
            if j >= MAX_CLOCK_STEPS {
                return Err(Error::numeric(
                    format!("subordinator did not pass t={t} within {MAX_CLOCK_STEPS} steps"),
                    None,
                ));
            }
            d += scale * stable_variate(alpha, &mut rng);
            j += 1;
        }
        values.push(j as f64 * dt_inner);
    }
    Ok(Path {
        times: t_grid.to_vec(),
        values,
        seed,
        kind: PathKind::InverseSubordinator,
        truncated_steps: 0,
        steps: j as u64,
    })
}

// Euler-Maruyama with full truncation through the increasing `stops`,
// recording the state at each stop.
fn euler_through<R: Rng>(
    params: &DiffusionParams,
    stops: &[f64],
    x0: f64,
    cfg: &SimConfig,
    rng: &mut R,
) -> (Vec<f64>, u64, u64) {
    let mut out = Vec::with_capacity(stops.len());
    let mut xt = x0;
    let mut now = 0.0;
    let (mut steps, mut truncated) = (0u64, 0u64);
    for &s in stops {
        while s - now > 1e-12 * s.max(1.0) {
            let h = cfg.dt.min(s - now);
            let xp = xt.max(POSITIVITY_FLOOR);
            let mu = params.drift_unchecked(xp);
            let sig = cfg.noise_scale * params.diffusion_sq_unchecked(xp).sqrt();
            let z: f64 = StandardNormal.sample(rng);
            xt += mu * h + sig * h.sqrt() * z;
            if xt < POSITIVITY_FLOOR {
                truncated += 1;
            }
            steps += 1;
            now += h;
        }
        now = now.max(s);
        out.push(xt.max(POSITIVITY_FLOOR));
    }
    (out, steps, truncated)
}

fn initial_state<R: Rng>(params: &DiffusionParams, start: Start, rng: &mut R) -> Result<f64> {
    match start {
        Start::Fixed(x0) if x0 > 0.0 && x0.is_finite() => Ok(x0),
        Start::Fixed(x0) => Err(Error::domain(format!("x0={x0} must be > 0"))),
        Start::Stationary => sample_invariant(params, rng),
    }
}

/// Pearson SDE path on `t_grid`, integrated with step at most `cfg.dt`.
pub fn pearson_path(
    params: &DiffusionParams,
    t_grid: &[f64],
    x0: impl Into<Start>,
    cfg: &SimConfig,
    seed: u64,
) -> Result<Path> {
    pearson_stream(params, t_grid, x0.into(), cfg, seed, 0)
}

fn pearson_stream(
    params: &DiffusionParams,
    t_grid: &[f64],
    start: Start,
    cfg: &SimConfig,
    seed: u64,
    index: u64,
) -> Result<Path> {
    params.validate()?;
    cfg.validate()?;
    check_grid(t_grid)?;
    let x0 = initial_state(params, start, &mut stream(seed, index, Role::Start))?;
    let mut rng = stream(seed, index, Role::Diffusion);
    let (values, steps, truncated_steps) = euler_through(params, t_grid, x0, cfg, &mut rng);
    Ok(Path {
        times: t_grid.to_vec(),
        values,
        seed,
        kind: PathKind::Diffusion,
        truncated_steps,
        steps,
    })
}

/// Time-changed path `X(E_t)` with independent clock and diffusion streams;
/// the clock is resolved with step `min(cfg.dt, spacing/10)`.
pub fn fractional_path(
    params: &DiffusionParams,
    alpha: f64,
    t_grid: &[f64],
    x0: impl Into<Start>,
    cfg: &SimConfig,
    seed: u64,
) -> Result<Path> {
    Ok(fractional_stream(params, alpha, t_grid, x0.into(), cfg, seed, 0)?.0)
}

/// As [`fractional_path`], also returning the inverse-subordinator path that
/// drove it (`E_t = t` when `alpha = 1`).
pub fn fractional_path_with_clock(
    params: &DiffusionParams,
    alpha: f64,
    t_grid: &[f64],
    x0: impl Into<Start>,
    cfg: &SimConfig,
    seed: u64,
) -> Result<(Path, Path)> {
    fractional_stream(params, alpha, t_grid, x0.into(), cfg, seed, 0)
}

fn clock_step(t_grid: &[f64], dt: f64) -> f64 {
    let min_gap = t_grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    dt.min(min_gap / 10.0)
}

fn fractional_stream(
    params: &DiffusionParams,
    alpha: f64,
    t_grid: &[f64],
    start: Start,
    cfg: &SimConfig,
    seed: u64,
    index: u64,
) -> Result<(Path, Path)> {
    params.validate()?;
    cfg.validate()?;
    check_grid(t_grid)?;
    if alpha == 1.0 {
        let mut p = pearson_stream(params, t_grid, start, cfg, seed, index)?;
        p.kind = PathKind::Fractional;
        let clock = Path {
            times: t_grid.to_vec(),
            values: t_grid.to_vec(),
            seed,
            kind: PathKind::InverseSubordinator,
            truncated_steps: 0,
            steps: 0,
        };
        return Ok((p, clock));
    }
    let clock =
        inverse_subordinator_stream(alpha, t_grid, clock_step(t_grid, cfg.dt), seed, index)?;
    let x0 = initial_state(params, start, &mut stream(seed, index, Role::Start))?;
    let mut rng = stream(seed, index, Role::Diffusion);
    let (values, steps, truncated_steps) = euler_through(params, &clock.values, x0, cfg, &mut rng);
    let path = Path {
        times: t_grid.to_vec(),
        values,
        seed,
        kind: PathKind::Fractional,
        truncated_steps,
        steps,
    };
    Ok((path, clock))
}

/// `cfg.n_paths` Pearson paths; path `i` uses its own sub-streams of `seed`.
pub fn pearson_paths(
    params: &DiffusionParams,
    t_grid: &[f64],
    start: Start,
    cfg: &SimConfig,
    seed: u64,
) -> Result<Vec<Path>> {
    cfg.validate()?;
    cfg.exec.try_map(cfg.n_paths, |i| {
        pearson_stream(params, t_grid, start, cfg, seed, i as u64)
    })
}

/// `cfg.n_paths` time-changed paths.
pub fn fractional_paths(
    params: &DiffusionParams,
    alpha: f64,
    t_grid: &[f64],
    start: Start,
    cfg: &SimConfig,
    seed: u64,
) -> Result<Vec<Path>> {
    cfg.validate()?;
    cfg.exec.try_map(cfg.n_paths, |i| {
        fractional_stream(params, alpha, t_grid, start, cfg, seed, i as u64).map(|r| r.0)
    })
}

/// `n` inverse-subordinator paths on `t_grid`.
pub fn inverse_subordinator_paths(
    alpha: f64,
    t_grid: &[f64],
    dt_inner: f64,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Path>> {
    exec.try_map(n, |i| {
        inverse_subordinator_stream(alpha, t_grid, dt_inner, seed, i as u64)
    })
}

/// `n` subordinator paths up to `t_end`.
pub fn stable_subordinator_paths(
    alpha: f64,
    t_end: f64,
    dt: f64,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Path>> {
    exec.try_map(n, |i| {
        stable_subordinator_stream(alpha, t_end, dt, seed, i as u64)
    })
}
