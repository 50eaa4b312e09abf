//! Autocorrelation of the stationary time-changed process and diagnostics
//! for the approach to the invariant law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pearson::DiffusionParams;
use crate::quad::{integrate, AdaptiveOpts};
use crate::specialfn::gamma::{gamma, rgamma};
use crate::specialfn::mittag_leffler;
use crate::spectral::{QuadConfig, SpectralTable};

const ACF_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcfQuery {
    pub theta: f64,
    pub alpha: f64,
    pub s: f64,
    pub t: f64,
}

impl AcfQuery {
    pub fn new(theta: f64, alpha: f64, s: f64, t: f64) -> Result<Self> {
        let q = Self { theta, alpha, s, t };
        q.validate()?;
        Ok(q)
    }

    /// Query tied to a diffusion; rejected when its invariant law has no variance.
    pub fn for_diffusion(params: &DiffusionParams, alpha: f64, s: f64, t: f64) -> Result<Self> {
        params.validate()?;
        if params.variance().is_none() {
            return Err(Error::domain(format!(
                "{} diffusion with beta={} has infinite stationary variance; the correlation is undefined",
                params.kind, params.beta
            )));
        }
        Self::new(params.theta, alpha, s, t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(Error::domain(format!("theta={} must be > 0", self.theta)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::domain(format!(
                "alpha={} must lie in (0,1]",
                self.alpha
            )));
        }
        if !(self.s > 0.0 && self.t >= self.s && self.t.is_finite()) {
            return Err(Error::domain(format!(
                "need t >= s > 0, got s={} t={}",
                self.s, self.t
            )));
        }
        Ok(())
    }
}

fn opts() -> AdaptiveOpts {
    AdaptiveOpts {
        abs_tol: ACF_TOL,
        rel_tol: ACF_TOL,
        max_intervals: 500,
    }
}

/// `Corr[X_α(t), X_α(s)]` for the stationary time-changed process:
///
/// `E_α(−θt^α) + θαt^α/Γ(1+α) ∫₀^{s/t} E_α(−θt^α(1−z)^α) z^{α−1} dz`.
///
/// The piece of the integral on `[0, min(s/t, 1/2)]` is taken in `u = z^α`,
/// which removes the `z^{α−1}` singularity; the rest in `w = (1−z)^α`, which
/// tames the endpoint behavior at `z = 1`. Results are capped at 1.
pub fn acf_fractional(q: &AcfQuery) -> Result<f64> {
    q.validate()?;
    let AcfQuery { theta, alpha, s, t } = *q;
    let c = theta * t.powf(alpha);
    let r = s / t;
    let ml = |x: f64| mittag_leffler(alpha, x.max(0.0)).unwrap_or(f64::NAN);
    let head_end = r.min(0.5);
    let head = integrate(
        |u: f64| ml(c * (1.0 - u.powf(1.0 / alpha)).powf(alpha)),
        0.0,
        head_end.powf(alpha),
        opts(),
    );
    let mut value = head.value / alpha;
    let mut err = head.abs_err / alpha;
    let mut ok = head.converged;
    if r > 0.5 {
        let w_lo = (1.0 - r).max(0.0).powf(alpha);
        let w_hi = 0.5f64.powf(alpha);
        let tail = integrate(
            |w: f64| {
                let z = 1.0 - w.powf(1.0 / alpha);
                ml(c * w) * z.powf(alpha - 1.0) * w.powf(1.0 / alpha - 1.0)
            },
            w_lo,
            w_hi,
            opts(),
        );
        value += tail.value / alpha;
        err += tail.abs_err / alpha;
        ok &= tail.converged;
    }
    let pref = theta * alpha * t.powf(alpha) / gamma(1.0 + alpha);
    let acf = ml(c) + pref * value;
    if !ok || !acf.is_finite() || pref * err > 1e-9 {
        return Err(Error::numeric(
            format!("ACF quadrature did not converge for {q:?}"),
            Some(acf),
        ));
    }
    Ok(acf.min(1.0))
}

/// Leading large-`t` behavior `(1/θ + s^α/Γ(1+α)) / (t^α Γ(1−α))`; zero at `α = 1`.
pub fn acf_asymptote(theta: f64, alpha: f64, s: f64, t: f64) -> Result<f64> {
    AcfQuery::new(theta, alpha, s, t)?;
    if t <= s {
        return Err(Error::domain(format!(
            "asymptote needs t > s, got s={s} t={t}"
        )));
    }
    Ok(rgamma(1.0 - alpha) / t.powf(alpha) * (1.0 / theta + s.powf(alpha) / gamma(1.0 + alpha)))
}

/// `|p_α(x, t; y) − m(x)|`.
pub fn stationary_gap(
    params: &DiffusionParams,
    alpha: f64,
    x: f64,
    y: f64,
    t: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    Ok(stationary_gaps(params, alpha, x, y, &[t], cfg)?[0])
}

/// [`stationary_gap`] at several times from one spectral table.
pub fn stationary_gaps(
    params: &DiffusionParams,
    alpha: f64,
    x: f64,
    y: f64,
    ts: &[f64],
    cfg: &QuadConfig,
) -> Result<Vec<f64>> {
    let t_min = ts.iter().copied().fold(f64::INFINITY, f64::min);
    if !(t_min > 0.0) {
        return Err(Error::domain("stationary_gap needs t > 0"));
    }
    let m = params.invariant_density(x)?;
    let table = SpectralTable::build(params, alpha, &[x], &[y], t_min, cfg)?;
    ts.iter()
        .map(|&t| Ok((table.eval(0, 0, &table.slice(t)?)?.value - m).abs()))
        .collect()
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::domain("slope fit needs two or more paired points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("slope fit needs distinct abscissae"));
    }
    Ok(sxy / sxx)
}
