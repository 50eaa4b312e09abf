use std::f64::consts::{LN_2, PI};

use super::gamma::log_gamma_unchecked;
use super::hyper::{hyp1f1, ConjHyp2f1};
use super::{ComplexVal, SeriesConfig};
use crate::error::{Error, Result};
use crate::pearson::{DiffusionParams, Kind};

fn ln_abs_sinh(t: f64) -> f64 {
    let a = t.abs();
    if a < 20.0 {
        a.sinh().ln()
    } else {
        a + (-(-2.0 * a).exp()).ln_1p() - LN_2
    }
}

/// Whittaker `W_{κ,μ}(z)` for purely imaginary `μ`, built from the two
/// regularized `M` functions.
pub fn whittaker_w(kappa: f64, mu: ComplexVal, z: f64, cfg: &SeriesConfig) -> Result<ComplexVal> {
    if mu.re.abs() > 1e-12 * (1.0 + mu.norm()) {
        return Err(Error::domain("whittaker_w: mu must be purely imaginary"));
    }
    if !(z > 0.0) {
        return Err(Error::domain("whittaker_w: z must be > 0"));
    }
    let y = mu.im;
    // sin(2πμ) = i sinh(2πy)
    let sh = (2.0 * PI * y).sinh();
    if sh.abs() < 1e-12 {
        return Err(Error::Degenerate("whittaker_w: sin(2πμ) pole".into()));
    }
    let ln_sin = ComplexVal::new(
        ln_abs_sinh(2.0 * PI * y),
        if y > 0.0 { PI / 2.0 } else { -PI / 2.0 },
    );
    let ln_pre = ComplexVal::new(PI.ln(), 0.0) - ln_sin;
    let lz = z.ln();
    let x_term = |nu: ComplexVal| -> Result<ComplexVal> {
        let f = hyp1f1(nu - kappa + 0.5, 1.0 + 2.0 * nu, z, cfg)?;
        let lg = -0.5 * z + (nu + 0.5) * lz
            - log_gamma_unchecked(1.0 + 2.0 * nu)
            - log_gamma_unchecked(0.5 - nu - kappa);
        Ok((lg + ln_pre).exp() * f)
    };
    let mu = ComplexVal::new(0.0, y);
    Ok(x_term(-mu)? - x_term(mu)?)
}

fn rg_k(params: &DiffusionParams, lambda: f64, what: &str) -> Result<f64> {
    if params.kind != Kind::Rg {
        return Err(Error::domain(format!("{what} needs RG parameters")));
    }
    params.k_of_lambda(lambda)
}

/// RG Sturm-Liouville solution `ψ(x, -λ)` through the Whittaker identity.
pub fn psi_rg(x: f64, lambda: f64, params: &DiffusionParams, cfg: &SeriesConfig) -> Result<f64> {
    let k = rg_k(params, lambda, "psi_rg")?;
    if !(x > 0.0) {
        return Err(Error::domain("psi_rg: x must be > 0"));
    }
    let z = params.gamma / x;
    let w = whittaker_w(0.5 * (params.beta + 1.0), ComplexVal::new(0.0, k), z, cfg)?;
    let scale = (0.5 * (params.beta + 1.0) * x.ln() + 0.5 * z).exp();
    Ok(scale * w.re)
}

/// FS Sturm-Liouville solution `f₁(x, -λ)`.
pub fn f1_fs(x: f64, lambda: f64, params: &DiffusionParams, cfg: &SeriesConfig) -> Result<f64> {
    if params.kind != Kind::Fs {
        return Err(Error::domain("f1_fs needs FS parameters"));
    }
    let k = params.k_of_lambda(lambda)?;
    if !(x >= 0.0) {
        return Err(Error::domain("f1_fs: x must be >= 0"));
    }
    let h = ConjHyp2f1::new(-0.25 * params.beta, k, 0.5 * params.gamma);
    Ok(h.eval(&[-params.gamma * x / params.beta], cfg)?[0])
}

/// Overflow-free pieces of `ψ` at a fixed band parameter `k`:
/// `ψ(x) = γ^{1/2} S(k) x^{β/2} I(x)` with `S(k) = 2π|C| / sinh(2πk)`,
/// `C = 1/(Γ(1-2ik)Γ(-β/2+ik))` and `I(x) = Im[e^{i arg C} z^{-ik} ₁F₁(-β/2-ik; 1-2ik; z)]`.
#[derive(Debug, Clone, Copy)]
pub struct RgMode {
    beta: f64,
    gamma: f64,
    k: f64,
    phase: f64,
    ln_abs_c: f64,
}

impl RgMode {
    pub fn new(beta: f64, gamma: f64, k: f64) -> Self {
        let g1 = log_gamma_unchecked(ComplexVal::new(1.0, -2.0 * k));
        let g2 = log_gamma_unchecked(ComplexVal::new(-0.5 * beta, k));
        Self {
            beta,
            gamma,
            k,
            phase: -(g1.im + g2.im),
            ln_abs_c: -(g1.re + g2.re),
        }
    }

    /// `ln S(k)`.
    pub fn ln_s(&self) -> f64 {
        (2.0 * PI).ln() + self.ln_abs_c - ln_abs_sinh(2.0 * PI * self.k)
    }

    /// `x^{β/2} I(x)`; requires `γ/x ≤ 100`.
    pub fn eval(&self, x: f64, cfg: &SeriesConfig) -> Result<f64> {
        let z = self.gamma / x;
        let f = hyp1f1(
            ComplexVal::new(-0.5 * self.beta, -self.k),
            ComplexVal::new(1.0, -2.0 * self.k),
            z,
            cfg,
        )?;
        let th = self.phase - self.k * z.ln();
        let i = th.sin() * f.re + th.cos() * f.im;
        Ok(x.powf(0.5 * self.beta) * i)
    }
}
