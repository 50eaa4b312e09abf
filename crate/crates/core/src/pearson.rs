//! Reciprocal-gamma and Fisher-Snedecor Pearson diffusions.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::{Error, Result};
use crate::specialfn::gamma::{ln_beta, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "rg")]
    Rg,
    #[serde(rename = "fs")]
    Fs,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Rg => "rg",
            Kind::Fs => "fs",
        })
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rg" => Ok(Kind::Rg),
            "fs" => Ok(Kind::Fs),
            other => Err(Error::Config(format!("unknown diffusion kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    pub kind: Kind,
    pub theta: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub cutoff: f64,
    pub eigenvalues: Vec<f64>,
    pub n_max: usize,
}

/// Normalized orthogonal polynomial eigenfunction in monomial form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyBasis {
    pub degree: usize,
    pub coeffs: Vec<f64>,
    pub norm_const: f64,
}

impl PolyBasis {
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

fn check_x(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{what}: argument {x} outside (0, inf)"
        )))
    }
}

impl DiffusionParams {
    pub fn new(kind: Kind, theta: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = Self {
            kind,
            theta,
            beta,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn rg(theta: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(Kind::Rg, theta, beta, gamma)
    }

    pub fn fs(theta: f64, beta: f64, gamma: f64) -> Result<Self> {
        Self::new(Kind::Fs, theta, beta, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.theta.is_finite() && self.beta.is_finite() && self.gamma.is_finite();
        if !finite || !(self.theta > 0.0) || !(self.gamma > 0.0) {
            return Err(Error::domain("parameters need theta > 0 and gamma > 0"));
        }
        let bmin = match self.kind {
            Kind::Rg => 1.0,
            Kind::Fs => 2.0,
        };
        if !(self.beta > bmin) {
            return Err(Error::domain(format!(
                "{} diffusion needs beta > {bmin}",
                self.kind
            )));
        }
        Ok(())
    }

    /// Extra conditions under which the spectral representation holds.
    pub fn validate_spectral(&self) -> Result<()> {
        self.validate()?;
        if self.kind == Kind::Fs {
            if !(self.gamma > 2.0) {
                return Err(Error::domain("FS spectral representation needs gamma > 2"));
            }
            let h = self.gamma / 2.0;
            if (h - h.round()).abs() < 1e-9 && h.round() >= 2.0 {
                return Err(Error::Degenerate(format!(
                    "FS spectral representation excludes gamma = {}",
                    self.gamma
                )));
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            Kind::Rg => self.gamma / (self.beta - 1.0),
            Kind::Fs => self.beta / (self.beta - 2.0),
        }
    }

    /// Stationary variance, when finite.
    pub fn variance(&self) -> Option<f64> {
        let (b, g) = (self.beta, self.gamma);
        match self.kind {
            Kind::Rg if b > 2.0 => Some(g * g / ((b - 1.0).powi(2) * (b - 2.0))),
            Kind::Fs if b > 4.0 => {
                Some(2.0 * b * b * (g + b - 2.0) / (g * (b - 2.0).powi(2) * (b - 4.0)))
            }
            _ => None,
        }
    }

    /// Exponent p in the tail m(x) ~ x^{-p}.
    pub fn tail_exponent(&self) -> f64 {
        match self.kind {
            Kind::Rg => self.beta + 1.0,
            Kind::Fs => self.beta / 2.0 + 1.0,
        }
    }

    pub fn ln_invariant_density(&self, x: f64) -> Result<f64> {
        check_x(x, "invariant_density")?;
        Ok(self.ln_density_unchecked(x))
    }

    pub(crate) fn ln_density_unchecked(&self, x: f64) -> f64 {
        let (b, g) = (self.beta, self.gamma);
        match self.kind {
            Kind::Rg => b * g.ln() - ln_gamma(b) - (b + 1.0) * x.ln() - g / x,
            Kind::Fs => {
                0.5 * g * (g / b).ln() + (0.5 * g - 1.0) * x.ln()
                    - 0.5 * (g + b) * (g * x / b).ln_1p()
                    - ln_beta(0.5 * g, 0.5 * b)
            }
        }
    }

    pub fn invariant_density(&self, x: f64) -> Result<f64> {
        Ok(self.ln_invariant_density(x)?.exp())
    }

    pub(crate) fn density_unchecked(&self, x: f64) -> f64 {
        self.ln_density_unchecked(x).exp()
    }

    /// Stationary distribution function.
    pub fn invariant_cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x == f64::INFINITY {
            return 1.0;
        }
        match self.kind {
            Kind::Rg => gamma_ur(self.beta, self.gamma / x),
            Kind::Fs => {
                let u = self.gamma * x / (self.gamma * x + self.beta);
                beta_reg(0.5 * self.gamma, 0.5 * self.beta, u)
            }
        }
    }

    /// Stationary survival function `1 - F(x)`, accurate in the upper tail.
    pub fn invariant_sf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        if x == f64::INFINITY {
            return 0.0;
        }
        match self.kind {
            Kind::Rg => gamma_lr(self.beta, self.gamma / x),
            Kind::Fs => {
                let w = self.beta / (self.gamma * x + self.beta);
                beta_reg(0.5 * self.beta, 0.5 * self.gamma, w)
            }
        }
    }

    pub fn drift(&self, y: f64) -> Result<f64> {
        check_x(y, "drift")?;
        Ok(self.drift_unchecked(y))
    }

    pub(crate) fn drift_unchecked(&self, y: f64) -> f64 {
        -self.theta * (y - self.mean())
    }

    pub fn diffusion_sq(&self, y: f64) -> Result<f64> {
        check_x(y, "diffusion_sq")?;
        Ok(self.diffusion_sq_unchecked(y))
    }

    pub(crate) fn diffusion_sq_unchecked(&self, y: f64) -> f64 {
        let (t, b, g) = (self.theta, self.beta, self.gamma);
        match self.kind {
            Kind::Rg => 2.0 * t * y * y / (b - 1.0),
            Kind::Fs => 4.0 * t * y * (g * y + b) / (g * (b - 2.0)),
        }
    }

    /// Central-difference evaluation of `μ f' + σ² f''/2` at `y`.
    pub fn generator_apply_fd<F: Fn(f64) -> f64>(&self, f: F, y: f64, h: f64) -> Result<f64> {
        check_x(y, "generator_apply_fd")?;
        if !(h > 0.0) || y - 2.0 * h <= 0.0 {
            return Err(Error::domain("generator_apply_fd: stencil leaves (0, inf)"));
        }
        let (fm, f0, fp) = (f(y - h), f(y), f(y + h));
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        Ok(self.drift_unchecked(y) * d1 + 0.5 * self.diffusion_sq_unchecked(y) * d2)
    }

    pub fn cutoff(&self) -> f64 {
        let (t, b) = (self.theta, self.beta);
        match self.kind {
            Kind::Rg => t * b * b / (4.0 * (b - 1.0)),
            Kind::Fs => t * b * b / (8.0 * (b - 2.0)),
        }
    }

    fn eigenvalue(&self, n: usize) -> f64 {
        let (t, b, n) = (self.theta, self.beta, n as f64);
        match self.kind {
            Kind::Rg => t / (b - 1.0) * n * (b - n),
            Kind::Fs => t / (b - 2.0) * n * (b - 2.0 * n),
        }
    }

    pub fn spectrum(&self) -> Spectrum {
        let cutoff = self.cutoff();
        let top = match self.kind {
            Kind::Rg => (self.beta / 2.0).floor() as usize,
            Kind::Fs => (self.beta / 4.0).floor() as usize,
        };
        let eigenvalues: Vec<f64> = (0..=top)
            .map(|n| self.eigenvalue(n))
            .take_while(|&l| l < cutoff * (1.0 - 1e-12))
            .collect();
        let n_max = eigenvalues.len() - 1;
        Spectrum {
            cutoff,
            eigenvalues,
            n_max,
        }
    }

    /// Continuous-band parameter: `λ = Λ + c k²`.
    pub fn band_scale(&self) -> f64 {
        match self.kind {
            Kind::Rg => self.theta / (self.beta - 1.0),
            Kind::Fs => 2.0 * self.theta / (self.beta - 2.0),
        }
    }

    pub fn lambda_of_k(&self, k: f64) -> f64 {
        self.cutoff() + self.band_scale() * k * k
    }

    pub fn k_of_lambda(&self, lambda: f64) -> Result<f64> {
        let d = lambda - self.cutoff();
        if !(d > 0.0) {
            return Err(Error::domain(format!(
                "lambda={lambda} not above the cutoff {}",
                self.cutoff()
            )));
        }
        Ok((d / self.band_scale()).sqrt())
    }

    pub fn poly_basis(&self, n: usize) -> Result<PolyBasis> {
        let sp = self.spectrum();
        if n > sp.n_max {
            return Err(Error::domain(format!(
                "poly_basis: n={n} exceeds n_max={}",
                sp.n_max
            )));
        }
        let (raw, k) = match self.kind {
            Kind::Rg => (self.rg_rodrigues(n), self.rg_norm(n)),
            Kind::Fs => (self.fs_rodrigues(n), self.fs_norm(n)),
        };
        Ok(PolyBasis {
            degree: n,
            coeffs: raw.iter().map(|c| c * k).collect(),
            norm_const: k,
        })
    }

    // x^{β+1} e^{γ/x} Dⁿ (x^{2n-β-1} e^{-γ/x}); D(x^e e^{-γ/x}) = (e x^{e-1} + γ x^{e-2}) e^{-γ/x}
    fn rg_rodrigues(&self, n: usize) -> Vec<f64> {
        let e0 = 2.0 * n as f64 - self.beta - 1.0;
        let mut c = vec![0.0; 2 * n + 1];
        c[0] = 1.0;
        for _ in 0..n {
            let mut next = vec![0.0; 2 * n + 1];
            for m in 0..c.len() {
                if c[m] == 0.0 {
                    continue;
                }
                let e = e0 - m as f64;
                if m + 1 < next.len() {
                    next[m + 1] += c[m] * e;
                }
                if m + 2 < next.len() {
                    next[m + 2] += c[m] * self.gamma;
                }
            }
            c = next;
        }
        // exponent e0 - m times x^{β+1} gives degree 2n - m
        (0..=n).map(|d| c[2 * n - d]).collect()
    }

    fn rg_norm(&self, n: usize) -> f64 {
        let (b, g, nf) = (self.beta, self.gamma, n as f64);
        let ln_k2 = (b - 2.0 * nf).ln() + ln_gamma(b) - ln_gamma(nf + 1.0) - ln_gamma(b - nf + 1.0);
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sign * g.powi(-(n as i32)) * (0.5 * ln_k2).exp()
    }

    // x^{1-γ/2}(γx+β)^{(γ+β)/2} Dⁿ{2ⁿ x^{γ/2+n-1}(γx+β)^{n-(γ+β)/2}} expanded by Leibniz
    fn fs_rodrigues(&self, n: usize) -> Vec<f64> {
        let (b, g) = (self.beta, self.gamma);
        let a_exp = 0.5 * g + n as f64 - 1.0;
        let b_exp = n as f64 - 0.5 * (g + b);
        let falling = |e: f64, j: usize| (0..j).fold(1.0, |acc, i| acc * (e - i as f64));
        let mut out = vec![0.0; n + 1];
        for j in 0..=n {
            let coef =
                binom(n, j) * falling(a_exp, j) * falling(b_exp, n - j) * g.powi((n - j) as i32);
            // x^{n-j} (γx+β)^j
            for i in 0..=j {
                out[n - j + i] += coef * binom(j, i) * g.powi(i as i32) * b.powi((j - i) as i32);
            }
        }
        let scale = 2f64.powi(n as i32);
        out.iter().map(|c| c * scale).collect()
    }

    fn fs_norm(&self, n: usize) -> f64 {
        let (b, g, nf) = (self.beta, self.gamma, n as f64);
        let tail = 0.5 * b - 2.0 * nf;
        if tail <= 0.0 {
            return 0.0;
        }
        let prod: f64 = (1..=n).map(|k| 0.5 * b + k as f64 - 2.0 * nf).product();
        let ln_k2 = ln_beta(0.5 * g, 0.5 * b)
            - ln_gamma(nf + 1.0)
            - 2.0 * nf * (2.0 * b).ln()
            - ln_beta(0.5 * g + nf, tail)
            - prod.ln();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sign * (0.5 * ln_k2).exp()
    }

    /// Stationary quantile by bisection on the distribution function.
    pub fn quantile(&self, p: f64) -> f64 {
        let (mut lo, mut hi) = (1e-300f64, 1.0f64);
        while self.invariant_cdf(hi) < p {
            hi *= 2.0;
            if hi > 1e300 {
                return hi;
            }
        }
        lo = lo.max(hi * 1e-3);
        while self.invariant_cdf(lo) > p && lo > 1e-300 {
            lo *= 1e-3;
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if self.invariant_cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo < 1.0 + 1e-14 {
                break;
            }
        }
        (lo * hi).sqrt()
    }
}

impl DiffusionParams {
    /// Point with invariant survival probability `q`, accurate for small `q`.
    pub fn quantile_upper(&self, q: f64) -> f64 {
        if q >= 0.5 {
            return self.quantile(1.0 - q);
        }
        let mut lo = self.quantile(0.5);
        let mut hi = 2.0 * lo;
        while self.invariant_sf(hi) > q {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return hi;
            }
        }
        for _ in 0..200 {
            let mid = (lo * hi).sqrt();
            if self.invariant_sf(mid) > q {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi / lo < 1.0 + 1e-14 {
                break;
            }
        }
        (lo * hi).sqrt()
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}
