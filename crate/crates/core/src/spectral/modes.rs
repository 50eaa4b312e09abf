use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::pearson::{DiffusionParams, Kind};
use crate::quad::gk21_rule;
use crate::specialfn::gamma::{ln_beta, ln_gamma, log_gamma};
use crate::specialfn::{ComplexVal, ConjHyp2f1, RgMode, SeriesConfig};

/// Largest `γ/x` at which RG band modes are evaluated.
pub const RG_Z_MAX: f64 = 100.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct KNode {
    pub k: f64,
    pub wk: f64,
    pub wg: f64,
    pub panel: usize,
}

/// Composite GK21 nodes on `[0, K]` in panels of fixed width.
#[derive(Debug, Clone)]
pub(crate) struct KGrid {
    pub width: f64,
    pub panels: usize,
    pub nodes: Vec<KNode>,
}

impl KGrid {
    pub fn new(width: f64, k_max: f64) -> Self {
        let mut g = Self {
            width,
            panels: 0,
            nodes: vec![],
        };
        g.extend_to(k_max);
        g
    }

    pub fn k_max(&self) -> f64 {
        self.width * self.panels as f64
    }

    /// Appends panels up to `k_max`; returns the index of the first new node.
    pub fn extend_to(&mut self, k_max: f64) -> usize {
        let start = self.nodes.len();
        let target = (k_max / self.width).ceil() as usize;
        for p in self.panels..target {
            let a = p as f64 * self.width;
            for (k, wk, wg) in gk21_rule(a, a + self.width) {
                self.nodes.push(KNode {
                    k,
                    wk,
                    wg,
                    panel: p,
                });
            }
        }
        self.panels = self.panels.max(target);
        start
    }
}

/// Band eigenfunctions `u(x, k)` normalized so that the continuous part of
/// the transition density is `m(x) ∫₀^∞ w(λ(k), t) u(x,k) u(x₀,k) dk`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ModeFamily {
    params: DiffusionParams,
    ln_scale: f64,
}

impl ModeFamily {
    pub fn new(params: &DiffusionParams) -> Result<Self> {
        params.validate_spectral()?;
        let (t, b, g) = (params.theta, params.beta, params.gamma);
        let ln_scale = match params.kind {
            Kind::Rg => (8.0 * t / (PI * (b - 1.0))).ln() + ln_gamma(b) - b * g.ln(),
            Kind::Fs => (16.0 * t / (PI * (b - 2.0))).ln() + ln_beta(0.5 * g, 0.5 * b),
        };
        Ok(Self {
            params: *params,
            ln_scale,
        })
    }

    fn fs_ln_weight(&self, k: f64) -> Result<f64> {
        let (b, g) = (self.params.beta, self.params.gamma);
        let re = |re: f64, im: f64| log_gamma(ComplexVal::new(re, im)).map(|v| v.re);
        let s =
            re(-0.25 * b, k)? + re(0.5 * g + 0.25 * b, k)? - ln_gamma(0.5 * g) - re(1.0, 2.0 * k)?;
        Ok(2.0 * k.ln() + 2.0 * s)
    }

    /// `u(x, k)` at every `x`, for one band parameter `k > 0`.
    pub fn eval_k(&self, k: f64, xs: &[f64], cfg: &SeriesConfig) -> Result<Vec<f64>> {
        let (b, g) = (self.params.beta, self.params.gamma);
        match self.params.kind {
            Kind::Rg => {
                let mode = RgMode::new(b, g, k);
                let c = (0.5 * self.ln_scale).exp();
                xs.iter()
                    .map(|&x| {
                        if g / x > RG_Z_MAX {
                            Ok(0.0)
                        } else {
                            Ok(c * mode.eval(x, cfg)?)
                        }
                    })
                    .collect()
            }
            Kind::Fs => {
                let c = (0.5 * (self.ln_scale + self.fs_ln_weight(k)?)).exp();
                let zs: Vec<f64> = xs.iter().map(|&x| -g * x / b).collect();
                let f = ConjHyp2f1::new(-0.25 * b, k, 0.5 * g).eval(&zs, cfg)?;
                Ok(f.into_iter().map(|v| c * v).collect())
            }
        }
    }

    /// Mode values for nodes `from..` of `grid`, node-major.
    pub fn table(
        &self,
        grid: &KGrid,
        from: usize,
        xs: &[f64],
        cfg: &SeriesConfig,
        exec: Execution,
    ) -> Result<Vec<Vec<f64>>> {
        let nodes = &grid.nodes[from..];
        let rows = exec.try_map(nodes.len(), |i| self.eval_k(nodes[i].k, xs, cfg))?;
        for r in &rows {
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::numeric(
                    "band mode evaluation produced a non-finite value",
                    None,
                ));
            }
        }
        Ok(rows)
    }
}
