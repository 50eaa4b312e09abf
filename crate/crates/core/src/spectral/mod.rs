//! Spectral evaluation of transition densities and Cauchy-problem solutions.

mod cauchy;
mod modes;
mod potential;
mod table;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::specialfn::mittag::mittag_leffler_subtracted;
use crate::specialfn::mittag_leffler;

pub use cauchy::{
    backward_solution, backward_solution_on, backward_solutions, caputo_residual,
    fokker_planck_solution, CaputoReport, InnerProductGrid, Support,
};
pub use modes::RG_Z_MAX;
pub use table::{continuous_integrand, transition_density, SpectralTable, TimeSlice};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityEval {
    pub value: f64,
    pub discrete_part: f64,
    pub continuous_part: f64,
    pub quad_error: f64,
    pub n_quad_nodes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    /// Initial truncation point of the band integral in the `k` variable.
    pub k_max_init: f64,
    /// Number of times the truncation point may be doubled.
    pub max_refinements: usize,
    pub exec: Execution,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            k_max_init: 8.0,
            max_refinements: 8,
            exec: Execution::default(),
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.k_max_init > 0.0) {
            return Err(Error::Config(
                "QuadConfig needs abs_tol > 0 and k_max_init > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightMode {
    Exp,
    ML,
}

/// Time factor of each spectral component: `e^{-λt}` or `E_α(-λt^α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWeight {
    pub mode: WeightMode,
    pub alpha: f64,
}

impl TimeWeight {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::domain(format!("alpha={alpha} outside (0,1]")));
        }
        let mode = if alpha == 1.0 {
            WeightMode::Exp
        } else {
            WeightMode::ML
        };
        Ok(Self { mode, alpha })
    }

    pub fn eval(&self, lambda: f64, t: f64) -> Result<f64> {
        match self.mode {
            WeightMode::Exp => Ok((-lambda * t).exp()),
            WeightMode::ML => mittag_leffler(self.alpha, lambda * t.powf(self.alpha)),
        }
    }

    /// `E_α(-λt^α)` minus the first `order` terms of its large-argument
    /// expansion; equals `e^{-λt}` when `α = 1`.
    pub(crate) fn remainder(&self, lambda: f64, t: f64, order: usize) -> Result<f64> {
        match self.mode {
            WeightMode::Exp => Ok((-lambda * t).exp()),
            WeightMode::ML => {
                mittag_leffler_subtracted(self.alpha, lambda * t.powf(self.alpha), order)
            }
        }
    }
}
