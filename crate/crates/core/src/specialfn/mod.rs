//! Transcendental building blocks.

pub mod gamma;
mod hyper;
pub(crate) mod mittag;
mod whittaker;

use serde::{Deserialize, Serialize};

pub use gamma::log_gamma;
pub use hyper::{hyp1f1, hyp2f1, ConjHyp2f1};
pub use mittag::{mittag_leffler, mittag_leffler_remainder};
pub use whittaker::{f1_fs, psi_rg, whittaker_w, RgMode};

pub type ComplexVal = num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 10_000,
        }
    }
}
