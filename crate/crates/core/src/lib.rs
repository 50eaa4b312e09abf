pub mod analysis;
pub mod error;
pub mod exec;
pub mod fmt;
pub mod pearson;
pub mod quad;
pub mod simulate;
pub mod specialfn;
pub mod spectral;
pub mod validation;

pub use error::{Error, Result};
pub use exec::Execution;
pub use pearson::{DiffusionParams, Kind, PolyBasis, Spectrum};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
