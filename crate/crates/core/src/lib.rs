#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod config;
pub mod couplings;
pub mod error;
pub mod floquet;
pub mod lindblad;
pub mod linalg;
pub mod models;
pub mod scalar;
pub mod sweep;
pub mod table;

pub use error::{Error, Result};
pub use scalar::Real;
pub mod validate;

/// Double-precision instantiations used by the command-line front end.
pub type Model = models::SystemModel<f64>;
pub type Spectrum = floquet::FloquetSpectrum<f64>;
pub type Couplings = couplings::ReadoutCouplings<f64>;
pub type LevelCouplings = couplings::LevelCouplings<f64>;
pub type Plan = couplings::DrivePlan<f64>;
pub type Pointer = cavity::Trajectory<f64>;
pub type SimResult = lindblad::SimResult<f64>;
