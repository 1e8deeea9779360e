//! Kernel least mean square (KLMS) filters with an online adaptive Gaussian
//! kernel size, quantized variants, and numerical diagnostics for their
//! convergence behaviour.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below fix the scalar to `f64`, which is what the experiment
//! harness and CLI use.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod kernel;
pub mod scalar;

pub use error::{KlmsError, Result};
pub use filter::{OnlineFilter, StepResult};
pub use scalar::Scalar;

pub type RbfExpansion = filter::RbfExpansion<f64>;
pub type Codebook = filter::Codebook<f64>;
pub type Klms = filter::Klms<f64>;
pub type AdaptiveKlms = filter::AdaptiveKlms<f64>;
pub type Qklms = filter::Qklms<f64>;
pub type KernelSizeAdaptation = filter::KernelSizeAdaptation<f64>;
pub type GaussianKernelSpec = kernel::GaussianKernelSpec<f64>;
pub type RkhsContext = kernel::RkhsContext<f64>;
pub type ExperimentConfig = experiments::ExperimentConfig<f64>;
