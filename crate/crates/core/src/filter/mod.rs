//! Online learners: fixed kernel-size KLMS, KLMS with adaptive kernel size,
//! and quantized KLMS with optional per-codeword adaptive kernel size.

mod adaptation;
mod expansion;
mod klms;
mod qklms;

pub use adaptation::{KernelSizeAdaptation, DEFAULT_SIGMA_MAX, DEFAULT_SIGMA_MIN};
pub use expansion::RbfExpansion;
pub use klms::{akslms_step, klms_step, AdaptiveKlms, AdaptiveState, Klms};
pub use qklms::{qklms_step, Codebook, Qklms, Quantization};

use crate::error::Result;
use crate::scalar::Scalar;

/// Observables of a single online update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult<T> {
    /// `e(i) = y(i) − f_{i−1}(u(i))`
    pub error: T,
    /// `f_{i−1}(u(i))`
    pub prediction: T,
    /// Kernel size in effect after the step.
    pub sigma_after: T,
    pub network_size: usize,
    pub added_center: bool,
    /// Term whose coefficient received `η·e` (the new center, or the merged codeword).
    pub center_index: usize,
}

pub trait OnlineFilter<T: Scalar>: Send {
    fn step(&mut self, u: &[T], y: T) -> Result<StepResult<T>>;

    fn expansion(&self) -> &RbfExpansion<T>;

    fn current_sigma(&self) -> T;

    fn eta(&self) -> T;

    fn predict(&self, u: &[T]) -> Result<T> {
        self.expansion().predict(u)
    }

    fn network_size(&self) -> usize {
        self.expansion().len()
    }
}
