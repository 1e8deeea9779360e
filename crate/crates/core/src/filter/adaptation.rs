use crate::error::{invalid, Result};
use crate::kernel::gaussian;
use crate::scalar::{squared_distance, Scalar};

pub const DEFAULT_SIGMA_MIN: f64 = 1e-4;
pub const DEFAULT_SIGMA_MAX: f64 = 1e4;

/// Stochastic-gradient kernel-size rule with clamping.
///
/// One step moves the kernel size along the gradient of the instantaneous
/// squared error with respect to the previous width:
/// `σ ← σ + ρ·e_prev·e_curr·‖u_prev − u_curr‖²·κ_σ(u_prev, u_curr)/σ³`,
/// then clamps to `[sigma_min, sigma_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSizeAdaptation<T> {
    rho: T,
    sigma_min: T,
    sigma_max: T,
}

impl<T: Scalar> KernelSizeAdaptation<T> {
    pub fn new(rho: T) -> Result<Self> {
        Self::with_bounds(rho, T::of(DEFAULT_SIGMA_MIN), T::of(DEFAULT_SIGMA_MAX))
    }

    /// `rho = 0` is accepted and freezes the kernel size.
    pub fn with_bounds(rho: T, sigma_min: T, sigma_max: T) -> Result<Self> {
        if !(rho >= T::zero() && rho.is_finite()) {
            return invalid(format!("kernel-size step must be non-negative, got {rho}"));
        }
        if !(sigma_min > T::zero() && sigma_min <= sigma_max && sigma_max.is_finite()) {
            return invalid(format!(
                "kernel-size bounds must satisfy 0 < min <= max < inf, got [{sigma_min}, {sigma_max}]"
            ));
        }
        Ok(Self {
            rho,
            sigma_min,
            sigma_max,
        })
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    pub fn bounds(&self) -> (T, T) {
        (self.sigma_min, self.sigma_max)
    }

    pub fn step(&self, sigma_prev: T, e_prev: T, e_curr: T, u_prev: &[T], u_curr: &[T]) -> Result<T> {
        if !(sigma_prev > T::zero()) {
            return invalid(format!("kernel size must be positive, got {sigma_prev}"));
        }
        if u_prev.len() != u_curr.len() {
            return invalid(format!(
                "dimension mismatch: {} vs {}",
                u_prev.len(),
                u_curr.len()
            ));
        }
        Ok(self.step_unchecked(sigma_prev, e_prev, e_curr, u_prev, u_curr))
    }

    /// Unclamped increment; positive when consecutive errors share a sign.
    pub fn increment(&self, sigma_prev: T, e_prev: T, e_curr: T, u_prev: &[T], u_curr: &[T]) -> T {
        let d2 = squared_distance(u_prev, u_curr);
        let grad = d2 * gaussian(d2, sigma_prev) / (sigma_prev * sigma_prev * sigma_prev);
        self.rho * e_prev * e_curr * grad
    }

    #[inline]
    pub(crate) fn step_unchecked(&self, sigma_prev: T, e_prev: T, e_curr: T, u_prev: &[T], u_curr: &[T]) -> T {
        let next = sigma_prev + self.increment(sigma_prev, e_prev, e_curr, u_prev, u_curr);
        if next.is_nan() {
            return self.sigma_min;
        }
        next.max(self.sigma_min).min(self.sigma_max)
    }
}
