//! Gaussian kernel, its kernel-size derivative, and closed-form inner products
//! between Gaussians of different widths inside a fixed Gaussian RKHS.
//!
//! The RKHS `H(σ*)` of the Gaussian kernel with width `σ*` contains the function
//! `κ_σ(u, ·)` iff `σ > σ*/√2`. For such widths the inner product of two
//! Gaussian sections is
//!
//! ```text
//! <κ_a(u,·), κ_b(v,·)> = (a²b² / (σ*² (a² + b² − σ*²)))^{m/2} · exp(−‖u−v‖² / (2(a² + b² − σ*²)))
//! ```
//!
//! which follows from the Fourier characterisation of the Gaussian RKHS norm.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{invalid, KlmsError, Result};
use crate::scalar::{squared_distance, Scalar};

/// Kernel size plus input dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernelSpec<T> {
    sigma: T,
    dim: usize,
}

impl<T: Scalar> GaussianKernelSpec<T> {
    pub fn new(sigma: T, dim: usize) -> Result<Self> {
        check_sigma(sigma)?;
        if dim == 0 {
            return invalid("input dimension must be at least 1");
        }
        Ok(Self { sigma, dim })
    }

    pub fn sigma(&self) -> T {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, u: &[T], v: &[T]) -> Result<T> {
        self.check_dims(u, v)?;
        Ok(gaussian(squared_distance(u, v), self.sigma))
    }

    pub fn grad_sigma(&self, u: &[T], v: &[T]) -> Result<T> {
        self.check_dims(u, v)?;
        grad_sigma(u, v, self.sigma)
    }

    fn check_dims(&self, u: &[T], v: &[T]) -> Result<()> {
        if u.len() != self.dim || v.len() != self.dim {
            return invalid(format!(
                "expected vectors of dimension {}, got {} and {}",
                self.dim,
                u.len(),
                v.len()
            ));
        }
        Ok(())
    }
}

/// Reference RKHS `H(σ*)` in which cross-width norms are measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RkhsContext<T> {
    sigma_star: T,
    dim: usize,
}

impl<T: Scalar> RkhsContext<T> {
    pub fn new(sigma_star: T, dim: usize) -> Result<Self> {
        check_sigma(sigma_star)?;
        if dim == 0 {
            return invalid("input dimension must be at least 1");
        }
        Ok(Self { sigma_star, dim })
    }

    pub fn sigma_star(&self) -> T {
        self.sigma_star
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Errors with [`KlmsError::NotAMember`] unless `σ > σ*/√2`.
    pub fn check_member(&self, sigma: T) -> Result<()> {
        check_sigma(sigma)?;
        let s = sigma.as_f64();
        let s_star = self.sigma_star.as_f64();
        if s > s_star * FRAC_1_SQRT_2 && 2.0 * s * s - s_star * s_star > 0.0 {
            Ok(())
        } else {
            Err(KlmsError::NotAMember {
                sigma: s,
                sigma_star: s_star,
            })
        }
    }

    pub fn is_member(&self, sigma: T) -> bool {
        self.check_member(sigma).is_ok()
    }
}

/// `exp(−d²/(2σ²))` for a precomputed squared distance; no validation.
#[inline]
pub fn gaussian<T: Scalar>(dist_sq: T, sigma: T) -> T {
    (-dist_sq / (T::of(2.0) * sigma * sigma)).exp()
}

fn check_sigma<T: Scalar>(sigma: T) -> Result<()> {
    if sigma > T::zero() && sigma.is_finite() {
        Ok(())
    } else {
        invalid(format!("kernel size must be positive and finite, got {sigma}"))
    }
}

fn check_same_len<T>(u: &[T], v: &[T]) -> Result<()> {
    if u.len() != v.len() {
        return invalid(format!("dimension mismatch: {} vs {}", u.len(), v.len()));
    }
    if u.is_empty() {
        return invalid("input vectors must be non-empty");
    }
    Ok(())
}

/// Gaussian kernel `κ_σ(u, v) = exp(−‖u−v‖²/(2σ²))`.
pub fn eval<T: Scalar>(u: &[T], v: &[T], sigma: T) -> Result<T> {
    check_sigma(sigma)?;
    check_same_len(u, v)?;
    Ok(gaussian(squared_distance(u, v), sigma))
}

/// `∂κ_σ(u, v)/∂σ = ‖u−v‖² κ_σ(u, v) / σ³`.
pub fn grad_sigma<T: Scalar>(u: &[T], v: &[T], sigma: T) -> Result<T> {
    check_sigma(sigma)?;
    check_same_len(u, v)?;
    let d2 = squared_distance(u, v);
    Ok(d2 * gaussian(d2, sigma) / (sigma * sigma * sigma))
}

/// `‖κ_σ(u,·)‖` in `H(σ*)`; independent of `u`.
pub fn rkhs_norm<T: Scalar>(sigma: T, ctx: &RkhsContext<T>) -> Result<T> {
    Ok(rkhs_norm_sq(sigma, ctx)?.sqrt())
}

/// `‖κ_σ(u,·)‖²` in `H(σ*)`, i.e. `(σ² / (σ*·√(2σ² − σ*²)))^m`.
pub fn rkhs_norm_sq<T: Scalar>(sigma: T, ctx: &RkhsContext<T>) -> Result<T> {
    ctx.check_member(sigma)?;
    let s2 = sigma * sigma;
    let ss = ctx.sigma_star;
    let base = s2 / (ss * (T::of(2.0) * s2 - ss * ss).sqrt());
    Ok(base.powi(ctx.dim as i32))
}

/// `<κ_{σu}(u,·), κ_{σv}(v,·)>` in `H(σ*)`.
pub fn rkhs_inner<T: Scalar>(
    u: &[T],
    sigma_u: T,
    v: &[T],
    sigma_v: T,
    ctx: &RkhsContext<T>,
) -> Result<T> {
    ctx.check_member(sigma_u)?;
    ctx.check_member(sigma_v)?;
    check_same_len(u, v)?;
    if u.len() != ctx.dim {
        return invalid(format!(
            "expected vectors of dimension {}, got {}",
            ctx.dim,
            u.len()
        ));
    }
    Ok(rkhs_inner_unchecked(squared_distance(u, v), sigma_u, sigma_v, ctx))
}

/// Inner product from a precomputed squared distance; widths must already be members.
#[inline]
pub(crate) fn rkhs_inner_unchecked<T: Scalar>(
    dist_sq: T,
    sigma_u: T,
    sigma_v: T,
    ctx: &RkhsContext<T>,
) -> T {
    let su2 = sigma_u * sigma_u;
    let sv2 = sigma_v * sigma_v;
    let ss2 = ctx.sigma_star * ctx.sigma_star;
    let a = su2 + sv2 - ss2;
    let scale = (su2 * sv2 / (ss2 * a)).powf(T::of(ctx.dim as f64 / 2.0));
    scale * (-dist_sq / (T::of(2.0) * a)).exp()
}
