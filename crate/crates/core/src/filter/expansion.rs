use crate::error::{invalid, Result};
use crate::scalar::{squared_distance, Scalar};

/// Growing Gaussian RBF network `f(u) = Σ_j a_j κ_{σ_j}(c_j, u)`.
///
/// Centers are stored row-major in one flat buffer. Each center keeps the
/// kernel size it was created with.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfExpansion<T> {
    dim: usize,
    centers: Vec<T>,
    coefficients: Vec<T>,
    kernel_sizes: Vec<T>,
    // −1/(2σ_j²), cached per center
    neg_half_precision: Vec<T>,
}

impl<T: Scalar> RbfExpansion<T> {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "input dimension must be at least 1");
        Self {
            dim,
            centers: Vec::new(),
            coefficients: Vec::new(),
            kernel_sizes: Vec::new(),
            neg_half_precision: Vec::new(),
        }
    }

    /// Builds an expansion from explicit parts, e.g. a known target mapping.
    pub fn from_parts(
        dim: usize,
        centers: Vec<Vec<T>>,
        coefficients: Vec<T>,
        kernel_sizes: Vec<T>,
    ) -> Result<Self> {
        if dim == 0 {
            return invalid("input dimension must be at least 1");
        }
        if centers.len() != coefficients.len() || centers.len() != kernel_sizes.len() {
            return invalid("centers, coefficients and kernel sizes must have equal length");
        }
        let mut out = Self::new(dim);
        for ((c, a), s) in centers.iter().zip(coefficients).zip(kernel_sizes) {
            out.push(c, a, s)?;
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn center(&self, j: usize) -> &[T] {
        &self.centers[j * self.dim..(j + 1) * self.dim]
    }

    pub fn centers(&self) -> impl Iterator<Item = &[T]> {
        self.centers.chunks_exact(self.dim)
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn kernel_sizes(&self) -> &[T] {
        &self.kernel_sizes
    }

    /// Appends a center. This is the only structural mutation.
    pub fn push(&mut self, center: &[T], coefficient: T, sigma: T) -> Result<()> {
        if center.len() != self.dim {
            return invalid(format!(
                "center has dimension {}, expected {}",
                center.len(),
                self.dim
            ));
        }
        if !(sigma > T::zero() && sigma.is_finite()) {
            return invalid(format!("kernel size must be positive, got {sigma}"));
        }
        self.centers.extend_from_slice(center);
        self.coefficients.push(coefficient);
        self.kernel_sizes.push(sigma);
        self.neg_half_precision.push(-T::one() / (T::of(2.0) * sigma * sigma));
        Ok(())
    }

    pub(crate) fn add_to_coefficient(&mut self, j: usize, delta: T) {
        self.coefficients[j] = self.coefficients[j] + delta;
    }

    /// Evaluates the network at `u`. The empty network is identically zero.
    pub fn predict(&self, u: &[T]) -> Result<T> {
        self.check_input(u)?;
        Ok(self.predict_unchecked(u))
    }

    #[inline]
    pub(crate) fn predict_unchecked(&self, u: &[T]) -> T {
        let mut acc = T::zero();
        for ((c, &a), &p) in self
            .centers
            .chunks_exact(self.dim)
            .zip(&self.coefficients)
            .zip(&self.neg_half_precision)
        {
            acc = acc + a * (squared_distance(c, u) * p).exp();
        }
        acc
    }

    /// Value of the `j`-th term's kernel at `u`, `κ_{σ_j}(c_j, u)`.
    #[inline]
    pub fn basis(&self, j: usize, u: &[T]) -> T {
        (squared_distance(self.center(j), u) * self.neg_half_precision[j]).exp()
    }

    pub(crate) fn check_input(&self, u: &[T]) -> Result<()> {
        if u.len() != self.dim {
            return invalid(format!(
                "input has dimension {}, expected {}",
                u.len(),
                self.dim
            ));
        }
        Ok(())
    }
}
