use crate::error::{invalid, Result};
use crate::filter::klms::{check_eta, check_sigma0};
use crate::filter::{KernelSizeAdaptation, OnlineFilter, RbfExpansion, StepResult};
use crate::scalar::{squared_distance, Scalar};

/// Outcome of nearest-codeword search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantization<T> {
    /// Nearest codeword, smallest index on ties; `None` for an empty codebook.
    pub index: Option<usize>,
    /// Euclidean distance to the nearest codeword (`+∞` when empty).
    pub distance: T,
    pub is_new: bool,
}

/// Online vector-quantization codebook with per-codeword coefficients and kernel sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook<T> {
    expansion: RbfExpansion<T>,
    quantization_size: T,
    // prediction error at the iteration the most recent codeword was added
    last_add_error: T,
}

impl<T: Scalar> Codebook<T> {
    pub fn new(dim: usize, quantization_size: T) -> Result<Self> {
        if !(quantization_size >= T::zero() && quantization_size.is_finite()) {
            return invalid(format!(
                "quantization size must be non-negative, got {quantization_size}"
            ));
        }
        if dim == 0 {
            return invalid("input dimension must be at least 1");
        }
        Ok(Self {
            expansion: RbfExpansion::new(dim),
            quantization_size,
            last_add_error: T::zero(),
        })
    }

    pub fn expansion(&self) -> &RbfExpansion<T> {
        &self.expansion
    }

    pub fn len(&self) -> usize {
        self.expansion.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expansion.is_empty()
    }

    pub fn codeword(&self, j: usize) -> &[T] {
        self.expansion.center(j)
    }

    pub fn quantization_size(&self) -> T {
        self.quantization_size
    }

    pub fn last_add_error(&self) -> T {
        self.last_add_error
    }

    pub fn predict(&self, u: &[T]) -> Result<T> {
        self.expansion.predict(u)
    }

    pub fn quantize(&self, u: &[T]) -> Result<Quantization<T>> {
        self.expansion.check_input(u)?;
        Ok(self.quantize_unchecked(u))
    }

    fn quantize_unchecked(&self, u: &[T]) -> Quantization<T> {
        let mut best: Option<(usize, T)> = None;
        for (j, c) in self.expansion.centers().enumerate() {
            let d2 = squared_distance(c, u);
            match best {
                Some((_, b)) if d2 >= b => {}
                _ => best = Some((j, d2)),
            }
        }
        match best {
            None => Quantization {
                index: None,
                distance: T::infinity(),
                is_new: true,
            },
            Some((j, d2)) => {
                let distance = d2.sqrt();
                Quantization {
                    index: Some(j),
                    distance,
                    is_new: distance > self.quantization_size,
                }
            }
        }
    }
}

/// One QKLMS step.
///
/// A new codeword gets coefficient `η·e`. With `adaptation`, its kernel size
/// follows the gradient rule applied to the two most recent codewords and the
/// errors recorded when each was added; the very first codeword keeps
/// `sigma0`. An input within the quantization size of an existing codeword
/// only adds `η·e` to that codeword's coefficient.
pub fn qklms_step<T: Scalar>(
    cb: &mut Codebook<T>,
    u: &[T],
    y: T,
    eta: T,
    sigma0: T,
    adaptation: Option<&KernelSizeAdaptation<T>>,
) -> Result<StepResult<T>> {
    cb.expansion.check_input(u)?;
    let prediction = cb.expansion.predict_unchecked(u);
    let error = y - prediction;
    let q = cb.quantize_unchecked(u);
    let last = cb.len().checked_sub(1);
    if q.is_new {
        let sigma = match (adaptation, last) {
            (Some(a), Some(j)) => a.step(
                cb.expansion.kernel_sizes()[j],
                cb.last_add_error,
                error,
                cb.expansion.center(j),
                u,
            )?,
            (Some(_), None) => sigma0,
            (None, _) => sigma0,
        };
        cb.expansion.push(u, eta * error, sigma)?;
        cb.last_add_error = error;
        Ok(StepResult {
            error,
            prediction,
            sigma_after: sigma,
            network_size: cb.len(),
            added_center: true,
            center_index: cb.len() - 1,
        })
    } else {
        let j = q.index.expect("non-new quantization has an index");
        cb.expansion.add_to_coefficient(j, eta * error);
        let sigma_after = cb.expansion.kernel_sizes()[cb.len() - 1];
        Ok(StepResult {
            error,
            prediction,
            sigma_after,
            network_size: cb.len(),
            added_center: false,
            center_index: j,
        })
    }
}

/// Quantized KLMS, optionally with per-codeword adaptive kernel size.
#[derive(Debug, Clone)]
pub struct Qklms<T> {
    codebook: Codebook<T>,
    sigma0: T,
    eta: T,
    adaptation: Option<KernelSizeAdaptation<T>>,
}

impl<T: Scalar> Qklms<T> {
    pub fn new(
        dim: usize,
        quantization_size: T,
        sigma0: T,
        eta: T,
        adaptation: Option<KernelSizeAdaptation<T>>,
    ) -> Result<Self> {
        check_sigma0(sigma0)?;
        check_eta(eta)?;
        Ok(Self {
            codebook: Codebook::new(dim, quantization_size)?,
            sigma0,
            eta,
            adaptation,
        })
    }

    pub fn codebook(&self) -> &Codebook<T> {
        &self.codebook
    }
}

impl<T: Scalar> OnlineFilter<T> for Qklms<T> {
    fn step(&mut self, u: &[T], y: T) -> Result<StepResult<T>> {
        qklms_step(
            &mut self.codebook,
            u,
            y,
            self.eta,
            self.sigma0,
            self.adaptation.as_ref(),
        )
    }

    fn expansion(&self) -> &RbfExpansion<T> {
        self.codebook.expansion()
    }

    fn current_sigma(&self) -> T {
        match self.codebook.len() {
            0 => self.sigma0,
            n => self.codebook.expansion().kernel_sizes()[n - 1],
        }
    }

    fn eta(&self) -> T {
        self.eta
    }
}
