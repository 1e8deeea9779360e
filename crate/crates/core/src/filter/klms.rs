use crate::error::{invalid, Result};
use crate::filter::{KernelSizeAdaptation, OnlineFilter, RbfExpansion, StepResult};
use crate::scalar::Scalar;

pub(crate) fn check_eta<T: Scalar>(eta: T) -> Result<()> {
    if eta > T::zero() && eta < T::of(2.0) {
        Ok(())
    } else {
        invalid(format!("step size must lie in (0, 2), got {eta}"))
    }
}

pub(crate) fn check_sigma0<T: Scalar>(sigma: T) -> Result<()> {
    if sigma > T::zero() && sigma.is_finite() {
        Ok(())
    } else {
        invalid(format!("kernel size must be positive, got {sigma}"))
    }
}

/// Appends `u` with coefficient `η·e` where `e = y − f(u)`.
pub fn klms_step<T: Scalar>(
    model: &mut RbfExpansion<T>,
    u: &[T],
    y: T,
    eta: T,
    sigma: T,
) -> Result<StepResult<T>> {
    model.check_input(u)?;
    let prediction = model.predict_unchecked(u);
    let error = y - prediction;
    model.push(u, eta * error, sigma)?;
    Ok(StepResult {
        error,
        prediction,
        sigma_after: sigma,
        network_size: model.len(),
        added_center: true,
        center_index: model.len() - 1,
    })
}

/// Fixed kernel-size KLMS.
#[derive(Debug, Clone)]
pub struct Klms<T> {
    model: RbfExpansion<T>,
    sigma: T,
    eta: T,
}

impl<T: Scalar> Klms<T> {
    pub fn new(dim: usize, sigma: T, eta: T) -> Result<Self> {
        check_sigma0(sigma)?;
        check_eta(eta)?;
        if dim == 0 {
            return invalid("input dimension must be at least 1");
        }
        Ok(Self {
            model: RbfExpansion::new(dim),
            sigma,
            eta,
        })
    }
}

impl<T: Scalar> OnlineFilter<T> for Klms<T> {
    fn step(&mut self, u: &[T], y: T) -> Result<StepResult<T>> {
        klms_step(&mut self.model, u, y, self.eta, self.sigma)
    }

    fn expansion(&self) -> &RbfExpansion<T> {
        &self.model
    }

    fn current_sigma(&self) -> T {
        self.sigma
    }

    fn eta(&self) -> T {
        self.eta
    }
}

/// Chain state of the kernel-size recursion: `σ_{i−1}` and, once one sample
/// has been seen, `(e(i−1), u(i−1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveState<T> {
    pub sigma: T,
    pub previous: Option<(T, Vec<T>)>,
}

impl<T: Scalar> AdaptiveState<T> {
    pub fn new(sigma0: T) -> Self {
        Self {
            sigma: sigma0,
            previous: None,
        }
    }
}

/// One step of KLMS with adaptive kernel size.
///
/// The first step has no previous error, so it keeps `σ_0`.
pub fn akslms_step<T: Scalar>(
    model: &mut RbfExpansion<T>,
    state: &mut AdaptiveState<T>,
    u: &[T],
    y: T,
    eta: T,
    adaptation: &KernelSizeAdaptation<T>,
) -> Result<StepResult<T>> {
    model.check_input(u)?;
    let prediction = model.predict_unchecked(u);
    let error = y - prediction;
    let sigma = match &state.previous {
        Some((e_prev, u_prev)) => adaptation.step(state.sigma, *e_prev, error, u_prev, u)?,
        None => state.sigma,
    };
    model.push(u, eta * error, sigma)?;
    state.sigma = sigma;
    match &mut state.previous {
        Some((e_prev, u_prev)) => {
            *e_prev = error;
            u_prev.copy_from_slice(u);
        }
        None => state.previous = Some((error, u.to_vec())),
    }
    Ok(StepResult {
        error,
        prediction,
        sigma_after: sigma,
        network_size: model.len(),
        added_center: true,
        center_index: model.len() - 1,
    })
}

/// KLMS with online adaptive kernel size.
#[derive(Debug, Clone)]
pub struct AdaptiveKlms<T> {
    model: RbfExpansion<T>,
    state: AdaptiveState<T>,
    adaptation: KernelSizeAdaptation<T>,
    eta: T,
}

impl<T: Scalar> AdaptiveKlms<T> {
    pub fn new(dim: usize, sigma0: T, eta: T, adaptation: KernelSizeAdaptation<T>) -> Result<Self> {
        check_sigma0(sigma0)?;
        check_eta(eta)?;
        if dim == 0 {
            return invalid("input dimension must be at least 1");
        }
        Ok(Self {
            model: RbfExpansion::new(dim),
            state: AdaptiveState::new(sigma0),
            adaptation,
            eta,
        })
    }

    pub fn state(&self) -> &AdaptiveState<T> {
        &self.state
    }
}

impl<T: Scalar> OnlineFilter<T> for AdaptiveKlms<T> {
    fn step(&mut self, u: &[T], y: T) -> Result<StepResult<T>> {
        akslms_step(&mut self.model, &mut self.state, u, y, self.eta, &self.adaptation)
    }

    fn expansion(&self) -> &RbfExpansion<T> {
        &self.model
    }

    fn current_sigma(&self) -> T {
        self.state.sigma
    }

    fn eta(&self) -> T {
        self.eta
    }
}
