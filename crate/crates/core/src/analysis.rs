//! Error decomposition, the RKHS energy-conservation ledger, steady-state
//! EMSE theory, and batch oracles used as ground truth in tests.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, KlmsError, Result};
use crate::experiments::Dataset;
use crate::filter::{Klms, OnlineFilter, RbfExpansion};
use crate::kernel::{self, rkhs_inner_unchecked, rkhs_norm_sq, RkhsContext};
use crate::scalar::{squared_distance, Scalar};

/// Zero-mean i.i.d. Gaussian disturbance with the given variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T> {
    variance: T,
}

impl<T: Scalar> NoiseModel<T> {
    pub fn new(variance: T) -> Result<Self> {
        if variance >= T::zero() && variance.is_finite() {
            Ok(Self { variance })
        } else {
            invalid(format!("noise variance must be non-negative, got {variance}"))
        }
    }

    pub fn variance(&self) -> T {
        self.variance
    }

    pub fn std_dev(&self) -> T {
        self.variance.sqrt()
    }
}

/// The unknown mapping `f*`, either as a finite Gaussian expansion (exact
/// RKHS inner products available for any member width) or as a plain
/// function (inner products only against the reference-width kernel, via the
/// reproducing property).
pub enum Target<'a, T> {
    Expansion(&'a RbfExpansion<T>),
    Pointwise(&'a (dyn Fn(&[T]) -> T + Sync)),
}

impl<T: Scalar> Target<'_, T> {
    pub fn eval(&self, u: &[T]) -> Result<T> {
        match self {
            Target::Expansion(f) => f.predict(u),
            Target::Pointwise(f) => Ok(f(u)),
        }
    }

    /// `<f*, κ_σ(u,·)>` in `H(σ*)`.
    fn inner_with_kernel(&self, u: &[T], sigma: T, ctx: &RkhsContext<T>) -> Result<T> {
        match self {
            Target::Expansion(f) => expansion_inner_kernel(f, u, sigma, ctx),
            Target::Pointwise(f) => {
                if sigma == ctx.sigma_star() {
                    Ok(f(u))
                } else {
                    invalid(
                        "cross-width inner products need the target as a Gaussian expansion; \
                         run the ledger with a fixed kernel size equal to sigma*",
                    )
                }
            }
        }
    }
}

/// A priori, a posteriori and prediction errors of one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorDecomposition<T> {
    pub e: T,
    pub e_a: T,
    pub e_p: T,
}

/// `e = y − f_{i−1}(u)`, `e_a = f*(u) − f_{i−1}(u)`, `e_p = f*(u) − f_i(u)`.
pub fn error_decompose<T: Scalar>(
    f_star: &Target<'_, T>,
    model_before: &RbfExpansion<T>,
    model_after: &RbfExpansion<T>,
    u: &[T],
    y: T,
) -> Result<ErrorDecomposition<T>> {
    let target = f_star.eval(u)?;
    let before = model_before.predict(u)?;
    let after = model_after.predict(u)?;
    Ok(ErrorDecomposition {
        e: y - before,
        e_a: target - before,
        e_p: target - after,
    })
}

/// One row of the energy ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRecord<T> {
    pub e: T,
    pub e_a: T,
    pub e_p: T,
    /// `‖f̃_i‖² − ‖f̃_{i−1}‖²` in `H(σ*)`
    pub norm_change: T,
    /// `‖f̃_i‖² − ‖f̃_{i−1}‖² + e_a²`
    pub lhs: T,
    /// `e_p² + ε(i)`
    pub rhs: T,
    pub epsilon_i: T,
    pub delta_norm_sq: T,
    /// `<f̃_{i−1}, δ_i>`
    pub residual_delta_inner: T,
}

impl<T: Scalar> LedgerRecord<T> {
    pub fn relative_gap(&self) -> T {
        let scale = self.lhs.abs().max(self.rhs.abs()).max(T::of(1e-30));
        (self.lhs - self.rhs).abs() / scale
    }
}

/// Per-step energy bookkeeping in the fixed reference space `H(σ*)`.
///
/// `model_after` must equal `model_before` plus one appended center at `u`.
/// Every RKHS quantity is evaluated from closed-form inner products, while
/// `e`, `e_a`, `e_p` come from direct evaluation, so agreement of `lhs` and
/// `rhs` checks the two routes against each other.
pub fn energy_ledger_step<T: Scalar>(
    f_star: &Target<'_, T>,
    model_before: &RbfExpansion<T>,
    model_after: &RbfExpansion<T>,
    u: &[T],
    y: T,
    eta: T,
    ctx: &RkhsContext<T>,
) -> Result<LedgerRecord<T>> {
    if model_after.len() != model_before.len() + 1 {
        return invalid("the ledger needs exactly one appended center per step");
    }
    let j = model_after.len() - 1;
    if model_after.center(j) != u {
        return invalid("appended center must equal the current input");
    }
    let sigma_i = model_after.kernel_sizes()[j];
    ctx.check_member(sigma_i)?;
    for &s in model_before.kernel_sizes() {
        ctx.check_member(s)?;
    }
    let sigma_star = ctx.sigma_star();

    let ErrorDecomposition { e, e_a, e_p } = error_decompose(f_star, model_before, model_after, u, y)?;

    // <f̃_{i−1}, κ_{σ_i}(u,·)> and <f̃_{i−1}, κ_{σ*}(u,·)>
    let res_new = f_star.inner_with_kernel(u, sigma_i, ctx)?
        - expansion_inner_kernel(model_before, u, sigma_i, ctx)?;
    let res_ref = f_star.inner_with_kernel(u, sigma_star, ctx)?
        - expansion_inner_kernel(model_before, u, sigma_star, ctx)?;
    let residual_delta_inner = res_new - res_ref;

    let new_norm_sq = rkhs_norm_sq(sigma_i, ctx)?;
    let cross_ref = rkhs_inner_unchecked(T::zero(), sigma_i, sigma_star, ctx);
    let delta_norm_sq = new_norm_sq - T::of(2.0) * cross_ref + T::one();
    // <κ_{σ_i}(u,·), δ_i>
    let new_delta_inner = new_norm_sq - cross_ref;

    let step = eta * e;
    let norm_change = -T::of(2.0) * step * res_new + step * step * new_norm_sq;

    let diff = e_p - e_a;
    let epsilon_i = diff * diff * new_delta_inner + T::of(2.0) * diff * residual_delta_inner;

    Ok(LedgerRecord {
        e,
        e_a,
        e_p,
        norm_change,
        lhs: norm_change + e_a * e_a,
        rhs: e_p * e_p + epsilon_i,
        epsilon_i,
        delta_norm_sq,
        residual_delta_inner,
    })
}

/// `<f, κ_σ(u,·)>` in `H(σ*)` for a Gaussian expansion `f`.
pub fn expansion_inner_kernel<T: Scalar>(
    f: &RbfExpansion<T>,
    u: &[T],
    sigma: T,
    ctx: &RkhsContext<T>,
) -> Result<T> {
    ctx.check_member(sigma)?;
    f.check_input(u)?;
    let mut acc = T::zero();
    for ((c, &a), &s) in f.centers().zip(f.coefficients()).zip(f.kernel_sizes()) {
        ctx.check_member(s)?;
        acc = acc + a * rkhs_inner_unchecked(squared_distance(c, u), s, sigma, ctx);
    }
    Ok(acc)
}

/// `<f, g>` in `H(σ*)` for two Gaussian expansions.
pub fn expansion_inner<T: Scalar>(
    f: &RbfExpansion<T>,
    g: &RbfExpansion<T>,
    ctx: &RkhsContext<T>,
) -> Result<T> {
    if f.dim() != g.dim() {
        return invalid("expansions have different input dimensions");
    }
    let mut acc = T::zero();
    for ((c, &a), &s) in g.centers().zip(g.coefficients()).zip(g.kernel_sizes()) {
        acc = acc + a * expansion_inner_kernel(f, c, s, ctx)?;
    }
    Ok(acc)
}

/// `‖f* − f‖²` in `H(σ*)` for a Gaussian-expansion target.
pub fn residual_norm_sq<T: Scalar>(
    f_star: &RbfExpansion<T>,
    f: &RbfExpansion<T>,
    ctx: &RkhsContext<T>,
) -> Result<T> {
    let ss = expansion_inner(f_star, f_star, ctx)?;
    let sf = expansion_inner(f_star, f, ctx)?;
    let ff = expansion_inner(f, f, ctx)?;
    Ok(ss - T::of(2.0) * sf + ff)
}

/// Steady-state EMSE of fixed kernel-size KLMS, `η ξ²/(2 − η)`.
pub fn theoretical_emse<T: Scalar>(eta: T, noise_variance: T) -> Result<T> {
    if !(eta > T::zero() && eta < T::of(2.0)) {
        return invalid(format!("step size must lie in (0, 2), got {eta}"));
    }
    let noise = NoiseModel::new(noise_variance)?;
    Ok(eta * noise.variance() / (T::of(2.0) - eta))
}

/// Sample mean of `‖κ_{σ_i}‖²_{H(σ*)} − 1` over the supplied kernel sizes.
pub fn varsigma_estimate<T: Scalar>(sigmas: &[T], sigma_star: T, dim: usize) -> Result<T> {
    if sigmas.is_empty() {
        return invalid("need at least one kernel size");
    }
    let ctx = RkhsContext::new(sigma_star, dim)?;
    let mut acc = 0.0f64;
    for &s in sigmas {
        acc += (rkhs_norm_sq(s, &ctx)? - T::one()).as_f64();
    }
    Ok(T::of(acc / sigmas.len() as f64))
}

/// Reference width `0.999·√2·min σ_i`, inside the membership bound for every width seen.
pub fn reference_sigma<T: Scalar>(sigmas: &[T]) -> Result<T> {
    let min = sigmas
        .iter()
        .copied()
        .fold(None, |m: Option<T>, s| Some(m.map_or(s, |m| m.min(s))))
        .ok_or_else(|| KlmsError::InvalidArgument("need at least one kernel size".into()))?;
    if !(min > T::zero()) {
        return invalid("kernel sizes must be positive");
    }
    Ok(T::of(0.999 * std::f64::consts::SQRT_2) * min)
}

/// Mean of `e_a²` over the trailing `window` samples, averaged across runs.
pub fn emse_estimate<T: Scalar>(traces: &[Vec<T>], window: usize) -> Result<T> {
    if traces.is_empty() {
        return invalid("no traces supplied");
    }
    if window == 0 {
        return invalid("window must be positive");
    }
    let shortest = traces.iter().map(Vec::len).min().unwrap_or(0);
    if window > shortest {
        return invalid(format!(
            "window {window} exceeds shortest trace length {shortest}"
        ));
    }
    let mut total = 0.0f64;
    for t in traces {
        let tail = &t[t.len() - window..];
        total += tail.iter().map(|e| e.as_f64() * e.as_f64()).sum::<f64>() / window as f64;
    }
    Ok(T::of(total / traces.len() as f64))
}

/// Regularized kernel regression `α = (K + γI)⁻¹ y`, returned as an expansion.
pub fn batch_solve<T: Scalar>(
    inputs: &[Vec<T>],
    outputs: &[T],
    sigma: T,
    gamma: T,
) -> Result<RbfExpansion<T>> {
    let n = inputs.len();
    if n == 0 {
        return invalid("need at least one sample");
    }
    if outputs.len() != n {
        return invalid("inputs and outputs differ in length");
    }
    if !(gamma >= T::zero()) {
        return invalid(format!("regularization must be non-negative, got {gamma}"));
    }
    let dim = inputs[0].len();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let k = kernel::eval(&inputs[i], &inputs[j], sigma)?.as_f64();
            gram[(i, j)] = k;
            gram[(j, i)] = k;
        }
        gram[(i, i)] += gamma.as_f64();
    }
    let rhs = DVector::from_iterator(n, outputs.iter().map(|y| y.as_f64()));
    let alpha = gram
        .lu()
        .solve(&rhs)
        .ok_or_else(|| KlmsError::NumericalFailure("singular kernel system".into()))?;
    if alpha.iter().any(|a| !a.is_finite()) {
        return Err(KlmsError::NumericalFailure(
            "kernel system solution is not finite".into(),
        ));
    }
    RbfExpansion::from_parts(
        dim,
        inputs.to_vec(),
        alpha.iter().map(|&a| T::of(a)).collect(),
        vec![sigma; n],
    )
}

/// Runs fixed kernel-size KLMS on `train` for each candidate and returns the
/// candidate with the lowest validation MSE (ties go to the smaller size).
pub fn grid_search_sigma<T: Scalar>(
    train: &Dataset<T>,
    validate: &Dataset<T>,
    grid: &[T],
    eta: T,
) -> Result<T> {
    if grid.is_empty() {
        return invalid("empty kernel-size grid");
    }
    if train.is_empty() || validate.is_empty() {
        return invalid("training and validation sets must be non-empty");
    }
    let mut best: Option<(T, f64)> = None;
    for &sigma in grid {
        let mut f = Klms::new(train.dim(), sigma, eta)?;
        for (u, y) in train.iter() {
            f.step(u, y)?;
        }
        let mut sse = 0.0f64;
        for (u, y) in validate.iter() {
            let r = (y - f.predict(u)?).as_f64();
            sse += r * r;
        }
        let mse = sse / validate.len() as f64;
        best = match best {
            Some((s, m)) if m < mse || (m == mse && s <= sigma) => Some((s, m)),
            _ => Some((sigma, mse)),
        };
    }
    Ok(best.expect("grid is non-empty").0)
}
