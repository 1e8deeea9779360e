use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{invalid, KlmsError, Result};
use crate::scalar::Scalar;

/// Input/target pairs with inputs stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    dim: usize,
    inputs: Vec<T>,
    targets: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "input dimension must be at least 1");
        Self {
            dim,
            inputs: Vec::new(),
            targets: Vec::new(),
        }
    }

    pub fn from_pairs(pairs: Vec<(Vec<T>, T)>) -> Result<Self> {
        let dim = match pairs.first() {
            Some((u, _)) => u.len(),
            None => return invalid("no samples"),
        };
        if dim == 0 {
            return invalid("input dimension must be at least 1");
        }
        let mut out = Self::new(dim);
        for (u, y) in pairs {
            out.push(&u, y)?;
        }
        Ok(out)
    }

    pub fn push(&mut self, u: &[T], y: T) -> Result<()> {
        if u.len() != self.dim {
            return invalid(format!(
                "sample has dimension {}, expected {}",
                u.len(),
                self.dim
            ));
        }
        self.inputs.extend_from_slice(u);
        self.targets.push(y);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn input(&self, i: usize) -> &[T] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn target(&self, i: usize) -> T {
        self.targets[i]
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn inputs(&self) -> impl Iterator<Item = &[T]> {
        self.inputs.chunks_exact(self.dim)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[T], T)> {
        self.inputs.chunks_exact(self.dim).zip(self.targets.iter().copied())
    }

    /// Samples `range` as a new dataset.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Self {
        Self {
            dim: self.dim,
            inputs: self.inputs[range.start * self.dim..range.end * self.dim].to_vec(),
            targets: self.targets[range].to_vec(),
        }
    }
}

/// Target mapping of the static regression problem.
pub fn static_target(u: f64) -> f64 {
    (8.0 * u).cos()
}

/// `y = cos(8u) + v`, `u ~ U[−π, π]`, `v ~ N(0, noise_variance)`.
pub fn gen_static<T: Scalar>(n: usize, noise_variance: f64, seed: u64) -> Result<Dataset<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_static_with_rng(n, noise_variance, &mut rng)
}

pub fn gen_static_with_rng<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    noise_variance: f64,
    rng: &mut R,
) -> Result<Dataset<T>> {
    if n == 0 {
        return invalid("need at least one sample");
    }
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return invalid(format!(
            "noise variance must be non-negative, got {noise_variance}"
        ));
    }
    let uniform = Uniform::new_inclusive(-PI, PI).expect("valid interval");
    let std = noise_variance.sqrt();
    let mut out = Dataset::new(1);
    out.inputs.reserve(n);
    out.targets.reserve(n);
    for _ in 0..n {
        let u = uniform.sample(rng);
        let z: f64 = StandardNormal.sample(rng);
        out.inputs.push(T::of(u));
        out.targets.push(T::of(static_target(u) + std * z));
    }
    Ok(out)
}

/// Parameters and integration settings of the three-state chaotic oscillator
/// `ẋ = −βx + yz`, `ẏ = δ(z − y)`, `ż = −xy + ρy − z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub beta: f64,
    pub delta: f64,
    pub rho: f64,
    /// RK4 step, also the sampling interval.
    pub dt: f64,
    /// Steps discarded before recording.
    pub transient: usize,
    pub initial_state: [f64; 3],
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            beta: 4.0,
            delta: 30.0,
            rho: 45.92,
            dt: 0.01,
            transient: 1000,
            initial_state: [1.0, 1.0, 1.0],
        }
    }
}

impl LorenzParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return invalid(format!("integration step must be positive, got {}", self.dt));
        }
        if ![self.beta, self.delta, self.rho]
            .iter()
            .chain(self.initial_state.iter())
            .all(|v| v.is_finite())
        {
            return invalid("oscillator parameters and initial state must be finite");
        }
        Ok(())
    }

    pub fn derivative(&self, s: [f64; 3]) -> [f64; 3] {
        let [x, y, z] = s;
        [
            -self.beta * x + y * z,
            self.delta * (z - y),
            -x * y + self.rho * y - z,
        ]
    }

    /// Classical fourth-order Runge–Kutta step of size `h`.
    pub fn rk4_step(&self, s: [f64; 3], h: f64) -> [f64; 3] {
        let add = |a: [f64; 3], b: [f64; 3], k: f64| [a[0] + k * b[0], a[1] + k * b[1], a[2] + k * b[2]];
        let k1 = self.derivative(s);
        let k2 = self.derivative(add(s, k1, h / 2.0));
        let k3 = self.derivative(add(s, k2, h / 2.0));
        let k4 = self.derivative(add(s, k3, h));
        let mut out = s;
        for i in 0..3 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }
}

/// Second-state samples after discarding the transient, one per step.
pub fn lorenz_series<T: Scalar>(params: &LorenzParams, n: usize) -> Result<Vec<T>> {
    params.validate()?;
    if n == 0 {
        return invalid("need at least one sample");
    }
    let mut s = params.initial_state;
    let mut out = Vec::with_capacity(n);
    for k in 0..params.transient + n {
        s = params.rk4_step(s, params.dt);
        if !s.iter().all(|v| v.is_finite()) {
            return Err(KlmsError::NumericalFailure(format!(
                "oscillator state became non-finite at step {k}"
            )));
        }
        if k >= params.transient {
            out.push(T::of(s[1]));
        }
    }
    Ok(out)
}

/// Time-delay embedding: pair `k` has input `s[k..k+taps]` and target `s[k+taps]`.
pub fn embed<T: Scalar>(series: &[T], taps: usize) -> Result<Dataset<T>> {
    if taps == 0 {
        return invalid("embedding needs at least one tap");
    }
    if series.len() < taps + 1 {
        return invalid(format!(
            "series of length {} is too short for {taps} taps",
            series.len()
        ));
    }
    let mut out = Dataset::new(taps);
    for window in series.windows(taps + 1) {
        out.push(&window[..taps], window[taps])?;
    }
    Ok(out)
}

/// Rule-of-thumb kernel size `σ_data·(4/((2m+1)N))^{1/(m+4)}`, with `σ_data`
/// the mean per-coordinate sample standard deviation.
pub fn silverman_init<T: Scalar>(inputs: &Dataset<T>) -> Result<T> {
    let n = inputs.len();
    if n < 2 {
        return invalid("need at least two inputs");
    }
    let m = inputs.dim();
    let mut std_sum = 0.0;
    for d in 0..m {
        let col = || inputs.inputs().map(|u| u[d].as_f64());
        let mean = col().sum::<f64>() / n as f64;
        let var = col().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        std_sum += var.sqrt();
    }
    let sigma_data = std_sum / m as f64;
    if !(sigma_data > 0.0 && sigma_data.is_finite()) {
        return invalid("inputs have zero spread");
    }
    let factor = (4.0 / ((2 * m + 1) as f64 * n as f64)).powf(1.0 / (m as f64 + 4.0));
    Ok(T::of(sigma_data * factor))
}
