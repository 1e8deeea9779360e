use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{KlmsError, Result};
use crate::experiments::LorenzParams;
use crate::filter::{DEFAULT_SIGMA_MAX, DEFAULT_SIGMA_MIN};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// `y = cos(8u) + v` with `u` uniform on `[−π, π]`.
    Static,
    /// One-step prediction of the oscillator's second state from five lags.
    Lorenz,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Static => "static",
            ExperimentKind::Lorenz => "lorenz",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = KlmsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "static" => Ok(ExperimentKind::Static),
            "lorenz" => Ok(ExperimentKind::Lorenz),
            other => Err(KlmsError::Config(format!(
                "unknown experiment '{other}' (expected 'static' or 'lorenz')"
            ))),
        }
    }
}

/// How the kernel size is chosen for one learner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaPolicy<T> {
    Fixed(T),
    /// Adaptive, starting from the configured `sigma0`.
    Adaptive,
    /// Adaptive, starting from the rule-of-thumb size of the run's training inputs.
    SilvermanAdaptive,
}

impl<T: Scalar> SigmaPolicy<T> {
    pub fn label(&self) -> String {
        match self {
            SigmaPolicy::Fixed(s) => format!("{s}"),
            SigmaPolicy::Adaptive => "adaptive".into(),
            SigmaPolicy::SilvermanAdaptive => "silverman-adaptive".into(),
        }
    }

    pub fn is_adaptive(&self) -> bool {
        !matches!(self, SigmaPolicy::Fixed(_))
    }
}

impl<T: Scalar> FromStr for SigmaPolicy<T> {
    type Err = KlmsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "adaptive" => Ok(SigmaPolicy::Adaptive),
            "silverman-adaptive" | "silverman-init-adaptive" => Ok(SigmaPolicy::SilvermanAdaptive),
            other => {
                let v: f64 = other.parse().map_err(|_| {
                    KlmsError::Config(format!("bad kernel-size policy '{other}'"))
                })?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(KlmsError::Config(format!(
                        "fixed kernel size must be positive, got {other}"
                    )));
                }
                Ok(SigmaPolicy::Fixed(T::of(v)))
            }
        }
    }
}

/// All parameters of a Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<T> {
    pub experiment: ExperimentKind,
    pub eta: T,
    pub rho: T,
    pub sigma0: T,
    pub policies: Vec<SigmaPolicy<T>>,
    pub quantization: Option<T>,
    /// Training samples per run.
    pub iterations: usize,
    pub mc_runs: usize,
    pub noise_variance: T,
    pub seed: u64,
    pub test_size: usize,
    pub emse_window: usize,
    pub sigma_min: T,
    pub sigma_max: T,
    pub taps: usize,
    pub lorenz: LorenzParams,
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn static_default() -> Self {
        Self {
            experiment: ExperimentKind::Static,
            eta: T::of(0.5),
            rho: T::of(0.025),
            sigma0: T::of(1.0),
            policies: [0.05, 0.1, 0.35, 0.5, 1.0]
                .iter()
                .map(|&s| SigmaPolicy::Fixed(T::of(s)))
                .chain([SigmaPolicy::Adaptive])
                .collect(),
            quantization: None,
            iterations: 5000,
            mc_runs: 1000,
            noise_variance: T::of(1e-4),
            seed: 1,
            test_size: 0,
            emse_window: 2000,
            sigma_min: T::of(DEFAULT_SIGMA_MIN),
            sigma_max: T::of(DEFAULT_SIGMA_MAX),
            taps: 1,
            lorenz: LorenzParams::default(),
        }
    }

    pub fn lorenz_default() -> Self {
        Self {
            experiment: ExperimentKind::Lorenz,
            eta: T::of(0.1),
            rho: T::of(0.05),
            sigma0: T::of(1.0),
            policies: [1.0, 5.5, 10.0, 15.0, 20.0, 30.0]
                .iter()
                .map(|&s| SigmaPolicy::Fixed(T::of(s)))
                .chain([SigmaPolicy::Adaptive])
                .collect(),
            quantization: None,
            iterations: 1000,
            mc_runs: 20,
            noise_variance: T::zero(),
            seed: 1,
            test_size: 100,
            emse_window: 100,
            sigma_min: T::of(DEFAULT_SIGMA_MIN),
            sigma_max: T::of(DEFAULT_SIGMA_MAX),
            taps: 5,
            lorenz: LorenzParams::default(),
        }
    }

    pub fn default_for(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::Static => Self::static_default(),
            ExperimentKind::Lorenz => Self::lorenz_default(),
        }
    }

    /// Parses flat `key = value` text; `#` starts a comment. The `experiment`
    /// key selects the defaults the remaining keys override.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// Like [`parse`](Self::parse), with `key=value` overrides applied last.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = split_pair(line)
                .ok_or_else(|| KlmsError::Config(format!("line {}: expected key = value", lineno + 1)))?;
            pairs.push((k, v));
        }
        for o in overrides {
            let (k, v) = split_pair(o)
                .ok_or_else(|| KlmsError::Config(format!("override '{o}': expected key=value")))?;
            pairs.push((k, v));
        }
        let kind = pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "experiment")
            .map(|(_, v)| v.parse::<ExperimentKind>())
            .transpose()?
            .ok_or_else(|| KlmsError::Config("missing 'experiment' key".into()))?;
        let mut cfg = Self::default_for(kind);
        for (k, v) in &pairs {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = value.parse()?,
            "eta" => self.eta = parse_real(key, value)?,
            "rho" => self.rho = parse_real(key, value)?,
            "sigma0" => self.sigma0 = parse_real(key, value)?,
            "policies" => {
                self.policies = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "quantization" => {
                self.quantization = match value {
                    "none" | "" => None,
                    v => Some(parse_real(key, v)?),
                }
            }
            "iterations" => self.iterations = parse_int(key, value)?,
            "mc_runs" => self.mc_runs = parse_int(key, value)?,
            "noise_variance" => self.noise_variance = parse_real(key, value)?,
            "seed" => self.seed = parse_int(key, value)?,
            "test_size" => self.test_size = parse_int(key, value)?,
            "emse_window" => self.emse_window = parse_int(key, value)?,
            "sigma_min" => self.sigma_min = parse_real(key, value)?,
            "sigma_max" => self.sigma_max = parse_real(key, value)?,
            "taps" => self.taps = parse_int(key, value)?,
            "lorenz_beta" => self.lorenz.beta = parse_real(key, value)?,
            "lorenz_delta" => self.lorenz.delta = parse_real(key, value)?,
            "lorenz_rho" => self.lorenz.rho = parse_real(key, value)?,
            "lorenz_dt" => self.lorenz.dt = parse_real(key, value)?,
            "lorenz_transient" => self.lorenz.transient = parse_int(key, value)?,
            "lorenz_initial_state" => {
                let v: Vec<f64> = value
                    .split(',')
                    .map(|s| parse_real::<f64>(key, s))
                    .collect::<Result<_>>()?;
                self.lorenz.initial_state = v.try_into().map_err(|_| {
                    KlmsError::Config("lorenz_initial_state needs three comma-separated values".into())
                })?;
            }
            other => return Err(KlmsError::Config(format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(KlmsError::Config(m));
        if !(self.eta > T::zero() && self.eta < T::of(2.0)) {
            return bad(format!("eta must lie in (0, 2), got {}", self.eta));
        }
        if !(self.rho >= T::zero() && self.rho.is_finite()) {
            return bad(format!("rho must be non-negative, got {}", self.rho));
        }
        if !(self.sigma0 > T::zero() && self.sigma0.is_finite()) {
            return bad(format!("sigma0 must be positive, got {}", self.sigma0));
        }
        if self.policies.is_empty() {
            return bad("at least one kernel-size policy is required".into());
        }
        if let Some(eps) = self.quantization {
            if !(eps >= T::zero() && eps.is_finite()) {
                return bad(format!("quantization size must be non-negative, got {eps}"));
            }
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        if self.mc_runs == 0 {
            return bad("mc_runs must be at least 1".into());
        }
        if !(self.noise_variance >= T::zero() && self.noise_variance.is_finite()) {
            return bad(format!(
                "noise_variance must be non-negative, got {}",
                self.noise_variance
            ));
        }
        if self.emse_window == 0 {
            return bad("emse_window must be at least 1".into());
        }
        if !(self.sigma_min > T::zero() && self.sigma_min <= self.sigma_max && self.sigma_max.is_finite()) {
            return bad("kernel-size bounds must satisfy 0 < sigma_min <= sigma_max".into());
        }
        if self.taps == 0 {
            return bad("taps must be at least 1".into());
        }
        match self.experiment {
            ExperimentKind::Static => {
                if self.taps != 1 {
                    return bad("the static experiment has scalar inputs; taps must be 1".into());
                }
            }
            ExperimentKind::Lorenz => {
                if self.test_size == 0 {
                    return bad("the lorenz experiment needs test_size >= 1".into());
                }
                self.lorenz.validate().map_err(|e| KlmsError::Config(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Effective EMSE window, capped at the run length.
    pub fn window(&self) -> usize {
        self.emse_window.min(self.iterations)
    }

    /// Canonical `key = value` rendering; parsing it yields an equal config.
    pub fn to_kv_string(&self) -> String {
        let mut s = String::new();
        let policies: Vec<String> = self.policies.iter().map(SigmaPolicy::label).collect();
        let q = self
            .quantization
            .map_or_else(|| "none".to_string(), |e| format!("{e}"));
        let [x0, y0, z0] = self.lorenz.initial_state;
        let _ = writeln!(s, "experiment = {}", self.experiment.name());
        let _ = writeln!(s, "eta = {}", self.eta);
        let _ = writeln!(s, "rho = {}", self.rho);
        let _ = writeln!(s, "sigma0 = {}", self.sigma0);
        let _ = writeln!(s, "policies = {}", policies.join(","));
        let _ = writeln!(s, "quantization = {q}");
        let _ = writeln!(s, "iterations = {}", self.iterations);
        let _ = writeln!(s, "mc_runs = {}", self.mc_runs);
        let _ = writeln!(s, "noise_variance = {}", self.noise_variance);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "test_size = {}", self.test_size);
        let _ = writeln!(s, "emse_window = {}", self.emse_window);
        let _ = writeln!(s, "sigma_min = {}", self.sigma_min);
        let _ = writeln!(s, "sigma_max = {}", self.sigma_max);
        let _ = writeln!(s, "taps = {}", self.taps);
        let _ = writeln!(s, "lorenz_beta = {}", self.lorenz.beta);
        let _ = writeln!(s, "lorenz_delta = {}", self.lorenz.delta);
        let _ = writeln!(s, "lorenz_rho = {}", self.lorenz.rho);
        let _ = writeln!(s, "lorenz_dt = {}", self.lorenz.dt);
        let _ = writeln!(s, "lorenz_transient = {}", self.lorenz.transient);
        let _ = writeln!(s, "lorenz_initial_state = {x0},{y0},{z0}");
        s
    }
}

impl<T: Scalar> fmt::Display for ExperimentConfig<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_kv_string())
    }
}

fn split_pair(s: &str) -> Option<(String, String)> {
    let (k, v) = s.split_once('=')?;
    let k = k.trim();
    if k.is_empty() {
        return None;
    }
    Some((k.to_string(), v.trim().to_string()))
}

fn parse_real<T: Scalar>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<f64>()
        .map(T::of)
        .map_err(|_| KlmsError::Config(format!("{key}: '{value}' is not a number")))
}

fn parse_int<I: FromStr>(key: &str, value: &str) -> Result<I> {
    value
        .trim()
        .parse::<I>()
        .map_err(|_| KlmsError::Config(format!("{key}: '{value}' is not a non-negative integer")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_applies_overrides() {
        let text = "# demo\nexperiment = static\nmc_runs = 10\npolicies = 0.1, adaptive\n";
        let cfg = ExperimentConfig::<f64>::parse_with_overrides(text, &["seed=7".into(), "mc_runs=3".into()]).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::Static);
        assert_eq!(cfg.mc_runs, 3);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.policies, vec![SigmaPolicy::Fixed(0.1), SigmaPolicy::Adaptive]);
        assert_eq!(cfg.eta, 0.5);
    }

    #[test]
    fn lorenz_defaults() {
        let cfg = ExperimentConfig::<f64>::parse("experiment = lorenz\nquantization = 4.0").unwrap();
        assert_eq!(cfg.eta, 0.1);
        assert_eq!(cfg.rho, 0.05);
        assert_eq!(cfg.taps, 5);
        assert_eq!(cfg.quantization, Some(4.0));
        assert_eq!(cfg.lorenz, LorenzParams::default());
    }

    #[test]
    fn rejects_unknown_experiment_and_keys() {
        assert!(matches!(
            ExperimentConfig::<f64>::parse("experiment = henon"),
            Err(KlmsError::Config(_))
        ));
        assert!(ExperimentConfig::<f64>::parse("experiment = static\nfoo = 1").is_err());
        assert!(ExperimentConfig::<f64>::parse("eta = 0.5").is_err());
        assert!(ExperimentConfig::<f64>::parse("experiment = static\neta = 2.5").is_err());
        assert!(ExperimentConfig::<f64>::parse("experiment = static\nmc_runs = 0").is_err());
        assert!(ExperimentConfig::<f64>::parse("experiment = static\nnoise_variance = -1").is_err());
        assert!(ExperimentConfig::<f64>::parse("experiment = static\nquantization = -1").is_err());
        assert!(ExperimentConfig::<f64>::parse("experiment = static\npolicies = -0.1").is_err());
        assert!(ExperimentConfig::<f64>::parse("experiment = static\njunk").is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut cfg = ExperimentConfig::<f64>::lorenz_default();
        cfg.quantization = Some(4.0);
        cfg.policies.push(SigmaPolicy::SilvermanAdaptive);
        cfg.lorenz.initial_state = [1.5, -2.0, 0.1];
        let back = ExperimentConfig::parse(&cfg.to_kv_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
