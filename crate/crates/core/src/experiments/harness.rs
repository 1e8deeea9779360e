use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::experiments::config::{ExperimentConfig, ExperimentKind, SigmaPolicy};
use crate::experiments::data::{embed, gen_static_with_rng, lorenz_series, silverman_init, static_target, Dataset};
use crate::filter::{AdaptiveKlms, KernelSizeAdaptation, Klms, OnlineFilter, Qklms};
use crate::scalar::Scalar;

// Runs evaluated concurrently before being folded into the summary.
const CHUNK: usize = 64;

/// Per-iteration observables of one run under one kernel-size policy.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace<T> {
    /// `e(i)`
    pub errors: Vec<T>,
    /// `e_a(i) = f*(u(i)) − f_{i−1}(u(i))`; static experiment only.
    pub a_priori_errors: Vec<T>,
    /// Test-set MSE after each update; lorenz experiment only.
    pub test_mse: Vec<T>,
    pub sigma: Vec<T>,
    pub network_size: Vec<u32>,
    pub initial_sigma: T,
}

impl<T: Scalar> RunTrace<T> {
    fn with_capacity(n: usize, kind: ExperimentKind, initial_sigma: T) -> Self {
        let (ea, mse) = match kind {
            ExperimentKind::Static => (n, 0),
            ExperimentKind::Lorenz => (0, n),
        };
        Self {
            errors: Vec::with_capacity(n),
            a_priori_errors: Vec::with_capacity(ea),
            test_mse: Vec::with_capacity(mse),
            sigma: Vec::with_capacity(n),
            network_size: Vec::with_capacity(n),
            initial_sigma,
        }
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    /// Learning-curve value at iteration `i`: `e_a²` (static) or test MSE (lorenz).
    pub fn metric(&self, i: usize) -> f64 {
        if self.test_mse.is_empty() {
            let e = self.a_priori_errors[i].as_f64();
            e * e
        } else {
            self.test_mse[i].as_f64()
        }
    }
}

/// Mean and sample standard deviation across runs, per iteration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Curve {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(len: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, xs: impl Iterator<Item = f64>) {
        self.n += 1;
        let n = self.n as f64;
        for ((x, mean), m2) in xs.zip(&mut self.mean).zip(&mut self.m2) {
            let d = x - *mean;
            *mean += d / n;
            *m2 += d * (x - *mean);
        }
    }

    fn finish(self) -> Curve {
        let denom = if self.n > 1 { (self.n - 1) as f64 } else { 1.0 };
        Curve {
            std: self.m2.iter().map(|m| (m / denom).max(0.0).sqrt()).collect(),
            mean: self.mean,
        }
    }
}

/// Aggregated results for one kernel-size policy.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySummary {
    pub label: String,
    /// `"emse"` for the static experiment, `"test_mse"` for lorenz.
    pub metric_name: &'static str,
    pub metric: Curve,
    pub sigma: Curve,
    pub network_size: Curve,
    pub final_metric: Vec<f64>,
    pub final_sigma: Vec<f64>,
    pub final_network_size: Vec<usize>,
    /// Per-run mean of the metric over the trailing window.
    pub windowed_metric: Vec<f64>,
}

impl PolicySummary {
    pub fn final_metric_mean(&self) -> f64 {
        *self.metric.mean.last().unwrap_or(&f64::NAN)
    }

    pub fn final_metric_std(&self) -> f64 {
        *self.metric.std.last().unwrap_or(&f64::NAN)
    }

    pub fn final_sigma_mean(&self) -> f64 {
        *self.sigma.mean.last().unwrap_or(&f64::NAN)
    }

    pub fn final_network_size_mean(&self) -> f64 {
        *self.network_size.mean.last().unwrap_or(&f64::NAN)
    }

    /// Windowed metric averaged across runs; the EMSE estimate for static runs.
    pub fn windowed_mean(&self) -> f64 {
        mean(&self.windowed_metric)
    }

    pub fn windowed_std(&self) -> f64 {
        std_dev(&self.windowed_metric)
    }

    /// Mean curve value at 1-based iteration `i`.
    pub fn metric_at(&self, i: usize) -> f64 {
        self.metric.mean[i - 1]
    }
}

#[derive(Debug, Clone)]
pub struct PolicyResult<T> {
    pub policy: SigmaPolicy<T>,
    /// Empty unless traces were retained.
    pub traces: Vec<RunTrace<T>>,
    pub summary: PolicySummary,
}

#[derive(Debug, Clone)]
pub struct MonteCarloResult<T> {
    pub config: ExperimentConfig<T>,
    pub policies: Vec<PolicyResult<T>>,
}

impl<T: Scalar> MonteCarloResult<T> {
    pub fn policy(&self, label: &str) -> Option<&PolicyResult<T>> {
        self.policies.iter().find(|p| p.summary.label == label)
    }
}

/// Runs every configured policy on `mc_runs` independent trials, keeping traces.
pub fn run_monte_carlo<T: Scalar>(config: &ExperimentConfig<T>) -> Result<MonteCarloResult<T>> {
    run_monte_carlo_with(config, true)
}

/// As [`run_monte_carlo`]; with `keep_traces = false` only the summaries are kept.
///
/// Runs are evaluated in parallel but folded in run order, so results are
/// bitwise independent of the thread count.
pub fn run_monte_carlo_with<T: Scalar>(
    config: &ExperimentConfig<T>,
    keep_traces: bool,
) -> Result<MonteCarloResult<T>> {
    config.validate()?;
    let n = config.iterations;
    let series = match config.experiment {
        ExperimentKind::Lorenz => Some(lorenz_series::<T>(
            &config.lorenz,
            config.mc_runs * segment_len(config),
        )?),
        ExperimentKind::Static => None,
    };

    let np = config.policies.len();
    let mut metric = vec![Welford::new(n); np];
    let mut sigma = vec![Welford::new(n); np];
    let mut size = vec![Welford::new(n); np];
    let mut finals = vec![Finals::default(); np];
    let mut traces: Vec<Vec<RunTrace<T>>> = vec![Vec::new(); np];
    let window = config.window();

    let runs: Vec<usize> = (0..config.mc_runs).collect();
    for chunk in runs.chunks(CHUNK) {
        let results: Vec<Vec<RunTrace<T>>> = chunk
            .par_iter()
            .map(|&r| run_single(config, r, series.as_deref()))
            .collect::<Result<_>>()?;
        for per_run in results {
            for (p, trace) in per_run.into_iter().enumerate() {
                metric[p].push((0..n).map(|i| trace.metric(i)));
                sigma[p].push(trace.sigma.iter().map(|s| s.as_f64()));
                size[p].push(trace.network_size.iter().map(|&s| s as f64));
                let f = &mut finals[p];
                f.metric.push(trace.metric(n - 1));
                f.sigma.push(trace.sigma[n - 1].as_f64());
                f.size.push(trace.network_size[n - 1] as usize);
                f.windowed.push((n - window..n).map(|i| trace.metric(i)).sum::<f64>() / window as f64);
                if keep_traces {
                    traces[p].push(trace);
                }
            }
        }
    }

    let metric_name = match config.experiment {
        ExperimentKind::Static => "emse",
        ExperimentKind::Lorenz => "test_mse",
    };
    let policies = config
        .policies
        .iter()
        .zip(metric.into_iter().zip(sigma).zip(size))
        .zip(finals.into_iter().zip(traces))
        .map(|((policy, ((m, s), z)), (f, tr))| PolicyResult {
            policy: *policy,
            traces: tr,
            summary: PolicySummary {
                label: policy.label(),
                metric_name,
                metric: m.finish(),
                sigma: s.finish(),
                network_size: z.finish(),
                final_metric: f.metric,
                final_sigma: f.sigma,
                final_network_size: f.size,
                windowed_metric: f.windowed,
            },
        })
        .collect();
    Ok(MonteCarloResult {
        config: config.clone(),
        policies,
    })
}

// Per-run end-of-run values for one policy.
#[derive(Debug, Clone, Default)]
struct Finals {
    metric: Vec<f64>,
    sigma: Vec<f64>,
    size: Vec<usize>,
    windowed: Vec<f64>,
}

fn segment_len<T>(config: &ExperimentConfig<T>) -> usize {
    config.taps + config.iterations + config.test_size
}

/// Training/test data of run `run`: a seeded draw for the static problem, a
/// disjoint window of the shared trajectory for lorenz.
pub fn run_data<T: Scalar>(
    config: &ExperimentConfig<T>,
    run: usize,
    series: Option<&[T]>,
) -> Result<(Dataset<T>, Option<Dataset<T>>)> {
    match config.experiment {
        ExperimentKind::Static => {
            let mut rng = run_rng(config.seed, run);
            let train = gen_static_with_rng(config.iterations, config.noise_variance.as_f64(), &mut rng)?;
            Ok((train, None))
        }
        ExperimentKind::Lorenz => {
            let owned;
            let series = match series {
                Some(s) => s,
                None => {
                    owned = lorenz_series::<T>(&config.lorenz, (run + 1) * segment_len(config))?;
                    &owned
                }
            };
            let len = segment_len(config);
            let pairs = embed(&series[run * len..(run + 1) * len], config.taps)?;
            let train = pairs.slice(0..config.iterations);
            let test = pairs.slice(config.iterations..pairs.len());
            Ok((train, Some(test)))
        }
    }
}

/// Independent generator for run `run`: the experiment seed selects the key,
/// the run index the stream.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Builds the learner a policy calls for.
pub fn build_filter<T: Scalar>(
    config: &ExperimentConfig<T>,
    policy: &SigmaPolicy<T>,
    train: &Dataset<T>,
) -> Result<Box<dyn OnlineFilter<T>>> {
    let dim = train.dim();
    let sigma0 = match policy {
        SigmaPolicy::Fixed(s) => *s,
        SigmaPolicy::Adaptive => config.sigma0,
        SigmaPolicy::SilvermanAdaptive => silverman_init(train)?,
    };
    let adaptation = if policy.is_adaptive() {
        Some(KernelSizeAdaptation::with_bounds(config.rho, config.sigma_min, config.sigma_max)?)
    } else {
        None
    };
    Ok(match (config.quantization, adaptation) {
        (Some(eps), a) => Box::new(Qklms::new(dim, eps, sigma0, config.eta, a)?),
        (None, Some(a)) => Box::new(AdaptiveKlms::new(dim, sigma0, config.eta, a)?),
        (None, None) => Box::new(Klms::new(dim, sigma0, config.eta)?),
    })
}

fn run_single<T: Scalar>(
    config: &ExperimentConfig<T>,
    run: usize,
    series: Option<&[T]>,
) -> Result<Vec<RunTrace<T>>> {
    let (train, test) = run_data(config, run, series)?;
    config
        .policies
        .iter()
        .map(|policy| {
            let filter = build_filter(config, policy, &train)?;
            run_policy(config.experiment, filter, &train, test.as_ref())
        })
        .collect()
}

/// Trains one learner over `train`, recording the learning curve.
pub fn run_policy<T: Scalar>(
    kind: ExperimentKind,
    mut filter: Box<dyn OnlineFilter<T>>,
    train: &Dataset<T>,
    test: Option<&Dataset<T>>,
) -> Result<RunTrace<T>> {
    let n = train.len();
    let mut trace = RunTrace::with_capacity(n, kind, filter.current_sigma());
    let mut test_pred: Vec<T> = test.map_or_else(Vec::new, |t| vec![T::zero(); t.len()]);
    let eta = filter.eta();
    for (u, y) in train.iter() {
        let r = filter.step(u, y)?;
        trace.errors.push(r.error);
        trace.sigma.push(r.sigma_after);
        trace.network_size.push(r.network_size as u32);
        match kind {
            ExperimentKind::Static => {
                let truth = T::of(static_target(u[0].as_f64()));
                trace.a_priori_errors.push(truth - r.prediction);
            }
            ExperimentKind::Lorenz => {
                let test = test.expect("lorenz runs carry a test set");
                let expansion = filter.expansion();
                let delta = eta * r.error;
                let mut sse = 0.0f64;
                for ((x, yt), p) in test.iter().zip(&mut test_pred) {
                    *p = *p + delta * expansion.basis(r.center_index, x);
                    let d = (yt - *p).as_f64();
                    sse += d * d;
                }
                trace.test_mse.push(T::of(sse / test.len() as f64));
            }
        }
    }
    Ok(trace)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; 0 for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}
