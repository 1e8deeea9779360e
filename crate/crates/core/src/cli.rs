//! Experiment orchestration behind the `klms` binary: config in, CSV artifacts out.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::analysis::theoretical_emse;
use crate::error::KlmsError;
use crate::experiments::{run_monte_carlo_with, ExperimentConfig, ExperimentKind, MonteCarloResult};

pub const CONVERGENCE_FILE: &str = "convergence.csv";
pub const SIGMA_FILE: &str = "sigma_evolution.csv";
pub const NETWORK_SIZE_FILE: &str = "network_size.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const CONFIG_ECHO_FILE: &str = "config.resolved";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Klms(#[from] KlmsError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl CliError {
    /// 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Klms(KlmsError::NumericalFailure(_)) => 2,
            _ => 1,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub seed: u64,
    /// Resolved configuration; feeding it back to `run` reproduces the CSVs.
    pub config: String,
    pub artifacts: Vec<PathBuf>,
    pub duration_secs: f64,
    pub version: String,
}

/// Formats with 9 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn load_config(
    config_path: &Path,
    overrides: &[String],
) -> Result<ExperimentConfig<f64>, CliError> {
    let text = fs::read_to_string(config_path).map_err(|e| CliError::io(config_path, e))?;
    let config = ExperimentConfig::parse_with_overrides(&text, overrides)?;
    config.validate()?;
    Ok(config)
}

/// Runs the configured experiment and writes its artifacts into `out_dir`.
/// Nothing is written unless the configuration is valid and every run completes.
pub fn run_experiment(
    config_path: &Path,
    overrides: &[String],
    out_dir: &Path,
) -> Result<RunManifest, CliError> {
    let config = load_config(config_path, overrides)?;
    let start = Instant::now();
    let result = run_monte_carlo_with(&config, false)?;
    let duration = start.elapsed().as_secs_f64();
    write_artifacts(&result, out_dir, duration)
}

pub fn write_artifacts(
    result: &MonteCarloResult<f64>,
    out_dir: &Path,
    duration_secs: f64,
) -> Result<RunManifest, CliError> {
    let config = &result.config;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let mut artifacts = Vec::new();

    let path = out_dir.join(CONVERGENCE_FILE);
    write_csv(&path, &["policy", "iteration", "mean", "std"], |w| {
        for p in &result.policies {
            let c = &p.summary.metric;
            for (i, (m, s)) in c.mean.iter().zip(&c.std).enumerate() {
                w.write_record([&p.summary.label, &(i + 1).to_string(), &fmt_num(*m), &fmt_num(*s)])?;
            }
        }
        Ok(())
    })?;
    artifacts.push(path);

    let path = out_dir.join(SIGMA_FILE);
    write_csv(&path, &["policy", "iteration", "mean_sigma"], |w| {
        for p in &result.policies {
            for (i, m) in p.summary.sigma.mean.iter().enumerate() {
                w.write_record([&p.summary.label, &(i + 1).to_string(), &fmt_num(*m)])?;
            }
        }
        Ok(())
    })?;
    artifacts.push(path);

    if config.quantization.is_some() {
        let path = out_dir.join(NETWORK_SIZE_FILE);
        write_csv(&path, &["policy", "iteration", "mean_size"], |w| {
            for p in &result.policies {
                for (i, m) in p.summary.network_size.mean.iter().enumerate() {
                    w.write_record([&p.summary.label, &(i + 1).to_string(), &fmt_num(*m)])?;
                }
            }
            Ok(())
        })?;
        artifacts.push(path);
    }

    let path = out_dir.join(SUMMARY_FILE);
    let header = [
        "policy",
        "metric",
        "final_mean",
        "final_std",
        "windowed_mean",
        "final_sigma",
        "final_network_size",
    ];
    write_csv(&path, &header, |w| {
        for p in &result.policies {
            let s = &p.summary;
            w.write_record([
                s.label.clone(),
                s.metric_name.to_string(),
                fmt_num(s.final_metric_mean()),
                fmt_num(s.final_metric_std()),
                fmt_num(s.windowed_mean()),
                fmt_num(s.final_sigma_mean()),
                fmt_num(s.final_network_size_mean()),
            ])?;
        }
        Ok(())
    })?;
    artifacts.push(path);

    let echo = config.to_kv_string();
    let path = out_dir.join(CONFIG_ECHO_FILE);
    fs::write(&path, &echo).map_err(|e| CliError::io(&path, e))?;
    artifacts.push(path);

    let manifest_path = out_dir.join(MANIFEST_FILE);
    artifacts.push(manifest_path.clone());
    let manifest = RunManifest {
        experiment: config.experiment.name().to_string(),
        seed: config.seed,
        config: echo,
        artifacts,
        duration_secs,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&manifest_path, json + "\n").map_err(|e| CliError::io(&manifest_path, e))?;
    Ok(manifest)
}

fn write_csv(
    path: &Path,
    header: &[&str],
    body: impl FnOnce(&mut csv::Writer<fs::File>) -> csv::Result<()>,
) -> Result<(), CliError> {
    let wrap = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(header).map_err(wrap)?;
    body(&mut w).map_err(wrap)?;
    w.flush().map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub policy: String,
    pub simulated: f64,
    pub theory: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryReport {
    pub eta: f64,
    pub noise_variance: f64,
    pub window: usize,
    pub rows: Vec<TheoryRow>,
}

impl fmt::Display for TheoryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "eta={} noise_variance={} window={}",
            self.eta, self.noise_variance, self.window
        )?;
        writeln!(f, "{:<20} {:>16} {:>16} {:>10}", "policy", "simulated", "theory", "ratio")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<20} {:>16.6e} {:>16.6e} {:>10.4}",
                r.policy, r.simulated, r.theory, r.ratio
            )?;
        }
        Ok(())
    }
}

/// Simulated steady-state EMSE of each policy next to `η ξ² / (2 − η)`.
pub fn compare_theory(config_path: &Path, overrides: &[String]) -> Result<TheoryReport, CliError> {
    let config = load_config(config_path, overrides)?;
    if config.experiment != ExperimentKind::Static {
        return Err(KlmsError::Config("theory comparison needs the static experiment".into()).into());
    }
    if config.quantization.is_none() && config.iterations > 100_000 {
        return Err(KlmsError::Config(format!(
            "{} iterations without quantization is beyond the supported scale (max 100000)",
            config.iterations
        ))
        .into());
    }
    let theory = theoretical_emse(config.eta, config.noise_variance)?;
    let result = run_monte_carlo_with(&config, false)?;
    let rows = result
        .policies
        .iter()
        .map(|p| {
            let simulated = p.summary.windowed_mean();
            TheoryRow {
                policy: p.summary.label.clone(),
                simulated,
                theory,
                ratio: simulated / theory,
            }
        })
        .collect();
    Ok(TheoryReport {
        eta: config.eta,
        noise_variance: config.noise_variance,
        window: config.window(),
        rows,
    })
}
