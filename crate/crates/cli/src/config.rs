use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wiretap_polar::channel::ChannelDescriptor;
use wiretap_polar::construction::DEFAULT_MU;
use wiretap_polar::evaluation::MessagePrior;
use wiretap_polar::polar::MultipathConfig;
use wiretap_polar::wiretap::{BuildOptions, DecodeStrategy, DeltaSpec, DeltaWindow, Scheme};

use crate::CliError;

/// One experiment, read from a single JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub main: ChannelDescriptor,
    pub wiretap: ChannelDescriptor,
    pub m: u32,
    pub beta: f64,
    pub scheme: Scheme,
    /// Strong scheme only; a number or `"2^-n^beta"` (the default).
    #[serde(default)]
    pub delta_n: Option<DeltaSpec>,
    #[serde(default)]
    pub window: Option<DeltaWindow>,
    #[serde(default = "default_mu")]
    pub mu: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "MessagePrior::standard")]
    pub priors: Vec<MessagePrior>,
    #[serde(default)]
    pub decoder: DecoderConfig,
    /// Wiretap parameters to sweep in `report`; the wiretap descriptor's
    /// own parameter is used when absent.
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_mu() -> usize {
    DEFAULT_MU
}

fn default_trials() -> usize {
    10_000
}

/// Output locations, relative to the config file's directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub spec: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DecoderConfig {
    #[default]
    Sc,
    Multipath {
        max_paths: usize,
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
}

fn default_sigma() -> f64 {
    MultipathConfig::default().sigma
}

impl DecoderConfig {
    pub fn strategy(&self) -> DecodeStrategy {
        match *self {
            DecoderConfig::Sc => DecodeStrategy::Sc,
            DecoderConfig::Multipath { max_paths, sigma } => {
                DecodeStrategy::Multipath(MultipathConfig { max_paths, sigma })
            }
        }
    }
}

impl ExperimentConfig {
    pub fn build_options(&self) -> BuildOptions {
        let opts = match self.scheme {
            Scheme::Weak => BuildOptions::weak(self.beta),
            Scheme::Strong => BuildOptions::strong(self.beta, self.delta_n.unwrap_or_default()),
        };
        opts.with_window(self.window.unwrap_or_default())
    }
}

/// A parsed config with its directory, against which output paths resolve.
pub struct Loaded {
    pub config: ExperimentConfig,
    pub base: PathBuf,
}

impl Loaded {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("invalid config {}: {e}", path.display())))?;
        if config.mu < 2 || !config.mu.is_multiple_of(2) {
            return Err(CliError::config(format!("mu must be even and at least 2, got {}", config.mu)));
        }
        if config.workers == Some(0) {
            return Err(CliError::config("workers must be at least 1"));
        }
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        Ok(Self { config, base })
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        self.base.join(path)
    }

    pub fn output(&self, choose: impl Fn(&Outputs) -> Option<&PathBuf>) -> Option<PathBuf> {
        choose(&self.config.outputs).map(|p| self.resolve(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c: ExperimentConfig = serde_json::from_str(
            r#"{"main": {"kind": "bsc", "param": 0.01},
                "wiretap": {"kind": "bec", "param": 0.5},
                "m": 6, "beta": 0.3, "scheme": "strong", "delta_n": "2^-n^beta"}"#,
        )
        .unwrap();
        assert_eq!(c.mu, DEFAULT_MU);
        assert_eq!(c.delta_n, Some(DeltaSpec::Auto));
        assert_eq!(c.priors.len(), 3);
        assert_eq!(c.decoder, DecoderConfig::Sc);
    }

    #[test]
    fn unknown_field_rejected() {
        let err = serde_json::from_str::<ExperimentConfig>(
            r#"{"main": {"kind": "bsc", "param": 0.01}, "wiretap": {"kind": "bsc", "param": 0.2},
                "m": 6, "beta": 0.3, "scheme": "weak", "bogus": 1}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn multipath_decoder() {
        let d: DecoderConfig = serde_json::from_str(r#"{"kind": "multipath", "max_paths": 8}"#).unwrap();
        assert_eq!(
            d.strategy(),
            DecodeStrategy::Multipath(MultipathConfig::new(8))
        );
    }
}
