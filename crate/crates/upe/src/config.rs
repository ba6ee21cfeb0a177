//! Run configuration: hyperparameter presets, layered resolution
//! (preset defaults → config file → explicit overrides), and the config
//! hash embedded in every output file for reproducibility.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::backtest::StrategyParams;
use crate::neural::TrainingConfig;
use crate::strategy::{StrategyConfig, StrategyError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {message}")]
    Io { path: String, message: String },
    #[error("config file {path} is not valid TOML: {message}")]
    Toml { path: String, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl From<StrategyError> for ConfigError {
    fn from(e: StrategyError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

/// Scale profile for the deep forecaster. `Paper` matches the published
/// hyperparameters (an hours-scale training job); `Desk` trains in
/// minutes and is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Paper,
    #[default]
    Desk,
}

/// One case-study entry: a test product and the training product traded
/// three delivery years earlier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyEntry {
    pub test_year: i32,
    pub test_csv: String,
    pub train_csv: String,
}

/// Fully resolved run configuration. Field names double as config-file
/// keys and CLI flag names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub preset: Preset,
    /// Number of past prices in the forecaster input window (`K`).
    pub window_len: usize,
    /// Low-pass filter order defining the trend labels (`k`).
    pub filter_order: usize,
    /// Total quantity of electricity to buy in MWh (`Q`).
    pub quantity_mwh: f64,
    /// Number of purchase operations (`N`).
    pub operations: usize,
    /// Market resolution in MWh (`dQ`).
    pub resolution_mwh: f64,
    /// Transaction fee per MWh (`C_F`).
    pub fee_per_mwh: f64,
    /// Uniformity trigger for downward forecasts (`u-`).
    pub trigger_down: f64,
    /// Uniformity trigger for upward forecasts (`u+`).
    pub trigger_up: f64,
    /// Hidden layers in the deep forecaster (`N_L`).
    pub hidden_layers: usize,
    /// Neurons per hidden layer (`N_N`).
    pub hidden_neurons: usize,
    /// Dropout probability (`D_p`).
    pub dropout: f64,
    /// L2 penalty factor.
    pub l2_factor: f64,
    /// Optimizer learning rate.
    pub learning_rate: f64,
    /// Training epochs (`n`).
    pub epochs: usize,
    /// Mini-batch size (`B`).
    pub batch_size: usize,
    pub seed: u64,
    /// Short moving-average length in trading days.
    pub ma_short: usize,
    /// Long moving-average length in trading days.
    pub ma_long: usize,
    /// Base directory for data files; relative inputs resolve against it.
    pub data_dir: Option<PathBuf>,
    #[serde(default)]
    pub case_study: Vec<CaseStudyEntry>,
}

impl RunConfig {
    /// Defaults for a preset. Everything except the network scale and
    /// optimizer schedule is shared between presets.
    pub fn with_preset(preset: Preset) -> Self {
        let (hidden_layers, hidden_neurons, epochs, learning_rate) = match preset {
            Preset::Paper => (5, 1024, 30_000, 1e-6),
            Preset::Desk => (2, 64, 2_000, 1e-3),
        };
        Self {
            preset,
            window_len: 50,
            filter_order: 25,
            quantity_mwh: 100_000.0,
            operations: 10,
            resolution_mwh: 100.0,
            fee_per_mwh: 0.0,
            trigger_down: -0.3,
            trigger_up: 0.0,
            hidden_layers,
            hidden_neurons,
            dropout: 0.2,
            l2_factor: 1e-4,
            learning_rate,
            epochs,
            batch_size: 32,
            seed: 42,
            ma_short: 25,
            ma_long: 100,
            data_dir: None,
            case_study: Vec::new(),
        }
    }

    /// Validates every field against the invariants of the module that
    /// consumes it; called before any run starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.strategy_config()?;
        self.training_config()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.window_len == 0 {
            return Err(ConfigError::Invalid("window_len must be positive".into()));
        }
        if self.filter_order == 0 {
            return Err(ConfigError::Invalid("filter_order must be positive".into()));
        }
        if self.hidden_layers == 0 || self.hidden_neurons == 0 {
            return Err(ConfigError::Invalid(
                "the network needs at least one hidden layer with at least one neuron".into(),
            ));
        }
        if self.ma_short >= self.ma_long {
            return Err(ConfigError::Invalid(format!(
                "ma_short ({}) must be smaller than ma_long ({})",
                self.ma_short, self.ma_long
            )));
        }
        Ok(())
    }

    pub fn strategy_config(&self) -> Result<StrategyConfig, StrategyError> {
        StrategyConfig::new(
            self.quantity_mwh,
            self.operations,
            self.resolution_mwh,
            self.fee_per_mwh,
            self.trigger_down,
            self.trigger_up,
        )
    }

    pub fn training_config(&self) -> TrainingConfig {
        TrainingConfig {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            dropout_p: self.dropout,
            l2_factor: self.l2_factor,
            batch_size: self.batch_size,
            seed: self.seed,
            ..TrainingConfig::desk()
        }
    }

    pub fn strategy_params(&self) -> StrategyParams {
        StrategyParams {
            ma_short: self.ma_short,
            ma_long: self.ma_long,
            filter_order: self.filter_order,
            window_len: self.window_len,
        }
    }

    /// Hidden layer widths: `N_L` layers of `N_N` neurons.
    pub fn hidden_dims(&self) -> Vec<usize> {
        vec![self.hidden_neurons; self.hidden_layers]
    }

    /// Resolves a data path against `data_dir` when it is relative.
    pub fn resolve_path(&self, path: &str) -> PathBuf {
        let p = PathBuf::from(path);
        if p.is_absolute() {
            return p;
        }
        match &self.data_dir {
            Some(dir) => dir.join(p),
            None => p,
        }
    }

    /// Short fingerprint of the resolved configuration; embedded in
    /// every output file. Equal hashes imply identical resolved configs.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        hex[..16].to_string()
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::with_preset(Preset::Desk)
    }
}

/// Partial configuration as read from a TOML file or assembled from CLI
/// flags; unset fields fall through to the layer below.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverlay {
    pub preset: Option<Preset>,
    pub window_len: Option<usize>,
    pub filter_order: Option<usize>,
    pub quantity_mwh: Option<f64>,
    pub operations: Option<usize>,
    pub resolution_mwh: Option<f64>,
    pub fee_per_mwh: Option<f64>,
    pub trigger_down: Option<f64>,
    pub trigger_up: Option<f64>,
    pub hidden_layers: Option<usize>,
    pub hidden_neurons: Option<usize>,
    pub dropout: Option<f64>,
    pub l2_factor: Option<f64>,
    pub learning_rate: Option<f64>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub seed: Option<u64>,
    pub ma_short: Option<usize>,
    pub ma_long: Option<usize>,
    pub data_dir: Option<PathBuf>,
    pub case_study: Option<Vec<CaseStudyEntry>>,
}

impl ConfigOverlay {
    pub fn from_toml_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Toml {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        set!(
            window_len,
            filter_order,
            quantity_mwh,
            operations,
            resolution_mwh,
            fee_per_mwh,
            trigger_down,
            trigger_up,
            hidden_layers,
            hidden_neurons,
            dropout,
            l2_factor,
            learning_rate,
            epochs,
            batch_size,
            seed,
            ma_short,
            ma_long,
            case_study
        );
        if let Some(dir) = &self.data_dir {
            cfg.data_dir = Some(dir.clone());
        }
    }
}

/// Resolves the effective configuration: preset defaults, then the
/// config file, then explicit flag overrides. The preset itself may come
/// from either layer (flags win); network-scale fields set explicitly
/// always beat the preset.
pub fn resolve(file: Option<&ConfigOverlay>, flags: &ConfigOverlay) -> Result<RunConfig, ConfigError> {
    let preset = flags
        .preset
        .or(file.and_then(|f| f.preset))
        .unwrap_or_default();
    let mut cfg = RunConfig::with_preset(preset);
    if let Some(file) = file {
        file.apply(&mut cfg);
    }
    flags.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}
