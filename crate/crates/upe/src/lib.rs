//! Long-term electricity procurement in forward markets: uniformity-
//! triggered purchase strategies over pluggable trend forecasters, plus
//! benchmarks, reference policies and a deterministic backtesting
//! engine for multi-year daily price series.
//!
//! The decision core buys a fixed block `A = Q/N` whenever the
//! *procurement uniformity* — the signed deviation from a perfectly
//! uniform schedule — falls below the trigger matched to the forecast
//! trend: purchases accelerate when prices are expected to rise and
//! wait longer when they are expected to fall. Forecasters include a
//! moving-average comparison, a from-scratch feedforward classifier
//! trained on normalized price windows, and a clairvoyant oracle used
//! as a reference.
//!
//! ## Modules
//!
//! - [`market_data`] — CSV ingestion, anomaly cleaning, windowing and
//!   per-window normalization.
//! - [`trend`] — smoothed ground-truth trend labels and the
//!   moving-average forecaster.
//! - [`neural`] — the feedforward classifier: initialization, forward
//!   pass, back-propagation, adaptive-moment updates, dropout and L2.
//! - [`strategy`] — decision policies and reference cost levels.
//! - [`backtest`] — the simulation engine, multi-product case study and
//!   the sensitivity sweep over the number of purchase operations.
//! - [`synthetic`] — seeded random-walk fixtures for tests and demos.
//! - [`config`] / [`report`] / [`cli`] — run configuration, file
//!   formats and the command implementations behind the `upe` binary.
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --example generate_data        # synthetic price CSVs
//! cargo run --example ingest_and_clean     # load + repair a raw series
//! cargo run --example trend_labels         # smoothing, labels, MA accuracy
//! cargo run --example train_forecaster     # fit the classifier, save a checkpoint
//! cargo run --example backtest_strategies  # run every strategy on one product
//! cargo run --example case_study           # multi-product results table
//! cargo run --example sensitivity_sweep    # cost vs. number of purchases
//! ```

pub mod backtest;
pub mod cli;
pub mod config;
pub mod market_data;
pub mod neural;
pub mod report;
pub mod strategy;
pub mod synthetic;
pub mod trend;

/// The types most programs need.
pub mod prelude {
    pub use crate::backtest::{
        run, run_case_study, sensitivity_sweep, BacktestResult, CaseStudyProduct, CaseStudySpec,
        StrategyKind, StrategyParams,
    };
    pub use crate::config::{Preset, RunConfig};
    pub use crate::market_data::{
        clean_series, load_price_series, normalize_window, window, PricePoint, PriceSeries,
    };
    pub use crate::neural::{build_dataset, train, Dataset, Mlp, TrainingConfig};
    pub use crate::strategy::{
        reference_costs, uniformity, Forecaster, ProcurementState, ProcurementStrategy,
        StrategyConfig, Upe,
    };
    pub use crate::synthetic::{generate, WalkConfig};
    pub use crate::trend::{
        accuracy, label_trends, ma_forecast, moving_average, smooth, TrendLabel,
    };
}
