//! Procurement decision policies: the uniformity-triggered policy over
//! pluggable trend forecasters, the naive balanced and moving-average
//! crossover benchmarks, and the min/mean/max reference costs.
//!
//! Every buy covers a fixed amount `A = Q/N`; the policy decides only
//! *when*. Two overrides keep any policy feasible: once the target
//! quantity is reached the only legal move is to wait, and as soon as
//! the remaining operations equal the remaining steps every step must
//! buy.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::{normalize_window, window, PriceSeries};
use crate::neural::{dl_forecast, Mlp};
use crate::trend::{moving_average, TrendLabel};

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{operations} purchase operations cannot fit into {horizon} time steps")]
    Infeasible { operations: usize, horizon: usize },
}

/// The agent state driving every decision: current step `t`, horizon
/// `T`, energy purchased so far and the total to purchase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcurementState {
    pub t: usize,
    pub horizon: usize,
    pub purchased_mwh: f64,
    pub target_mwh: f64,
}

/// Signed deviation from a perfectly uniform schedule:
/// `(T-t)/T - (Q-q_t)/Q`. Zero means on schedule, negative lagging,
/// positive leading; always within `[-1, 1]`.
pub fn uniformity(state: &ProcurementState) -> f64 {
    let time_left = (state.horizon - state.t) as f64 / state.horizon as f64;
    let quantity_left = (state.target_mwh - state.purchased_mwh) / state.target_mwh;
    time_left - quantity_left
}

/// Per-run strategy parameters. `amount_mwh` (the per-operation block
/// `A = Q/N`) is derived and validated against the market resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    /// Total quantity `Q` to purchase (MWh).
    pub target_mwh: f64,
    /// Number of purchase operations `N`.
    pub operations: usize,
    /// Market resolution `dQ`: the smallest tradable block (MWh).
    pub resolution_mwh: f64,
    /// Transaction fee per MWh purchased.
    pub fee_per_mwh: f64,
    /// Uniformity trigger for a downward forecast (`u-`).
    pub trigger_down: f64,
    /// Uniformity trigger for an upward forecast (`u+`).
    pub trigger_up: f64,
}

fn is_multiple(value: f64, unit: f64) -> bool {
    let ratio = value / unit;
    (ratio - ratio.round()).abs() <= 1e-6 * ratio.abs().max(1.0)
}

impl StrategyConfig {
    pub fn new(
        target_mwh: f64,
        operations: usize,
        resolution_mwh: f64,
        fee_per_mwh: f64,
        trigger_down: f64,
        trigger_up: f64,
    ) -> Result<Self, StrategyError> {
        let cfg = Self {
            target_mwh,
            operations,
            resolution_mwh,
            fee_per_mwh,
            trigger_down,
            trigger_up,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), StrategyError> {
        if self.target_mwh <= 0.0 || !self.target_mwh.is_finite() {
            return Err(StrategyError::InvalidConfig(format!(
                "target quantity must be positive; got {}",
                self.target_mwh
            )));
        }
        if self.operations == 0 {
            return Err(StrategyError::InvalidConfig(
                "number of purchase operations must be positive".into(),
            ));
        }
        if self.resolution_mwh <= 0.0 {
            return Err(StrategyError::InvalidConfig(format!(
                "market resolution must be positive; got {}",
                self.resolution_mwh
            )));
        }
        if !is_multiple(self.target_mwh, self.resolution_mwh) {
            return Err(StrategyError::InvalidConfig(format!(
                "target quantity {} is not a multiple of the market resolution {}",
                self.target_mwh, self.resolution_mwh
            )));
        }
        if !is_multiple(self.amount_mwh(), self.resolution_mwh) {
            return Err(StrategyError::InvalidConfig(format!(
                "per-operation amount {} (= {}/{}) is not a multiple of the market resolution {}",
                self.amount_mwh(),
                self.target_mwh,
                self.operations,
                self.resolution_mwh
            )));
        }
        for (name, v) in [("down", self.trigger_down), ("up", self.trigger_up)] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(StrategyError::InvalidConfig(format!(
                    "uniformity trigger {name} must lie in [-1, 1]; got {v}"
                )));
            }
        }
        if self.trigger_down > self.trigger_up {
            return Err(StrategyError::InvalidConfig(format!(
                "the downward trigger ({}) must not exceed the upward trigger ({})",
                self.trigger_down, self.trigger_up
            )));
        }
        Ok(())
    }

    /// Per-operation purchase amount `A = Q/N`.
    pub fn amount_mwh(&self) -> f64 {
        self.target_mwh / self.operations as f64
    }
}

/// Why a decision was taken; exactly one reason applies per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecisionReason {
    TrendUpTrigger,
    TrendDownTrigger,
    FeasibilityForced,
    Completed,
    Wait,
}

/// One-step output: buy (`y=1`) or wait (`y=0`), with the branch that
/// fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub buy: bool,
    pub reason: DecisionReason,
}

impl Decision {
    fn buy(reason: DecisionReason) -> Self {
        Self { buy: true, reason }
    }

    fn wait(reason: DecisionReason) -> Self {
        Self { buy: false, reason }
    }

    /// Binary output value `y_t`.
    pub fn y(&self) -> u8 {
        self.buy as u8
    }
}

/// Number of purchase operations still to perform, `n_t = (Q - q_t)/A`.
fn remaining_operations(state: &ProcurementState, cfg: &StrategyConfig) -> usize {
    ((state.target_mwh - state.purchased_mwh) / cfg.amount_mwh()).round() as usize
}

/// Completion and feasibility overrides shared by every policy: wait
/// once the target is reached; buy unconditionally once the remaining
/// operations would otherwise exceed the remaining steps.
fn feasibility_override(state: &ProcurementState, cfg: &StrategyConfig) -> Option<Decision> {
    if remaining_operations(state, cfg) == 0 {
        return Some(Decision::wait(DecisionReason::Completed));
    }
    if remaining_operations(state, cfg) >= state.horizon - state.t {
        return Some(Decision::buy(DecisionReason::FeasibilityForced));
    }
    None
}

/// One step of the uniformity-triggered policy: buy when the uniformity
/// level has fallen below the trigger matched to the forecast trend
/// (`u+` for upward, `u-` for downward), subject to the completion and
/// feasibility overrides.
pub fn upe_decide(
    forecast: TrendLabel,
    state: &ProcurementState,
    cfg: &StrategyConfig,
) -> Decision {
    if let Some(decision) = feasibility_override(state, cfg) {
        return decision;
    }
    let u = uniformity(state);
    match forecast {
        TrendLabel::Up if u < cfg.trigger_up => Decision::buy(DecisionReason::TrendUpTrigger),
        TrendLabel::Down if u < cfg.trigger_down => {
            Decision::buy(DecisionReason::TrendDownTrigger)
        }
        _ => Decision::wait(DecisionReason::Wait),
    }
}

/// Purchase steps of the naive balanced benchmark: the horizon is split
/// into `N` equal intervals and each purchase lands at the interval
/// midpoint, `⌊(i + 0.5)·T/N⌋`.
pub fn nbep_schedule(horizon: usize, operations: usize) -> Result<Vec<usize>, StrategyError> {
    if operations > horizon {
        return Err(StrategyError::Infeasible {
            operations,
            horizon,
        });
    }
    Ok((0..operations)
        .map(|i| (2 * i + 1) * horizon / (2 * operations))
        .collect())
}

/// Moving-average crossing state at step `t`: `Some(true)` when the
/// short average leads the long one, `None` before both exist.
fn ma_leads(series: &PriceSeries, t: usize, short_len: usize, long_len: usize) -> Option<bool> {
    let short = moving_average(series, t, short_len).ok()?;
    let long = moving_average(series, t, long_len).ok()?;
    Some(short >= long)
}

/// One step of the moving-average crossover benchmark. A purchase
/// triggers each time the short moving average crosses above the long
/// one; the detector starts in the "behind" state, so a lead at the
/// first observable step counts as a fresh crossing. Whatever remains
/// unexecuted is forced at the last trading steps.
pub fn epma_decide(
    series: &PriceSeries,
    t: usize,
    state: &ProcurementState,
    cfg: &StrategyConfig,
    short_len: usize,
    long_len: usize,
) -> Decision {
    if let Some(decision) = feasibility_override(state, cfg) {
        return decision;
    }
    if t < long_len + 1 {
        return Decision::wait(DecisionReason::Wait);
    }
    let leads_now = ma_leads(series, t, short_len, long_len).unwrap_or(false);
    let led_before = if t == long_len + 1 {
        false
    } else {
        ma_leads(series, t - 1, short_len, long_len).unwrap_or(false)
    };
    if leads_now && !led_before {
        Decision::buy(DecisionReason::TrendUpTrigger)
    } else {
        Decision::wait(DecisionReason::Wait)
    }
}

/// Centered mean truncated to the available samples at the series
/// boundaries; inside the valid range it equals the lag-free filter.
fn truncated_smoothed(series: &PriceSeries, t: usize, filter_order: usize) -> f64 {
    let lo = t.saturating_sub(filter_order);
    let hi = (t + filter_order).min(series.len() - 1);
    let sum: f64 = (lo..=hi).map(|i| series.price(i)).sum();
    sum / (hi - lo + 1) as f64
}

/// Ground-truth trend label computed from the full series (the ideal
/// forecaster). Outside the label valid range the centered window is
/// truncated to the available samples; at `t = 0` the tie convention
/// yields an upward label.
pub fn oracle_forecast(series: &PriceSeries, t: usize, filter_order: usize) -> TrendLabel {
    if t == 0 {
        return TrendLabel::Up;
    }
    let current = truncated_smoothed(series, t, filter_order);
    let previous = truncated_smoothed(series, t - 1, filter_order);
    if current >= previous {
        TrendLabel::Up
    } else {
        TrendLabel::Down
    }
}

/// Reference cost levels: the best/worst achievable indicator values
/// (mean of the `N` smallest/largest prices plus fee) and the mean price
/// achieved by a perfectly uniform policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCosts {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

pub fn reference_costs(
    series: &PriceSeries,
    cfg: &StrategyConfig,
) -> Result<ReferenceCosts, StrategyError> {
    let n = cfg.operations;
    if n > series.len() {
        return Err(StrategyError::Infeasible {
            operations: n,
            horizon: series.len(),
        });
    }
    let mut prices: Vec<f64> = series.prices().collect();
    prices.sort_by(|a, b| a.partial_cmp(b).expect("cleaned prices are comparable"));
    let min = prices[..n].iter().sum::<f64>() / n as f64 + cfg.fee_per_mwh;
    let max = prices[prices.len() - n..].iter().sum::<f64>() / n as f64 + cfg.fee_per_mwh;
    let mean = prices.iter().sum::<f64>() / prices.len() as f64 + cfg.fee_per_mwh;
    Ok(ReferenceCosts { min, mean, max })
}

/// A causal (or, for the oracle, clairvoyant) trend predictor queried
/// once per time step.
pub trait Forecaster: Send {
    fn forecast(&self, series: &PriceSeries, t: usize) -> TrendLabel;
}

/// Moving-average forecaster; predicts upward until enough history
/// exists for both averages.
pub struct MovingAverageForecaster {
    pub short_len: usize,
    pub long_len: usize,
}

impl Forecaster for MovingAverageForecaster {
    fn forecast(&self, series: &PriceSeries, t: usize) -> TrendLabel {
        match ma_leads(series, t, self.short_len, self.long_len) {
            Some(true) | None => TrendLabel::Up,
            Some(false) => TrendLabel::Down,
        }
    }
}

/// Trained-network forecaster over normalized windows of `window_len`
/// past prices; predicts upward until the first full window exists.
pub struct DeepForecaster {
    pub mlp: Mlp,
    pub window_len: usize,
}

impl Forecaster for DeepForecaster {
    fn forecast(&self, series: &PriceSeries, t: usize) -> TrendLabel {
        match window(series, t, self.window_len) {
            Ok(w) => {
                let normalized = normalize_window(&w);
                dl_forecast(&self.mlp, &normalized).expect("window length matches input layer")
            }
            Err(_) => TrendLabel::Up,
        }
    }
}

/// Ideal forecaster returning the ground-truth label at every step; the
/// only forecaster allowed to consult the full series.
pub struct OracleForecaster {
    pub filter_order: usize,
}

impl Forecaster for OracleForecaster {
    fn forecast(&self, series: &PriceSeries, t: usize) -> TrendLabel {
        oracle_forecast(series, t, self.filter_order)
    }
}

/// A procurement policy driven step by step by the backtest engine.
/// Instances hold per-run state; use one instance per run.
pub trait ProcurementStrategy: Send {
    /// Stable identifier used in file names and report columns.
    fn name(&self) -> &str;

    /// Decision for step `state.t`, plus the trend forecast consulted
    /// (when the policy uses one).
    fn decide(
        &mut self,
        series: &PriceSeries,
        state: &ProcurementState,
        cfg: &StrategyConfig,
    ) -> (Decision, Option<TrendLabel>);
}

/// Naive balanced benchmark: buys at the midpoint of each of the `N`
/// equal sub-intervals of the horizon.
pub struct Nbep {
    schedule: Option<Vec<usize>>,
}

impl Nbep {
    pub fn new() -> Self {
        Self { schedule: None }
    }
}

impl Default for Nbep {
    fn default() -> Self {
        Self::new()
    }
}

impl ProcurementStrategy for Nbep {
    fn name(&self) -> &str {
        "nbep"
    }

    fn decide(
        &mut self,
        _series: &PriceSeries,
        state: &ProcurementState,
        cfg: &StrategyConfig,
    ) -> (Decision, Option<TrendLabel>) {
        if self.schedule.is_none() {
            self.schedule = Some(
                nbep_schedule(state.horizon, cfg.operations)
                    .expect("engine validates N <= T before running"),
            );
        }
        if let Some(decision) = feasibility_override(state, cfg) {
            return (decision, None);
        }
        let scheduled = self
            .schedule
            .as_ref()
            .expect("initialized above")
            .contains(&state.t);
        let decision = if scheduled {
            Decision::buy(DecisionReason::TrendUpTrigger)
        } else {
            Decision::wait(DecisionReason::Wait)
        };
        (decision, None)
    }
}

/// Moving-average crossover benchmark.
pub struct Epma {
    pub short_len: usize,
    pub long_len: usize,
}

impl ProcurementStrategy for Epma {
    fn name(&self) -> &str {
        "epma"
    }

    fn decide(
        &mut self,
        series: &PriceSeries,
        state: &ProcurementState,
        cfg: &StrategyConfig,
    ) -> (Decision, Option<TrendLabel>) {
        let decision = epma_decide(series, state.t, state, cfg, self.short_len, self.long_len);
        (decision, None)
    }
}

/// Uniformity-triggered policy over any forecaster.
pub struct Upe {
    name: String,
    forecaster: Box<dyn Forecaster>,
}

impl Upe {
    pub fn with_moving_average(short_len: usize, long_len: usize) -> Self {
        Self {
            name: "upe-ma".into(),
            forecaster: Box::new(MovingAverageForecaster {
                short_len,
                long_len,
            }),
        }
    }

    pub fn with_deep_model(mlp: Mlp, window_len: usize) -> Self {
        Self {
            name: "upe-dl".into(),
            forecaster: Box::new(DeepForecaster { mlp, window_len }),
        }
    }

    pub fn with_oracle(filter_order: usize) -> Self {
        Self {
            name: "upe-f".into(),
            forecaster: Box::new(OracleForecaster { filter_order }),
        }
    }

    pub fn with_forecaster(name: impl Into<String>, forecaster: Box<dyn Forecaster>) -> Self {
        Self {
            name: name.into(),
            forecaster,
        }
    }
}

impl ProcurementStrategy for Upe {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(
        &mut self,
        series: &PriceSeries,
        state: &ProcurementState,
        cfg: &StrategyConfig,
    ) -> (Decision, Option<TrendLabel>) {
        let forecast = self.forecaster.forecast(series, state.t);
        (upe_decide(forecast, state, cfg), Some(forecast))
    }
}
