//! Deterministic simulation engine: drives a strategy over a price
//! series step by step, enforces the procurement constraints, accounts
//! costs, and reproduces the multi-product case study and the
//! sensitivity sweep over the number of purchase operations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::PriceSeries;
use crate::neural::{build_dataset, train, Mlp, NeuralError, TrainingConfig};
use crate::strategy::{
    reference_costs, uniformity, DecisionReason, Epma, Nbep, ProcurementState,
    ProcurementStrategy, ReferenceCosts, StrategyConfig, StrategyError, Upe,
};
use crate::trend::{label_trends, smooth, TrendLabel};

#[derive(Debug, Error)]
pub enum BacktestError {
    #[error("strategy error: {0}")]
    Strategy(#[from] StrategyError),
    #[error("forecaster training failed: {0}")]
    Training(#[from] NeuralError),
    #[error("series must be cleaned before simulation (non-finite or non-positive price found)")]
    DirtySeries,
    #[error("strategy emitted a buy at t={t} after completing all {operations} operations")]
    ContractViolation { t: usize, operations: usize },
    #[error("terminal quantity {purchased} MWh differs from the target {target} MWh")]
    ConstraintViolation { purchased: f64, target: f64 },
    #[error("case study configuration error: {0}")]
    Configuration(String),
}

/// One executed purchase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Purchase {
    pub t: usize,
    pub price: f64,
    pub amount_mwh: f64,
}

/// One row of the decision trace. `purchased_mwh` and `uniformity` are
/// the pre-decision state at `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub price: f64,
    pub forecast: Option<i8>,
    pub uniformity: f64,
    pub y: u8,
    pub reason: DecisionReason,
    pub purchased_mwh: f64,
}

/// Outcome of one strategy run over one product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestResult {
    pub strategy: String,
    pub product_year: i32,
    /// Cost indicator `C = c_T / Q` in €/MWh.
    pub cost_per_mwh: f64,
    /// Total cost `c_T` in €.
    pub total_cost: f64,
    pub purchases: Vec<Purchase>,
    pub decisions: Vec<TraceRecord>,
    /// Forecast accuracy against ground-truth labels, when the strategy
    /// emitted forecasts and labels exist.
    pub forecaster_accuracy: Option<f64>,
}

impl BacktestResult {
    /// Recomputes the total cost from the purchase log; the engine's
    /// accounting must match this replay exactly.
    pub fn replay_total_cost(&self, fee_per_mwh: f64) -> f64 {
        self.purchases
            .iter()
            .map(|p| p.amount_mwh * (p.price + fee_per_mwh))
            .sum()
    }
}

/// Runs one strategy over one cleaned series. The engine queries the
/// strategy once per step, applies `q_{t+1} = q_t + y_t A`, accumulates
/// `A (p_t + C_F)` per buy, and enforces the completion constraint.
///
/// `label_filter_order` controls forecast-accuracy scoring: when set and
/// the strategy reports forecasts, they are compared against the
/// ground-truth labels on the label valid range.
pub fn run(
    strategy: &mut dyn ProcurementStrategy,
    series: &PriceSeries,
    cfg: &StrategyConfig,
    label_filter_order: Option<usize>,
) -> Result<BacktestResult, BacktestError> {
    cfg.validate()?;
    if !series.is_clean() {
        return Err(BacktestError::DirtySeries);
    }
    let horizon = series.len();
    if cfg.operations > horizon {
        return Err(BacktestError::Strategy(StrategyError::Infeasible {
            operations: cfg.operations,
            horizon,
        }));
    }

    let amount = cfg.amount_mwh();
    let mut operations_done = 0usize;
    let mut total_cost = 0.0;
    let mut purchases = Vec::with_capacity(cfg.operations);
    let mut decisions = Vec::with_capacity(horizon);

    for t in 0..horizon {
        let state = ProcurementState {
            t,
            horizon,
            purchased_mwh: operations_done as f64 * amount,
            target_mwh: cfg.target_mwh,
        };
        let u = uniformity(&state);
        let (decision, forecast) = strategy.decide(series, &state, cfg);
        if decision.buy {
            if operations_done >= cfg.operations {
                return Err(BacktestError::ContractViolation {
                    t,
                    operations: cfg.operations,
                });
            }
            let price = series.price(t);
            operations_done += 1;
            total_cost += amount * (price + cfg.fee_per_mwh);
            purchases.push(Purchase {
                t,
                price,
                amount_mwh: amount,
            });
        }
        decisions.push(TraceRecord {
            t,
            price: series.price(t),
            forecast: forecast.map(TrendLabel::value),
            uniformity: u,
            y: decision.y(),
            reason: decision.reason,
            purchased_mwh: state.purchased_mwh,
        });
    }

    let purchased = operations_done as f64 * amount;
    if operations_done != cfg.operations {
        return Err(BacktestError::ConstraintViolation {
            purchased,
            target: cfg.target_mwh,
        });
    }

    let forecaster_accuracy = label_filter_order.and_then(|k| {
        score_forecasts(series, &decisions, k)
    });

    Ok(BacktestResult {
        strategy: strategy.name().to_string(),
        product_year: series.product_year(),
        cost_per_mwh: total_cost / cfg.target_mwh,
        total_cost,
        purchases,
        decisions,
        forecaster_accuracy,
    })
}

/// Accuracy of the traced forecasts against ground-truth labels, over
/// the steps where both exist.
fn score_forecasts(series: &PriceSeries, trace: &[TraceRecord], filter_order: usize) -> Option<f64> {
    let sm = smooth(series, filter_order).ok()?;
    let labels: BTreeMap<usize, TrendLabel> = label_trends(&sm).into_iter().collect();
    let mut total = 0usize;
    let mut correct = 0usize;
    for record in trace {
        let (Some(forecast), Some(label)) = (record.forecast, labels.get(&record.t)) else {
            continue;
        };
        total += 1;
        if forecast == label.value() {
            correct += 1;
        }
    }
    (total > 0).then(|| correct as f64 / total as f64)
}

/// The built-in strategies and reference policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Nbep,
    Epma,
    UpeMa,
    UpeDl,
    UpeF,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Nbep,
        StrategyKind::Epma,
        StrategyKind::UpeMa,
        StrategyKind::UpeDl,
        StrategyKind::UpeF,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Nbep => "nbep",
            StrategyKind::Epma => "epma",
            StrategyKind::UpeMa => "upe-ma",
            StrategyKind::UpeDl => "upe-dl",
            StrategyKind::UpeF => "upe-f",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn needs_training(&self) -> bool {
        matches!(self, StrategyKind::UpeDl)
    }
}

/// Everything needed to instantiate the built-in strategies for one
/// product: moving-average lengths, the trend filter order, the input
/// window length and (for the deep variant) a trained model.
#[derive(Debug, Clone)]
pub struct StrategyParams {
    pub ma_short: usize,
    pub ma_long: usize,
    pub filter_order: usize,
    pub window_len: usize,
}

impl StrategyParams {
    pub fn build(
        &self,
        kind: StrategyKind,
        model: Option<&Mlp>,
    ) -> Result<Box<dyn ProcurementStrategy>, BacktestError> {
        Ok(match kind {
            StrategyKind::Nbep => Box::new(Nbep::new()),
            StrategyKind::Epma => Box::new(Epma {
                short_len: self.ma_short,
                long_len: self.ma_long,
            }),
            StrategyKind::UpeMa => Box::new(Upe::with_moving_average(self.ma_short, self.ma_long)),
            StrategyKind::UpeDl => {
                let mlp = model.ok_or_else(|| {
                    BacktestError::Configuration(
                        "the deep-model strategy requires a trained model".into(),
                    )
                })?;
                Box::new(Upe::with_deep_model(mlp.clone(), self.window_len))
            }
            StrategyKind::UpeF => Box::new(Upe::with_oracle(self.filter_order)),
        })
    }
}

/// One test product paired with its training product (three delivery
/// years earlier), mirroring the train/test separation of the study.
#[derive(Debug, Clone)]
pub struct CaseStudyProduct {
    pub test: PriceSeries,
    pub training: PriceSeries,
}

/// A multi-product evaluation: products, strategy parameters, and the
/// training configuration for the deep forecaster.
#[derive(Debug, Clone)]
pub struct CaseStudySpec {
    pub products: Vec<CaseStudyProduct>,
    pub cfg: StrategyConfig,
    pub params: StrategyParams,
    pub training: TrainingConfig,
    pub hidden_dims: Vec<usize>,
}

impl CaseStudySpec {
    pub fn validate(&self) -> Result<(), BacktestError> {
        if self.products.is_empty() {
            return Err(BacktestError::Configuration("no products configured".into()));
        }
        for product in &self.products {
            let (test_year, train_year) = (
                product.test.product_year(),
                product.training.product_year(),
            );
            if train_year != test_year - 3 {
                return Err(BacktestError::Configuration(format!(
                    "training product {train_year} must be three years before test product {test_year}"
                )));
            }
        }
        Ok(())
    }

    fn layer_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(self.params.window_len);
        dims.extend_from_slice(&self.hidden_dims);
        dims.push(2);
        dims
    }

    /// Trains the deep forecaster for one product pair.
    pub fn train_model(&self, product: &CaseStudyProduct) -> Result<Mlp, BacktestError> {
        let dataset = build_dataset(
            &product.training,
            self.params.window_len,
            self.params.filter_order,
        )?;
        let mlp = Mlp::init(&self.layer_dims(), self.training.seed)?;
        Ok(train(mlp, &dataset, &self.training)?.mlp)
    }
}

/// All results for one product: per-strategy outcomes plus the reference
/// cost levels.
#[derive(Debug, Clone)]
pub struct ProductResults {
    pub product_year: i32,
    pub results: BTreeMap<String, BacktestResult>,
    pub references: ReferenceCosts,
}

/// Runs every requested strategy over every product. Deep models are
/// trained once per product (on its training series) and reused.
pub fn run_case_study(
    spec: &CaseStudySpec,
    kinds: &[StrategyKind],
) -> Result<Vec<ProductResults>, BacktestError> {
    spec.validate()?;
    let mut models: BTreeMap<i32, Mlp> = BTreeMap::new();
    if kinds.iter().any(|k| k.needs_training()) {
        for product in &spec.products {
            models.insert(product.test.product_year(), spec.train_model(product)?);
        }
    }
    run_case_study_with_models(spec, kinds, &models)
}

/// Case-study body with externally supplied models, so sweeps can reuse
/// one training per product across all values of `N`.
pub fn run_case_study_with_models(
    spec: &CaseStudySpec,
    kinds: &[StrategyKind],
    models: &BTreeMap<i32, Mlp>,
) -> Result<Vec<ProductResults>, BacktestError> {
    spec.validate()?;
    let mut all = Vec::with_capacity(spec.products.len());
    for product in &spec.products {
        let year = product.test.product_year();
        let mut results = BTreeMap::new();
        for kind in kinds {
            let mut strategy = spec.params.build(*kind, models.get(&year))?;
            let result = run(
                strategy.as_mut(),
                &product.test,
                &spec.cfg,
                Some(spec.params.filter_order),
            )?;
            results.insert(kind.name().to_string(), result);
        }
        let references = reference_costs(&product.test, &spec.cfg)?;
        all.push(ProductResults {
            product_year: year,
            results,
            references,
        });
    }
    Ok(all)
}

/// Average cost per (strategy, N) over the same product set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub n_values: Vec<usize>,
    /// Rows keyed `(N, strategy-or-reference name)` with the average
    /// cost indicator over all products.
    pub rows: BTreeMap<(usize, String), f64>,
}

/// Repeats the case study for every `N` in `n_values`. Every `N` must
/// keep `A = Q/N` a multiple of the market resolution; offending values
/// are reported together.
pub fn sensitivity_sweep(
    spec: &CaseStudySpec,
    kinds: &[StrategyKind],
    n_values: &[usize],
) -> Result<SweepResult, BacktestError> {
    spec.validate()?;
    let offending: Vec<usize> = n_values
        .iter()
        .copied()
        .filter(|&n| {
            StrategyConfig::new(
                spec.cfg.target_mwh,
                n,
                spec.cfg.resolution_mwh,
                spec.cfg.fee_per_mwh,
                spec.cfg.trigger_down,
                spec.cfg.trigger_up,
            )
            .is_err()
        })
        .collect();
    if !offending.is_empty() {
        return Err(BacktestError::Configuration(format!(
            "these purchase-operation counts violate the market-resolution constraint: {offending:?}"
        )));
    }

    let mut models: BTreeMap<i32, Mlp> = BTreeMap::new();
    if kinds.iter().any(|k| k.needs_training()) {
        for product in &spec.products {
            models.insert(product.test.product_year(), spec.train_model(product)?);
        }
    }

    let mut rows = BTreeMap::new();
    for &n in n_values {
        let mut n_spec = spec.clone();
        n_spec.cfg.operations = n;
        let per_product = run_case_study_with_models(&n_spec, kinds, &models)?;
        let count = per_product.len() as f64;
        for kind in kinds {
            let avg = per_product
                .iter()
                .map(|p| p.results[kind.name()].cost_per_mwh)
                .sum::<f64>()
                / count;
            rows.insert((n, kind.name().to_string()), avg);
        }
        let reference_columns: [(&str, fn(&ReferenceCosts) -> f64); 3] = [
            ("min", |r| r.min),
            ("mean", |r| r.mean),
            ("max", |r| r.max),
        ];
        for (name, get) in reference_columns {
            let avg = per_product.iter().map(|p| get(&p.references)).sum::<f64>() / count;
            rows.insert((n, name.to_string()), avg);
        }
    }
    Ok(SweepResult {
        n_values: n_values.to_vec(),
        rows,
    })
}
