//! Runs every built-in strategy over one synthetic product and prints
//! the cost indicator next to the min/mean/max reference levels.
//!
//! Run with: cargo run --example backtest_strategies

use upe::backtest::{run, StrategyKind, StrategyParams};
use upe::neural::{build_dataset, train, Mlp, TrainingConfig};
use upe::strategy::{reference_costs, StrategyConfig};
use upe::synthetic::{generate, WalkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut walk = WalkConfig::trend_persistent(750);
    walk.product_year = 2015;
    let training_series = generate(&walk, 100);
    walk.product_year = 2018;
    let test_series = generate(&walk, 200);

    let params = StrategyParams {
        ma_short: 25,
        ma_long: 100,
        filter_order: 25,
        window_len: 50,
    };
    let cfg = StrategyConfig::new(100_000.0, 10, 100.0, 0.0, -0.3, 0.0)?;

    // Fit the deep forecaster on the training product.
    let training_config = TrainingConfig {
        epochs: 400,
        ..TrainingConfig::desk()
    };
    println!("training the deep forecaster ({} epochs)...", training_config.epochs);
    let dataset = build_dataset(&training_series, params.window_len, params.filter_order)?;
    let model = train(
        Mlp::init(&[params.window_len, 64, 64, 2], training_config.seed)?,
        &dataset,
        &training_config,
    )?
    .mlp;

    let references = reference_costs(&test_series, &cfg)?;
    println!();
    println!("product 2018, {} trading days, {} purchases of {} MWh", test_series.len(), cfg.operations, cfg.amount_mwh());
    println!("{:<10} {:>12} {:>10} {:>12}", "strategy", "cost EUR/MWh", "vs mean", "accuracy");
    for kind in StrategyKind::ALL {
        let mut strategy = params.build(kind, Some(&model))?;
        let result = run(strategy.as_mut(), &test_series, &cfg, Some(params.filter_order))?;
        let vs_mean = 100.0 * (result.cost_per_mwh - references.mean) / references.mean;
        let accuracy = result
            .forecaster_accuracy
            .map_or("-".to_string(), |a| format!("{:.1}%", 100.0 * a));
        println!(
            "{:<10} {:>12.3} {:>9.2}% {:>12}",
            kind.name(),
            result.cost_per_mwh,
            vs_mean,
            accuracy
        );
    }
    println!();
    println!(
        "references: min {:.3}, mean {:.3}, max {:.3}",
        references.min, references.mean, references.max
    );
    Ok(())
}
