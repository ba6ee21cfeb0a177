//! Builds a supervised dataset from a training product, fits the
//! feedforward trend classifier, and saves a reusable checkpoint.
//!
//! Run with: cargo run --example train_forecaster

use std::path::PathBuf;

use upe::neural::{
    build_dataset, dataset_accuracy, save_checkpoint, train, Mlp, TrainingConfig,
};
use upe::synthetic::{generate, WalkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/demo/model");
    std::fs::create_dir_all(&dir)?;

    let (window_len, filter_order) = (50, 25);
    let series = generate(&WalkConfig::trend_persistent(750), 11);
    let dataset = build_dataset(&series, window_len, filter_order)?;
    println!("dataset: {} examples of {} normalized prices", dataset.len(), window_len);

    // Earliest 80% fits the model, the rest validates it.
    let (train_set, validation_set) = dataset.split_chronological(0.8);

    // Desk-scale network; a few hundred epochs is plenty for the demo.
    let config = TrainingConfig {
        epochs: 400,
        ..TrainingConfig::desk()
    };
    let mlp = Mlp::init(&[window_len, 64, 64, 2], config.seed)?;
    println!(
        "training {} epochs at learning rate {} (dropout {}, l2 {})...",
        config.epochs, config.learning_rate, config.dropout_p, config.l2_factor
    );
    let outcome = train(mlp, &train_set, &config)?;

    println!(
        "loss: {:.4} -> {:.4} over {} epochs",
        outcome.loss_curve.first().unwrap(),
        outcome.loss_curve.last().unwrap(),
        outcome.loss_curve.len()
    );
    println!(
        "train accuracy {:.1}%, validation accuracy {:.1}%",
        100.0 * dataset_accuracy(&outcome.mlp, &train_set)?,
        100.0 * dataset_accuracy(&outcome.mlp, &validation_set)?
    );

    let path = dir.join("model.json");
    save_checkpoint(&path, &outcome.mlp, &config)?;
    println!("checkpoint saved to {}", path.display());
    println!("use it with: cargo run --bin upe -- backtest --strategy upe-dl --checkpoint {} ...", path.display());
    Ok(())
}
