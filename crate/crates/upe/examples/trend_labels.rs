//! Smooths a price series, derives ground-truth trend labels, and
//! scores the moving-average forecaster against them.
//!
//! Run with: cargo run --example trend_labels

use std::path::PathBuf;

use upe::synthetic::{generate, WalkConfig};
use upe::trend::{accuracy, label_trends, ma_forecast, smooth, write_label_csv, TrendLabel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/demo/trend");
    std::fs::create_dir_all(&dir)?;

    let series = generate(&WalkConfig::trend_persistent(750), 21);
    let filter_order = 25;
    let (ma_short, ma_long) = (25, 100);

    let smoothed = smooth(&series, filter_order)?;
    let labels = label_trends(&smoothed);
    let upward = labels
        .iter()
        .filter(|(_, l)| *l == TrendLabel::Up)
        .count();
    println!(
        "{} labels on the valid range {:?}; {:.1}% upward",
        labels.len(),
        smoothed.valid_range(),
        100.0 * upward as f64 / labels.len() as f64
    );

    // Score the moving-average forecaster where both it and the labels
    // are defined.
    let mut predictions = Vec::new();
    let mut truth = Vec::new();
    let mut rows = Vec::new();
    for (t, label) in &labels {
        if *t < ma_long {
            rows.push((*t, Some(*label), None));
            continue;
        }
        let forecast = ma_forecast(&series, *t, ma_short, ma_long)?;
        predictions.push(forecast);
        truth.push(*label);
        rows.push((*t, Some(*label), Some(forecast)));
    }
    let acc = accuracy(&predictions, &truth)?;
    println!(
        "moving-average forecaster ({ma_short}/{ma_long} days): {:.1}% accuracy over {} steps",
        100.0 * acc,
        predictions.len()
    );

    let csv_path = dir.join("labels.csv");
    write_label_csv(&csv_path, &rows, &[])?;
    println!("label/prediction series written to {}", csv_path.display());
    Ok(())
}
