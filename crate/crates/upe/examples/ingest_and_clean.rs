//! Loads a raw price CSV with missing and abnormal samples, repairs it
//! by linear interpolation/extrapolation, and prints the cleaning
//! report.
//!
//! Run with: cargo run --example ingest_and_clean

use std::path::PathBuf;

use upe::market_data::{clean_series, load_price_series, write_price_series_csv, PriceSeries};
use upe::synthetic::{generate, WalkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/demo/ingest");
    std::fs::create_dir_all(&dir)?;

    // Build a plausible series, then damage it the way real feeds do:
    // missing samples, a fat-finger spike, a negative print.
    let walk = WalkConfig::trend_persistent(300);
    let pristine = generate(&walk, 7);
    let mut prices: Vec<f64> = pristine.prices().collect();
    prices[0] = f64::NAN; // leading gap -> extrapolation
    prices[42] = f64::NAN;
    prices[43] = f64::NAN;
    prices[120] *= 3.0; // spike
    prices[200] = -1.0; // negative print
    let raw = PriceSeries::from_prices(2018, pristine.points()[0].date, &prices);

    let raw_path = dir.join("raw.csv");
    write_price_series_csv(&raw_path, &raw, &[])?;
    println!("wrote damaged series to {}", raw_path.display());

    let loaded = load_price_series(&raw_path, 2018)?;
    let (cleaned, report) = clean_series(&loaded)?;

    println!("cleaning report: {report}");
    println!("  interpolated at {:?}", report.interpolated_indices);
    println!("  extrapolated at {:?}", report.extrapolated_indices);
    println!("  anomaly-rule hits at {:?}", report.anomaly_rule_hits);
    println!("report as JSON: {}", serde_json::to_string(&report)?);

    let clean_path = dir.join("clean.csv");
    write_price_series_csv(&clean_path, &cleaned, &[])?;
    println!("cleaned series written to {}", clean_path.display());

    // Cleaning is idempotent: a second pass changes nothing.
    let (again, second) = clean_series(&cleaned)?;
    assert_eq!(again, cleaned);
    assert!(second.is_unchanged());
    println!("second cleaning pass is a no-op, as expected");
    Ok(())
}
