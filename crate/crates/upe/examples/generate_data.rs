//! Generates a demo data kit: synthetic CAL price CSVs for four test
//! products with their training partners, a raw file with injected
//! faults, and a ready-to-run config file for the CLI.
//!
//! Run with: cargo run --example generate_data

use std::path::PathBuf;

use upe::market_data::write_price_series_csv;
use upe::synthetic::{generate, WalkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/demo/data");
    std::fs::create_dir_all(&dir)?;

    // Test products 2016..2019, each trained on the product three
    // delivery years earlier.
    let mut files = Vec::new();
    for year in 2013..=2019 {
        let mut walk = WalkConfig::trend_persistent(750);
        walk.product_year = year;
        walk.start_price = 38.0 + (year - 2013) as f64 * 2.5;
        let series = generate(&walk, year as u64);
        let path = dir.join(format!("cal{year}.csv"));
        write_price_series_csv(&path, &series, &[])?;
        files.push(path);
    }

    // A raw file with missing samples and spikes for the ingest demo.
    let mut walk = WalkConfig::trend_persistent(400);
    walk.product_year = 2018;
    let clean = generate(&walk, 99);
    let mut prices: Vec<f64> = clean.prices().collect();
    prices[3] = f64::NAN;
    prices[150] *= 4.0; // spike well beyond the 50% jump rule
    prices[151] = f64::NAN;
    prices[390] = -prices[390]; // negative price
    let raw = upe::market_data::PriceSeries::from_prices(
        2018,
        clean.points()[0].date,
        &prices,
    );
    let raw_path = dir.join("raw_2018.csv");
    write_price_series_csv(&raw_path, &raw, &[])?;

    // Config file wiring the case study together; small epoch count so
    // the demo runs in seconds.
    let config = r#"preset = "desk"
epochs = 200
seed = 42

[[case_study]]
test_year = 2016
test_csv = "cal2016.csv"
train_csv = "cal2013.csv"

[[case_study]]
test_year = 2017
test_csv = "cal2017.csv"
train_csv = "cal2014.csv"

[[case_study]]
test_year = 2018
test_csv = "cal2018.csv"
train_csv = "cal2015.csv"

[[case_study]]
test_year = 2019
test_csv = "cal2019.csv"
train_csv = "cal2016.csv"
"#;
    let config_path = dir.join("demo.toml");
    std::fs::write(&config_path, config)?;

    println!("demo data written to {}", dir.display());
    for f in &files {
        println!("  {}", f.file_name().unwrap().to_string_lossy());
    }
    println!("  raw_2018.csv (with injected faults)");
    println!("  demo.toml");
    println!();
    println!("try:");
    println!(
        "  cargo run --bin upe -- ingest --input {} --output {} --product-year 2018",
        raw_path.display(),
        dir.join("clean_2018.csv").display()
    );
    println!(
        "  cargo run --bin upe -- case-study --config {} --data-dir {} --out-dir {}",
        config_path.display(),
        dir.display(),
        dir.join("../case_study").display()
    );
    Ok(())
}
