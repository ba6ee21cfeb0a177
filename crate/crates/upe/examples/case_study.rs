//! Multi-product case study: every strategy over several test products,
//! each deep model trained on the product three years earlier, with the
//! results table printed and saved.
//!
//! Run with: cargo run --example case_study

use std::path::PathBuf;

use upe::backtest::{run_case_study, CaseStudyProduct, CaseStudySpec, StrategyKind};
use upe::neural::TrainingConfig;
use upe::report::{render_results_csv, write_product_files, ReferenceSummary, ResultSummary, TableData};
use upe::strategy::StrategyConfig;
use upe::synthetic::{generate, WalkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/demo/case_study");
    std::fs::create_dir_all(&dir)?;

    let mut products = Vec::new();
    for (i, test_year) in (2016..=2019).enumerate() {
        let mut walk = WalkConfig::trend_persistent(750);
        walk.product_year = test_year;
        walk.start_price = 40.0 + i as f64 * 3.0;
        let test = generate(&walk, test_year as u64);
        walk.product_year = test_year - 3;
        let training = generate(&walk, test_year as u64 + 50);
        products.push(CaseStudyProduct { test, training });
    }

    let spec = CaseStudySpec {
        products,
        cfg: StrategyConfig::new(100_000.0, 10, 100.0, 0.0, -0.3, 0.0)?,
        params: upe::backtest::StrategyParams {
            ma_short: 25,
            ma_long: 100,
            filter_order: 25,
            window_len: 50,
        },
        training: TrainingConfig {
            epochs: 300,
            ..TrainingConfig::desk()
        },
        hidden_dims: vec![64, 64],
    };

    println!("running 4 products x 5 strategies (deep models train once per product)...");
    let per_product = run_case_study(&spec, &StrategyKind::ALL)?;

    let mut table = TableData::default();
    for product in &per_product {
        write_product_files(&dir, product, "demo")?;
        for result in product.results.values() {
            table.insert_result(&ResultSummary::from_result(result, "demo"));
        }
        table.insert_references(&ReferenceSummary::new(
            product.product_year,
            &product.references,
            "demo",
        ));
    }
    let (csv, warnings) = render_results_csv(&table, None);
    assert!(warnings.is_empty());
    println!();
    print!("{csv}");
    std::fs::write(dir.join("results.csv"), &csv)?;
    println!();
    println!("per-run files and results.csv written to {}", dir.display());
    Ok(())
}
