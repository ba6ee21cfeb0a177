//! Sweeps the number of purchase operations and tabulates the average
//! cost per strategy, showing how the naive balanced benchmark drifts
//! toward the mean price as N grows.
//!
//! Run with: cargo run --example sensitivity_sweep

use upe::backtest::{sensitivity_sweep, CaseStudyProduct, CaseStudySpec, StrategyKind};
use upe::neural::TrainingConfig;
use upe::report::render_sweep_csv;
use upe::strategy::StrategyConfig;
use upe::synthetic::{generate, WalkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut products = Vec::new();
    for test_year in [2017, 2018] {
        let mut walk = WalkConfig::trend_persistent(750);
        walk.product_year = test_year;
        let test = generate(&walk, test_year as u64);
        walk.product_year = test_year - 3;
        let training = generate(&walk, test_year as u64 + 7);
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

    // The per-operation amount A = Q/N must stay a multiple of the
    // market resolution, so N is constrained; these values all divide
    // 100000 MWh into 100-MWh-aligned blocks.
    let n_values = [2, 4, 5, 10, 20];
    println!("sweeping N over {n_values:?} on 2 products (one training per product)...");
    let sweep = sensitivity_sweep(&spec, &StrategyKind::ALL, &n_values)?;

    println!();
    print!("{}", render_sweep_csv(&sweep, None));

    // The naive balanced benchmark converges to the mean reference.
    println!();
    for &n in &n_values {
        let nbep = sweep.rows[&(n, "nbep".to_string())];
        let mean = sweep.rows[&(n, "mean".to_string())];
        println!("N={n:>2}: |nbep - mean| = {:.3}", (nbep - mean).abs());
    }
    Ok(())
}
