//! Seeded synthetic price generators used as test fixtures and demo
//! data. These are project fixtures: a Gaussian random walk with an
//! optional regime-switching drift, not a market model.

use chrono::NaiveDate;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::market_data::PriceSeries;

/// Parameters of the seeded generator. With `regime_drift = 0` the
/// output is a plain random walk; otherwise the walk carries a drift of
/// `±regime_drift` whose sign flips with probability `switch_prob` per
/// step, producing persistent trends.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkConfig {
    pub len: usize,
    pub start_price: f64,
    /// Standard deviation of the per-step Gaussian noise.
    pub noise_sigma: f64,
    /// Magnitude of the per-step drift inside a regime.
    pub regime_drift: f64,
    /// Per-step probability that the drift sign flips.
    pub switch_prob: f64,
    /// Prices never fall below this level.
    pub floor: f64,
    pub product_year: i32,
}

impl WalkConfig {
    /// Plain random walk, the fixture for constraint-style checks.
    pub fn random_walk(len: usize) -> Self {
        Self {
            len,
            start_price: 45.0,
            noise_sigma: 0.5,
            regime_drift: 0.0,
            switch_prob: 0.0,
            floor: 1.0,
            product_year: 2015,
        }
    }

    /// Walk with long drift regimes, so that smoothed trend labels are
    /// highly persistent and genuinely predictable from past prices.
    pub fn trend_persistent(len: usize) -> Self {
        Self {
            len,
            start_price: 45.0,
            noise_sigma: 0.25,
            regime_drift: 0.12,
            switch_prob: 1.0 / 400.0,
            floor: 5.0,
            product_year: 2015,
        }
    }
}

/// Standard normal draw via the Box-Muller transform; deterministic for
/// a seeded generator.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generates one price series from the config and seed. Dates are
/// consecutive calendar days starting 2012-01-02.
pub fn generate(cfg: &WalkConfig, seed: u64) -> PriceSeries {
    assert!(cfg.len > 0, "series length must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut drift_sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let mut price = cfg.start_price;
    let mut prices = Vec::with_capacity(cfg.len);
    for _ in 0..cfg.len {
        prices.push(price);
        if cfg.switch_prob > 0.0 && rng.random::<f64>() < cfg.switch_prob {
            drift_sign = -drift_sign;
        }
        let step = drift_sign * cfg.regime_drift + cfg.noise_sigma * standard_normal(&mut rng);
        price = (price + step).max(cfg.floor);
    }
    PriceSeries::from_prices(
        cfg.product_year,
        NaiveDate::from_ymd_opt(2012, 1, 2).expect("valid date"),
        &prices,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trend::{label_trends, smooth};

    #[test]
    fn generation_is_deterministic() {
        let cfg = WalkConfig::random_walk(200);
        assert_eq!(generate(&cfg, 7), generate(&cfg, 7));
        assert_ne!(generate(&cfg, 7), generate(&cfg, 8));
    }

    #[test]
    fn prices_stay_above_the_floor() {
        let mut cfg = WalkConfig::random_walk(500);
        cfg.noise_sigma = 5.0;
        for seed in 0..20 {
            let series = generate(&cfg, seed);
            assert!(series.prices().all(|p| p >= cfg.floor));
            assert!(series.is_clean());
        }
    }

    #[test]
    fn trend_persistent_walks_have_persistent_labels() {
        let cfg = WalkConfig::trend_persistent(750);
        let mut total_pairs = 0usize;
        let mut stable_pairs = 0usize;
        for seed in 0..20 {
            let series = generate(&cfg, seed);
            let labels = label_trends(&smooth(&series, 25).unwrap());
            for pair in labels.windows(2) {
                total_pairs += 1;
                if pair[0].1 == pair[1].1 {
                    stable_pairs += 1;
                }
            }
        }
        let persistence = stable_pairs as f64 / total_pairs as f64;
        assert!(
            persistence >= 0.9,
            "label persistence {persistence} below 0.9"
        );
    }
}
