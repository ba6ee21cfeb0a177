//! Market-trend definition and the moving-average forecaster.
//!
//! The ground-truth trend at step `t` is the sign of the difference
//! between two consecutive values of a lag-free centered moving average
//! (order `k`): upward when the smoothed price did not fall. The
//! moving-average forecaster approximates it causally by comparing a
//! short and a long trailing moving average.

use std::ops::RangeInclusive;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::PriceSeries;

#[derive(Debug, Error)]
pub enum TrendError {
    #[error("series of length {len} is too short for filter order {filter_order} (need at least {needed})")]
    InsufficientData {
        len: usize,
        filter_order: usize,
        needed: usize,
    },
    #[error("insufficient history: moving average of length {window} requested at t={t}")]
    InsufficientHistory { t: usize, window: usize },
    #[error("time step {t} exceeds series length {len}")]
    OutOfRange { t: usize, len: usize },
    #[error("moving-average lengths must satisfy short < long (got {short} >= {long})")]
    BadWindowLengths { short: usize, long: usize },
    #[error("prediction and label sequences differ in length ({predictions} vs {labels})")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("cannot compute accuracy of an empty sequence")]
    EmptySequence,
}

/// Binary market trend: `Up` ⇔ +1, `Down` ⇔ −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrendLabel {
    Up,
    Down,
}

impl TrendLabel {
    pub fn value(self) -> i8 {
        match self {
            TrendLabel::Up => 1,
            TrendLabel::Down => -1,
        }
    }

    /// Class index used by the neural classifier (up = 0, down = 1).
    pub fn class_index(self) -> usize {
        match self {
            TrendLabel::Up => 0,
            TrendLabel::Down => 1,
        }
    }

    pub fn from_value(v: i8) -> Option<Self> {
        match v {
            1 => Some(TrendLabel::Up),
            -1 => Some(TrendLabel::Down),
            _ => None,
        }
    }
}

/// Centered moving average of the price series. Values exist only where
/// the full window of `2k+1` raw prices fits, i.e. for
/// `t ∈ [k, T-1-k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedSeries {
    values: Vec<f64>,
    start: usize,
    filter_order: usize,
}

impl SmoothedSeries {
    /// Smoothed price at step `t`, if `t` lies in the valid range.
    pub fn value_at(&self, t: usize) -> Option<f64> {
        if t < self.start {
            return None;
        }
        self.values.get(t - self.start).copied()
    }

    pub fn valid_range(&self) -> RangeInclusive<usize> {
        self.start..=self.start + self.values.len() - 1
    }

    pub fn filter_order(&self) -> usize {
        self.filter_order
    }
}

/// Applies the lag-free low-pass filter of order `k`:
/// each valid value is the arithmetic mean of the `2k+1` raw prices
/// centered at its index. At least one full window must fit; labeling
/// additionally needs two smoothed values.
pub fn smooth(series: &PriceSeries, filter_order: usize) -> Result<SmoothedSeries, TrendError> {
    let len = series.len();
    let needed = 2 * filter_order + 1;
    if len < needed {
        return Err(TrendError::InsufficientData {
            len,
            filter_order,
            needed,
        });
    }
    let width = 2 * filter_order + 1;
    let mut values = Vec::with_capacity(len - width + 1);
    for t in filter_order..=len - 1 - filter_order {
        let sum: f64 = (t - filter_order..=t + filter_order)
            .map(|i| series.price(i))
            .sum();
        values.push(sum / width as f64);
    }
    Ok(SmoothedSeries {
        values,
        start: filter_order,
        filter_order,
    })
}

/// Ground-truth labels: for each `t` where both `p̄_t` and `p̄_{t-1}`
/// exist, the trend is `Up` when `p̄_t ≥ p̄_{t-1}`, `Down` otherwise.
pub fn label_trends(sm: &SmoothedSeries) -> Vec<(usize, TrendLabel)> {
    let mut labels = Vec::with_capacity(sm.values.len().saturating_sub(1));
    for i in 1..sm.values.len() {
        let t = sm.start + i;
        let label = if sm.values[i] >= sm.values[i - 1] {
            TrendLabel::Up
        } else {
            TrendLabel::Down
        };
        labels.push((t, label));
    }
    labels
}

/// Trailing moving average over the `L` prices strictly before `t`.
pub fn moving_average(series: &PriceSeries, t: usize, len: usize) -> Result<f64, TrendError> {
    if t < len {
        return Err(TrendError::InsufficientHistory { t, window: len });
    }
    if t > series.len() {
        return Err(TrendError::OutOfRange {
            t,
            len: series.len(),
        });
    }
    let sum: f64 = (t - len..t).map(|i| series.price(i)).sum();
    Ok(sum / len as f64)
}

/// Moving-average trend forecast: `Up` when the short average is at
/// least the long one (tie resolves upward), `Down` otherwise.
pub fn ma_forecast(
    series: &PriceSeries,
    t: usize,
    short_len: usize,
    long_len: usize,
) -> Result<TrendLabel, TrendError> {
    if short_len >= long_len {
        return Err(TrendError::BadWindowLengths {
            short: short_len,
            long: long_len,
        });
    }
    let short = moving_average(series, t, short_len)?;
    let long = moving_average(series, t, long_len)?;
    Ok(if short >= long {
        TrendLabel::Up
    } else {
        TrendLabel::Down
    })
}

/// Fraction of positions where the prediction equals the label.
pub fn accuracy(predictions: &[TrendLabel], labels: &[TrendLabel]) -> Result<f64, TrendError> {
    if predictions.len() != labels.len() {
        return Err(TrendError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(TrendError::EmptySequence);
    }
    let correct = predictions
        .iter()
        .zip(labels)
        .filter(|(p, l)| p == l)
        .count();
    Ok(correct as f64 / predictions.len() as f64)
}

/// Writes `(t, label, prediction)` rows as CSV for plotting. Either
/// column may be absent at a given step.
pub fn write_label_csv(
    path: &Path,
    rows: &[(usize, Option<TrendLabel>, Option<TrendLabel>)],
    comments: &[String],
) -> std::io::Result<()> {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str("t,label,prediction\n");
    for (t, label, prediction) in rows {
        let fmt = |v: &Option<TrendLabel>| v.map_or(String::new(), |l| l.value().to_string());
        out.push_str(&format!("{},{},{}\n", t, fmt(label), fmt(prediction)));
    }
    std::fs::write(path, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn series(prices: &[f64]) -> PriceSeries {
        PriceSeries::from_prices(
            2015,
            NaiveDate::from_ymd_opt(2015, 1, 2).unwrap(),
            prices,
        )
    }

    /// Direct evaluation of the centered-mean definition, kept separate
    /// from the incremental implementation in `smooth`.
    fn centered_mean(prices: &[f64], t: usize, k: usize) -> f64 {
        let sum: f64 = prices[t - k..=t + k].iter().sum();
        sum / (2 * k + 1) as f64
    }

    #[test]
    fn smooth_constant_series() {
        let sm = smooth(&series(&[5.0; 5]), 1).unwrap();
        assert_eq!(sm.valid_range(), 1..=3);
        for t in 1..=3 {
            assert_eq!(sm.value_at(t), Some(5.0));
        }
        assert_eq!(sm.value_at(0), None);
        assert_eq!(sm.value_at(4), None);
    }

    #[test]
    fn smooth_matches_centered_mean() {
        let prices = [1.0, 2.0, 3.0, 4.0, 5.0];
        let sm1 = smooth(&series(&prices), 1).unwrap();
        assert!((sm1.value_at(2).unwrap() - 3.0).abs() < 1e-12);
        let sm2 = smooth(&series(&prices), 2).unwrap();
        assert!((sm2.value_at(2).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_rejects_short_series() {
        assert!(matches!(
            smooth(&series(&[1.0, 2.0]), 1),
            Err(TrendError::InsufficientData { needed: 3, .. })
        ));
    }

    #[test]
    fn labels_on_increasing_series() {
        let prices: Vec<f64> = (0..20).map(|i| 10.0 + i as f64).collect();
        let sm = smooth(&series(&prices), 2).unwrap();
        for (_, label) in label_trends(&sm) {
            assert_eq!(label, TrendLabel::Up);
        }
    }

    #[test]
    fn labels_resolve_ties_upward() {
        let sm = smooth(&series(&[7.0; 10]), 2).unwrap();
        let labels = label_trends(&sm);
        assert!(!labels.is_empty());
        for (_, label) in labels {
            assert_eq!(label, TrendLabel::Up);
        }
    }

    #[test]
    fn labels_on_tent_series() {
        // Rise then symmetric fall; with k=1 the labels flip right after
        // the peak. Expected values come from the direct centered-mean
        // definition rather than the incremental smoother.
        let prices = [0.0, 1.0, 2.0, 3.0, 4.0, 3.0, 2.0, 1.0, 0.0];
        let k = 1;
        let sm = smooth(&series(&prices), k).unwrap();
        let labels = label_trends(&sm);
        let expected: Vec<(usize, TrendLabel)> = (k + 1..=prices.len() - 1 - k)
            .map(|t| {
                let up = centered_mean(&prices, t, k) >= centered_mean(&prices, t - 1, k);
                (t, if up { TrendLabel::Up } else { TrendLabel::Down })
            })
            .collect();
        assert_eq!(labels, expected);
        for (t, label) in labels {
            if t <= 4 {
                assert_eq!(label, TrendLabel::Up, "t={t}");
            } else {
                assert_eq!(label, TrendLabel::Down, "t={t}");
            }
        }
    }

    #[test]
    fn moving_average_of_ramp() {
        let prices: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(moving_average(&series(&prices), 9, 3).unwrap(), 7.0);
    }

    #[test]
    fn moving_average_of_constant() {
        let prices = [3.5; 12];
        for t in [4, 8, 12] {
            assert_eq!(moving_average(&series(&prices), t, 4).unwrap(), 3.5);
        }
    }

    #[test]
    fn moving_average_at_boundary() {
        let prices = [2.0, 4.0, 6.0, 8.0];
        assert_eq!(moving_average(&series(&prices), 3, 3).unwrap(), 4.0);
        assert!(matches!(
            moving_average(&series(&prices), 2, 3),
            Err(TrendError::InsufficientHistory { .. })
        ));
    }

    #[test]
    fn ma_forecast_follows_monotone_series() {
        let up: Vec<f64> = (0..30).map(|i| 10.0 + i as f64).collect();
        let down: Vec<f64> = (0..30).map(|i| 40.0 - i as f64).collect();
        assert_eq!(
            ma_forecast(&series(&up), 25, 5, 20).unwrap(),
            TrendLabel::Up
        );
        assert_eq!(
            ma_forecast(&series(&down), 25, 5, 20).unwrap(),
            TrendLabel::Down
        );
    }

    #[test]
    fn ma_forecast_ties_resolve_upward() {
        let flat = [9.0; 30];
        assert_eq!(
            ma_forecast(&series(&flat), 25, 5, 20).unwrap(),
            TrendLabel::Up
        );
    }

    #[test]
    fn ma_forecast_validates_lengths() {
        let flat = [9.0; 30];
        assert!(matches!(
            ma_forecast(&series(&flat), 25, 20, 5),
            Err(TrendError::BadWindowLengths { .. })
        ));
    }

    #[test]
    fn accuracy_counts_matches() {
        let l = vec![TrendLabel::Up; 10];
        assert_eq!(accuracy(&l, &l).unwrap(), 1.0);
        let flipped = vec![TrendLabel::Down; 10];
        assert_eq!(accuracy(&flipped, &l).unwrap(), 0.0);
        let mut eight = l.clone();
        eight[0] = TrendLabel::Down;
        eight[5] = TrendLabel::Down;
        assert_eq!(accuracy(&eight, &l).unwrap(), 0.8);
    }

    #[test]
    fn accuracy_validates_input() {
        let l = vec![TrendLabel::Up; 3];
        assert!(matches!(
            accuracy(&l[..2], &l),
            Err(TrendError::LengthMismatch { .. })
        ));
        assert!(matches!(accuracy(&[], &[]), Err(TrendError::EmptySequence)));
    }

    fn price_vec() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(10.0f64..100.0, 12..80)
    }

    proptest! {
        #[test]
        fn smooth_is_shift_and_scale_equivariant(
            prices in price_vec(),
            shift in -20.0f64..20.0,
            scale in 0.1f64..5.0,
        ) {
            let k = 3;
            let base = smooth(&series(&prices), k).unwrap();
            let shifted: Vec<f64> = prices.iter().map(|p| p + shift).collect();
            let scaled: Vec<f64> = prices.iter().map(|p| p * scale).collect();
            let sm_shift = smooth(&series(&shifted), k).unwrap();
            let sm_scale = smooth(&series(&scaled), k).unwrap();
            for t in base.valid_range() {
                let b = base.value_at(t).unwrap();
                prop_assert!((sm_shift.value_at(t).unwrap() - (b + shift)).abs() < 1e-9);
                prop_assert!((sm_scale.value_at(t).unwrap() - b * scale).abs() < 1e-9 * scale.max(1.0));
            }
        }

        #[test]
        fn labels_invariant_under_positive_affine(
            prices in price_vec(),
            shift in 0.0f64..50.0,
            scale in 0.5f64..4.0,
        ) {
            let k = 3;
            let base = label_trends(&smooth(&series(&prices), k).unwrap());
            let mapped: Vec<f64> = prices.iter().map(|p| p * scale + shift).collect();
            let transformed = label_trends(&smooth(&series(&mapped), k).unwrap());
            // Affine maps can flip exact ties via rounding; compare only
            // where the smoothed difference is not razor thin.
            let sm = smooth(&series(&prices), k).unwrap();
            for ((t, a), (_, b)) in base.iter().zip(&transformed) {
                let diff = sm.value_at(*t).unwrap() - sm.value_at(*t - 1).unwrap();
                if diff.abs() > 1e-6 {
                    prop_assert_eq!(a, b, "t={}", t);
                }
            }
        }

        #[test]
        fn ma_forecast_invariant_under_positive_affine(
            prices in price_vec(),
            shift in 0.0f64..50.0,
            scale in 0.5f64..4.0,
        ) {
            let (short, long) = (3, 9);
            let mapped: Vec<f64> = prices.iter().map(|p| p * scale + shift).collect();
            let s0 = series(&prices);
            let s1 = series(&mapped);
            for t in long..=prices.len() {
                let short_ma = moving_average(&s0, t, short).unwrap();
                let long_ma = moving_average(&s0, t, long).unwrap();
                if (short_ma - long_ma).abs() > 1e-6 {
                    prop_assert_eq!(
                        ma_forecast(&s0, t, short, long).unwrap(),
                        ma_forecast(&s1, t, short, long).unwrap()
                    );
                }
            }
        }

        #[test]
        fn labels_match_monotone_direction(start in 10.0f64..50.0, step in 0.01f64..2.0, up in any::<bool>()) {
            let prices: Vec<f64> = (0..30)
                .map(|i| if up { start + step * i as f64 } else { start + step * 29.0 - step * i as f64 })
                .collect();
            let sm = smooth(&series(&prices), 3).unwrap();
            for (_, label) in label_trends(&sm) {
                prop_assert_eq!(label, if up { TrendLabel::Up } else { TrendLabel::Down });
            }
        }
    }
}
