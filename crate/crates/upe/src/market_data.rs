//! Daily forward-price series: CSV ingestion, validation, cleaning,
//! windowing and per-window normalization.
//!
//! A price series holds the daily quotes of one yearly base-load (CAL)
//! product over its trading horizon. Raw series may contain missing
//! samples (`NaN`) or abnormal values; [`clean_series`] repairs them by
//! linear interpolation/extrapolation and reports every replacement.

use std::fmt;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative jump vs. the previous valid sample above which a price is
/// treated as a data fault.
pub const MAX_RELATIVE_JUMP: f64 = 0.5;

/// Floor used when logging prices is not involved but replacement values
/// must stay clear of the anomaly scan; see [`clean_series`].
const BAND_MARGIN: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("duplicate date {date}")]
    DuplicateDate { date: NaiveDate },
    #[error("series is empty")]
    Empty,
    #[error("dates are not strictly increasing at index {index}")]
    UnorderedDates { index: usize },
    #[error("series has fewer than 2 valid samples; cannot clean")]
    Unrecoverable,
    #[error("insufficient history: window of {window} prices requested at t={t}")]
    InsufficientHistory { t: usize, window: usize },
    #[error("time step {t} is out of range for a series of length {len}")]
    OutOfRange { t: usize, len: usize },
}

/// One trading day's forward quote. `price` is in €/MWh; `NaN` marks a
/// missing sample in a raw (uncleaned) series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub price: f64,
}

/// Ordered daily prices for one CAL product. Dates are strictly
/// increasing; a realistic product spans roughly 750 trading days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    product_year: i32,
    points: Vec<PricePoint>,
}

impl PriceSeries {
    /// Builds a series, enforcing non-emptiness and strictly increasing
    /// dates. Prices may be non-finite here; cleaning handles them.
    pub fn new(product_year: i32, points: Vec<PricePoint>) -> Result<Self, DataError> {
        if points.is_empty() {
            return Err(DataError::Empty);
        }
        for i in 1..points.len() {
            if points[i].date <= points[i - 1].date {
                if points[i].date == points[i - 1].date {
                    return Err(DataError::DuplicateDate {
                        date: points[i].date,
                    });
                }
                return Err(DataError::UnorderedDates { index: i });
            }
        }
        Ok(Self {
            product_year,
            points,
        })
    }

    /// Convenience constructor for synthetic and test data: consecutive
    /// calendar days starting at `start`.
    pub fn from_prices(product_year: i32, start: NaiveDate, prices: &[f64]) -> Self {
        let points = prices
            .iter()
            .enumerate()
            .map(|(i, &price)| PricePoint {
                date: start + chrono::Days::new(i as u64),
                price,
            })
            .collect();
        Self::new(product_year, points).expect("consecutive dates are strictly increasing")
    }

    pub fn product_year(&self) -> i32 {
        self.product_year
    }

    /// Number of trading time steps `T`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PricePoint] {
        &self.points
    }

    /// Price at time step `t`. Panics if out of bounds.
    pub fn price(&self, t: usize) -> f64 {
        self.points[t].price
    }

    pub fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.price)
    }

    /// True when every price is finite and positive (i.e. the series is
    /// safe for simulation).
    pub fn is_clean(&self) -> bool {
        self.points.iter().all(|p| p.price.is_finite() && p.price > 0.0)
    }
}

/// Record of every replacement performed by [`clean_series`].
///
/// `anomaly_rule_hits` lists samples that were present but rejected by
/// the anomaly rule (non-positive price or a relative jump beyond
/// [`MAX_RELATIVE_JUMP`]); missing samples appear only in the
/// interpolated/extrapolated lists.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub interpolated_indices: Vec<usize>,
    pub extrapolated_indices: Vec<usize>,
    pub anomaly_rule_hits: Vec<usize>,
}

impl CleaningReport {
    pub fn is_unchanged(&self) -> bool {
        self.interpolated_indices.is_empty() && self.extrapolated_indices.is_empty()
    }
}

impl fmt::Display for CleaningReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} interpolated, {} extrapolated, {} anomaly hits",
            self.interpolated_indices.len(),
            self.extrapolated_indices.len(),
            self.anomaly_rule_hits.len()
        )
    }
}

/// Window of the `K` prices strictly before time step `t`, i.e. indices
/// `t-K .. t-1` in chronological order.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceWindow {
    values: Vec<f64>,
    origin_t: usize,
}

impl PriceWindow {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Time step the window ends before (the forecast target step).
    pub fn origin_t(&self) -> usize {
        self.origin_t
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A price window standardized to zero mean and unit standard deviation
/// (population convention). A constant window maps to all zeros with
/// `std` recorded as 0.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedWindow {
    pub values: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Loads a two-column CSV (`date,price` header, ISO-8601 dates) into a
/// price series sorted by date. An empty price field denotes a missing
/// sample and loads as `NaN`; any other unparsable price is an error.
/// Lines starting with `#` are skipped.
pub fn load_price_series(source: &Path, product_year: i32) -> Result<PriceSeries, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(source)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => DataError::Io {
                path: source.display().to_string(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => DataError::Parse {
                line: 1,
                message: e.to_string(),
            },
        })?;

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| DataError::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() < 2 {
            return Err(DataError::Parse {
                line,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            DataError::Parse {
                line,
                message: format!("invalid date {:?}: {e}", &record[0]),
            }
        })?;
        let raw_price = &record[1];
        let price = if raw_price.is_empty() {
            f64::NAN
        } else {
            let parsed: f64 = raw_price.parse().map_err(|_| DataError::Parse {
                line,
                message: format!("invalid price {raw_price:?}"),
            })?;
            if !parsed.is_finite() {
                return Err(DataError::Parse {
                    line,
                    message: format!("non-finite price {raw_price:?}"),
                });
            }
            parsed
        };
        points.push(PricePoint { date, price });
    }

    if points.is_empty() {
        return Err(DataError::Empty);
    }
    points.sort_by_key(|p| p.date);
    for pair in points.windows(2) {
        if pair[0].date == pair[1].date {
            return Err(DataError::DuplicateDate { date: pair[0].date });
        }
    }
    PriceSeries::new(product_year, points)
}

/// Writes a series back out in the `date,price` CSV format, with optional
/// leading `#` comment lines.
pub fn write_price_series_csv(
    path: &Path,
    series: &PriceSeries,
    comments: &[String],
) -> Result<(), DataError> {
    let mut out = String::new();
    for c in comments {
        out.push_str(&format!("# {c}\n"));
    }
    out.push_str("date,price\n");
    for p in series.points() {
        out.push_str(&format!("{},{}\n", p.date, p.price));
    }
    std::fs::write(path, out).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Marks which samples survive the anomaly scan. A sample is invalid when
/// it is non-finite, non-positive, or jumps more than
/// [`MAX_RELATIVE_JUMP`] relative to the previous valid sample.
fn scan_validity(prices: &[f64]) -> (Vec<bool>, Vec<usize>) {
    let mut valid = vec![false; prices.len()];
    let mut anomaly_hits = Vec::new();
    let mut prev_valid: Option<f64> = None;
    for (i, &p) in prices.iter().enumerate() {
        if !p.is_finite() {
            continue; // missing sample, not an anomaly-rule hit
        }
        if p <= 0.0 {
            anomaly_hits.push(i);
            continue;
        }
        if let Some(prev) = prev_valid {
            if ((p - prev) / prev).abs() > MAX_RELATIVE_JUMP {
                anomaly_hits.push(i);
                continue;
            }
        }
        valid[i] = true;
        prev_valid = Some(p);
    }
    (valid, anomaly_hits)
}

/// Replaces missing/abnormal samples by linear interpolation between the
/// nearest valid neighbours; leading and trailing invalid samples are
/// extrapolated from the two nearest valid samples.
///
/// Extrapolated values are clamped step-by-step so that the cleaned
/// series itself passes the anomaly scan: each consecutive pair stays
/// within the [`MAX_RELATIVE_JUMP`] band and strictly positive. This
/// keeps cleaning idempotent.
pub fn clean_series(series: &PriceSeries) -> Result<(PriceSeries, CleaningReport), DataError> {
    let prices: Vec<f64> = series.prices().collect();
    let (valid, anomaly_rule_hits) = scan_validity(&prices);

    let valid_indices: Vec<usize> = (0..prices.len()).filter(|&i| valid[i]).collect();
    if valid_indices.len() < 2 {
        return Err(DataError::Unrecoverable);
    }

    let mut cleaned = prices.clone();
    let mut interpolated = Vec::new();
    let mut extrapolated = Vec::new();

    // Interior gaps: linear interpolation between the valid neighbours.
    for w in valid_indices.windows(2) {
        let (l, r) = (w[0], w[1]);
        if r > l + 1 {
            let (pl, pr) = (prices[l], prices[r]);
            for i in l + 1..r {
                cleaned[i] = pl + (pr - pl) * (i - l) as f64 / (r - l) as f64;
                interpolated.push(i);
            }
        }
    }

    // Leading edge: extrapolate from the first two valid samples, walking
    // outward and clamping into the jump-safe band around the inner value.
    let first = valid_indices[0];
    if first > 0 {
        let (a, b) = (valid_indices[0], valid_indices[1]);
        let slope = (prices[b] - prices[a]) / (b - a) as f64;
        for i in (0..first).rev() {
            let inner = cleaned[i + 1];
            let linear = prices[a] - slope * (a - i) as f64;
            let lo = inner / (1.0 + MAX_RELATIVE_JUMP) * (1.0 + BAND_MARGIN);
            let hi = inner / (1.0 - MAX_RELATIVE_JUMP) * (1.0 - BAND_MARGIN);
            cleaned[i] = linear.clamp(lo, hi);
            extrapolated.push(i);
        }
        extrapolated.reverse();
    }

    // Trailing edge: symmetric, anchored on the last two valid samples.
    let last = *valid_indices.last().expect("nonempty");
    if last + 1 < prices.len() {
        let (a, b) = (
            valid_indices[valid_indices.len() - 2],
            valid_indices[valid_indices.len() - 1],
        );
        let slope = (prices[b] - prices[a]) / (b - a) as f64;
        for i in last + 1..prices.len() {
            let inner = cleaned[i - 1];
            let linear = prices[b] + slope * (i - b) as f64;
            let lo = inner * (1.0 - MAX_RELATIVE_JUMP) * (1.0 + BAND_MARGIN);
            let hi = inner * (1.0 + MAX_RELATIVE_JUMP) * (1.0 - BAND_MARGIN);
            cleaned[i] = linear.clamp(lo, hi);
            extrapolated.push(i);
        }
    }

    let points = series
        .points()
        .iter()
        .zip(cleaned)
        .map(|(p, price)| PricePoint {
            date: p.date,
            price,
        })
        .collect();
    let cleaned_series = PriceSeries::new(series.product_year(), points)?;
    debug_assert!(cleaned_series.is_clean());

    Ok((
        cleaned_series,
        CleaningReport {
            interpolated_indices: interpolated,
            extrapolated_indices: extrapolated,
            anomaly_rule_hits,
        },
    ))
}

/// Returns the `K` prices strictly before step `t` (`t-K .. t-1`). The
/// price at `t` itself is never included.
pub fn window(series: &PriceSeries, t: usize, window_len: usize) -> Result<PriceWindow, DataError> {
    if t < window_len {
        return Err(DataError::InsufficientHistory {
            t,
            window: window_len,
        });
    }
    if t > series.len() {
        return Err(DataError::OutOfRange {
            t,
            len: series.len(),
        });
    }
    let values = series.points()[t - window_len..t]
        .iter()
        .map(|p| p.price)
        .collect();
    Ok(PriceWindow {
        values,
        origin_t: t,
    })
}

/// Standardizes a window to zero mean and unit standard deviation using
/// the population convention (divide by `K`). A constant window maps to
/// all zeros with `std = 0`.
pub fn normalize_window(w: &PriceWindow) -> NormalizedWindow {
    let n = w.values.len() as f64;
    let mean = w.values.iter().sum::<f64>() / n;
    let var = w.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let values = if std > 0.0 {
        w.values.iter().map(|v| (v - mean) / std).collect()
    } else {
        vec![0.0; w.values.len()]
    };
    NormalizedWindow { values, mean, std }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn series(prices: &[f64]) -> PriceSeries {
        PriceSeries::from_prices(2015, date("2015-01-02"), prices)
    }

    #[test]
    fn load_sorts_by_date() {
        let dir = std::env::temp_dir().join("upe_md_load");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("basic.csv");
        std::fs::write(&path, "date,price\n2015-01-05,44.5\n2015-01-02,45.0\n").unwrap();
        let s = load_price_series(&path, 2015).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.points()[0].date, date("2015-01-02"));
        assert_eq!(s.points()[0].price, 45.0);
        assert_eq!(s.points()[1].price, 44.5);
    }

    #[test]
    fn load_rejects_duplicate_dates() {
        let dir = std::env::temp_dir().join("upe_md_dup");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("dup.csv");
        std::fs::write(&path, "date,price\n2015-01-02,45.0\n2015-01-02,44.0\n").unwrap();
        match load_price_series(&path, 2015) {
            Err(DataError::DuplicateDate { date: d }) => assert_eq!(d, date("2015-01-02")),
            other => panic!("expected duplicate-date error, got {other:?}"),
        }
    }

    #[test]
    fn load_reports_parse_error_with_line() {
        let dir = std::env::temp_dir().join("upe_md_parse");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        std::fs::write(&path, "date,price\n2015-01-02,abc\n").unwrap();
        match load_price_series(&path, 2015) {
            Err(DataError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_empty_file() {
        let dir = std::env::temp_dir().join("upe_md_empty");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("empty.csv");
        std::fs::write(&path, "date,price\n").unwrap();
        assert!(matches!(load_price_series(&path, 2015), Err(DataError::Empty)));
    }

    #[test]
    fn load_treats_empty_price_as_missing() {
        let dir = std::env::temp_dir().join("upe_md_missing");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("gap.csv");
        std::fs::write(&path, "date,price\n2015-01-02,45.0\n2015-01-03,\n2015-01-04,46.0\n")
            .unwrap();
        let s = load_price_series(&path, 2015).unwrap();
        assert!(s.price(1).is_nan());
    }

    #[test]
    fn clean_interpolates_missing_midpoint() {
        let (cleaned, report) = clean_series(&series(&[50.0, f64::NAN, 52.0])).unwrap();
        let prices: Vec<f64> = cleaned.prices().collect();
        assert_eq!(prices, vec![50.0, 51.0, 52.0]);
        assert_eq!(report.interpolated_indices, vec![1]);
        assert!(report.extrapolated_indices.is_empty());
        assert!(report.anomaly_rule_hits.is_empty());
    }

    #[test]
    fn clean_extrapolates_leading_sample() {
        let (cleaned, report) = clean_series(&series(&[f64::NAN, 50.0, 52.0])).unwrap();
        let prices: Vec<f64> = cleaned.prices().collect();
        assert_eq!(prices, vec![48.0, 50.0, 52.0]);
        assert_eq!(report.extrapolated_indices, vec![0]);
    }

    #[test]
    fn clean_is_identity_on_valid_series() {
        let input = series(&[50.0, 51.0, 52.0]);
        let (cleaned, report) = clean_series(&input).unwrap();
        assert_eq!(cleaned, input);
        assert!(report.is_unchanged());
        assert!(report.anomaly_rule_hits.is_empty());
    }

    #[test]
    fn clean_flags_jumps_and_nonpositive_prices() {
        let (cleaned, report) = clean_series(&series(&[50.0, 51.0, 120.0, 52.0, -3.0, 53.0]))
            .unwrap();
        assert_eq!(report.anomaly_rule_hits, vec![2, 4]);
        assert_eq!(report.interpolated_indices, vec![2, 4]);
        let prices: Vec<f64> = cleaned.prices().collect();
        assert_eq!(prices[2], 51.5);
        assert_eq!(prices[4], 52.5);
    }

    #[test]
    fn clean_errors_when_too_few_valid_samples() {
        assert!(matches!(
            clean_series(&series(&[f64::NAN, 50.0, f64::NAN])),
            Err(DataError::Unrecoverable)
        ));
    }

    #[test]
    fn cleaning_report_serializes_to_json() {
        let report = CleaningReport {
            interpolated_indices: vec![1],
            extrapolated_indices: vec![0],
            anomaly_rule_hits: vec![],
        };
        let json = serde_json::to_string(&report).unwrap();
        let back: CleaningReport = serde_json::from_str(&json).unwrap();
        assert_eq!(report, back);
    }

    #[test]
    fn window_excludes_current_step() {
        let s = series(&[10.0, 11.0, 12.0, 13.0]);
        let w = window(&s, 3, 2).unwrap();
        assert_eq!(w.values(), &[11.0, 12.0]);
        assert_eq!(w.origin_t(), 3);
    }

    #[test]
    fn window_rejects_insufficient_history() {
        let s = series(&[10.0, 11.0, 12.0, 13.0]);
        assert!(matches!(
            window(&s, 2, 3),
            Err(DataError::InsufficientHistory { t: 2, window: 3 })
        ));
    }

    #[test]
    fn window_at_series_end() {
        let prices: Vec<f64> = (0..750).map(|i| 40.0 + i as f64 * 0.01).collect();
        let s = series(&prices);
        let w = window(&s, 750, 50).unwrap();
        assert_eq!(w.len(), 50);
        assert_eq!(w.values()[0], s.price(700));
        assert_eq!(w.values()[49], s.price(749));
    }

    #[test]
    fn normalize_two_point_window() {
        let w = window(&series(&[1.0, 3.0, 9.0]), 2, 2).unwrap();
        let n = normalize_window(&w);
        assert_eq!(n.values, vec![-1.0, 1.0]);
        assert_eq!(n.mean, 2.0);
        assert_eq!(n.std, 1.0);
    }

    #[test]
    fn normalize_constant_window() {
        let w = window(&series(&[5.0, 5.0, 5.0]), 3, 3).unwrap();
        let n = normalize_window(&w);
        assert_eq!(n.values, vec![0.0, 0.0, 0.0]);
        assert_eq!(n.std, 0.0);
    }

    #[test]
    fn normalize_three_point_window() {
        let w = window(&series(&[2.0, 4.0, 6.0]), 3, 3).unwrap();
        let n = normalize_window(&w);
        let expected = (3.0f64 / 2.0).sqrt();
        assert!((n.values[0] + expected).abs() < 1e-12);
        assert!(n.values[1].abs() < 1e-12);
        assert!((n.values[2] - expected).abs() < 1e-12);
        assert!((n.std - (8.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    /// Strategy producing a raw price path with injected faults.
    fn raw_series_strategy() -> impl Strategy<Value = Vec<f64>> {
        (
            proptest::collection::vec(0.97f64..1.03, 3..120),
            20.0f64..80.0,
            proptest::collection::vec(any::<prop::sample::Index>(), 0..6),
        )
            .prop_map(|(factors, start, faults)| {
                let mut prices = Vec::with_capacity(factors.len());
                let mut p = start;
                for f in factors {
                    p *= f;
                    prices.push(p);
                }
                let n = prices.len();
                for (j, idx) in faults.iter().enumerate() {
                    let i = idx.index(n);
                    prices[i] = match j % 3 {
                        0 => f64::NAN,
                        1 => -1.0,
                        _ => prices[i] * 4.0,
                    };
                }
                prices
            })
    }

    proptest! {
        #[test]
        fn normalize_round_trips(values in proptest::collection::vec(1.0f64..200.0, 1..64)) {
            let s = series(&values);
            let k = values.len();
            let w = window(&s, k, k).unwrap();
            let n = normalize_window(&w);
            if n.std > 0.0 {
                for (orig, norm) in w.values().iter().zip(&n.values) {
                    prop_assert!((norm * n.std + n.mean - orig).abs() < 1e-9);
                }
            }
        }

        #[test]
        fn cleaning_is_idempotent(prices in raw_series_strategy()) {
            let raw = series(&prices);
            match clean_series(&raw) {
                Ok((once, _)) => {
                    let (twice, report) = clean_series(&once).unwrap();
                    prop_assert!(report.is_unchanged(), "second pass changed: {report}");
                    prop_assert_eq!(once, twice);
                }
                Err(DataError::Unrecoverable) => {} // fewer than 2 valid samples
                Err(e) => return Err(TestCaseError::fail(format!("unexpected error {e}"))),
            }
        }

        #[test]
        fn cleaning_preserves_length_and_dates(prices in raw_series_strategy()) {
            let raw = series(&prices);
            if let Ok((cleaned, _)) = clean_series(&raw) {
                prop_assert_eq!(cleaned.len(), raw.len());
                for (a, b) in cleaned.points().iter().zip(raw.points()) {
                    prop_assert_eq!(a.date, b.date);
                }
                prop_assert!(cleaned.is_clean());
            }
        }

        #[test]
        fn window_is_strictly_past(
            values in proptest::collection::vec(1.0f64..100.0, 2..80),
            t_idx in any::<prop::sample::Index>(),
            k_idx in any::<prop::sample::Index>(),
        ) {
            let s = series(&values);
            let t = t_idx.index(values.len());
            let k = 1 + k_idx.index(values.len());
            if let Ok(w) = window(&s, t, k) {
                prop_assert_eq!(w.values().len(), k);
                // The window ends exactly one step before t.
                prop_assert_eq!(w.values()[k - 1], s.price(t - 1));
            }
        }
    }
}
