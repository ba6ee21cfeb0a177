//! Result-file formats and report rendering: per-run JSON summaries,
//! JSON-Lines decision traces, the per-product results table and the
//! sensitivity-sweep CSV. Every emitted file starts with a
//! `# config_hash=...` comment for reproducibility.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backtest::{BacktestResult, ProductResults, SweepResult};
use crate::strategy::ReferenceCosts;

/// Column order of the results table: the four strategies followed by
/// the four reference policies.
pub const TABLE_COLUMNS: [&str; 8] = [
    "nbep", "epma", "upe-ma", "upe-dl", "min", "mean", "max", "upe-f",
];

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed result file {path}: {message}")]
    Malformed { path: String, message: String },
    #[error("directory {0} contains no result files")]
    EmptyDirectory(String),
}

/// Per-run summary stored as `results/<year>_<strategy>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSummary {
    pub product_year: i32,
    pub strategy: String,
    pub cost_per_mwh: f64,
    pub total_cost: f64,
    pub purchase_count: usize,
    pub forecaster_accuracy: Option<f64>,
    pub config_hash: String,
}

impl ResultSummary {
    pub fn from_result(result: &BacktestResult, config_hash: &str) -> Self {
        Self {
            product_year: result.product_year,
            strategy: result.strategy.clone(),
            cost_per_mwh: result.cost_per_mwh,
            total_cost: result.total_cost,
            purchase_count: result.purchases.len(),
            forecaster_accuracy: result.forecaster_accuracy,
            config_hash: config_hash.to_string(),
        }
    }
}

/// Reference costs stored as `references/<year>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSummary {
    pub product_year: i32,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub config_hash: String,
}

impl ReferenceSummary {
    pub fn new(product_year: i32, refs: &ReferenceCosts, config_hash: &str) -> Self {
        Self {
            product_year,
            min: refs.min,
            mean: refs.mean,
            max: refs.max,
            config_hash: config_hash.to_string(),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> ReportError {
    ReportError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ReportError> {
    let json = serde_json::to_string_pretty(value).expect("summaries serialize");
    std::fs::write(path, json).map_err(|e| io_err(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| ReportError::Malformed {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Writes one product's results into the case-study directory layout:
/// `results/<year>_<strategy>.json`, `traces/<year>_<strategy>.jsonl`
/// and `references/<year>.json`.
pub fn write_product_files(
    dir: &Path,
    product: &ProductResults,
    config_hash: &str,
) -> Result<(), ReportError> {
    for sub in ["results", "traces", "references"] {
        std::fs::create_dir_all(dir.join(sub)).map_err(|e| io_err(dir, e))?;
    }
    for (name, result) in &product.results {
        let summary = ResultSummary::from_result(result, config_hash);
        write_json(
            &dir.join("results")
                .join(format!("{}_{}.json", product.product_year, name)),
            &summary,
        )?;
        let trace_path = dir
            .join("traces")
            .join(format!("{}_{}.jsonl", product.product_year, name));
        let mut out = format!("# config_hash={config_hash}\n");
        for record in &result.decisions {
            out.push_str(&serde_json::to_string(record).expect("records serialize"));
            out.push('\n');
        }
        std::fs::write(&trace_path, out).map_err(|e| io_err(&trace_path, e))?;
    }
    write_json(
        &dir.join("references")
            .join(format!("{}.json", product.product_year)),
        &ReferenceSummary::new(product.product_year, &product.references, config_hash),
    )?;
    Ok(())
}

/// Table cells collected from a case-study directory, keyed by
/// `(product_year, column)`.
#[derive(Debug, Default, Clone)]
pub struct TableData {
    pub years: BTreeSet<i32>,
    pub cells: BTreeMap<(i32, String), f64>,
}

impl TableData {
    pub fn insert_result(&mut self, summary: &ResultSummary) {
        self.years.insert(summary.product_year);
        self.cells.insert(
            (summary.product_year, summary.strategy.clone()),
            summary.cost_per_mwh,
        );
    }

    pub fn insert_references(&mut self, refs: &ReferenceSummary) {
        self.years.insert(refs.product_year);
        for (name, value) in [("min", refs.min), ("mean", refs.mean), ("max", refs.max)] {
            self.cells.insert((refs.product_year, name.to_string()), value);
        }
    }
}

/// Scans `dir/results` and `dir/references` into table data.
pub fn collect_table(dir: &Path) -> Result<TableData, ReportError> {
    let mut data = TableData::default();
    let results_dir = dir.join("results");
    let entries = std::fs::read_dir(&results_dir).map_err(|e| io_err(&results_dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| io_err(&results_dir, e))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            let summary: ResultSummary = read_json(&path)?;
            data.insert_result(&summary);
        }
    }
    let refs_dir = dir.join("references");
    if refs_dir.is_dir() {
        let entries = std::fs::read_dir(&refs_dir).map_err(|e| io_err(&refs_dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| io_err(&refs_dir, e))?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let refs: ReferenceSummary = read_json(&path)?;
                data.insert_references(&refs);
            }
        }
    }
    if data.years.is_empty() {
        return Err(ReportError::EmptyDirectory(dir.display().to_string()));
    }
    Ok(data)
}

fn format_cell(value: Option<f64>) -> String {
    value.map_or_else(|| "NA".to_string(), |v| format!("{v:.3}"))
}

/// Renders the results table: one row per product, the fixed column
/// order of [`TABLE_COLUMNS`], and a final `average` row. Missing cells
/// render as `NA` and are reported as warnings; column averages run
/// over the present values.
pub fn render_results_csv(data: &TableData, config_hash: Option<&str>) -> (String, Vec<String>) {
    let mut out = String::new();
    let mut warnings = Vec::new();
    if let Some(hash) = config_hash {
        out.push_str(&format!("# config_hash={hash}\n"));
    }
    out.push_str("product,");
    out.push_str(&TABLE_COLUMNS.join(","));
    out.push('\n');

    let mut sums: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for &year in &data.years {
        let mut row = vec![year.to_string()];
        for column in TABLE_COLUMNS {
            let value = data.cells.get(&(year, column.to_string())).copied();
            if let Some(v) = value {
                let entry = sums.entry(column).or_insert((0.0, 0));
                entry.0 += v;
                entry.1 += 1;
            } else {
                warnings.push(format!("missing {column} result for product {year}"));
            }
            row.push(format_cell(value));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }

    let mut row = vec!["average".to_string()];
    for column in TABLE_COLUMNS {
        let avg = sums
            .get(column)
            .map(|(sum, count)| sum / *count as f64);
        row.push(format_cell(avg));
    }
    out.push_str(&row.join(","));
    out.push('\n');
    (out, warnings)
}

fn column_rank(name: &str) -> usize {
    TABLE_COLUMNS
        .iter()
        .position(|c| *c == name)
        .unwrap_or(TABLE_COLUMNS.len())
}

/// Renders the sweep as `N,strategy,avg_cost` rows ordered by `N` and
/// then by table column order.
pub fn render_sweep_csv(sweep: &SweepResult, config_hash: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(hash) = config_hash {
        out.push_str(&format!("# config_hash={hash}\n"));
    }
    out.push_str("N,strategy,avg_cost\n");
    let mut rows: Vec<(&(usize, String), &f64)> = sweep.rows.iter().collect();
    rows.sort_by(|((n_a, name_a), _), ((n_b, name_b), _)| {
        n_a.cmp(n_b)
            .then(column_rank(name_a).cmp(&column_rank(name_b)))
            .then(name_a.cmp(name_b))
    });
    for ((n, name), value) in rows {
        out.push_str(&format!("{n},{name},{value:.3}\n"));
    }
    out
}

/// Rebuilds a [`SweepResult`] from the `sweep/n=<N>/` subdirectories of
/// a case-study directory, averaging the stored per-product summaries.
pub fn collect_sweep(dir: &Path) -> Result<Option<SweepResult>, ReportError> {
    let sweep_dir = dir.join("sweep");
    if !sweep_dir.is_dir() {
        return Ok(None);
    }
    let mut rows = BTreeMap::new();
    let mut n_values = Vec::new();
    let entries = std::fs::read_dir(&sweep_dir).map_err(|e| io_err(&sweep_dir, e))?;
    let mut subdirs: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    for subdir in subdirs {
        let name = subdir
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        let Some(n) = name.strip_prefix("n=").and_then(|s| s.parse::<usize>().ok()) else {
            continue;
        };
        n_values.push(n);
        let data = collect_table(&subdir)?;
        let mut per_column: BTreeMap<String, (f64, usize)> = BTreeMap::new();
        for ((_, column), value) in &data.cells {
            let entry = per_column.entry(column.clone()).or_insert((0.0, 0));
            entry.0 += value;
            entry.1 += 1;
        }
        for (column, (sum, count)) in per_column {
            rows.insert((n, column), sum / count as f64);
        }
    }
    n_values.sort_unstable();
    if n_values.is_empty() {
        return Ok(None);
    }
    Ok(Some(SweepResult { n_values, rows }))
}
