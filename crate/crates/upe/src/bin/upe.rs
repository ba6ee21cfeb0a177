//! Thin command-line front end over the library's `cli` module.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use upe::cli::{self, CliError};
use upe::config::{resolve, ConfigOverlay, Preset, RunConfig};

#[derive(Parser)]
#[command(
    name = "upe",
    version,
    about = "Forward-market electricity procurement: data pipeline, forecaster training, strategy backtests and reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    match s {
        "paper" => Ok(Preset::Paper),
        "desk" => Ok(Preset::Desk),
        other => Err(format!("unknown preset {other:?} (expected paper or desk)")),
    }
}

/// Configuration layering: flags override the config file, which
/// overrides the preset defaults.
#[derive(Args, Default)]
struct ConfigArgs {
    /// TOML config file (keys match these flag names)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Hyperparameter preset: paper (full scale) or desk (minutes)
    #[arg(long, value_parser = parse_preset)]
    preset: Option<Preset>,
    /// Number of past prices in the forecaster input window (K)
    #[arg(long)]
    window_len: Option<usize>,
    /// Low-pass filter order defining trend labels (k)
    #[arg(long)]
    filter_order: Option<usize>,
    /// Total quantity of electricity to buy in MWh (Q)
    #[arg(long)]
    quantity_mwh: Option<f64>,
    /// Number of purchase operations (N)
    #[arg(long)]
    operations: Option<usize>,
    /// Market resolution in MWh (dQ)
    #[arg(long)]
    resolution_mwh: Option<f64>,
    /// Transaction fee per MWh
    #[arg(long)]
    fee_per_mwh: Option<f64>,
    /// Uniformity trigger for downward forecasts (u-)
    #[arg(long, allow_hyphen_values = true)]
    trigger_down: Option<f64>,
    /// Uniformity trigger for upward forecasts (u+)
    #[arg(long, allow_hyphen_values = true)]
    trigger_up: Option<f64>,
    /// Hidden layers in the deep forecaster (N_L)
    #[arg(long)]
    hidden_layers: Option<usize>,
    /// Neurons per hidden layer (N_N)
    #[arg(long)]
    hidden_neurons: Option<usize>,
    /// Dropout probability (D_p)
    #[arg(long)]
    dropout: Option<f64>,
    /// L2 penalty factor
    #[arg(long)]
    l2_factor: Option<f64>,
    /// Optimizer learning rate
    #[arg(long)]
    learning_rate: Option<f64>,
    /// Training epochs (n)
    #[arg(long)]
    epochs: Option<usize>,
    /// Mini-batch size (B)
    #[arg(long)]
    batch_size: Option<usize>,
    /// Seed for every random choice (init, dropout, shuffles)
    #[arg(long)]
    seed: Option<u64>,
    /// Short moving-average length in trading days
    #[arg(long)]
    ma_short: Option<usize>,
    /// Long moving-average length in trading days
    #[arg(long)]
    ma_long: Option<usize>,
    /// Base directory for data files
    #[arg(long, env = "UPE_DATA_DIR")]
    data_dir: Option<PathBuf>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => Some(ConfigOverlay::from_toml_file(path)?),
            None => None,
        };
        let flags = ConfigOverlay {
            preset: self.preset,
            window_len: self.window_len,
            filter_order: self.filter_order,
            quantity_mwh: self.quantity_mwh,
            operations: self.operations,
            resolution_mwh: self.resolution_mwh,
            fee_per_mwh: self.fee_per_mwh,
            trigger_down: self.trigger_down,
            trigger_up: self.trigger_up,
            hidden_layers: self.hidden_layers,
            hidden_neurons: self.hidden_neurons,
            dropout: self.dropout,
            l2_factor: self.l2_factor,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            ma_short: self.ma_short,
            ma_long: self.ma_long,
            data_dir: self.data_dir.clone(),
            case_study: None,
        };
        Ok(resolve(file.as_ref(), &flags)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load, validate and clean a raw price CSV
    Ingest {
        /// Raw two-column CSV (date,price)
        #[arg(long)]
        input: PathBuf,
        /// Destination for the cleaned CSV
        #[arg(long)]
        output: PathBuf,
        /// Destination for the JSON cleaning report
        #[arg(long)]
        report: Option<PathBuf>,
        /// Delivery year of the product
        #[arg(long, default_value_t = 0)]
        product_year: i32,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Train the deep trend forecaster on a training product
    Train {
        /// Training-product CSV
        #[arg(long)]
        input: PathBuf,
        /// Directory for model.json, loss_curve.csv, training_report.json
        #[arg(long)]
        out_dir: PathBuf,
        /// Delivery year of the training product
        #[arg(long, default_value_t = 0)]
        product_year: i32,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run one strategy over one product
    Backtest {
        /// Test-product CSV
        #[arg(long)]
        input: PathBuf,
        /// Strategy: nbep, epma, upe-ma, upe-dl or upe-f
        #[arg(long)]
        strategy: String,
        /// Model checkpoint (required for upe-dl)
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Output directory (results/, traces/, references/)
        #[arg(long)]
        out_dir: PathBuf,
        /// Delivery year of the test product
        #[arg(long, default_value_t = 0)]
        product_year: i32,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Run every strategy over the configured multi-product case study
    CaseStudy {
        /// Output directory
        #[arg(long)]
        out_dir: PathBuf,
        /// Concurrent product runs
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Repeat the case study over several purchase-operation counts
    Sweep {
        /// Output directory
        #[arg(long)]
        out_dir: PathBuf,
        /// Comma-separated N values, e.g. 2,4,5,10,20
        #[arg(long, value_delimiter = ',', required = true)]
        n_values: Vec<usize>,
        /// Concurrent product runs
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Rebuild results.csv (and sweep.csv) from a case-study directory
    Report {
        /// Case-study directory to scan
        #[arg(long)]
        dir: PathBuf,
        /// Alternative path for the results table
        #[arg(long)]
        table_out: Option<PathBuf>,
        /// Alternative path for the sweep table
        #[arg(long)]
        sweep_out: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Ingest {
            input,
            output,
            report,
            product_year,
            cfg,
        } => {
            let cfg = cfg.resolve()?;
            cli::cmd_ingest(&cfg, &input, &output, report.as_deref(), product_year)?;
        }
        Command::Train {
            input,
            out_dir,
            product_year,
            cfg,
        } => {
            let cfg = cfg.resolve()?;
            cli::cmd_train(&cfg, &input, &out_dir, product_year)?;
        }
        Command::Backtest {
            input,
            strategy,
            checkpoint,
            out_dir,
            product_year,
            cfg,
        } => {
            let cfg = cfg.resolve()?;
            cli::cmd_backtest(
                &cfg,
                &input,
                &strategy,
                checkpoint.as_deref(),
                &out_dir,
                product_year,
            )?;
        }
        Command::CaseStudy { out_dir, jobs, cfg } => {
            let cfg = cfg.resolve()?;
            cli::cmd_case_study(&cfg, &out_dir, jobs)?;
        }
        Command::Sweep {
            out_dir,
            n_values,
            jobs,
            cfg,
        } => {
            let cfg = cfg.resolve()?;
            cli::cmd_sweep(&cfg, &out_dir, &n_values, jobs)?;
        }
        Command::Report {
            dir,
            table_out,
            sweep_out,
        } => {
            cli::cmd_report(&dir, table_out.as_deref(), sweep_out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
