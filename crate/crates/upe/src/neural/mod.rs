//! From-scratch feedforward trend classifier: initialization, forward
//! pass, back-propagation, adaptive-moment optimization, dropout and L2
//! regularization, and the training loop.
//!
//! The network maps a normalized window of `K` past prices to a pair of
//! class probabilities (upward / downward). Training is a single
//! deterministic sequence of updates: fixed seed ⇒ identical
//! initialization, dropout masks, shuffles and trained parameters.
//! Trained models are immutable and safe to share across threads.

mod adam;
mod checkpoint;
mod net;
mod train;

use thiserror::Error;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, NORMALIZATION_TAG};
pub use net::{dl_forecast, leaky_relu, softmax2, Mlp, Mode, ParamSet, LEAKY_SLOPE, LOG_FLOOR};
pub use train::{
    build_dataset, dataset_accuracy, train, write_loss_curve_csv, Dataset, TrainOutcome,
    TrainingConfig,
};

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("invalid layer dimensions: {0}")]
    InvalidDims(String),
    #[error("input has {got} values but the network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("series of length {len} cannot supply both a {window_len}-price window and a trend label with filter order {filter_order}")]
    InsufficientData {
        len: usize,
        window_len: usize,
        filter_order: usize,
    },
    #[error("dataset must contain at least one example of each class")]
    DegenerateDataset,
    #[error("batch is empty")]
    EmptyBatch,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}
