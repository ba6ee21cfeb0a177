//! Self-describing JSON model checkpoints.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::net::Mlp;
use super::train::TrainingConfig;
use super::NeuralError;

/// Tag recording the input-normalization convention the model was
/// trained under; checked on load.
pub const NORMALIZATION_TAG: &str = "zscore-population-per-window";

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    layer_dims: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
    normalization: String,
    training_config: TrainingConfig,
}

/// Serializes the model, its layer layout, the normalization tag and the
/// training configuration to a JSON file.
pub fn save_checkpoint(
    path: &Path,
    mlp: &Mlp,
    training_config: &TrainingConfig,
) -> Result<(), NeuralError> {
    let file = CheckpointFile {
        layer_dims: mlp.layer_dims.clone(),
        weights: mlp.weights.clone(),
        biases: mlp.biases.clone(),
        normalization: NORMALIZATION_TAG.to_string(),
        training_config: training_config.clone(),
    };
    let json = serde_json::to_string(&file).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    std::fs::write(path, json).map_err(|e| NeuralError::Checkpoint(e.to_string()))
}

/// Loads a checkpoint, validating shapes and the normalization tag.
pub fn load_checkpoint(path: &Path) -> Result<(Mlp, TrainingConfig), NeuralError> {
    let json = std::fs::read_to_string(path).map_err(|e| {
        NeuralError::Checkpoint(format!("cannot read {}: {e}", path.display()))
    })?;
    let file: CheckpointFile =
        serde_json::from_str(&json).map_err(|e| NeuralError::Checkpoint(e.to_string()))?;
    if file.normalization != NORMALIZATION_TAG {
        return Err(NeuralError::Checkpoint(format!(
            "unsupported normalization {:?} (expected {:?})",
            file.normalization, NORMALIZATION_TAG
        )));
    }
    let mlp = Mlp::from_parts(file.layer_dims, file.weights, file.biases)?;
    Ok((mlp, file.training_config))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_round_trips() {
        let dir = std::env::temp_dir().join("upe_checkpoint_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.json");

        let mlp = Mlp::init(&[5, 7, 2], 13).unwrap();
        let config = TrainingConfig::desk();
        save_checkpoint(&path, &mlp, &config).unwrap();
        let (loaded, loaded_config) = load_checkpoint(&path).unwrap();
        assert_eq!(loaded, mlp);
        assert_eq!(loaded_config, config);

        // Identical forecasts on a probe input.
        let probe: Vec<f64> = vec![0.3, -0.1, 0.7, -0.9, 0.2];
        assert_eq!(
            mlp.probabilities(&probe).unwrap(),
            loaded.probabilities(&probe).unwrap()
        );
    }

    #[test]
    fn load_rejects_wrong_normalization_tag() {
        let dir = std::env::temp_dir().join("upe_checkpoint_badtag");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.json");
        let mlp = Mlp::init(&[3, 4, 2], 0).unwrap();
        save_checkpoint(&path, &mlp, &TrainingConfig::desk()).unwrap();
        let tampered = std::fs::read_to_string(&path)
            .unwrap()
            .replace(NORMALIZATION_TAG, "raw-prices");
        std::fs::write(&path, tampered).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(NeuralError::Checkpoint(_))
        ));
    }
}
