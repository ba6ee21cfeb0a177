//! Adaptive-moment optimizer with bias-corrected first and second
//! moment estimates.

use serde::{Deserialize, Serialize};

use super::net::{Mlp, ParamSet};
use super::train::TrainingConfig;

/// Optimizer state: one moment pair per parameter, plus the update
/// counter used for bias correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub first_moment: ParamSet,
    pub second_moment: ParamSet,
    pub step_count: u64,
}

impl AdamState {
    /// Zero moments shaped like `mlp`.
    pub fn new(mlp: &Mlp) -> Self {
        Self {
            first_moment: ParamSet::zeros_like(mlp),
            second_moment: ParamSet::zeros_like(mlp),
            step_count: 0,
        }
    }
}

fn update_block(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    bias1: f64,
    bias2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + epsilon);
    }
}

/// Applies one bias-corrected update to every weight and bias of `mlp`,
/// incrementing the step counter.
pub fn adam_step(state: &mut AdamState, mlp: &mut Mlp, grads: &ParamSet, config: &TrainingConfig) {
    state.step_count += 1;
    let t = state.step_count as i32;
    let bias1 = 1.0 - config.adam_beta1.powi(t);
    let bias2 = 1.0 - config.adam_beta2.powi(t);
    for l in 0..mlp.weights.len() {
        update_block(
            &mut mlp.weights[l],
            &grads.weights[l],
            &mut state.first_moment.weights[l],
            &mut state.second_moment.weights[l],
            config.learning_rate,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_epsilon,
            bias1,
            bias2,
        );
        update_block(
            &mut mlp.biases[l],
            &grads.biases[l],
            &mut state.first_moment.biases[l],
            &mut state.second_moment.biases[l],
            config.learning_rate,
            config.adam_beta1,
            config.adam_beta2,
            config.adam_epsilon,
            bias1,
            bias2,
        );
    }
}
