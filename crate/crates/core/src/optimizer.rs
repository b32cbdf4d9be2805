//! Adam and the full-batch training loop.

use serde::{Deserialize, Serialize};

use crate::network::{Gradients, Network, NetworkSpec};
use crate::{Error, Result};

pub const DEFAULT_EPOCHS: usize = 100;
pub const DEFAULT_LEARNING_RATE: f64 = 0.05;

/// Adam moment estimates over a network's flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh state with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    pub fn new(param_count: usize, learning_rate: f64) -> Self {
        AdamState {
            step: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn for_network(net: &Network, learning_rate: f64) -> Self {
        Self::new(net.param_count(), learning_rate)
    }

    /// One bias-corrected Adam update of every trainable parameter.
    pub fn step(&mut self, net: &mut Network, grads: &Gradients) -> Result<()> {
        let n = self.m.len();
        for (p, g) in net.groups().iter().zip(grads.groups()) {
            if p.len() != g.len() {
                return Err(Error::DimensionMismatch {
                    expected: p.len(),
                    actual: g.len(),
                    context: "gradient group",
                });
            }
        }
        if net.param_count() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: net.param_count(),
                context: "adam state vs network parameters",
            });
        }

        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let bias1 = 1.0 - b1.powi(t);
        let bias2 = 1.0 - b2.powi(t);

        let mut k = 0;
        for (params, g) in net.groups_mut().into_iter().zip(grads.groups()) {
            for (p, &g) in params.iter_mut().zip(g) {
                let m = &mut self.m[k];
                let v = &mut self.v[k];
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *p -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                k += 1;
            }
        }
        Ok(())
    }
}

/// Training schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: DEFAULT_EPOCHS,
            learning_rate: DEFAULT_LEARNING_RATE,
        }
    }
}

/// A trained network and the full-batch loss seen at each epoch.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: Network,
    /// Loss before each epoch's update; `epochs` entries.
    pub loss_history: Vec<f64>,
}

/// Full-batch Adam from `Network::init(spec, seed)`.
///
/// Fails with [`Error::Diverged`] as soon as the loss stops being finite.
pub fn train(
    spec: NetworkSpec,
    features: &[f64],
    labels: &[usize],
    config: &TrainConfig,
    seed: u64,
) -> Result<TrainOutcome> {
    if labels.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "learning rate must be positive, got {}",
            config.learning_rate
        )));
    }
    let mut network = Network::init(spec, seed)?;
    let mut adam = AdamState::for_network(&network, config.learning_rate);
    let mut loss_history = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let (loss, grads) = network.backward(features, labels)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        loss_history.push(loss);
        adam.step(&mut network, &grads)?;
    }
    Ok(TrainOutcome {
        network,
        loss_history,
    })
}
