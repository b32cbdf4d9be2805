//! One-hidden-layer perceptron with a softmax head and trainable activations.
//!
//! ```text
//! z = W1·x + b1            (N_h pre-activations)
//! h_i = g(z_i; α_i)        (α_i resolved by AlphaMode)
//! p = softmax(W2·h + b2)   (C class probabilities)
//! ```
//!
//! Weight matrices are stored row-major: `w1` is `N_h × D`, `w2` is `C × N_h`.
//! Batches are passed as a flat row-major feature buffer plus a label slice.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::activations::ActivationKind;
use crate::{Error, Result};

/// Probabilities below this are clamped before taking the log in the loss.
pub const PROB_FLOOR: f64 = 1e-12;

/// How the hidden layer's shape parameters are shared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaMode {
    /// M1: every unit uses α = 1, nothing to train.
    Fixed,
    /// M2: one trainable α shared by all hidden units.
    Shared,
    /// M3: one trainable α per hidden unit.
    Individual,
}

impl AlphaMode {
    pub const ALL: [AlphaMode; 3] = [AlphaMode::Fixed, AlphaMode::Shared, AlphaMode::Individual];

    /// Short label used on the command line and in exports (`m1`, `m2`, `m3`).
    pub fn label(self) -> &'static str {
        match self {
            AlphaMode::Fixed => "m1",
            AlphaMode::Shared => "m2",
            AlphaMode::Individual => "m3",
        }
    }

    /// Number of trainable α parameters for a layer of `hidden_units`.
    pub fn alpha_count(self, hidden_units: usize) -> usize {
        match self {
            AlphaMode::Fixed => 0,
            AlphaMode::Shared => 1,
            AlphaMode::Individual => hidden_units,
        }
    }
}

impl fmt::Display for AlphaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AlphaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m1" | "fixed" => Ok(AlphaMode::Fixed),
            "m2" | "shared" => Ok(AlphaMode::Shared),
            "m3" | "individual" => Ok(AlphaMode::Individual),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode `{other}` (expected m1, m2 or m3)"
            ))),
        }
    }
}

/// Architecture of a network: sizes, activation family and α regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_dim: usize,
    pub hidden_units: usize,
    pub num_classes: usize,
    pub activation: ActivationKind,
    pub mode: AlphaMode,
}

impl NetworkSpec {
    pub fn new(
        input_dim: usize,
        hidden_units: usize,
        num_classes: usize,
        activation: ActivationKind,
        mode: AlphaMode,
    ) -> Result<Self> {
        let spec = NetworkSpec {
            input_dim,
            hidden_units,
            num_classes,
            activation,
            mode,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::InvalidSpec("input_dim must be positive".into()));
        }
        if self.hidden_units == 0 {
            return Err(Error::InvalidSpec("hidden_units must be positive".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidSpec(format!(
                "num_classes must be at least 2, got {}",
                self.num_classes
            )));
        }
        Ok(())
    }

    pub fn alpha_count(&self) -> usize {
        self.mode.alpha_count(self.hidden_units)
    }
}

/// Total number of trainable parameters, α included.
///
/// ```
/// use adaptact::{param_count, ActivationKind, AlphaMode, NetworkSpec};
///
/// let spec = NetworkSpec::new(11, 2, 2, ActivationKind::Elu, AlphaMode::Individual).unwrap();
/// assert_eq!(param_count(&spec), 32);
/// ```
pub fn param_count(spec: &NetworkSpec) -> usize {
    let (d, h, c) = (spec.input_dim, spec.hidden_units, spec.num_classes);
    h * (d + 1) + c * (h + 1) + spec.alpha_count()
}

/// Parameters of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub spec: NetworkSpec,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub alphas: Vec<f64>,
}

/// Gradient of the loss, laid out exactly like [`Network`]'s parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl Gradients {
    pub fn zeros(spec: &NetworkSpec) -> Self {
        Gradients {
            w1: vec![0.0; spec.hidden_units * spec.input_dim],
            b1: vec![0.0; spec.hidden_units],
            w2: vec![0.0; spec.num_classes * spec.hidden_units],
            b2: vec![0.0; spec.num_classes],
            alphas: vec![0.0; spec.alpha_count()],
        }
    }

    /// Parameter groups in canonical order (w1, b1, w2, b2, alphas).
    pub fn groups(&self) -> [&[f64]; 5] {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.alphas]
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.groups().concat()
    }
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
struct Trace {
    pre: Vec<f64>,
    hidden: Vec<f64>,
    probs: Vec<f64>,
}

/// Softmax with max-subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&l| (l - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

impl Network {
    /// Glorot-uniform weights, zero biases, every α at 1.
    ///
    /// The same `(spec, seed)` always produces a bitwise-identical network.
    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (d, h, c) = (spec.input_dim, spec.hidden_units, spec.num_classes);
        let mut glorot = |fan_in: usize, fan_out: usize| -> Vec<f64> {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..fan_in * fan_out)
                .map(|_| rng.random_range(-limit..=limit))
                .collect()
        };
        let w1 = glorot(d, h);
        let w2 = glorot(h, c);
        Ok(Network {
            spec,
            w1,
            b1: vec![0.0; h],
            w2,
            b2: vec![0.0; c],
            alphas: vec![1.0; spec.alpha_count()],
        })
    }

    /// All-zero weights and biases, α = 1. Mostly useful in tests.
    pub fn zeros(spec: NetworkSpec) -> Result<Self> {
        spec.validate()?;
        let g = Gradients::zeros(&spec);
        Ok(Network {
            spec,
            w1: g.w1,
            b1: g.b1,
            w2: g.w2,
            b2: g.b2,
            alphas: vec![1.0; spec.alpha_count()],
        })
    }

    /// The α actually applied to hidden unit `unit`.
    #[inline]
    pub fn alpha_for(&self, unit: usize) -> f64 {
        match self.spec.mode {
            AlphaMode::Fixed => 1.0,
            AlphaMode::Shared => self.alphas[0],
            AlphaMode::Individual => self.alphas[unit],
        }
    }

    pub fn param_count(&self) -> usize {
        param_count(&self.spec)
    }

    pub fn groups(&self) -> [&[f64]; 5] {
        [&self.w1, &self.b1, &self.w2, &self.b2, &self.alphas]
    }

    pub fn groups_mut(&mut self) -> [&mut [f64]; 5] {
        [
            &mut self.w1,
            &mut self.b1,
            &mut self.w2,
            &mut self.b2,
            &mut self.alphas,
        ]
    }

    /// All trainable parameters in canonical order (w1, b1, w2, b2, alphas).
    pub fn to_flat(&self) -> Vec<f64> {
        self.groups().concat()
    }

    /// Inverse of [`Network::to_flat`].
    pub fn set_flat(&mut self, flat: &[f64]) -> Result<()> {
        let expected = self.param_count();
        if flat.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: flat.len(),
                context: "flat parameter vector",
            });
        }
        let mut rest = flat;
        for group in self.groups_mut() {
            let (head, tail) = rest.split_at(group.len());
            group.copy_from_slice(head);
            rest = tail;
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.spec.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.spec.input_dim,
                actual: x.len(),
                context: "feature vector",
            });
        }
        Ok(())
    }

    /// Output-layer logits `W2·h + b2`.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let hidden = self.hidden(x).1;
        Ok(self.output_logits(&hidden))
    }

    /// Class probabilities for one feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.logits(x)?))
    }

    /// Predicted class: argmax of [`Network::forward`], lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(x)?))
    }

    fn hidden(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let d = self.spec.input_dim;
        let act = self.spec.activation;
        let pre: Vec<f64> = self
            .w1
            .chunks_exact(d)
            .zip(&self.b1)
            .map(|(row, b)| dot(row, x) + b)
            .collect();
        let hidden = pre
            .iter()
            .enumerate()
            .map(|(i, &z)| act.value(z, self.alpha_for(i)))
            .collect();
        (pre, hidden)
    }

    fn output_logits(&self, hidden: &[f64]) -> Vec<f64> {
        self.w2
            .chunks_exact(self.spec.hidden_units)
            .zip(&self.b2)
            .map(|(row, b)| dot(row, hidden) + b)
            .collect()
    }

    fn trace(&self, x: &[f64]) -> Trace {
        let (pre, hidden) = self.hidden(x);
        let probs = softmax(&self.output_logits(&hidden));
        Trace { pre, hidden, probs }
    }

    fn check_batch(&self, features: &[f64], labels: &[usize]) -> Result<()> {
        if labels.is_empty() {
            return Err(Error::Empty("batch"));
        }
        let expected = labels.len() * self.spec.input_dim;
        if features.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: features.len(),
                context: "batch feature buffer (rows × input_dim)",
            });
        }
        if let Some(&label) = labels.iter().find(|&&y| y >= self.spec.num_classes) {
            return Err(Error::LabelOutOfRange {
                label,
                num_classes: self.spec.num_classes,
            });
        }
        Ok(())
    }

    /// Mean cross-entropy `−ln max(p_y, 1e-12)` over a batch.
    pub fn loss(&self, features: &[f64], labels: &[usize]) -> Result<f64> {
        self.check_batch(features, labels)?;
        let d = self.spec.input_dim;
        let total: f64 = features
            .chunks_exact(d)
            .zip(labels)
            .map(|(x, &y)| -floored(self.trace(x).probs[y]).ln())
            .sum();
        Ok(total / labels.len() as f64)
    }

    /// Batch-mean loss and its exact gradient with respect to every parameter.
    pub fn backward(&self, features: &[f64], labels: &[usize]) -> Result<(f64, Gradients)> {
        self.check_batch(features, labels)?;
        let spec = &self.spec;
        let (d, h) = (spec.input_dim, spec.hidden_units);
        let scale = 1.0 / labels.len() as f64;
        let mut grads = Gradients::zeros(spec);
        let mut loss = 0.0;
        let mut d_hidden = vec![0.0; h];

        for (x, &y) in features.chunks_exact(d).zip(labels) {
            let Trace { pre, hidden, probs } = self.trace(x);
            let p_true = probs[y];
            loss += -floored(p_true).ln();
            if p_true < PROB_FLOOR {
                // Clamped region: the loss is flat in every parameter.
                continue;
            }

            // d(loss)/d(logit_c) = p_c − [c = y]
            d_hidden.iter_mut().for_each(|v| *v = 0.0);
            for (c, &p) in probs.iter().enumerate() {
                let delta = (p - if c == y { 1.0 } else { 0.0 }) * scale;
                grads.b2[c] += delta;
                let row = c * h;
                for j in 0..h {
                    grads.w2[row + j] += delta * hidden[j];
                    d_hidden[j] += delta * self.w2[row + j];
                }
            }

            for j in 0..h {
                let eval = spec.activation.eval(pre[j], self.alpha_for(j));
                let d_pre = d_hidden[j] * eval.d_dz;
                grads.b1[j] += d_pre;
                for (g, &xi) in grads.w1[j * d..(j + 1) * d].iter_mut().zip(x) {
                    *g += d_pre * xi;
                }
                match spec.mode {
                    AlphaMode::Fixed => {}
                    AlphaMode::Shared => grads.alphas[0] += d_hidden[j] * eval.d_dalpha,
                    AlphaMode::Individual => grads.alphas[j] += d_hidden[j] * eval.d_dalpha,
                }
            }
        }
        Ok((loss * scale, grads))
    }
}

// Unlike f64::max, keeps NaN so divergence is still visible in the loss.
#[inline]
fn floored(p: f64) -> f64 {
    if p < PROB_FLOOR {
        PROB_FLOOR
    } else {
        p
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, h: usize, c: usize, act: ActivationKind, mode: AlphaMode) -> NetworkSpec {
        NetworkSpec::new(d, h, c, act, mode).unwrap()
    }

    #[test]
    fn param_count_examples() {
        let s = |m| spec(11, 2, 2, ActivationKind::Elu, m);
        assert_eq!(param_count(&s(AlphaMode::Fixed)), 30);
        assert_eq!(param_count(&s(AlphaMode::Shared)), 31);
        assert_eq!(param_count(&s(AlphaMode::Individual)), 32);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(NetworkSpec::new(0, 2, 2, ActivationKind::Elu, AlphaMode::Fixed).is_err());
        assert!(NetworkSpec::new(3, 0, 2, ActivationKind::Elu, AlphaMode::Fixed).is_err());
        assert!(NetworkSpec::new(3, 2, 1, ActivationKind::Elu, AlphaMode::Fixed).is_err());
    }

    #[test]
    fn init_is_deterministic_and_alphas_start_at_one() {
        let s = spec(4, 2, 3, ActivationKind::Swish, AlphaMode::Individual);
        let a = Network::init(s, 17).unwrap();
        let b = Network::init(s, 17).unwrap();
        assert_eq!(a.to_flat(), b.to_flat());
        assert_eq!(a.alphas, vec![1.0, 1.0]);
        assert!(a.b1.iter().chain(&a.b2).all(|&v| v == 0.0));
        let limit = (6.0f64 / 6.0).sqrt();
        assert!(a.w1.iter().all(|w| w.abs() <= limit));
        assert_ne!(a.to_flat(), Network::init(s, 18).unwrap().to_flat());

        let fixed = Network::init(spec(4, 2, 3, ActivationKind::Elu, AlphaMode::Fixed), 1).unwrap();
        assert!(fixed.alphas.is_empty());
        assert_eq!(fixed.alpha_for(1), 1.0);
    }

    #[test]
    fn zero_network_outputs_uniform() {
        let net = Network::zeros(spec(3, 2, 2, ActivationKind::Elu, AlphaMode::Fixed)).unwrap();
        assert_eq!(net.forward(&[0.3, -1.0, 2.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn softmax_of_ln2_and_zero() {
        let p = softmax(&[std::f64::consts::LN_2, 0.0]);
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_wrong_dimension() {
        let net = Network::zeros(spec(3, 2, 2, ActivationKind::Elu, AlphaMode::Fixed)).unwrap();
        assert!(matches!(
            net.forward(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                actual: 2,
                ..
            })
        ));
    }

    #[test]
    fn loss_examples() {
        let net = Network::zeros(spec(1, 1, 2, ActivationKind::Elu, AlphaMode::Fixed)).unwrap();
        let l = net.loss(&[0.0, 1.0], &[0, 1]).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);

        // Four classes, uniform output: p_true = 0.25.
        let net = Network::zeros(spec(1, 1, 4, ActivationKind::Elu, AlphaMode::Fixed)).unwrap();
        let l = net.loss(&[0.5], &[3]).unwrap();
        assert!((l - 4f64.ln()).abs() < 1e-15);

        // A huge bias on the true class drives the loss to zero.
        let mut net = Network::zeros(spec(1, 1, 2, ActivationKind::Elu, AlphaMode::Fixed)).unwrap();
        net.b2 = vec![50.0, -50.0];
        assert!(net.loss(&[0.1, 0.2], &[0, 0]).unwrap() < 1e-15);

        assert!(matches!(
            net.loss(&[0.1], &[2]),
            Err(Error::LabelOutOfRange { label: 2, .. })
        ));
    }

    #[test]
    fn loss_is_clamped_when_softmax_saturates() {
        let mut net = Network::zeros(spec(1, 1, 2, ActivationKind::Elu, AlphaMode::Fixed)).unwrap();
        net.b2 = vec![-1000.0, 1000.0];
        let l = net.loss(&[0.0], &[0]).unwrap();
        assert!((l + PROB_FLOOR.ln()).abs() < 1e-12);
        let (_, g) = net.backward(&[0.0], &[0]).unwrap();
        assert!(g.to_flat().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn symmetric_saddle_has_zero_output_bias_gradient() {
        let net =
            Network::zeros(spec(2, 2, 2, ActivationKind::Softplus, AlphaMode::Shared)).unwrap();
        let feats = [1.0, -2.0, -1.0, 2.0];
        let (loss, g) = net.backward(&feats, &[0, 1]).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(g.b2, vec![0.0, 0.0]);
    }

    #[test]
    fn fixed_mode_has_no_alpha_gradient() {
        let net = Network::init(spec(3, 2, 2, ActivationKind::Elu, AlphaMode::Fixed), 3).unwrap();
        let (_, g) = net.backward(&[0.1, 0.2, 0.3], &[1]).unwrap();
        assert!(g.alphas.is_empty());
        assert_eq!(g.to_flat().len(), 6 + 2 + 4 + 2);
    }

    #[test]
    fn predict_breaks_ties_low() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.7, 0.2]), 1);
    }

    #[test]
    fn flat_round_trip() {
        let mut net = Network::init(
            spec(3, 4, 3, ActivationKind::Swish, AlphaMode::Individual),
            9,
        )
        .unwrap();
        let flat: Vec<f64> = (0..net.param_count()).map(|i| i as f64 * 0.01).collect();
        net.set_flat(&flat).unwrap();
        assert_eq!(net.to_flat(), flat);
        assert!(net.set_flat(&flat[1..]).is_err());
    }
}
