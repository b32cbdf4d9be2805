#![allow(dead_code)]

use adaptact::{ActivationKind, AlphaMode, Network, NetworkSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Central difference of `f` at `x`.
pub fn central(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Relative agreement with an absolute floor for values near zero.
pub fn close(analytic: f64, numeric: f64, rel: f64, abs: f64) -> bool {
    let diff = (analytic - numeric).abs();
    diff <= abs || diff <= rel * analytic.abs().max(numeric.abs())
}

pub struct Problem {
    pub net: Network,
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
}

/// Random network and batch with nonzero α, biases and weights.
///
/// ELU problems are redrawn until every pre-activation sits at least
/// `1e-3` from the kink, so finite differences never straddle it.
pub fn random_problem(
    rng: &mut ChaCha8Rng,
    activation: ActivationKind,
    mode: AlphaMode,
    max_hidden: usize,
    max_dim: usize,
    max_classes: usize,
    max_batch: usize,
) -> Problem {
    loop {
        let d = rng.random_range(1..=max_dim);
        let h = rng.random_range(1..=max_hidden);
        let c = rng.random_range(2..=max_classes);
        let b = rng.random_range(1..=max_batch);
        let spec = NetworkSpec::new(d, h, c, activation, mode).unwrap();
        let mut net = Network::init(spec, rng.random()).unwrap();
        for v in net.b1.iter_mut().chain(net.b2.iter_mut()) {
            *v = rng.random_range(-0.5..0.5);
        }
        for a in &mut net.alphas {
            let mag = rng.random_range(0.2..2.0);
            *a = if rng.random_bool(0.5) { mag } else { -mag };
        }
        let features: Vec<f64> = (0..b * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let labels: Vec<usize> = (0..b).map(|_| rng.random_range(0..c)).collect();

        if activation == ActivationKind::Elu && near_kink(&net, &features) {
            continue;
        }
        return Problem {
            net,
            features,
            labels,
        };
    }
}

fn near_kink(net: &Network, features: &[f64]) -> bool {
    let (d, h) = (net.spec.input_dim, net.spec.hidden_units);
    features.chunks_exact(d).any(|x| {
        (0..h).any(|j| {
            let z: f64 = net.b1[j] + (0..d).map(|i| net.w1[j * d + i] * x[i]).sum::<f64>();
            z.abs() < 1e-3
        })
    })
}

/// Worst (analytic, numeric) pair over every parameter, ranked by how far
/// it misses the tolerance. `None` when every parameter passes.
pub fn network_gradient_mismatch(
    p: &Problem,
    h: f64,
    rel: f64,
    abs: f64,
) -> Option<(usize, f64, f64)> {
    let (_, grads) = p.net.backward(&p.features, &p.labels).unwrap();
    let analytic = grads.to_flat();
    let base = p.net.to_flat();
    let mut probe = p.net.clone();
    for (k, &a) in analytic.iter().enumerate() {
        let numeric = central(
            |v| {
                let mut flat = base.clone();
                flat[k] = v;
                probe.set_flat(&flat).unwrap();
                probe.loss(&p.features, &p.labels).unwrap()
            },
            base[k],
            h,
        );
        if !close(a, numeric, rel, abs) {
            return Some((k, a, numeric));
        }
    }
    None
}
