//! Small deterministic 2-D benchmark problems.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::{Error, Result};

pub const MIN_SYNTHETIC_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SyntheticKind {
    /// Two classes on opposite diagonal quadrants, Gaussian jitter.
    Xor2d,
    /// Three overlapping isotropic Gaussian blobs.
    Blobs3,
    /// A disc of one class inside an annulus of the other.
    Ring2d,
}

impl SyntheticKind {
    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::Xor2d => "xor2d",
            SyntheticKind::Blobs3 => "blobs3",
            SyntheticKind::Ring2d => "ring2d",
        }
    }

    pub fn num_classes(self) -> usize {
        match self {
            SyntheticKind::Blobs3 => 3,
            SyntheticKind::Xor2d | SyntheticKind::Ring2d => 2,
        }
    }

    /// Row count used when the caller does not pick one; sized like the
    /// small experimental tables these stand in for.
    pub fn default_rows(self) -> usize {
        match self {
            SyntheticKind::Xor2d => 70,
            SyntheticKind::Blobs3 => 104,
            SyntheticKind::Ring2d => 63,
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xor2d" => Ok(SyntheticKind::Xor2d),
            "blobs3" => Ok(SyntheticKind::Blobs3),
            "ring2d" => Ok(SyntheticKind::Ring2d),
            _ => Err(Error::UnknownSynthetic(s.to_owned())),
        }
    }
}

const XOR_NOISE: f64 = 0.45;
const BLOB_RADIUS: f64 = 1.5;
const BLOB_NOISE: f64 = 1.0;
const RING_NOISE: f64 = 0.15;

/// `n` rows of `kind`; row `i` has class `i mod C`, so classes differ in size by at most one.
pub fn make_synthetic(kind: SyntheticKind, n: usize, seed: u64) -> Result<Dataset> {
    if n < MIN_SYNTHETIC_ROWS {
        return Err(Error::InvalidArgument(format!(
            "synthetic datasets need at least {MIN_SYNTHETIC_ROWS} rows, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = kind.num_classes();
    let mut features = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);

    for i in 0..n {
        let class = i % classes;
        let (x, y) = match kind {
            SyntheticKind::Xor2d => {
                let noise = Normal::new(0.0, XOR_NOISE).expect("valid sigma");
                // Class 0 sits on (+,+)/(−,−), class 1 on (+,−)/(−,+).
                let sx: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let sy = if class == 0 { sx } else { -sx };
                (sx + noise.sample(&mut rng), sy + noise.sample(&mut rng))
            }
            SyntheticKind::Blobs3 => {
                let noise = Normal::new(0.0, BLOB_NOISE).expect("valid sigma");
                let angle = TAU * class as f64 / 3.0;
                (
                    BLOB_RADIUS * angle.cos() + noise.sample(&mut rng),
                    BLOB_RADIUS * angle.sin() + noise.sample(&mut rng),
                )
            }
            SyntheticKind::Ring2d => {
                let noise = Normal::new(0.0, RING_NOISE).expect("valid sigma");
                let radius = if class == 0 {
                    rng.random_range(0.0..1.0)
                } else {
                    rng.random_range(1.5..2.5)
                };
                let angle = rng.random_range(0.0..TAU);
                (
                    radius * angle.cos() + noise.sample(&mut rng),
                    radius * angle.sin() + noise.sample(&mut rng),
                )
            }
        };
        features.push(x);
        features.push(y);
        labels.push(class);
    }

    Dataset::new(
        features,
        labels,
        vec!["x0".into(), "x1".into()],
        (0..classes).map(|c| format!("c{c}")).collect(),
    )
}
