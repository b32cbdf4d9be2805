//! Trainable activation functions for small-data classification.
//!
//! `adaptact` trains one-hidden-layer perceptrons whose hidden activations
//! carry a learnable shape parameter `α` ([`ActivationKind::Elu`],
//! [`ActivationKind::Softplus`], [`ActivationKind::Swish`]). The parameter is
//! either pinned at 1 ([`AlphaMode::Fixed`]), shared by the whole layer
//! ([`AlphaMode::Shared`]) or owned by each unit ([`AlphaMode::Individual`]).
//!
//! Beyond accuracy, models are judged by conformal prediction sets: how
//! often the set contains the true class and how many classes it needs.
//!
//! # Quick start
//!
//! ```
//! use adaptact::{
//!     make_synthetic, split, train, ActivationKind, AlphaMode, NetworkSpec, SplitPlan,
//!     Standardizer, SyntheticKind, TrainConfig,
//! };
//! use adaptact::conformal::calibrate_and_evaluate;
//!
//! # fn main() -> adaptact::Result<()> {
//! let data = make_synthetic(SyntheticKind::Xor2d, 70, 0)?;
//! let (mut tr, mut te) = split(&data, &SplitPlan::default(), 0)?;
//! let scaler = Standardizer::fit(&tr.features, tr.n_features)?;
//! scaler.transform_in_place(&mut tr.features);
//! scaler.transform_in_place(&mut te.features);
//!
//! let spec = NetworkSpec::new(2, 2, 2, ActivationKind::Elu, AlphaMode::Individual)?;
//! let fit = train(spec, &tr.features, &tr.labels, &TrainConfig::default(), 7)?;
//! assert_eq!(fit.loss_history.len(), 100);
//!
//! let sets = calibrate_and_evaluate(
//!     &fit.network, &tr.features, &tr.labels, &te.features, &te.labels, 0.1,
//! )?;
//! assert!((0.0..=1.0).contains(&sets.coverage));
//! # Ok(())
//! # }
//! ```
//!
//! The [`harness`] module wraps this loop into repeated-split experiments,
//! and the `adaptact` binary exposes it on the command line.

pub mod activations;
pub mod conformal;
pub mod data;
mod error;
pub mod harness;
pub mod network;
pub mod optimizer;

pub use activations::{ActivationEval, ActivationKind};
pub use conformal::{ConformalCalibration, PredictionSet};
pub use data::{
    fit_standardizer, load_csv, make_synthetic, split, Dataset, SplitPlan, Standardizer, Subset,
    SyntheticKind,
};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ExperimentReport, SplitResult};
pub use network::{param_count, AlphaMode, Gradients, Network, NetworkSpec};
pub use optimizer::{train, AdamState, TrainConfig, TrainOutcome};

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/activations.md")]
    mod activations {}
    #[doc = include_str!("../../../book/src/network.md")]
    mod network {}
    #[doc = include_str!("../../../book/src/training.md")]
    mod training {}
    #[doc = include_str!("../../../book/src/conformal.md")]
    mod conformal {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
