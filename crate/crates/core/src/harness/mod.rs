//! Repeated-split experiments comparing α regimes.
//!
//! A *cell* is one (activation, mode) pair run over `n_splits` random
//! train/test partitions. For each split the harness standardizes features
//! on the training rows, trains with full-batch Adam, measures test accuracy,
//! then calibrates conformal sets (on the training rows unless a holdout is
//! requested) and measures coverage and mean set size on the test rows.
//!
//! All randomness is derived from the master seed and the split index, so
//! every cell of a grid sees the same partitions and the same initial
//! weights, and parallel execution reproduces serial execution exactly.

mod export;
mod summary;

pub use export::{export_histogram, export_reports, ExportFormat};
pub use summary::{quantile_sorted, Summary};

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activations::ActivationKind;
use crate::conformal::{calibrate_and_evaluate, DEFAULT_DELTA};
use crate::data::{
    derive_seed, load_csv, make_synthetic, Dataset, SplitPlan, Standardizer, Subset, SyntheticKind,
};
use crate::network::{AlphaMode, Network, NetworkSpec};
use crate::optimizer::{train, TrainConfig, DEFAULT_EPOCHS, DEFAULT_LEARNING_RATE};
use crate::{Error, Result};

const INIT_STREAM: u64 = 2;
const CALIBRATION_STREAM: u64 = 3;

/// Hidden-layer widths swept by [`nh_sweep`] by default.
pub const DEFAULT_NH_VALUES: [usize; 4] = [2, 4, 6, 8];
pub const DEFAULT_HIST_BINS: usize = 20;

/// Where a cell's rows come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum DataSource {
    Csv { path: PathBuf, label_column: String },
    Synthetic { kind: SyntheticKind, rows: usize },
}

impl DataSource {
    pub fn synthetic(kind: SyntheticKind) -> Self {
        DataSource::Synthetic {
            kind,
            rows: kind.default_rows(),
        }
    }

    /// Synthetic sources are generated from `seed`; CSV sources ignore it.
    pub fn load(&self, seed: u64) -> Result<Dataset> {
        match self {
            DataSource::Csv { path, label_column } => load_csv(path, label_column),
            DataSource::Synthetic { kind, rows } => make_synthetic(*kind, *rows, seed),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            DataSource::Csv { path, .. } => path.display().to_string(),
            DataSource::Synthetic { kind, rows } => format!("{kind} (n = {rows})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: DataSource,
    pub activation: ActivationKind,
    pub mode: AlphaMode,
    pub hidden_units: usize,
    pub delta: f64,
    pub n_splits: usize,
    pub test_fraction: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Fraction of each training split set aside for conformal calibration.
    /// `None` calibrates on the full training split.
    pub holdout_calibration: Option<f64>,
    pub standardize: bool,
}

impl ExperimentConfig {
    /// 20 splits, 30 % test, two hidden units, 100 epochs of Adam at 0.05, δ = 0.1.
    pub fn new(source: DataSource, activation: ActivationKind, mode: AlphaMode) -> Self {
        ExperimentConfig {
            source,
            activation,
            mode,
            hidden_units: 2,
            delta: DEFAULT_DELTA,
            n_splits: 20,
            test_fraction: 0.3,
            epochs: DEFAULT_EPOCHS,
            learning_rate: DEFAULT_LEARNING_RATE,
            seed: 0,
            holdout_calibration: None,
            standardize: true,
        }
    }

    pub fn split_plan(&self) -> SplitPlan {
        SplitPlan {
            seed: self.seed,
            test_fraction: self.test_fraction,
            n_splits: self.n_splits,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            learning_rate: self.learning_rate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.split_plan().validate()?;
        if self.hidden_units == 0 {
            return Err(Error::InvalidArgument(
                "hidden units must be positive".into(),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "delta must lie in (0, 1), got {}",
                self.delta
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if let Some(f) = self.holdout_calibration {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "holdout calibration fraction must lie in (0, 1), got {f}"
                )));
            }
        }
        Ok(())
    }

    fn with_cell(&self, activation: ActivationKind, mode: AlphaMode) -> Self {
        ExperimentConfig {
            activation,
            mode,
            ..self.clone()
        }
    }
}

/// Metrics of one successful split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub split_index: usize,
    pub accuracy: f64,
    pub coverage: f64,
    pub avg_set_size: f64,
    pub q_hat: f64,
    pub learned_alphas: Vec<f64>,
    pub final_train_loss: f64,
}

/// A split whose training or evaluation failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitFailure {
    pub split_index: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub source: String,
    pub rows: usize,
    pub features: usize,
    pub classes: usize,
}

impl DatasetInfo {
    fn of(config: &ExperimentConfig, ds: &Dataset) -> Self {
        DatasetInfo {
            source: config.source.describe(),
            rows: ds.len(),
            features: ds.n_features(),
            classes: ds.num_classes(),
        }
    }
}

/// Per-metric five-number summaries over the successful splits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummaries {
    pub accuracy: Summary,
    pub coverage: Summary,
    pub avg_set_size: Summary,
    pub final_train_loss: Summary,
}

impl MetricSummaries {
    pub fn of(splits: &[SplitResult]) -> Option<Self> {
        let col = |f: fn(&SplitResult) -> f64| splits.iter().map(f).collect::<Vec<_>>();
        Some(MetricSummaries {
            accuracy: Summary::of(&col(|s| s.accuracy))?,
            coverage: Summary::of(&col(|s| s.coverage))?,
            avg_set_size: Summary::of(&col(|s| s.avg_set_size))?,
            final_train_loss: Summary::of(&col(|s| s.final_train_loss))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub dataset: DatasetInfo,
    pub splits: Vec<SplitResult>,
    pub failures: Vec<SplitFailure>,
    /// `false` when any split failed.
    pub complete: bool,
    pub summary: Option<MetricSummaries>,
}

impl ExperimentReport {
    /// Every learned α across splits, in split then unit order.
    pub fn pooled_alphas(&self) -> Vec<f64> {
        self.splits
            .iter()
            .flat_map(|s| s.learned_alphas.iter().copied())
            .collect()
    }

    pub fn metric(&self, f: fn(&SplitResult) -> f64) -> Vec<f64> {
        self.splits.iter().map(f).collect()
    }
}

/// Whether splits run on the rayon pool or one after another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Loads the configured data and runs one cell.
pub fn run_cell(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let ds = config.source.load(config.seed)?;
    run_cell_on(&ds, config, Execution::Parallel)
}

/// Runs one cell on an already loaded dataset.
pub fn run_cell_on(
    ds: &Dataset,
    config: &ExperimentConfig,
    execution: Execution,
) -> Result<ExperimentReport> {
    config.validate()?;
    let plan = config.split_plan();
    // Partition problems are configuration errors shared by every split.
    for s in 0..config.n_splits {
        plan.indices(ds.len(), s)?;
    }

    let outcomes: Vec<Result<SplitResult>> = match execution {
        Execution::Serial => (0..config.n_splits)
            .map(|s| run_split(ds, config, s))
            .collect(),
        Execution::Parallel => (0..config.n_splits)
            .into_par_iter()
            .map(|s| run_split(ds, config, s))
            .collect(),
    };

    let mut splits = Vec::new();
    let mut failures = Vec::new();
    for (split_index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => splits.push(r),
            Err(e) => failures.push(SplitFailure {
                split_index,
                message: e.to_string(),
            }),
        }
    }
    Ok(ExperimentReport {
        config: config.clone(),
        dataset: DatasetInfo::of(config, ds),
        summary: MetricSummaries::of(&splits),
        complete: failures.is_empty(),
        splits,
        failures,
    })
}

/// Train, calibration and test rows for one split, standardized if requested.
#[derive(Debug, Clone)]
pub struct PreparedSplit {
    pub train: Subset,
    /// `None` means calibrate on `train`.
    pub calibration: Option<Subset>,
    pub test: Subset,
}

/// Partitions (and optionally standardizes) split `split_index`.
pub fn prepare_split(
    ds: &Dataset,
    config: &ExperimentConfig,
    split_index: usize,
) -> Result<PreparedSplit> {
    let idx = config.split_plan().indices(ds.len(), split_index)?;
    let (train_idx, cal_idx) = match config.holdout_calibration {
        None => (idx.train, None),
        Some(fraction) => {
            let mut pool = idx.train;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.seed,
                split_index as u64,
                CALIBRATION_STREAM,
            ));
            pool.shuffle(&mut rng);
            let n_cal = (fraction * pool.len() as f64).round() as usize;
            if n_cal == 0 || n_cal >= pool.len() {
                return Err(Error::InvalidArgument(format!(
                    "holdout fraction {fraction} of {} training rows leaves an empty set",
                    pool.len()
                )));
            }
            let mut cal = pool[..n_cal].to_vec();
            let mut train = pool[n_cal..].to_vec();
            cal.sort_unstable();
            train.sort_unstable();
            (train, Some(cal))
        }
    };

    let mut train = ds.subset(&train_idx);
    let mut calibration = cal_idx.map(|c| ds.subset(&c));
    let mut test = ds.subset(&idx.test);
    if config.standardize {
        let scaler = Standardizer::fit(&train.features, train.n_features)?;
        scaler.transform_in_place(&mut train.features);
        scaler.transform_in_place(&mut test.features);
        if let Some(cal) = calibration.as_mut() {
            scaler.transform_in_place(&mut cal.features);
        }
    }
    Ok(PreparedSplit {
        train,
        calibration,
        test,
    })
}

/// Initialization seed for split `split_index`; shared by every cell.
pub fn init_seed(master: u64, split_index: usize) -> u64 {
    derive_seed(master, split_index as u64, INIT_STREAM)
}

/// Fraction of rows whose argmax prediction matches the label.
pub fn accuracy(net: &Network, rows: &Subset) -> Result<f64> {
    if rows.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let mut correct = 0usize;
    for (x, &y) in rows
        .features
        .chunks_exact(rows.n_features)
        .zip(&rows.labels)
    {
        if net.predict(x)? == y {
            correct += 1;
        }
    }
    Ok(correct as f64 / rows.len() as f64)
}

fn run_split(ds: &Dataset, config: &ExperimentConfig, split_index: usize) -> Result<SplitResult> {
    let prepared = prepare_split(ds, config, split_index)?;
    let spec = NetworkSpec::new(
        ds.n_features(),
        config.hidden_units,
        ds.num_classes(),
        config.activation,
        config.mode,
    )?;
    let train_rows = &prepared.train;
    let outcome = train(
        spec,
        &train_rows.features,
        &train_rows.labels,
        &config.train_config(),
        init_seed(config.seed, split_index),
    )?;
    let net = outcome.network;
    let final_train_loss = net.loss(&train_rows.features, &train_rows.labels)?;
    if !final_train_loss.is_finite() {
        return Err(Error::Diverged {
            epoch: config.epochs,
            loss: final_train_loss,
        });
    }

    let cal = prepared.calibration.as_ref().unwrap_or(train_rows);
    let conformal = calibrate_and_evaluate(
        &net,
        &cal.features,
        &cal.labels,
        &prepared.test.features,
        &prepared.test.labels,
        config.delta,
    )?;

    Ok(SplitResult {
        split_index,
        accuracy: accuracy(&net, &prepared.test)?,
        coverage: conformal.coverage,
        avg_set_size: conformal.avg_set_size,
        q_hat: conformal.q_hat,
        learned_alphas: net.alphas.clone(),
        final_train_loss,
    })
}

/// Every activation × mode cell on one dataset, activation-major order.
///
/// All cells share the dataset and split plan, so comparisons are paired.
pub fn run_grid(base: &ExperimentConfig) -> Result<Vec<ExperimentReport>> {
    let ds = base.source.load(base.seed)?;
    run_grid_on(&ds, base)
}

pub fn run_grid_on(ds: &Dataset, base: &ExperimentConfig) -> Result<Vec<ExperimentReport>> {
    let cells: Vec<ExperimentConfig> = ActivationKind::ALL
        .iter()
        .flat_map(|&a| AlphaMode::ALL.iter().map(move |&m| base.with_cell(a, m)))
        .collect();
    cells
        .par_iter()
        .map(|cfg| run_cell_on(ds, cfg, Execution::Parallel))
        .collect()
}

/// Runs every mode of `base.activation` at each hidden-layer width.
///
/// Reports come out width-major: `values[0]` × (M1, M2, M3), then `values[1]` …
pub fn nh_sweep(base: &ExperimentConfig, values: &[usize]) -> Result<Vec<ExperimentReport>> {
    if values.is_empty() {
        return Err(Error::Empty("hidden unit values"));
    }
    let ds = base.source.load(base.seed)?;
    let cells: Vec<ExperimentConfig> = values
        .iter()
        .flat_map(|&nh| {
            AlphaMode::ALL.iter().map(move |&m| ExperimentConfig {
                hidden_units: nh,
                ..base.with_cell(base.activation, m)
            })
        })
        .collect();
    cells
        .par_iter()
        .map(|cfg| run_cell_on(&ds, cfg, Execution::Parallel))
        .collect()
}

/// Fixed-width histogram of the α values learned by an M3 cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaHistogram {
    pub activation: ActivationKind,
    /// `counts.len() + 1` ascending bin edges.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub values: Vec<f64>,
}

/// Pools the learned αs of an M3 report into `bins` equal-width bins over
/// their observed range. The last bin is closed on the right.
pub fn alpha_histogram(report: &ExperimentReport, bins: usize) -> Result<AlphaHistogram> {
    if report.config.mode != AlphaMode::Individual {
        return Err(Error::InvalidArgument(format!(
            "alpha histograms need an m3 report, got {}",
            report.config.mode
        )));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("bin count must be positive".into()));
    }
    let values = report.pooled_alphas();
    if values.is_empty() {
        return Err(Error::Empty("learned alphas"));
    }
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins)
        .map(|i| if i == bins { hi } else { lo + width * i as f64 })
        .collect();
    let mut counts = vec![0usize; bins];
    for &v in &values {
        let b = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[b] += 1;
    }
    Ok(AlphaHistogram {
        activation: report.config.activation,
        edges,
        counts,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(mode: AlphaMode) -> ExperimentConfig {
        ExperimentConfig {
            n_splits: 3,
            epochs: 10,
            ..ExperimentConfig::new(
                DataSource::synthetic(SyntheticKind::Ring2d),
                ActivationKind::Softplus,
                mode,
            )
        }
    }

    #[test]
    fn defaults_follow_protocol() {
        let c = ExperimentConfig::new(
            DataSource::synthetic(SyntheticKind::Xor2d),
            ActivationKind::Elu,
            AlphaMode::Individual,
        );
        assert_eq!(c.hidden_units, 2);
        assert_eq!(c.delta, 0.1);
        assert_eq!(c.n_splits, 20);
        assert_eq!(c.test_fraction, 0.3);
        assert_eq!(c.epochs, 100);
        assert_eq!(c.learning_rate, 0.05);
        assert_eq!(c.holdout_calibration, None);
        assert!(c.standardize);
    }

    #[test]
    fn m1_cell_learns_no_alphas() {
        let r = run_cell(&quick(AlphaMode::Fixed)).unwrap();
        assert_eq!(r.splits.len(), 3);
        assert!(r.splits.iter().all(|s| s.learned_alphas.is_empty()));
        assert!(r.complete);
    }

    #[test]
    fn alpha_count_matches_mode() {
        let r = run_cell(&quick(AlphaMode::Shared)).unwrap();
        assert!(r.splits.iter().all(|s| s.learned_alphas.len() == 1));
        let r = run_cell(&quick(AlphaMode::Individual)).unwrap();
        assert!(r.splits.iter().all(|s| s.learned_alphas.len() == 2));
    }

    #[test]
    fn holdout_calibration_splits_training_rows() {
        let cfg = ExperimentConfig {
            holdout_calibration: Some(0.4),
            ..quick(AlphaMode::Fixed)
        };
        let ds = cfg.source.load(cfg.seed).unwrap();
        let p = prepare_split(&ds, &cfg, 0).unwrap();
        let cal = p.calibration.unwrap();
        // 63 rows → 19 test, 44 train → 18 calibration + 26 proper training.
        assert_eq!((p.test.len(), cal.len(), p.train.len()), (19, 18, 26));
        assert!(run_cell_on(&ds, &cfg, Execution::Serial).unwrap().complete);
    }

    #[test]
    fn standardization_uses_training_rows_only() {
        let cfg = quick(AlphaMode::Fixed);
        let ds = cfg.source.load(cfg.seed).unwrap();
        let p = prepare_split(&ds, &cfg, 1).unwrap();
        for col in 0..2 {
            let mean: f64 =
                p.train.features.iter().skip(col).step_by(2).sum::<f64>() / p.train.len() as f64;
            assert!(mean.abs() < 1e-10);
        }
    }

    #[test]
    fn diverging_split_is_recorded_not_fatal() {
        let cfg = ExperimentConfig {
            learning_rate: f64::MAX,
            ..quick(AlphaMode::Shared)
        };
        let r = run_cell(&cfg).unwrap();
        assert!(!r.complete);
        assert_eq!(r.splits.len() + r.failures.len(), 3);
        assert!(r.failures.iter().all(|f| !f.message.is_empty()));
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = quick(AlphaMode::Fixed);
        cfg.delta = 1.5;
        assert!(run_cell(&cfg).is_err());
        let mut cfg = quick(AlphaMode::Fixed);
        cfg.holdout_calibration = Some(0.0);
        assert!(run_cell(&cfg).is_err());
    }

    #[test]
    fn histogram_rules() {
        let mut r = run_cell(&quick(AlphaMode::Individual)).unwrap();
        let h = alpha_histogram(&r, DEFAULT_HIST_BINS).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), 6);
        assert_eq!(h.edges.len(), 21);

        for s in &mut r.splits {
            s.learned_alphas = vec![0.75, 0.75];
        }
        let h = alpha_histogram(&r, 20).unwrap();
        assert_eq!(h.counts.iter().filter(|&&c| c > 0).count(), 1);

        let m2 = run_cell(&quick(AlphaMode::Shared)).unwrap();
        assert!(alpha_histogram(&m2, 20).is_err());
    }
}
