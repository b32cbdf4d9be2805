use std::path::PathBuf;
use std::process::ExitCode;

use adaptact::harness::{
    alpha_histogram, export_histogram, export_reports, nh_sweep, run_cell, run_grid, DataSource,
    ExportFormat, DEFAULT_HIST_BINS, DEFAULT_NH_VALUES,
};
use adaptact::{ActivationKind, AlphaMode, ExperimentConfig, ExperimentReport, SyntheticKind};
use clap::{ArgGroup, Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "adaptact",
    version,
    about = "Compare fixed, shared and per-unit trainable activations over repeated random splits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one activation × mode cell.
    Run(CommonArgs),
    /// Run all 3 activations × 3 modes on shared splits.
    Grid(CommonArgs),
    /// Run every mode of one activation at several hidden-layer widths.
    SweepNh {
        #[command(flatten)]
        common: CommonArgs,
        /// Hidden-layer widths to try.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_NH_VALUES)]
        nh_values: Vec<usize>,
    },
    /// Run an m3 cell and histogram the learned α values.
    AlphaHist {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = DEFAULT_HIST_BINS)]
        bins: usize,
    },
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["data", "synthetic"])))]
struct CommonArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Built-in dataset: xor2d, blobs3 or ring2d.
    #[arg(long)]
    synthetic: Option<SyntheticKind>,
    /// Rows to generate for --synthetic (default depends on the kind).
    #[arg(long, requires = "synthetic")]
    samples: Option<usize>,
    /// Label column of the CSV file.
    #[arg(long, default_value = "label")]
    label: String,
    #[arg(long)]
    activation: Option<ActivationKind>,
    #[arg(long)]
    mode: Option<AlphaMode>,
    /// Hidden units.
    #[arg(long)]
    nh: Option<usize>,
    /// Miscoverage level of the conformal sets.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 20)]
    splits: usize,
    #[arg(long, default_value_t = 0.3)]
    test_frac: f64,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0.05)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Calibrate on this fraction of each training split instead of all of it.
    #[arg(long, value_name = "F")]
    holdout_calibration: Option<f64>,
    /// Skip feature standardization.
    #[arg(long)]
    no_standardize: bool,
    /// Directory for exported results.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: ExportFormat,
}

type CliResult<T> = Result<T, String>;

impl CommonArgs {
    fn config(&self, activation: ActivationKind, mode: AlphaMode) -> ExperimentConfig {
        let source = match (&self.data, self.synthetic) {
            (Some(path), _) => DataSource::Csv {
                path: path.clone(),
                label_column: self.label.clone(),
            },
            (None, Some(kind)) => DataSource::Synthetic {
                kind,
                rows: self.samples.unwrap_or(kind.default_rows()),
            },
            (None, None) => unreachable!("clap enforces a data source"),
        };
        ExperimentConfig {
            hidden_units: self.nh.unwrap_or(2),
            delta: self.delta,
            n_splits: self.splits,
            test_fraction: self.test_frac,
            epochs: self.epochs,
            learning_rate: self.lr,
            seed: self.seed,
            holdout_calibration: self.holdout_calibration,
            standardize: !self.no_standardize,
            ..ExperimentConfig::new(source, activation, mode)
        }
    }

    fn activation(&self, command: &str) -> CliResult<ActivationKind> {
        self.activation
            .ok_or_else(|| format!("{command} needs --activation"))
    }

    fn reject(&self, command: &str, flag: &str, given: bool) -> CliResult<()> {
        if given {
            Err(format!("{command} does not take --{flag}"))
        } else {
            Ok(())
        }
    }

    fn export(&self, reports: &[ExperimentReport]) -> CliResult<()> {
        if let Some(dir) = &self.out {
            for path in export_reports(reports, dir, self.format).map_err(|e| e.to_string())? {
                println!("wrote {}", path.display());
            }
        }
        Ok(())
    }
}

fn print_header() {
    println!(
        "{:<9} {:<4} {:>3}  {:>22}  {:>8}  {:>8}  {:>8}",
        "act", "mode", "nh", "accuracy med [min,max]", "coverage", "set size", "failures"
    );
}

fn print_report(r: &ExperimentReport) {
    let c = &r.config;
    let (act, mode) = (c.activation.to_string(), c.mode.to_string());
    match &r.summary {
        Some(s) => println!(
            "{:<9} {:<4} {:>3}  {:>6.3} [{:.3}, {:.3}]  {:>8.3}  {:>8.3}  {:>8}",
            act,
            mode,
            c.hidden_units,
            s.accuracy.median,
            s.accuracy.min,
            s.accuracy.max,
            s.coverage.median,
            s.avg_set_size.median,
            r.failures.len()
        ),
        None => println!(
            "{:<9} {:<4} {:>3}  {:>22}  {:>8}  {:>8}  {:>8}",
            act,
            mode,
            c.hidden_units,
            "-",
            "-",
            "-",
            r.failures.len()
        ),
    }
    for f in &r.failures {
        eprintln!("  split {} failed: {}", f.split_index, f.message);
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    let lib = |e: adaptact::Error| e.to_string();
    match cli.command {
        Command::Run(args) => {
            let activation = args.activation("run")?;
            let mode = args.mode.ok_or("run needs --mode")?;
            let report = run_cell(&args.config(activation, mode)).map_err(lib)?;
            print_header();
            print_report(&report);
            args.export(std::slice::from_ref(&report))?;
        }
        Command::Grid(args) => {
            args.reject("grid", "activation", args.activation.is_some())?;
            args.reject("grid", "mode", args.mode.is_some())?;
            let reports =
                run_grid(&args.config(ActivationKind::Elu, AlphaMode::Fixed)).map_err(lib)?;
            print_header();
            reports.iter().for_each(print_report);
            args.export(&reports)?;
        }
        Command::SweepNh { common, nh_values } => {
            common.reject("sweep-nh", "mode", common.mode.is_some())?;
            common.reject("sweep-nh", "nh (use --nh-values)", common.nh.is_some())?;
            let activation = common.activation("sweep-nh")?;
            let reports =
                nh_sweep(&common.config(activation, AlphaMode::Fixed), &nh_values).map_err(lib)?;
            print_header();
            reports.iter().for_each(print_report);
            if let Some(dir) = &common.out {
                match common.format {
                    ExportFormat::Json => common.export(&reports)?,
                    ExportFormat::Csv => {
                        for (nh, chunk) in
                            nh_values.iter().zip(reports.chunks(AlphaMode::ALL.len()))
                        {
                            let sub = dir.join(format!("nh{nh}"));
                            for path in
                                export_reports(chunk, &sub, ExportFormat::Csv).map_err(lib)?
                            {
                                println!("wrote {}", path.display());
                            }
                        }
                    }
                }
            }
        }
        Command::AlphaHist { common, bins } => {
            if let Some(mode) = common.mode {
                if mode != AlphaMode::Individual {
                    return Err(format!("alpha-hist needs an m3 run, got --mode {mode}"));
                }
            }
            let activation = common.activation("alpha-hist")?;
            let report =
                run_cell(&common.config(activation, AlphaMode::Individual)).map_err(lib)?;
            let hist = alpha_histogram(&report, bins).map_err(lib)?;
            print_header();
            print_report(&report);
            println!("\n{} learned alphas", hist.values.len());
            println!("{:>10} {:>10} {:>6}", "bin_lo", "bin_hi", "count");
            for (i, count) in hist.counts.iter().enumerate() {
                println!(
                    "{:>10.4} {:>10.4} {:>6}",
                    hist.edges[i],
                    hist.edges[i + 1],
                    count
                );
            }
            common.export(std::slice::from_ref(&report))?;
            if let Some(dir) = &common.out {
                let path = export_histogram(&hist, dir).map_err(lib)?;
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
