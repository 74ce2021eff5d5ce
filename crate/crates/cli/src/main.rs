/*
Copyright 2026 The spikecs Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/


//! `spikecs` command-line runner.
//!
//! Exit codes: 0 success, 1 configuration error, 2 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spikecs::experiment::{
    load_or_synthesize, run_classification, run_cosparsity, run_sweep, run_training, ExperimentConfig,
};
use spikecs::signal::{load_dataset, save_dataset, DatasetFormat};
use spikecs::Error;

macro_rules! config_flags {
    ($($key:ident),* $(,)?) => {
        /// Config keys; each overrides the value from `--config`.
        #[derive(Args, Debug, Default, Clone)]
        #[command(next_help_heading = "Config overrides")]
        struct ConfigFlags {
            $(
                #[arg(long, alias = stringify!($key), value_name = "VALUE")]
                $key: Option<String>,
            )*
        }

        impl ConfigFlags {
            #[cfg(test)]
            const KEYS: &'static [&'static str] = &[$(stringify!($key)),*];

            fn pairs(&self) -> Vec<(String, String)> {
                let mut out = Vec::new();
                $(
                    if let Some(v) = &self.$key {
                        out.push((stringify!($key).to_string(), v.clone()));
                    }
                )*
                out
            }
        }
    };
}

config_flags!(
    dataset,
    dataset_format,
    units,
    frames_per_unit,
    n,
    noise_sigma,
    jitter,
    amplitude_spread,
    pre_peak,
    orders,
    methods,
    measurements,
    trials,
    max_spikes,
    master_seed,
    measurement_noise,
    lambda,
    lambda_scale,
    noise_sigma_hint,
    penalty,
    adaptive_penalty,
    relaxation,
    abs_tol,
    rel_tol,
    max_iter,
    training_frames,
    training_orders,
    model,
    clip_ratio,
    normalize_weights,
    rtf_rows,
    good_threshold,
    classify_measurements,
    features,
    feature_kind,
    kmeans_restarts,
    cosparsity_tol,
    histogram_order,
    curve_orders,
    output_dir,
    threads,
);

#[derive(Args, Debug, Clone)]
struct Common {
    /// Flat TOML config file.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: ConfigFlags,
}

impl Common {
    fn resolve(&self) -> spikecs::Result<ExperimentConfig> {
        ExperimentConfig::load(self.config.as_deref(), &self.flags.pairs())
    }
}

#[derive(Parser, Debug)]
#[command(name = "spikecs", version, about = "Compressed sensing of neural spike frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the configured synthetic dataset.
    Synth {
        #[command(flatten)]
        common: Common,
        /// File name inside the output directory.
        #[arg(long, default_value = "synth.csv")]
        file: String,
        /// `csv` or `raw-binary`; inferred from the file name when omitted.
        #[arg(long)]
        format: Option<String>,
    },
    /// Fit the per-order variance law on the training split.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruction quality versus number of measurements.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Cluster reconstructed spikes and score against ground truth.
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Co-sparsity curve across orders and histogram at one order.
    #[command(name = "co-sparsity")]
    CoSparsity {
        #[command(flatten)]
        common: Common,
    },
    /// Validate a converted spike file and print its summary as JSON.
    #[command(name = "convert-check")]
    ConvertCheck {
        path: PathBuf,
        /// `csv` or `raw-binary`; inferred from the extension when omitted.
        #[arg(long)]
        format: Option<String>,
        /// Required frame length.
        #[arg(long, default_value_t = 128)]
        n: usize,
        /// Required number of distinct labels.
        #[arg(long)]
        labels: Option<usize>,
    },
}

fn format_for(path: &Path, explicit: Option<&str>) -> spikecs::Result<DatasetFormat> {
    match explicit {
        Some(f) => f.parse().map_err(|e: Error| Error::Config(e.to_string())),
        None => Ok(DatasetFormat::from_path(path)),
    }
}

fn synth(common: &Common, file: &str, format: Option<&str>) -> spikecs::Result<()> {
    let mut config = common.resolve()?;
    config.dataset = None;
    let path = config.output_dir.join(file);
    let format = format_for(&path, format)?;
    let ds = load_or_synthesize(&config)?;
    std::fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    save_dataset(&ds, &path, format)?;
    println!("wrote {} frames of length {} to {}", ds.len(), ds.frame_length(), path.display());
    Ok(())
}

fn convert_check(path: &Path, format: Option<&str>, n: usize, labels: Option<usize>) -> spikecs::Result<()> {
    let format = format_for(path, format)?;
    let ds = load_dataset(path, format)?;
    if ds.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    if ds.frame_length() != n {
        return Err(Error::DimensionMismatch {
            what: "frame length",
            expected: n,
            got: ds.frame_length(),
        });
    }
    let units = ds.units();
    if let Some(want) = labels {
        if units.len() != want {
            return Err(Error::Format(format!("expected {want} distinct labels, found {}", units.len())));
        }
    }
    let histogram: Vec<(u32, usize)> = units
        .iter()
        .map(|&u| (u, ds.frames.iter().filter(|f| f.label == Some(u)).count()))
        .collect();
    let summary = serde_json::json!({
        "path": path.display().to_string(),
        "frames": ds.len(),
        "frame_length": ds.frame_length(),
        "labeled": ds.is_labeled(),
        "labels": histogram.iter().map(|(u, c)| serde_json::json!({"label": u, "count": c})).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
    Ok(())
}

fn run(cli: Cli) -> spikecs::Result<()> {
    match cli.command {
        Command::Synth { common, file, format } => synth(&common, &file, format.as_deref()),
        Command::Train { common } => {
            let run = run_training(&common.resolve()?)?;
            let m = &run.model;
            println!("a={} b={} c={} residual={:e}", m.a, m.b, m.c, m.residual);
            for (f, s) in &m.per_order_sigma {
                println!("  order {f}: sigma {s:e}");
            }
            Ok(())
        }
        Command::Sweep { common } => {
            let run = run_sweep(&common.resolve()?)?;
            for (label, rows) in &run.methods {
                println!("{label}");
                println!("  {:>4} {:>10} {:>8}", "M", "mean_prd", "good%");
                for r in rows {
                    println!("  {:>4} {:>10.4} {:>8.2}", r.m, r.mean_prd, r.good_probability);
                }
            }
            Ok(())
        }
        Command::Classify { common } => {
            let run = run_classification(&common.resolve()?)?;
            for r in &run.results {
                println!("{:<12} accuracy {:>7.2}%  mean PRD {:>8.4}", r.method, r.report.accuracy, r.mean_prd);
            }
            Ok(())
        }
        Command::CoSparsity { common } => {
            let run = run_cosparsity(&common.resolve()?)?;
            for (f, k) in &run.curve {
                println!("order {f:>4}: mean co-sparsity {k:.2}");
            }
            Ok(())
        }
        Command::ConvertCheck { path, format, n, labels } => convert_check(&path, format.as_deref(), n, labels),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
