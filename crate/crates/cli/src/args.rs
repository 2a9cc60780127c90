//! Command-line surface and the serializable run configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Seed used when neither `--seed` nor `LIFT_SPECTRA_SEED` is given.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "lift-spectra", version, about = "Spectra of random lifts of regular graphs")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SuiteKind {
    Quick,
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
pub struct Common {
    /// Output directory; nothing is written outside it.
    #[arg(long, global = true, default_value = "lift-spectra-out")]
    pub out: PathBuf,

    /// Worker threads (defaults to the available cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[arg(long, global = true, env = "LIFT_SPECTRA_SEED")]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,

    /// Lifts up to this order are solved densely.
    #[arg(long, global = true, default_value_t = 256)]
    pub dense_cap: usize,

    #[arg(long, global = true, default_value_t = 1e-8)]
    pub lanczos_tol: f64,

    #[arg(long, global = true, default_value_t = 4)]
    pub lanczos_k: usize,

    /// Comma-separated quantile levels reported for batches.
    #[arg(long, global = true, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
    pub quantiles: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Subcommand)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// List the built-in base graphs.
    Catalog,
    /// Spectrum of a base graph (n = 1) or of one random lift.
    Spectrum {
        /// Catalog name such as `petersen` or `cycle(6)`, or an edge-list file.
        #[arg(long)]
        base: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    /// Build one random lift and save its permutations.
    Lift {
        #[arg(long)]
        base: String,
        #[arg(long)]
        n: usize,
    },
    /// Sample λ of many random lifts and report the empirical c.d.f.
    Ecdf {
        #[arg(long)]
        base: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Run the inequality checkers on a base graph and its lifts.
    Verify {
        #[arg(long)]
        base: String,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "quick")]
        suite: SuiteKind,
    },
    /// Exact edge isoperimetric constant and the spectral sandwich.
    Cheeger {
        #[arg(long)]
        base: String,
    },
    /// Petersen lifts at n = 50, 100, 200: interquartile boxes.
    ReproduceFig1 {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// K4, Petersen and dodecahedral lifts at total size 2000: c.d.f. overlay.
    ReproduceFig2 {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Re-run the command recorded in a manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
    },
}

/// Everything needed to re-run a command; written as `manifest.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub tool_version: String,
    pub command: Command,
    pub common: Common,
}

impl Common {
    pub fn resolved_seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn resolved_jobs(&self) -> usize {
        self.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())).max(1)
    }
}
