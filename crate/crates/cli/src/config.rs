//! Experiment configuration: a JSON file merged with command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use pwagg::pa::Mode;

pub const ALGORITHMS: [&str; 7] = ["pa", "mst", "labels", "kdom", "shortcut-det", "shortcut-rand", "baseline"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentConfig {
    /// One of pa, mst, labels, kdom, shortcut-det, shortcut-rand, baseline.
    #[arg(long = "alg")]
    #[serde(alias = "alg")]
    pub algorithm: Option<String>,
    #[arg(long)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Graph file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Partition file for --graph (default: a single part).
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Grid with apex: depth and width; row parts.
    #[arg(long, num_args = 2, value_names = ["D", "W"])]
    pub grid_apex: Option<Vec<usize>>,
    /// Random connected graph with this many nodes.
    #[arg(long)]
    pub random: Option<usize>,
    /// Extra edge probability for --random (default 4/n).
    #[arg(long)]
    pub p: Option<f64>,
    /// Connected parts for --random (default 1).
    #[arg(long)]
    pub parts: Option<usize>,
    /// Random integer weights in 1..=W for --random.
    #[arg(long)]
    pub max_weight: Option<u64>,
    /// Fixed shortcut targets instead of the doubling search.
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long)]
    pub c: Option<usize>,
    /// Aggregation operator for pa and baseline (default sum).
    #[arg(long)]
    pub op: Option<String>,
    /// File of `v value` lines (default: value = node id).
    #[arg(long)]
    pub values: Option<PathBuf>,
    /// Distance parameter for kdom (default ⌈√n⌉).
    #[arg(long)]
    pub k: Option<usize>,
    /// Probability that an edge is in H for labels (default 0.5).
    #[arg(long)]
    pub h_prob: Option<f64>,
    /// Output file (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<Format>,
    /// Directory for result files (shortcut, ledger, edges, labels).
    #[arg(long)]
    pub artifacts: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Fields set in `flags` win.
    pub fn merged(mut self, flags: &ExperimentConfig) -> Self {
        overlay!(
            self, flags, algorithm, mode, seed, graph, partition, grid_apex, random, p, parts, max_weight, b, c, op,
            values, k, h_prob, out, format, artifacts
        );
        self
    }

    pub fn validate(&self) -> Result<()> {
        let sources = [self.graph.is_some(), self.grid_apex.is_some(), self.random.is_some()];
        if sources.iter().filter(|&&x| x).count() != 1 {
            bail!("give exactly one graph source: --graph, --grid-apex or --random");
        }
        if let Some(g) = &self.grid_apex {
            if g.len() != 2 {
                bail!("--grid-apex takes two numbers, depth and width");
            }
        }
        if self.mode == Some(Mode::Rand) && self.seed.is_none() {
            bail!("--seed is required with --mode rand");
        }
        match self.algorithm.as_deref() {
            None => bail!("--alg is required"),
            Some(a) if !ALGORITHMS.contains(&a) => bail!("unknown algorithm `{a}` (expected one of {})", ALGORITHMS.join(", ")),
            _ => Ok(()),
        }
    }
}
