//! `pa-sim`: generate instances, run algorithms, sweep parameters.

mod config;
mod runner;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Format};
use pwagg::graph::io::{write_graph, write_partition};
use runner::{csv_rows, load_instance, run, Row};

#[derive(Parser)]
#[command(name = "pa-sim", version, about = "CONGEST simulations of part-wise aggregation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph and partition to a directory.
    Gen {
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Run one experiment.
    Run {
        /// JSON config; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
    /// Run algorithms over a list of grid depths or random sizes, one row per run.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Grid depths; the width equals the depth unless --width is given.
        #[arg(long = "grid-apex-D", value_delimiter = ',')]
        grid_apex_d: Vec<usize>,
        #[arg(long)]
        width: Option<usize>,
        /// Node counts for random graphs.
        #[arg(long = "random-n", value_delimiter = ',')]
        random_n: Vec<usize>,
        #[command(flatten)]
        cfg: ExperimentConfig,
    },
}

fn base_config(path: &Option<PathBuf>, flags: &ExperimentConfig) -> Result<ExperimentConfig> {
    let base = match path {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    Ok(base.merged(flags))
}

fn emit(cfg: &ExperimentConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn gen(cfg: ExperimentConfig) -> Result<bool> {
    let Some(dir) = cfg.out.clone() else { bail!("gen needs --out DIR") };
    if cfg.grid_apex.is_none() && cfg.random.is_none() {
        bail!("gen needs --grid-apex D W or --random N");
    }
    let (g, p) = load_instance(&cfg)?;
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("graph.txt"), write_graph(&g))?;
    fs::write(dir.join("partition.txt"), write_partition(&p))?;
    println!("n={} m={} parts={}", g.n(), g.m(), p.num_parts());
    Ok(true)
}

fn run_one(cfg: ExperimentConfig) -> Result<bool> {
    cfg.validate()?;
    let out = run(&cfg)?;
    if let Some(e) = &out.error {
        eprintln!("error: {e}");
    }
    let text = match cfg.format.unwrap_or_default() {
        Format::Csv => csv_rows(std::slice::from_ref(&out.row))?,
        Format::Json => serde_json::to_string_pretty(&out)? + "\n",
    };
    emit(&cfg, &text)?;
    Ok(out.row.ok)
}

/// `--alg` may list several algorithms separated by commas.
fn sweep(cfg: ExperimentConfig, depths: Vec<usize>, width: Option<usize>, sizes: Vec<usize>) -> Result<bool> {
    let algs: Vec<String> = cfg.algorithm.iter().flat_map(|a| a.split(',')).map(|a| a.trim().to_string()).collect();
    if algs.is_empty() {
        bail!("sweep needs --alg");
    }
    if depths.is_empty() == sizes.is_empty() {
        bail!("sweep needs exactly one of --grid-apex-D or --random-n");
    }
    let mut rows: Vec<Row> = Vec::new();
    let mut all_ok = true;
    for alg in &algs {
        let points: Vec<ExperimentConfig> = if sizes.is_empty() {
            depths
                .iter()
                .map(|&d| ExperimentConfig { grid_apex: Some(vec![d, width.unwrap_or(d)]), random: None, graph: None, ..cfg.clone() })
                .collect()
        } else {
            sizes.iter().map(|&n| ExperimentConfig { random: Some(n), grid_apex: None, graph: None, ..cfg.clone() }).collect()
        };
        for point in points {
            let point = ExperimentConfig { algorithm: Some(alg.clone()), ..point };
            point.validate()?;
            let out = run(&point)?;
            if let Some(e) = &out.error {
                eprintln!("error ({alg}): {e}");
            }
            all_ok &= out.row.ok;
            rows.push(out.row);
        }
    }
    let text = match cfg.format.unwrap_or_default() {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
    };
    emit(&cfg, &text)?;
    Ok(all_ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Gen { cfg } => gen(cfg),
        Command::Run { config, cfg } => base_config(&config, &cfg).and_then(run_one),
        Command::Sweep { config, grid_apex_d, width, random_n, cfg } => {
            base_config(&config, &cfg).and_then(|c| sweep(c, grid_apex_d, width, random_n))
        }
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
