//! Runs one configured experiment and turns it into a metrics row.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pwagg::agg::AggOp;
use pwagg::apps::{component_labels, mst};
use pwagg::construction::{deterministic_shortcut, doubling_search, randomized_shortcut, Construction, Targets};
use pwagg::graph::{
    build_bfs_tree, gen_grid_with_apex, gen_random_connected, gen_random_connected_partition, gen_random_weighted,
    NetworkGraph, Partition,
};
use pwagg::graph::io::{parse_graph, parse_partition};
use pwagg::pa::{coarsen, naive_block_aggregation_baseline, pa_pipeline, Mode};
use pwagg::sim::{SimReport, Simulator, Word};
use pwagg::subparts::{k_dominating_set, subpart_division_det, subpart_division_random};

use crate::config::ExperimentConfig;

pub const CSV_HEADER: &str = "algorithm,mode,seed,n,m,D,b,c,rounds,messages,max_edge_load,ok";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub algorithm: String,
    pub mode: Mode,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "D")]
    pub diameter: usize,
    pub b: Option<usize>,
    pub c: Option<usize>,
    pub rounds: u64,
    pub messages: u64,
    pub max_edge_load: usize,
    pub ok: bool,
}

#[derive(Debug, Serialize)]
pub struct RunOutput {
    #[serde(flatten)]
    pub row: Row,
    pub report: SimReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn load_instance(cfg: &ExperimentConfig) -> Result<(NetworkGraph, Partition)> {
    let seed = cfg.seed.unwrap_or(0);
    if let Some(dims) = &cfg.grid_apex {
        let gw = gen_grid_with_apex(dims[0], dims[1]);
        return Ok((gw.graph, gw.partition));
    }
    if let Some(n) = cfg.random {
        let p = cfg.p.unwrap_or(4.0 / n.max(1) as f64).min(1.0);
        let g = match cfg.max_weight {
            Some(w) => gen_random_weighted(n, p, w, seed),
            None => gen_random_connected(n, p, seed),
        };
        let part = gen_random_connected_partition(&g, cfg.parts.unwrap_or(1), seed)?;
        return Ok((g, part));
    }
    let path = cfg.graph.as_ref().ok_or_else(|| anyhow!("no graph source"))?;
    let g = parse_graph(&read(path)?)?;
    let part = match &cfg.partition {
        Some(p) => parse_partition(&read(p)?, g.n())?,
        None => Partition::whole(g.n()),
    };
    part.validate(&g)?;
    Ok((g, part))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_values(cfg: &ExperimentConfig, n: usize) -> Result<Vec<Word>> {
    let mut values: Vec<Word> = (0..n as Word).collect();
    if let Some(path) = &cfg.values {
        for (k, line) in read(path)?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<u64>);
            match (it.next(), it.next()) {
                (Some(Ok(v)), Some(Ok(x))) if (v as usize) < n => values[v as usize] = x,
                _ => return Err(anyhow!("{}:{}: expected `v value`", path.display(), k + 1)),
            }
        }
    }
    Ok(values)
}

/// What an algorithm hands back besides its simulator report.
#[derive(Default)]
struct Produced {
    b: Option<usize>,
    c: Option<usize>,
    files: Vec<(&'static str, String)>,
}

fn construction_files(c: &Construction, tree: &pwagg::graph::RootedTree, p: &Partition) -> Vec<(&'static str, String)> {
    vec![("shortcut.txt", c.shortcut.to_text(tree, p)), ("ledger.json", c.ledger_json())]
}

fn execute(sim: &mut Simulator<'_>, cfg: &ExperimentConfig, alg: &str, p: &Partition) -> Result<Produced> {
    let g = sim.graph();
    let mode = cfg.mode.unwrap_or(Mode::Det);
    let seed = cfg.seed.unwrap_or(0);
    let op: AggOp = cfg.op.as_deref().unwrap_or("sum").parse().map_err(|e: String| anyhow!(e))?;
    let mut out = Produced::default();
    match alg {
        "pa" => {
            let values = load_values(cfg, g.n())?;
            let res = pa_pipeline(sim, p, &values, op, mode, seed)?;
            (out.b, out.c) = (Some(res.b), Some(res.c));
            let per_part: BTreeMap<u64, Word> =
                (0..p.num_parts()).map(|i| (p.label(i), res.values[p.members(i)[0]])).collect();
            out.files.push(("result.json", serde_json::to_string_pretty(&per_part)?));
        }
        "baseline" => {
            let values = load_values(cfg, g.n())?;
            let tree = sim.with_phase("bfs", |s| build_bfs_tree(s, 0))?;
            let res = naive_block_aggregation_baseline(sim, &tree, p, &values, op)?;
            let per_part: BTreeMap<u64, Word> =
                (0..p.num_parts()).map(|i| (p.label(i), res[p.members(i)[0]])).collect();
            out.files.push(("result.json", serde_json::to_string_pretty(&per_part)?));
        }
        "mst" => {
            let res = mst(sim, mode, seed)?;
            let text: String = res
                .edges
                .iter()
                .map(|&e| {
                    let (u, v) = g.edges()[e];
                    match g.weight(e) {
                        Some(w) => format!("{u} {v} {w}\n"),
                        None => format!("{u} {v}\n"),
                    }
                })
                .collect();
            out.files.push(("mst_edges.txt", text));
        }
        "labels" => {
            let q = cfg.h_prob.unwrap_or(0.5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let in_h: Vec<bool> = (0..g.m()).map(|_| rng.gen_bool(q)).collect();
            let labels = component_labels(sim, &in_h, mode, seed)?;
            let text: String = labels.iter().enumerate().map(|(v, l)| format!("{v} {l}\n")).collect();
            out.files.push(("labels.txt", text));
        }
        "kdom" => {
            let k = cfg.k.unwrap_or_else(|| (g.n() as f64).sqrt().ceil() as usize).max(1);
            let set = k_dominating_set(sim, g, k)?;
            let text: String = set.iter().map(|v| format!("{v}\n")).collect();
            out.files.push(("kdom.txt", text));
        }
        "shortcut-det" | "shortcut-rand" => {
            let kind = if alg == "shortcut-det" { Mode::Det } else { Mode::Rand };
            let tree = sim.with_phase("bfs", |s| build_bfs_tree(s, 0))?;
            let dt = tree.height().max(1);
            let leaders = coarsen(sim, p)?.leaders;
            let (division, _) = sim.with_phase("division", |sim| match mode {
                Mode::Det => subpart_division_det(sim, g, p, dt),
                Mode::Rand => subpart_division_random(sim, g, p, &leaders, dt, seed),
            })?;
            let t = Targets { tree: &tree, partition: p, leaders: &leaders, division: &division, b: 1, c: 1, seed };
            let built = match (cfg.b, cfg.c) {
                (Some(b), Some(c)) => {
                    let t = Targets { b, c, ..t };
                    (out.b, out.c) = (Some(b), Some(c));
                    match kind {
                        Mode::Det => deterministic_shortcut(sim, &t)?,
                        Mode::Rand => randomized_shortcut(sim, &t)?,
                    }
                }
                _ => {
                    let found = doubling_search(sim, &t, kind)?;
                    (out.b, out.c) = (Some(found.b), Some(found.c));
                    found.construction
                }
            };
            out.files.extend(construction_files(&built, &tree, p));
        }
        other => return Err(anyhow!("unknown algorithm `{other}`")),
    }
    Ok(out)
}

/// Runs the experiment. Setup problems (unreadable files, bad instance) are
/// errors; algorithm failures come back as a row with `ok = false`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let alg = cfg.algorithm.clone().ok_or_else(|| anyhow!("--alg is required"))?;
    let (g, p) = load_instance(cfg)?;
    let mut sim = Simulator::new(&g);
    let res = execute(&mut sim, cfg, &alg, &p);
    let report = sim.report().clone();
    let mode = match alg.as_str() {
        "shortcut-det" => Mode::Det,
        "shortcut-rand" => Mode::Rand,
        _ => cfg.mode.unwrap_or(Mode::Det),
    };
    let mut row = Row {
        algorithm: alg,
        mode,
        seed: cfg.seed.unwrap_or(0),
        n: g.n(),
        m: g.m(),
        diameter: g.diameter(),
        b: None,
        c: None,
        rounds: report.rounds,
        messages: report.messages,
        max_edge_load: report.max_edge_load,
        ok: res.is_ok(),
    };
    let error = match res {
        Ok(produced) => {
            (row.b, row.c) = (produced.b, produced.c);
            if let Some(dir) = &cfg.artifacts {
                fs::create_dir_all(dir)?;
                for (name, text) in &produced.files {
                    fs::write(dir.join(name), text)?;
                }
                fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
            }
            None
        }
        Err(e) => Some(format!("{e:#}")),
    };
    Ok(RunOutput { row, report, error })
}

pub fn csv_rows(rows: &[Row]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let mut text = format!("{CSV_HEADER}\n");
    for r in rows {
        w.serialize(r)?;
    }
    text.push_str(std::str::from_utf8(&w.into_inner()?)?);
    Ok(text)
}
