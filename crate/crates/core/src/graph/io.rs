//! Plain-text graph and partition files.
//!
//! Graph: header `n m` or `n m weighted`, then one `u v` or `u v w` line per
//! edge. Partition: one `v part_label` line per node. Ids are 0-based; blank
//! lines and `#` comments are ignored.

use std::fmt::Write as _;

use super::{GraphError, NetworkGraph, Partition};

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T, GraphError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| GraphError::Parse(line, "expected a number".into()))
}

pub fn parse_graph(text: &str) -> Result<NetworkGraph, GraphError> {
    let mut it = lines(text);
    let (hl, header) = it.next().ok_or_else(|| GraphError::Parse(1, "missing header".into()))?;
    let mut h = header.split_whitespace();
    let n: usize = num(h.next(), hl)?;
    let m: usize = num(h.next(), hl)?;
    let weighted = match h.next() {
        None => false,
        Some("weighted") => true,
        Some(other) => return Err(GraphError::Parse(hl, format!("unexpected `{other}`"))),
    };
    let mut plain = Vec::new();
    let mut heavy = Vec::new();
    for (ln, l) in it {
        let mut t = l.split_whitespace();
        let u = num(t.next(), ln)?;
        let v = num(t.next(), ln)?;
        if weighted {
            heavy.push((u, v, num(t.next(), ln)?));
        } else {
            plain.push((u, v));
        }
        if t.next().is_some() {
            return Err(GraphError::Parse(ln, "trailing tokens".into()));
        }
    }
    let count = plain.len() + heavy.len();
    if count != m {
        return Err(GraphError::Parse(hl, format!("header says {m} edges, found {count}")));
    }
    if weighted {
        NetworkGraph::weighted(n, heavy)
    } else {
        NetworkGraph::new(n, plain)
    }
}

pub fn write_graph(g: &NetworkGraph) -> String {
    let mut s = String::new();
    if g.is_weighted() {
        writeln!(s, "{} {} weighted", g.n(), g.m()).unwrap();
    } else {
        writeln!(s, "{} {}", g.n(), g.m()).unwrap();
    }
    for (k, &(u, v)) in g.edges().iter().enumerate() {
        match g.weight(k) {
            Some(w) => writeln!(s, "{u} {v} {w}").unwrap(),
            None => writeln!(s, "{u} {v}").unwrap(),
        }
    }
    s
}

pub fn parse_partition(text: &str, n: usize) -> Result<Partition, GraphError> {
    let mut labels = vec![None; n];
    for (ln, l) in lines(text) {
        let mut t = l.split_whitespace();
        let v: usize = num(t.next(), ln)?;
        let p: u64 = num(t.next(), ln)?;
        if v >= n {
            return Err(GraphError::NodeOutOfRange(v, n));
        }
        if labels[v].replace(p).is_some() {
            return Err(GraphError::Parse(ln, format!("node {v} listed twice")));
        }
    }
    let labels: Option<Vec<u64>> = labels.into_iter().collect();
    let labels = labels.ok_or_else(|| GraphError::Parse(0, "some node has no part".into()))?;
    Ok(Partition::from_labels(&labels))
}

/// Writes original labels so that parsing gives back the same partition.
pub fn write_partition(p: &Partition) -> String {
    let mut s = String::new();
    for v in 0..p.n() {
        writeln!(s, "{v} {}", p.label(p.part_of(v))).unwrap();
    }
    s
}
