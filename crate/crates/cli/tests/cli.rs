use std::process::{Command, Output};

fn pa_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pa-sim")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const HEADER: &str = "algorithm,mode,seed,n,m,D,b,c,rounds,messages,max_edge_load,ok";

fn column(row: &str, name: &str) -> String {
    let k = HEADER.split(',').position(|h| h == name).unwrap();
    row.split(',').nth(k).unwrap().to_string()
}

#[test]
fn gen_writes_grid_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    let o = pa_sim(&["gen", "--grid-apex", "8", "8", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("n=65 "));
    let g = pwagg::graph::io::parse_graph(&std::fs::read_to_string(out.join("graph.txt")).unwrap()).unwrap();
    assert_eq!(g.n(), 65);
    let p = pwagg::graph::io::parse_partition(&std::fs::read_to_string(out.join("partition.txt")).unwrap(), 65).unwrap();
    assert_eq!(p.num_parts(), 9);
}

#[test]
fn run_pa_on_generated_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    pa_sim(&["gen", "--grid-apex", "8", "8", "--out", out.to_str().unwrap()]);
    let graph = out.join("graph.txt");
    let part = out.join("partition.txt");
    let o = pa_sim(&["run", "--alg", "pa", "--mode", "det", "--graph", graph.to_str().unwrap(), "--partition", part.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let row = lines.next().unwrap();
    assert_eq!(column(row, "ok"), "true");
    let (n, m): (f64, f64) = (column(row, "n").parse().unwrap(), column(row, "m").parse().unwrap());
    let msgs: f64 = column(row, "messages").parse().unwrap();
    assert!(msgs <= 64.0 * m * n.ln().powi(3));
}

#[test]
fn every_algorithm_runs() {
    for alg in ["pa", "mst", "labels", "kdom", "shortcut-det", "shortcut-rand", "baseline"] {
        let o = pa_sim(&["run", "--alg", alg, "--mode", "rand", "--seed", "3", "--random", "40", "--parts", "4", "--max-weight", "50"]);
        assert!(o.status.success(), "{alg}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).lines().nth(1).unwrap().ends_with(",true"), "{alg}");
    }
}

#[test]
fn artifacts_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let art = dir.path().join("art");
    let o = pa_sim(&["run", "--alg", "shortcut-det", "--grid-apex", "4", "4", "--b", "1", "--c", "2", "--artifacts", art.to_str().unwrap()]);
    assert!(o.status.success());
    let ledger: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(art.join("ledger.json")).unwrap()).unwrap();
    assert_eq!(ledger.as_array().unwrap().len(), 5);
    assert!(art.join("shortcut.txt").exists());
    assert_eq!(column(stdout(&o).lines().nth(1).unwrap(), "c"), "2");
}

#[test]
fn same_config_same_bytes() {
    let args = ["run", "--alg", "labels", "--mode", "rand", "--seed", "11", "--random", "80", "--parts", "3"];
    assert_eq!(pa_sim(&args).stdout, pa_sim(&args).stdout);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"alg": "kdom", "random": 50, "seed": 1, "k": 5}"#).unwrap();
    let o = pa_sim(&["run", "--config", cfg.to_str().unwrap(), "--seed", "2"]);
    assert!(o.status.success());
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    assert_eq!(column(&row, "algorithm"), "kdom");
    assert_eq!(column(&row, "seed"), "2");
}

#[test]
fn usage_errors_exit_nonzero() {
    assert!(!pa_sim(&["run", "--alg", "pa"]).status.success());
    assert!(!pa_sim(&["run", "--alg", "pa", "--mode", "rand", "--random", "10"]).status.success());
    assert!(!pa_sim(&["run", "--alg", "nope", "--random", "10"]).status.success());
    assert!(!pa_sim(&["frobnicate"]).status.success());
}

#[test]
fn sweep_baseline_grows_faster_than_pa() {
    let o = pa_sim(&["sweep", "--alg", "baseline,pa", "--grid-apex-D", "8,16,32"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    let per_node = |r: &str| column(r, "messages").parse::<f64>().unwrap() / column(r, "n").parse::<f64>().unwrap();
    let base: Vec<f64> = rows[..3].iter().map(|r| per_node(r)).collect();
    let pa: Vec<f64> = rows[3..].iter().map(|r| per_node(r)).collect();
    assert!(base.windows(2).all(|w| w[1] > w[0]));
    assert!(base[2] / base[0] > pa[2] / pa[0], "{base:?} {pa:?}");
}
