use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn walkembed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_walkembed"))
        .args(args)
        .env_remove("WALKEMBED_WORKERS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = walkembed(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails(args: &[&str]) -> String {
    let out = walkembed(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    String::from_utf8(out.stderr).unwrap()
}

struct Work(TempDir);

impl Work {
    fn new() -> Self {
        Work(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).to_str().unwrap().to_owned()
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }

    fn karate(&self) -> (String, String) {
        let (e, l) = (self.path("k.edges"), self.path("k.labels"));
        ok(&["generate", "--kind", "karate", "--out", &e, "--labels-out", &l]);
        (e, l)
    }

    fn karate_embedding(&self, name: &str, seed: &str) -> String {
        let (e, _) = self.karate();
        let out = self.path(name);
        ok(&["train", "--graph", &e, "-d", "2", "--gamma", "40", "-w", "10", "-t", "40", "--seed", seed, "--workers", "1", "--out", &out]);
        out
    }
}

fn exists(p: &str) -> bool {
    Path::new(p).exists()
}

#[test]
fn karate_fixture_files() {
    let w = Work::new();
    w.karate();
    assert_eq!(w.read("k.edges").lines().count(), 78);
    let labels = w.read("k.labels");
    assert_eq!(labels.lines().count(), 34);
    let mut distinct: Vec<&str> = labels.lines().map(|l| l.split_whitespace().nth(1).unwrap()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    assert_eq!(distinct, ["0", "1", "2", "3"]);
}

#[test]
fn tiny_block_model() {
    let w = Work::new();
    let e = w.path("g.edges");
    ok(&["generate", "--kind", "sbm", "--blocks", "2,2", "--p-in", "1", "--p-out", "0", "--out", &e, "--labels-out", &w.path("g.labels")]);
    let edges = w.read("g.edges");
    assert_eq!(edges.lines().count(), 2);
    let mut vertices: Vec<&str> = edges.split_whitespace().collect();
    vertices.sort_unstable();
    vertices.dedup();
    assert_eq!(vertices.len(), 4);
}

#[test]
fn unknown_graph_kind_is_a_usage_error() {
    let w = Work::new();
    let out = walkembed(&["generate", "--kind", "lattice", "--out", &w.path("x")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!exists(&w.path("x")));
}

#[test]
fn walk_corpus_shape_and_reproducibility() {
    let w = Work::new();
    let (e, _) = w.karate();
    ok(&["walk", "--graph", &e, "--gamma", "1", "--seed", "3", "--out", &w.path("a.txt")]);
    ok(&["walk", "--graph", &e, "--gamma", "1", "--seed", "3", "--out", &w.path("b.txt")]);
    assert_eq!(w.read("a.txt").lines().count(), 34);
    assert_eq!(w.read("a.txt"), w.read("b.txt"));

    ok(&["walk", "--graph", &e, "--gamma", "2", "-t", "1", "--out", &w.path("c.txt")]);
    let single = w.read("c.txt");
    assert_eq!(single.lines().count(), 68);
    assert!(single.lines().all(|l| l.split_whitespace().count() == 1));
}

#[test]
fn serial_training_is_reproducible() {
    let w = Work::new();
    let a = w.karate_embedding("a.emb", "7");
    let b = w.karate_embedding("b.emb", "7");
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("34 2"));
    assert_eq!(lines.count(), 34);
}

#[test]
fn streaming_needs_no_graph() {
    let w = Work::new();
    let (e, _) = w.karate();
    let corpus = w.path("w.txt");
    ok(&["walk", "--graph", &e, "--gamma", "5", "--out", &corpus]);
    fs::remove_file(&e).unwrap();
    let out = w.path("s.emb");
    ok(&["train", "--corpus", &corpus, "--streaming", "--n-max", "34", "-d", "8", "--out", &out]);
    assert!(w.read("s.emb").starts_with("34 8\n"));

    let err = fails(&["train", "--corpus", &corpus, "--streaming", "--n-max", "20", "-d", "8", "--out", &w.path("t.emb")]);
    assert!(err.contains("20"), "{err}");
    assert!(!exists(&w.path("t.emb")));
}

#[test]
fn snapshots_during_streaming() {
    let w = Work::new();
    let (e, _) = w.karate();
    let corpus = w.path("w.txt");
    ok(&["walk", "--graph", &e, "--gamma", "2", "--out", &corpus]);
    let snap = w.path("snap.emb");
    ok(&["train", "--corpus", &corpus, "--streaming", "--n-max", "40", "-d", "4", "--snapshot-every", "10", "--snapshot-path", &snap, "--out", &w.path("s.emb")]);
    assert!(w.read("snap.emb").lines().next().unwrap().ends_with(" 4"));
}

#[test]
fn corpus_batch_training() {
    let w = Work::new();
    let (e, _) = w.karate();
    let corpus = w.path("w.txt");
    ok(&["walk", "--graph", &e, "--gamma", "5", "--out", &corpus]);
    ok(&["train", "--corpus", &corpus, "-d", "4", "--out", &w.path("c.emb")]);
    assert!(w.read("c.emb").starts_with("34 4\n"));
}

#[test]
fn invalid_flags_write_nothing() {
    let w = Work::new();
    let (e, _) = w.karate();
    let out = w.path("z.emb");
    let err = fails(&["train", "--graph", &e, "-d", "0", "--out", &out]);
    assert!(err.contains("dimension"), "{err}");
    assert!(!exists(&out));
    fails(&["train", "--graph", &w.path("missing.edges"), "--out", &out]);
    assert!(!exists(&out));
}

#[test]
fn eval_report() {
    let w = Work::new();
    let (_, l) = w.karate();
    let emb = w.karate_embedding("k.emb", "1");
    let args = ["eval", "--embeddings", &emb, "--labels", &l, "--t-r", "0.5", "--reps", "1", "--seed", "4"];
    let report = ok(&args);
    assert_eq!(report, ok(&args));
    let rows: Vec<Vec<&str>> = report.lines().map(|r| r.split('\t').collect()).collect();
    assert_eq!(rows[0], ["t_r", "d", "gamma", "metric", "mean", "std"]);
    let metrics: Vec<&str> = rows[1..].iter().map(|r| r[3]).collect();
    assert_eq!(metrics, ["micro_f1", "macro_f1", "majority_micro_f1", "majority_macro_f1"]);
    assert!(rows[1..].iter().all(|r| r[0] == "0.5" && r[1] == "2" && r[2] == "NA"));
}

#[test]
fn eval_rejects_unknown_vertices_and_empty_test_sets() {
    let w = Work::new();
    let (_, l) = w.karate();
    let emb = w.karate_embedding("k.emb", "1");
    let extra = w.path("extra.labels");
    fs::write(&extra, format!("{}ghost 0\nwraith 1\n", w.read("k.labels"))).unwrap();
    let err = fails(&["eval", "--embeddings", &emb, "--labels", &extra]);
    assert!(err.contains("ghost") && !err.contains("wraith"), "{err}");

    fails(&["eval", "--embeddings", &emb, "--labels", &l, "--t-r", "0.999"]);
}

#[test]
fn sweep_table() {
    let w = Work::new();
    let (e, l) = w.karate();
    let table = ok(&["sweep", "--graph", &e, "--labels", &l, "--dims", "2,4", "--gammas", "2", "--t-r", "0.5", "--reps", "2"]);
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 1 + 2 * 4);
    assert!(rows[1..].iter().all(|r| r.split('\t').nth(2) == Some("2")));
}

#[test]
fn diagnose_reports_slope_and_degree_correlation() {
    let w = Work::new();
    let (e, _) = w.karate();
    let corpus = w.path("w.txt");
    ok(&["walk", "--graph", &e, "--gamma", "10", "--out", &corpus]);
    let plain = ok(&["diagnose", "--corpus", &corpus]);
    assert!(plain.contains("# slope\t"));
    assert!(!plain.contains("spearman"));
    let with_graph = ok(&["diagnose", "--corpus", &corpus, "--graph", &e]);
    let rho: f64 = with_graph
        .lines()
        .find_map(|l| l.strip_prefix("# spearman_degree\t"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rho > 0.8, "{rho}");
}

#[test]
fn plot_export() {
    let w = Work::new();
    let (e, l) = w.karate();
    let emb = w.karate_embedding("k.emb", "1");
    let table = ok(&["plot-export", "--embeddings", &emb, "--labels", &l]);
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows.len(), 34);
    let mut labels: Vec<&str> = rows.iter().map(|r| r.split('\t').nth(3).unwrap()).collect();
    labels.sort_unstable();
    labels.dedup();
    assert_eq!(labels.len(), 4);

    let wide: PathBuf = w.path("wide.emb").into();
    ok(&["train", "--graph", &e, "-d", "128", "--gamma", "1", "--out", wide.to_str().unwrap()]);
    fails(&["plot-export", "--embeddings", wide.to_str().unwrap()]);
    let picked = ok(&["plot-export", "--embeddings", wide.to_str().unwrap(), "--dims", "0,1"]);
    assert_eq!(picked.lines().skip(1).count(), 34);
}

#[test]
fn help_lists_reference_defaults() {
    let help = ok(&["train", "--help"]);
    for default in ["[default: 128]", "[default: 10]", "[default: 80]", "[default: 40]", "[default: 0.025]"] {
        assert!(help.contains(default), "missing {default}");
    }
}
