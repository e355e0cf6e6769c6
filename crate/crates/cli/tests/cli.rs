use std::path::Path;
use std::process::{Command, Output};

fn mdrq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdrq"))
        .args(args)
        .env_remove("MDRQ_THREADS")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn verify_all_methods_on_uniform_data() {
    let out = mdrq(&["verify", "--n", "10000", "--dims", "5", "--queries", "200"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("all methods agree"));
    for m in ["seq", "hscan", "vscan", "kdtree", "rstar", "vafile"] {
        assert!(stdout.contains(&format!("{m}: 200 queries checked")), "{m}");
    }
}

#[test]
fn gen_empty_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("empty.bin");
    let out = mdrq(&["gen", "--n", "0", "--dims", "4", "--out", p(&out_path)]);
    assert_eq!(out.status.code(), Some(0));
    let d = mdrq_core::DataSet::load(&out_path).unwrap();
    assert!(d.is_empty());
    assert_eq!(d.dims(), 4);
}

#[test]
fn bench_with_mismatched_queries_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.bin");
    let qfile = dir.path().join("q.jsonl");
    assert!(
        mdrq(&["gen", "--n", "100", "--dims", "3", "--out", p(&data)])
            .status
            .success()
    );
    assert!(mdrq(&[
        "queries",
        "--n",
        "100",
        "--dims",
        "2",
        "--count",
        "5",
        "--out",
        p(&qfile)
    ])
    .status
    .success());
    let out = mdrq(&[
        "bench",
        "--data",
        p(&data),
        "--queries-file",
        p(&qfile),
        "--method",
        "kdtree",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension mismatch"));
}

#[test]
fn unknown_flag_exits_one() {
    let out = mdrq(&["bench", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
    assert_eq!(mdrq(&["--help"]).status.code(), Some(0));
}

#[test]
fn bench_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let json = dir.path().join("r.jsonl");
    let out = mdrq(&[
        "bench",
        "--n",
        "2000",
        "--dims",
        "3",
        "--queries",
        "20",
        "--method",
        "seq,kdtree",
        "--kernel",
        "scalar",
        "--repetitions",
        "1",
        "--out",
        p(&csv),
        "--json",
        p(&json),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "method,n,m,threads,partitions,kernel,clusters,avg_selectivity,queries,seconds,qps,objects_compared,nodes_visited"
    );
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("seq,2000,3,1,1,scalar,"));

    let again = dir.path().join("again.csv");
    assert!(mdrq(&["report", "--in", p(&json), "--out", p(&again)])
        .status
        .success());
    assert_eq!(std::fs::read_to_string(&again).unwrap(), text);
}

#[test]
fn thread_sweep_uses_core_override() {
    let out = mdrq(&[
        "bench",
        "--n",
        "1000",
        "--dims",
        "2",
        "--queries",
        "10",
        "--method",
        "hscan",
        "--repetitions",
        "1",
        "--sweep",
        "threads",
        "--physical-cores",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().count(), 3);
    assert!(stdout
        .lines()
        .nth(2)
        .unwrap()
        .starts_with("hscan,1000,2,2,2,"));
}

#[test]
fn template_queries_and_gmrqb_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("g.bin");
    let qfile = dir.path().join("t.jsonl");
    assert!(mdrq(&["gen", "--gmrqb", "--n", "3000", "--out", p(&data)])
        .status
        .success());
    let out = mdrq(&[
        "queries",
        "--data",
        p(&data),
        "--templates",
        "mixed",
        "--count",
        "16",
        "--out",
        p(&qfile),
    ]);
    assert!(out.status.success());
    let qs = mdrq_core::workload::load_queries(&qfile).unwrap();
    assert_eq!(qs.len(), 16);
    let out = mdrq(&[
        "verify",
        "--data",
        p(&data),
        "--queries-file",
        p(&qfile),
        "--method",
        "vscan,kdtree",
        "--threads",
        "2",
        "--partitions",
        "3",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn csv_ingestion() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("in.csv");
    let bin = dir.path().join("out.bin");
    std::fs::write(&csv, "a,b\n1.0,x\n2.0,y\n").unwrap();
    let out = mdrq(&[
        "gen",
        "--from-csv",
        p(&csv),
        "--schema",
        "n,c",
        "--out",
        p(&bin),
    ]);
    assert!(out.status.success());
    assert_eq!(mdrq_core::DataSet::load(&bin).unwrap().len(), 2);
    std::fs::write(&csv, "a,b\nnope,x\n").unwrap();
    assert_eq!(
        mdrq(&[
            "gen",
            "--from-csv",
            p(&csv),
            "--schema",
            "n,c",
            "--out",
            p(&bin)
        ])
        .status
        .code(),
        Some(1)
    );
}
