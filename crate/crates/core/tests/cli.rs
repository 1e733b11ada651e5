use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ebwtpc(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ebwtpc"));
    cmd.args(args).env("RUST_LOG", "warn");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ebwtpc(args, &[]);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Parses the data row of a validation TSV into named columns.
fn report_row(tsv: &str) -> Vec<(String, String)> {
    let rows: Vec<&str> = tsv.lines().filter(|l| !l.starts_with('#')).collect();
    rows[0].split('\t').zip(rows[1].split('\t')).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn column(row: &[(String, String)], name: &str) -> u64 {
    row.iter().find(|(k, _)| k == name).unwrap().1.parse().unwrap()
}

#[test]
fn all_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["--seed", "42", "all", "--genome-len", "30000", "--coverage1", "20", "--coverage2", "20"];
    ok(&[&args[..], &["--out", path(&a)]].concat());
    ok(&[&args[..], &["--out", path(&b), "--threads", "3"]].concat());
    let ra = fs::read_to_string(a.join("report.tsv")).unwrap();
    let rb = fs::read_to_string(b.join("report.tsv")).unwrap();
    let strip = |s: &str| s.lines().filter(|l| !l.contains("work_dir") && !l.contains("threads")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&ra), strip(&rb));
    assert_eq!(fs::read(a.join("calls.fa")).unwrap(), fs::read(b.join("calls.fa")).unwrap());
    assert!(ra.contains("# seed = 42"));
}

#[test]
fn staged_pipeline_accounts_for_every_planted_snp() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--out", path(d), "--genome-len", "30000", "--density", "0.002", "--coverage1", "25", "--coverage2", "25"]);
    for f in ["genome1.fa", "genome2.fa", "reads1.fa", "reads2.fa", "truth.tsv", "origins1.tsv", "origins2.tsv"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let idx = d.join("idx/sample");
    ok(&["index", "--reads1", path(&d.join("reads1.fa")), "--reads2", path(&d.join("reads2.fa")), "--out", path(&idx)]);
    let clusters = d.join("clusters.bin");
    ok(&["cluster", "--index", path(&idx), "--out", path(&clusters)]);
    let calls = d.join("calls.fa");
    ok(&["call", "--index", path(&idx), "--clusters", path(&clusters), "--out", path(&calls), "--genome-len", "30000"]);
    let stats = fs::read_to_string(d.join("calls.fa.stats.tsv")).unwrap();
    assert!(stats.contains("# genome_len = 30000") && stats.contains("reads_passes\t1"));
    let report = d.join("report.tsv");
    let text = ok(&[
        "validate",
        "--truth",
        path(&d.join("truth.tsv")),
        "--genome",
        path(&d.join("genome1.fa")),
        "--calls",
        path(&calls),
        "--out",
        path(&report),
    ]);
    assert!(text.contains("SEN") && text.contains("PREC"));
    let planted = fs::read_to_string(d.join("truth.tsv")).unwrap().lines().filter(|l| !l.starts_with('#') && !l.starts_with("pos")).count() as u64;
    let row = report_row(&fs::read_to_string(&report).unwrap());
    assert_eq!(column(&row, "TP") + column(&row, "FN"), planted);
    assert!(column(&row, "TP") * 10 >= planted * 8);
}

#[test]
fn call_without_clusters_reports_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--out", path(d), "--genome-len", "5000", "--coverage1", "5", "--coverage2", "5"]);
    let idx = d.join("idx");
    ok(&["index", "--reads1", path(&d.join("reads1.fa")), "--reads2", path(&d.join("reads2.fa")), "--out", path(&idx)]);
    let out = ebwtpc(
        &["call", "--index", path(&idx), "--clusters", path(&d.join("none.bin")), "--out", path(&d.join("c.fa")), "--genome-len", "5000"],
        &[],
    );
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing input"));
}

#[test]
fn truncated_array_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&["simulate", "--out", path(d), "--genome-len", "5000", "--coverage1", "5", "--coverage2", "5"]);
    let idx = d.join("idx");
    ok(&["index", "--reads1", path(&d.join("reads1.fa")), "--reads2", path(&d.join("reads2.fa")), "--out", path(&idx)]);
    let clusters = d.join("clusters.bin");
    ok(&["cluster", "--index", path(&idx), "--out", path(&clusters)]);
    let lcp = d.join("idx.lcp");
    let bytes = fs::read(&lcp).unwrap();
    fs::write(&lcp, &bytes[..bytes.len() - 40]).unwrap();
    let out = ebwtpc(
        &["call", "--index", path(&idx), "--clusters", path(&clusters), "--out", path(&d.join("c.fa")), "--genome-len", "5000"],
        &[],
    );
    assert!(!out.status.success());
}

#[test]
fn unknown_flag_fails() {
    let out = ebwtpc(&["cluster", "--bogus"], &[]);
    assert!(!out.status.success());
}

#[test]
fn environment_and_flags_layer_over_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    fs::write(&cfg, "alpha = 0.01\nread_len = 150\nepsilon = 0.01\n").unwrap();
    let out = ebwtpc(
        &["--config", path(&cfg), "stats", "--coverage", "44", "--genome-len", "1000000", "--k-min", "11", "--k-max", "12", "--epsilon", "0.0012"],
        &[("EBWTPC_ALPHA", "0.02")],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# alpha = 0.02"));
    assert!(text.contains("# read_len = 150"));
    assert!(text.contains("# epsilon = 0.0012"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("k\tlambda"));
}
