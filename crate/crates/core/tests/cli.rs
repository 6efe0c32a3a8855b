use std::io::Write;
use std::process::{Command, Output, Stdio};

fn pdmarket(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdmarket"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn broken_stick_prints_three_pieces() {
    let o = pdmarket(&["broken-stick", "--n", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "0.611111, 0.277778, 0.111111\n");
}

#[test]
fn exact_table_has_five_rows_for_n4() {
    let o = pdmarket(&[
        "exact", "--n", "4", "--alpha", "0.5", "--theta", "1", "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    let total: f64 = rows.iter().map(|r| r["probability"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-10);
    let mults: Vec<u64> = rows.iter().map(|r| r["multiplicity"].as_u64().unwrap()).collect();
    assert_eq!(mults, vec![1, 4, 3, 6, 1]);
}

#[test]
fn domain_errors_exit_one_with_one_line() {
    for args in [
        &["exact", "--n", "4", "--alpha", "0.5", "--theta", "-0.7"][..],
        &["sample", "--alpha", "-0.5", "--theta", "1.2"][..],
        &[
            "simulate-diffusion",
            "--alpha",
            "0.6",
            "--theta",
            "55",
            "--dt",
            "0.5",
        ][..],
    ] {
        let o = pdmarket(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        let err = stderr(&o);
        assert_eq!(err.lines().count(), 1, "{err}");
        let mut parts = err.splitn(3, ": ");
        assert_eq!(parts.next(), Some("error"));
        assert!(
            ["domain", "config", "data", "unsupported"].contains(&parts.next().unwrap()),
            "{err}"
        );
        assert!(o.stdout.is_empty());
    }
    let o = pdmarket(&["exact", "--n", "4", "--alpha", "1.2", "--theta", "1"]);
    assert!(stderr(&o).starts_with("error: domain: "));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["frobnicate"][..],
        &["exact", "--n", "4"][..],
        &["curve", "--alpha", "x", "--theta", "1"][..],
        &[][..],
    ] {
        let o = pdmarket(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains("Usage"));
    }
}

#[test]
fn help_lists_every_flag() {
    let top = stdout(&pdmarket(&["--help"]));
    for sub in [
        "exact",
        "sample",
        "crp",
        "curve",
        "fit",
        "simulate-du",
        "simulate-diffusion",
        "broken-stick",
    ] {
        assert!(top.contains(sub), "{sub}");
        let help = pdmarket(&[sub, "--help"]);
        assert!(help.status.success());
        let text = stdout(&help);
        for flag in ["--seed", "--format", "--output", "--threads"] {
            assert!(text.contains(flag), "{sub} help lacks {flag}");
        }
    }
    let diffusion = stdout(&pdmarket(&["simulate-diffusion", "--help"]));
    for flag in ["--alpha", "--theta", "--dt", "--t-end", "--k-sticks"] {
        assert!(diffusion.contains(flag));
    }
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("du.csv");
    let args = [
        "simulate-du",
        "--n",
        "30",
        "--alpha",
        "0.4",
        "--theta",
        "3",
        "--steps",
        "300",
        "--seed",
        "9",
    ];
    let direct = pdmarket(&args);
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    let o = pdmarket(&with_file);
    assert!(o.status.success() && o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    let text = stdout(&direct);
    assert_eq!(text.lines().next(), Some("step,x1,x2,x3,x4,x5"));
    assert_eq!(text.lines().count(), 1 + 11);
}

#[test]
fn seeds_change_samples() {
    let a = pdmarket(&["sample", "--alpha", "0.5", "--theta", "1", "--seed", "1"]);
    let b = pdmarket(&["sample", "--alpha", "0.5", "--theta", "1", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
    let header = stdout(&a).lines().next().unwrap().to_string();
    assert_eq!(header, "sample,x1,x2,x3,x4,x5,x6,x7,x8,x9,x10,residual");
}

#[test]
fn fit_reads_standard_input() {
    let table: String = (1..=30)
        .map(|i| format!("S{i},{}\n", 1000.0 / (i as f64).powf(1.3)))
        .collect();
    let mut child = Command::new(env!("CARGO_BIN_EXE_pdmarket"))
        .args(["fit", "--samples", "10", "--rounds", "1"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(table.as_bytes()).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in [
        "alpha",
        "theta",
        "loss",
        "n_ranks_used",
        "curve_samples",
        "warnings",
    ] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["n_ranks_used"], 30);
}

#[test]
fn fit_rejects_unusable_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("caps.csv");
    std::fs::write(&path, "ticker,cap\nA,0\nB,-3\nC,n/a\n").unwrap();
    let o = pdmarket(&["fit", "--input", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: data: "));
    let missing = pdmarket(&["fit", "--input", "/nonexistent/caps.csv"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).starts_with("error: io: "));
}

#[test]
fn fit_csv_output_has_curve_columns() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/synthetic_caps.csv");
    let o = pdmarket(&[
        "fit",
        "--input",
        path,
        "--ranks",
        "20",
        "--samples",
        "10",
        "--rounds",
        "0",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("rank,observed,fitted"));
    assert_eq!(text.lines().count(), 21);
}
