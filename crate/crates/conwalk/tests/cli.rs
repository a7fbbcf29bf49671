use std::process::{Command, Output};

use serde_json::Value;

const CONSTANT_HALF: &str = r#"{"kind":"Constant","p":0.5}"#;

fn conwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conwalk"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_constant_in_the_plane() {
    let out = conwalk(&["classify", "--schedule", CONSTANT_HALF, "--d", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["regime"], "Recurrent");
}

#[test]
fn moments_sgeom_second() {
    let out = conwalk(&["moments", "--op", "sgeom", "--p", "0.5", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["op"], "sgeom");
    assert_eq!(v["value"], 6.0);
}

#[test]
fn moments_reject_unsupported_order() {
    let out = conwalk(&["moments", "--op", "sgeom", "--p", "0.5", "--m", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_walk_writes_header_only() {
    let out = conwalk(&[
        "simulate",
        "--schedule",
        CONSTANT_HALF,
        "--d",
        "2",
        "--n",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("# config: "));
    assert_eq!(lines[1], "update_time,axis,sign,x_1,x_2");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        conwalk(&["simulate", "--d", "2", "--n", "3"]).status.code(),
        Some(2)
    );
    let bad = r#"{"kind":"Constant","p":1.5}"#;
    assert_eq!(
        conwalk(&["simulate", "--schedule", bad, "--d", "2", "--n", "3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        conwalk(&[
            "simulate",
            "--schedule",
            CONSTANT_HALF,
            "--d",
            "0",
            "--n",
            "3"
        ])
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = conwalk(&[
            "simulate",
            "--schedule",
            CONSTANT_HALF,
            "--d",
            "3",
            "--n",
            "500",
            "--seed",
            "17",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.csv"), run("b.csv"));
}

#[test]
fn schedule_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("schedule.json");
    std::fs::write(&path, r#"{"kind":"Critical","a":1.0,"n0":2}"#).unwrap();
    let arg = format!("@{}", path.display());
    let out = conwalk(&["classify", "--schedule", &arg, "--d", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["config"]["schedule"]["kind"], "Critical");
}

#[test]
fn verify_record_has_every_field() {
    let out = conwalk(&[
        "verify",
        "covariance",
        "--schedule",
        CONSTANT_HALF,
        "--i",
        "5",
        "--j",
        "8",
        "--samples",
        "20000",
        "--seed",
        "4",
        "--shards",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    for key in [
        "op",
        "config",
        "estimate",
        "std_error",
        "n_samples",
        "ci95",
        "seed",
        "shards",
        "bound",
        "verdict",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["n_samples"], 20000);
    assert_eq!(v["shards"], 2);
    assert_eq!(v["verdict"], "pass");
}

#[test]
fn failed_verdict_exits_one() {
    let out = conwalk(&[
        "verify",
        "oracle",
        "--schedule",
        CONSTANT_HALF,
        "--d",
        "1",
        "--n",
        "4",
        "--samples",
        "100",
        "--tolerance",
        "1e-9",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["verdict"], "fail");
}

#[test]
fn zigzag_grid_ends_at_horizon() {
    let out = conwalk(&[
        "zigzag", "--a", "1", "--d", "2", "--grid", "4", "--seed", "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("1,"));
    for row in rows {
        let norm: f64 = row
            .split(',')
            .skip(1)
            .map(|x| x.parse::<f64>().unwrap().abs())
            .sum();
        assert!(norm <= 1.0 + 1e-12);
    }
}

#[test]
fn exact_distribution_sums_to_one() {
    let out = conwalk(&["exact", "--schedule", CONSTANT_HALF, "--d", "2", "--n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let total: f64 = text
        .lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12);
}
