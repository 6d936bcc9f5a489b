// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use knncp::simlab::{generate, Model, Scenario};
use serde_json::Value;
use tempfile::TempDir;

fn knncp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knncp"))
        .args(args)
        .env_remove("KNNCP_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gaussian_csv(dir: &Path, name: &str, n: usize, d: usize, tau: Option<usize>, seed: u64) -> PathBuf {
    let f1 = match tau {
        Some(_) => Model::standard_normal().with_mean(knncp::simlab::CoordValue::constant(1.0)),
        None => Model::standard_normal(),
    };
    let s = Scenario {
        name: name.into(),
        n,
        d,
        tau,
        f0: Model::standard_normal(),
        f1,
        seed,
    };
    let data = generate(&s, 0).unwrap();
    let mut text = String::new();
    for i in 0..data.n() {
        let row: Vec<String> = data.row(i).iter().map(|v| format!("{v:e}")).collect();
        writeln!(text, "{}", row.join(",")).unwrap();
    }
    let path = dir.join(format!("{name}.csv"));
    std::fs::write(&path, text).unwrap();
    path
}

fn json(o: &Output) -> Value {
    serde_json::from_str(stdout(o).trim()).expect("stdout is JSON")
}

#[test]
fn detect_happy_path() {
    let dir = TempDir::new().unwrap();
    let x = gaussian_csv(dir.path(), "x", 200, 5, Some(100), 3);
    let x = x.to_str().unwrap();
    let out = knncp(&["detect", "--input", x, "--k", "5", "--alpha", "0.05", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["input"]["n"], 200);
    let tau = v["result"]["tau_hat"].as_u64().unwrap();
    assert!(tau.abs_diff(100) <= 5, "tau_hat {tau}");
    assert!(v["result"]["p_perm"].as_f64().unwrap() < 0.01);
    assert_eq!(v["result"]["reject"], true);

    let human = knncp(&["detect", "--input", x]);
    assert!(stdout(&human).contains("change detected"));
}

#[test]
fn no_change_still_exits_zero() {
    let dir = TempDir::new().unwrap();
    let x = gaussian_csv(dir.path(), "h", 120, 3, None, 5);
    let out = knncp(&["detect", "--input", x.to_str().unwrap(), "--permutations", "99"]);
    assert!(out.status.success());
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let x = gaussian_csv(dir.path(), "x", 50, 2, None, 1);
    let x = x.to_str().unwrap();
    let out = knncp(&["detect", "--input", x, "--k", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--k"));

    for args in [
        vec!["detect", "--input", x, "--alpha", "1.5"],
        vec!["detect", "--input", x, "--mode", "bogus"],
        vec!["detect"],
        vec!["simulate", "--preset", "tableZ"],
        vec!["frobnicate"],
    ] {
        assert_eq!(knncp(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn data_errors_exit_three() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1,2\n3,x\n5,6\n").unwrap();
    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "1,2\n3\n5,6\n7,8\n9,1\n2,3\n").unwrap();
    let missing = dir.path().join("missing.csv");
    for p in [&bad, &ragged, &missing] {
        let out = knncp(&["detect", "--input", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(3), "{}", p.display());
        assert!(!out.stderr.is_empty());
    }
    let small = dir.path().join("small.csv");
    std::fs::write(&small, "1,2\n3,4\n5,6\n7,8\n9,1\n2,3\n").unwrap();
    let out = knncp(&["detect", "--input", small.to_str().unwrap(), "--k", "6"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn identical_seeds_give_identical_json() {
    let dir = TempDir::new().unwrap();
    let x = gaussian_csv(dir.path(), "x", 150, 4, None, 11);
    let x = x.to_str().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = knncp(&[
            "detect", "--input", x, "--mode", "both", "--permutations", "300", "--seed", "9",
            "--output", p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let single = knncp(&["--threads", "1", "detect", "--input", x, "--mode", "permutation", "--seed", "9", "--json"]);
    let many = knncp(&["--threads", "4", "detect", "--input", x, "--mode", "permutation", "--seed", "9", "--json"]);
    assert_eq!(single.stdout, many.stdout);
}

#[test]
fn traces_file_has_one_row_per_split() {
    let dir = TempDir::new().unwrap();
    let x = gaussian_csv(dir.path(), "x", 100, 3, Some(50), 2);
    let tr = dir.path().join("tr.csv");
    let out = knncp(&[
        "detect", "--input", x.to_str().unwrap(), "--n0", "10", "--n1", "90",
        "--traces", tr.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&tr).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,r1,r2,z_w,z_diff,m"));
    assert_eq!(lines.count(), 81);
}

#[test]
fn graph_export_round_trips_through_graph_in() {
    let dir = TempDir::new().unwrap();
    let x = gaussian_csv(dir.path(), "x", 120, 3, Some(60), 8);
    let x = x.to_str().unwrap();
    let edges = dir.path().join("g.csv");
    let out = knncp(&["graph", "export", "--input", x, "--k", "4", "--output", edges.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&edges).unwrap();
    assert_eq!(text.lines().count(), 1 + 120 * 4);

    let direct = json(&knncp(&["detect", "--input", x, "--k", "4", "--seed", "1", "--json"]));
    let via = json(&knncp(&["detect", "--graph-in", edges.to_str().unwrap(), "--seed", "1", "--json"]));
    assert_eq!(direct["result"], via["result"]);
    assert!(via["input"]["d"].is_null());
}

#[test]
fn multiple_reports_each_change() {
    let dir = TempDir::new().unwrap();
    let x = gaussian_csv(dir.path(), "x", 300, 5, Some(150), 4);
    let out = knncp(&["detect", "--multiple", "--input", x.to_str().unwrap(), "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let cps: Vec<u64> = v["result"]["change_points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_u64().unwrap())
        .collect();
    assert!(cps.iter().any(|&c| c.abs_diff(150) <= 5), "{cps:?}");
}

#[test]
fn both_modes_agree_in_the_tail() {
    // Scan seeds for a homogeneous n = 1000 sample whose permutation
    // p-value lands where the tail approximation is meant to be used.
    let dir = TempDir::new().unwrap();
    let mut checked = 0;
    for seed in 0..80 {
        let x = gaussian_csv(dir.path(), "h", 1000, 10, None, 1000 + seed);
        let v = json(&knncp(&[
            "detect", "--input", x.to_str().unwrap(), "--mode", "both", "--permutations",
            "10000", "--json",
        ]));
        let pa = v["result"]["p_analytic"].as_f64().unwrap();
        let pp = v["result"]["p_perm"].as_f64().unwrap();
        if (0.01..=0.10).contains(&pp) {
            assert!((pa - pp).abs() <= 0.01, "seed {seed}: analytic {pa} perm {pp}");
            checked += 1;
            if checked == 2 {
                return;
            }
        }
    }
    assert!(checked > 0, "no seed produced a tail p-value");
}

fn critval(extra: &[&str]) -> Vec<(String, f64)> {
    let mut args = vec!["critval", "--preset", "table3", "--k", "3", "--n0", "100"];
    args.extend_from_slice(extra);
    let out = knncp(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    stdout(&out)
        .lines()
        .map(|l| {
            let (name, v) = l.split_once(' ').unwrap();
            (name.to_string(), v.trim().parse().unwrap())
        })
        .collect()
}

#[test]
fn critval_table3_preset() {
    let both = critval(&["--mode", "both", "--seed", "1"]);
    let ana = both[0].1;
    let perm = both[1].1;
    assert_eq!(both[0].0, "analytic");
    assert!((ana - 3.26).abs() <= 0.03, "analytic {ana}");
    assert!((ana - perm).abs() <= 0.05, "analytic {ana} permutation {perm}");

    let loose = critval(&["--alpha", "0.5", "--seed", "1"])[0].1;
    assert!(loose < ana);
}

#[test]
fn simulate_happy_path_and_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("study.conf");
    std::fs::write(&cfg, "study = size\nn = 100\ntau = 50\nd = 3\nreplicates = 8 # quick\n").unwrap();
    let csv = dir.path().join("out.csv");
    let out = knncp(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--set", "alphas=0.1,0.05", "--output",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("alpha,replicates,rejections,fraction,se"));
    assert_eq!(text.lines().count(), 3);

    let bad = knncp(&["simulate", "--preset", "tableVII-spot", "--set", "cases=9:25"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_scaled_size_table_within_three_se() {
    let out = knncp(&["simulate", "--preset", "tableV-scaled"]);
    assert!(out.status.success());
    let published = [(0.10, 0.100), (0.05, 0.051), (0.01, 0.011)];
    let text = stdout(&out);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for (row, (alpha, target)) in rows.iter().zip(published) {
        assert_eq!(row[0], alpha);
        let se = (target * (1.0 - target) / row[1]).sqrt();
        assert!((row[3] - target).abs() <= 3.0 * se, "alpha {alpha}: {} vs {target}", row[3]);
    }
}
