use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn abplab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abplab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("ABPLAB_OUT")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn constants_ledger_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = abplab(&["constants", "--K", "0", "--N", "2", "--R", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&dir.path().join("constants.json"));
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["reports"].as_array().unwrap().len(), 5);
    assert_eq!(doc["data"]["alpha"], 2.0);
}

#[test]
fn abp_equality_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = abplab(&["abp-check", "--model", "euclidean", "--u", "quadratic", "--b", "1", "--a", "1", "--resolution", "128"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&dir.path().join("abp_check.json"));
    let eq = doc["reports"].as_array().unwrap().iter().find(|r| r["name"] == "abp.equality").unwrap().clone();
    assert!(eq["lhs"].as_f64().unwrap() <= 1e-3);
}

#[test]
fn malformed_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    let out = dir.path().join("out");
    for text in ["{\"experiment\": \"hfun\", \"d\": [0.5], \"unknown\": 1}", "{not json", "{\"experiment\": \"hfun\", \"d\": [9.0]}"] {
        fs::write(&cfg, text).unwrap();
        let o = abplab(&["run", "--config", cfg.to_str().unwrap()], &out);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none(), "{text}");
    }
    let o = abplab(&["constants", "--N", "1.5"], &out);
    assert_eq!(o.status.code(), Some(2));
    let o = abplab(&["hfun", "--model", "torus"], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_runs_like_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"experiment": "constants", "params": {"K": 1, "N": 3, "R": 1}, "format": "csv"}"#).unwrap();
    let a = dir.path().join("a");
    assert_eq!(abplab(&["run", "--config", cfg.to_str().unwrap()], &a).status.code(), Some(0));
    let b = dir.path().join("b");
    assert_eq!(abplab(&["constants", "--K", "1", "--N", "3", "--R", "1", "--format", "csv"], &b).status.code(), Some(0));
    for f in ["constants.csv", "constants_data.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
}

/// Recomputes `pass` from each CSV row.
fn check_round_trip(path: &Path) -> usize {
    let mut rd = csv::Reader::from_path(path).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["name", "anchor", "lhs", "rhs", "tol", "pass"]);
    let mut failing = 0;
    for row in rd.records() {
        let row = row.unwrap();
        let f = |i: usize| row[i].parse::<f64>().unwrap();
        let pass: bool = row[5].parse().unwrap();
        let (lhs, rhs, tol) = (f(2), f(3), f(4));
        let again = if lhs.is_nan() || rhs.is_nan() { false } else { rhs == f64::INFINITY || lhs <= rhs + tol };
        assert_eq!(pass, again, "{row:?}");
        failing += usize::from(!pass);
    }
    failing
}

#[test]
fn csv_round_trip_reproduces_pass_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = abplab(&["constants", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(check_round_trip(&dir.path().join("constants.csv")), 0);
    let o = abplab(&["harnack-check", "--theorem", "growth", "--format", "csv", "--R", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(check_round_trip(&dir.path().join("harnack_check.csv")), 0);
    // an exponent below p0 has no explicit constant
    let o = abplab(&["harnack-check", "--theorem", "sub", "--p", "1e-300", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(check_round_trip(&dir.path().join("harnack_check.csv")), 1);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["doubling", "--samples", "5", "--seed", "9"],
        &["contact", "--model", "hyperbolic", "--resolution", "32", "--seed", "4"],
        &["abp-check", "--model", "sphere", "--samples", "3", "--resolution", "32", "--seed", "4"],
    ];
    for args in runs {
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        assert_eq!(abplab(args, &a).status.code(), Some(0), "{args:?}");
        assert_eq!(abplab(args, &b).status.code(), Some(0), "{args:?}");
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for n in names {
            assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{args:?} {n:?}");
        }
        fs::remove_dir_all(&a).unwrap();
        fs::remove_dir_all(&b).unwrap();
    }
}

#[test]
fn env_overrides_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("env");
    let flag_dir = dir.path().join("flag");
    let o = Command::new(env!("CARGO_BIN_EXE_abplab"))
        .args(["constants", "--K", "0", "--N", "2", "--R", "1", "--out"])
        .arg(&flag_dir)
        .env("ABPLAB_OUT", &env_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(env_dir.join("constants.json").exists());
    assert!(!flag_dir.exists());
}

#[test]
fn hfun_sweep_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let o = abplab(&["hfun", "--model", "hyperbolic", "--k", "2", "--samples", "6", "--resolution", "64"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let mut rd = csv::Reader::from_path(dir.path().join("hfun.csv")).unwrap();
    let mut n = 0;
    for row in rd.records() {
        let row = row.unwrap();
        let (closed, numeric): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert!((closed - numeric).abs() <= 1e-3 * closed);
        n += 1;
    }
    assert_eq!(n, 6);
    let plot = fs::read_to_string(dir.path().join("hfun_numeric.dat")).unwrap();
    assert!(plot.lines().all(|l| l.split_whitespace().count() == 2));
}
