use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use l1sketch::SparseCodebook;

fn l1sketch(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_l1sketch")).args(args).output().expect("binary runs")
}

fn run_to(args: &[&str], out: &Path) -> Output {
    let mut full = args.to_vec();
    let out = out.to_str().unwrap();
    full.extend(["--out", out]);
    l1sketch(&full)
}

#[test]
fn verify_lemmas_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let out = run_to(&["verify-lemmas", "--seed", "42", "--trials", "20000", "--matrix-trials", "2000"], path);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let first = fs::read(&a).unwrap();
    assert!(first.starts_with(b"check,params,observed,reference,tolerance,pass\n"));
    assert_eq!(first, fs::read(&b).unwrap());
}

#[test]
fn different_seeds_change_the_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(run_to(&["protocol-sim", "--seed", "1", "--trials", "10"], &a).status.success());
    assert!(run_to(&["protocol-sim", "--seed", "2", "--trials", "10"], &b).status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn bounds_row_for_n1024() {
    let out = l1sketch(&["bounds", "--n", "1024", "--k", "1", "--C", "1"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,k,C,q,gamma,det_lower_bound,gv_log2_size_bound,codebook_size,pigeonhole_threshold"
    );
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    let bound: f64 = fields[5].parse().unwrap();
    assert!((bound - 1.55).abs() < 0.005, "{bound}");
}

#[test]
fn codebook_file_has_gv_size_and_distance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("code.txt");
    let out = run_to(&["codebook", "--q", "16", "--k", "4", "--eps", "0.5"], &path);
    assert!(out.status.success());
    let code = SparseCodebook::from_text(&fs::read_to_string(&path).unwrap()).unwrap();
    assert!(code.len() >= 1075);
    assert_eq!(code.n(), 64);
    // q-ary distance 2 is binary distance 4
    assert_eq!(code.min_pairwise_distance(), Some(4));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nseed = 5\ntrials = 8\noracle = zero\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(run_to(&["protocol-sim", "--config", cfg, "--seed", "9"], &a).status.success());
    assert!(run_to(&["protocol-sim", "--seed", "9", "--trials", "8", "--oracle", "zero"], &b).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn protocol_csv_has_summary_row() {
    let out = l1sketch(&["protocol-sim", "--trials", "5", "--seed", "3"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 + 1);
    assert!(csv.lines().last().unwrap().starts_with("summary,"));
}

#[test]
fn invalid_config_exits_with_2() {
    let out = l1sketch(&["bounds", "--n", "8", "--k", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let out = l1sketch(&["protocol-sim", "--oracle", "psychic"]);
    assert_eq!(out.status.code(), Some(2));
    let out = l1sketch(&["codebook", "--q", "sixteen"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn violated_bound_exits_with_3() {
    let out = l1sketch(&["recover-experiment", "--q", "16", "--trials", "20", "--min-success", "1.5"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}
