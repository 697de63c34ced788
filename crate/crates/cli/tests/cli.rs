use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sos_core::io::{read_factors, read_matrix, write_factors, write_tensor_bin, write_tensor_json};
use sos_core::tensor::{project_antihermitian, CoeffTensor4, Convention};
use sos_core::C64;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sos-compress"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

/// Deterministic antihermitian ladder tensor with no particular structure.
fn ladder(n: usize, seed: f64) -> CoeffTensor4 {
    let mut k = 0.0;
    let raw = CoeffTensor4::from_fn(n, Convention::PqrsLadder, |_, _, _, _| {
        k += 1.0;
        C64::new((k * 1.37 + seed).sin(), (k * 0.71 + 2.0 * seed).cos())
    });
    project_antihermitian(&raw)
}

fn write(dir: &Path, name: &str, t: &CoeffTensor4) -> PathBuf {
    let p = dir.join(name);
    write_tensor_json(&p, t).unwrap();
    p
}

fn csv_column(path: &Path, col: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == col).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn zero_tensor_gives_empty_factor_file() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "zero.json", &CoeffTensor4::zeros(4, Convention::PqrsLadder));
    let out = dir.path().join("out");
    let o = run(&["decompose", "--method", "takagi", s(&input), "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read_factors(&out.join("factors.json")).unwrap().factors.is_empty());
}

#[test]
fn takagi_verifies_and_deleting_a_factor_fails() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "t.json", &ladder(4, 0.3));
    let out = dir.path().join("tk");
    let o = run(&["decompose", "--method", "takagi", s(&input), "--out-dir", s(&out), "--verify", "--tol", "1e-10"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let factors = out.join("factors.json");

    let o = run(&["oracle-verify", s(&input), s(&factors)]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("op_error") && stdout.contains("trotter_error"));

    let mut list = read_factors(&factors).unwrap().factors;
    list.remove(0);
    let broken = dir.path().join("broken.json");
    write_factors(&broken, &list, None).unwrap();
    let o = run(&["oracle-verify", s(&input), s(&broken), "--mode", "exact-sum"]);
    assert_eq!(code(&o), 1);
    let line = String::from_utf8(o.stdout).unwrap();
    let err: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(err > 1e-6);
}

#[test]
fn svd_and_sz_adapted_runs_verify() {
    let dir = TempDir::new().unwrap();
    let t = project_antihermitian(&CoeffTensor4::from_fn(4, Convention::PqrsLadder, |p, q, r, u| {
        if p % 2 + q % 2 == r % 2 + u % 2 {
            C64::new(((p + 2 * q + 3 * r + 5 * u) as f64).sin(), (p * u) as f64 * 0.1)
        } else {
            C64::new(0.0, 0.0)
        }
    }));
    let input = write(dir.path(), "t.json", &t);
    for (method, sz) in [("svd", false), ("takagi", true), ("svd", true)] {
        let out = dir.path().join(format!("{method}{sz}"));
        let mut args = vec!["decompose", "--method", method, s(&input), "--out-dir", s(&out)];
        if sz {
            args.push("--sz-adapted");
        }
        let o = run(&args);
        assert_eq!(code(&o), 0, "{method} {sz}: {}", String::from_utf8_lossy(&o.stderr));
        let list = read_factors(&out.join("factors.json")).unwrap();
        assert_eq!(list.annotations.is_some(), sz);
        let o = run(&[
            "oracle-verify",
            s(&input),
            s(&out.join("factors.json")),
            "--one-body",
            s(&out.join("one_body.json")),
        ]);
        assert_eq!(code(&o), 0, "{method} {sz}: {}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn uc_report_is_monotone_and_reproducible() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "t.json", &ladder(4, 1.1));
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = run(&[
            "decompose", "--method", "uc", s(&input), "--threshold", "1e-5", "--seed", "3", "--restarts", "1",
            "--out-dir", s(out),
        ]);
        assert!(matches!(code(&o), 0 | 2), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let l2 = csv_column(&a.join("report.csv"), "residual_l2");
    assert!(!l2.is_empty());
    assert!(l2.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)), "{l2:?}");
    assert_eq!(
        std::fs::read(a.join("factors.json")).unwrap(),
        std::fs::read(b.join("factors.json")).unwrap()
    );
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["method"], "uc");
    assert_eq!(manifest["config"]["init"], "random");
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["rows"].as_array().unwrap().len(), l2.len());
    assert_eq!(manifest["library_version"], sos_core::VERSION);
    read_matrix(&a.join("one_body.json")).unwrap();
}

#[test]
fn exhausting_max_factors_exits_2() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "t.json", &ladder(4, 0.7));
    for method in ["uc-takagi", "takagi"] {
        let out = dir.path().join(method);
        let o = run(&["decompose", "--method", method, s(&input), "--max-factors", "1", "--out-dir", s(&out)]);
        assert_eq!(code(&o), 2, "{method}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(read_factors(&out.join("factors.json")).unwrap().factors.len(), 1);
    }
}

#[test]
fn compile_one_factor_gives_three_layers() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "t.json", &ladder(4, 0.2));
    let out = dir.path().join("tk");
    run(&["decompose", s(&input), "--out-dir", s(&out)]);
    let mut list = read_factors(&out.join("factors.json")).unwrap().factors;
    list.truncate(1);
    let one = dir.path().join("one.json");
    write_factors(&one, &list, None).unwrap();
    let o = run(&["compile", s(&one), "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 0);
    let ir: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("circuit.json")).unwrap()).unwrap();
    assert_eq!(ir["layers"].as_array().unwrap().len(), 3);
    assert_eq!(ir["version"], 1);
    let depth = csv_column(&dir.path().join("circuit_stats.csv"), "cumulative_depth");
    assert_eq!(depth.len(), 1);
}

#[test]
fn errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["decompose", s(&missing), "--out-dir", s(dir.path())])), 1);

    let bin_input = dir.path().join("t.bin");
    write_tensor_bin(&bin_input, &ladder(4, 0.5)).unwrap();
    assert_eq!(code(&run(&["decompose", s(&bin_input), "--out-dir", s(dir.path())])), 1);
    let o = run(&["decompose", s(&bin_input), "--convention", "pqrs-ladder", "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 0);

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "[{\"mu\": 1}]").unwrap();
    let input = write(dir.path(), "t.json", &ladder(4, 0.5));
    assert_eq!(code(&run(&["oracle-verify", s(&input), s(&garbage)])), 1);
}

#[test]
fn oracle_cap_is_read_from_the_environment() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "t.json", &ladder(4, 0.9));
    let o = bin()
        .args(["decompose", s(&input), "--verify", "--out-dir", s(dir.path())])
        .env("SOS_COMPRESS_ORACLE_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap 3"));
}

#[test]
fn integrals_run_through_cholesky_and_uc() {
    let dir = TempDir::new().unwrap();
    let eri = fixture("pi10_eri.json");
    let ch = dir.path().join("ch");
    let o = run(&["decompose", "--method", "cholesky", s(&eri), "--max-factors", "4", "--out-dir", s(&ch)]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let uc = dir.path().join("uc");
    let o = run(&[
        "decompose", "--method", "uc-takagi", s(&eri), "--max-factors", "4", "--restarts", "0", "--out-dir", s(&uc),
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let mad_ch = csv_column(&ch.join("report.csv"), "residual_mad");
    let mad_uc = csv_column(&uc.join("report.csv"), "residual_mad");
    assert_eq!(mad_uc.len(), 4);
    assert!(mad_uc[3] < mad_ch[3]);
    assert_eq!(code(&run(&["decompose", "--method", "takagi", s(&eri), "--out-dir", s(&uc)])), 1);
}

#[test]
fn energy_column_tracks_the_fixture() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "decompose",
        s(&fixture("hf_sto3g_t2ab.json")),
        "--energy-fixture",
        s(&fixture("hf_sto3g_v.json")),
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0);
    let e = csv_column(&dir.path().join("report.csv"), "cum_cc_energy_error");
    assert!(e[0] > 1e-3);
    assert!(*e.last().unwrap() < 1e-12);
}
