//! End-to-end tests of the `tfpsi` binary and the file formats: round-trip
//! guarantees, parse diagnostics, exit codes, and config precedence.  The
//! cross-thread determinism sweep lives in the acceptance suite.

use std::path::PathBuf;
use std::process::{Command, Output};

use nalgebra::DMatrix;
use tfpsi_cli::io;
use tfpsi_core::phase::{Signal, Symbol};
use tfpsi_core::util::{C64, SeededRng};
use tfpsi_core::Error;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_tfpsi")
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("tfpsi-cli-{}-{tag}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("create scratch dir");
    dir
}

fn run(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    match threads {
        Some(t) => {
            cmd.env("TFPSI_THREADS", t.to_string());
        }
        None => {
            cmd.env_remove("TFPSI_THREADS");
        }
    }
    cmd.output().expect("spawn tfpsi")
}

fn seeded_signal(n: usize, seed: u64) -> Signal {
    let mut rng = SeededRng::new(seed);
    Signal::from_fn(n, |_| rng.complex_gaussian()).unwrap()
}

fn seeded_symbol(n: usize, seed: u64) -> Symbol {
    let mut rng = SeededRng::new(seed);
    let vals: Vec<C64> = (0..n * n).map(|_| rng.complex_gaussian()).collect();
    Symbol::from_fn(n, |x, xi| vals[x * n + xi]).unwrap()
}

fn assert_bits_eq(a: &[C64], b: &[C64]) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.re.to_bits(), y.re.to_bits());
        assert_eq!(x.im.to_bits(), y.im.to_bits());
    }
}

// -------------------------------------------------------------------------
// file formats
// -------------------------------------------------------------------------

#[test]
fn signal_round_trips_through_csv_and_bin() {
    let dir = scratch("sig-rt");
    let f = seeded_signal(33, 0x10ad);
    for name in ["f.csv", "f.bin"] {
        let path = dir.join(name);
        io::save_signal(&f, path.to_str().unwrap()).unwrap();
        let back = io::load_signal(path.to_str().unwrap()).unwrap();
        assert_bits_eq(f.values(), back.values());
    }
}

#[test]
fn symbol_round_trips_through_csv_and_bin() {
    let dir = scratch("sym-rt");
    let sigma = seeded_symbol(15, 0x10ad + 1);
    for name in ["s.csv", "s.bin"] {
        let path = dir.join(name);
        io::save_symbol(&sigma, path.to_str().unwrap()).unwrap();
        let back = io::load_symbol(path.to_str().unwrap()).unwrap();
        assert_bits_eq(sigma.values(), back.values());
    }
}

#[test]
fn matrix_round_trips_through_csv_and_bin() {
    let dir = scratch("mat-rt");
    let mut rng = SeededRng::new(0x10ad + 2);
    let m = DMatrix::from_fn(7, 5, |_, _| rng.complex_gaussian());
    for name in ["m.csv", "m.bin"] {
        let path = dir.join(name);
        io::save_matrix(&m, path.to_str().unwrap()).unwrap();
        let back = io::load_matrix(path.to_str().unwrap()).unwrap();
        assert_eq!(back.nrows(), 7);
        assert_eq!(back.ncols(), 5);
        assert_bits_eq(m.as_slice(), back.as_slice());
    }
}

#[test]
fn malformed_rows_name_the_line_and_field() {
    let dir = scratch("bad-csv");
    let path = dir.join("bad.csv");

    std::fs::write(&path, "index,re,im\n0,1.0\n").unwrap();
    match io::load_signal(path.to_str().unwrap()) {
        Err(Error::Parse { line, msg, .. }) => {
            assert_eq!(line, 2);
            assert!(msg.contains("3"), "should name the expected count: {msg}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }

    std::fs::write(&path, "index,re,im\n0,1.0,zero\n").unwrap();
    match io::load_signal(path.to_str().unwrap()) {
        Err(Error::Parse { line, msg, .. }) => {
            assert_eq!(line, 2);
            assert!(msg.contains("`im`"), "should name the field: {msg}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn even_length_signals_are_rejected_on_load() {
    let dir = scratch("even");
    let path = dir.join("even.csv");
    std::fs::write(&path, "index,re,im\n0,1.0,0.0\n1,2.0,0.0\n").unwrap();
    match io::load_signal(path.to_str().unwrap()) {
        Err(Error::InvalidParameter(msg)) => {
            assert!(msg.contains("odd"), "unexpected message: {msg}")
        }
        other => panic!("expected rejection of even length, got {other:?}"),
    }
}

#[test]
fn binary_header_type_mismatch_is_reported() {
    let dir = scratch("bin-type");
    let f = seeded_signal(9, 3);
    let path = dir.join("f.bin");
    io::save_signal(&f, path.to_str().unwrap()).unwrap();
    match io::load_symbol(path.to_str().unwrap()) {
        Err(Error::Parse { msg, .. }) => {
            assert!(msg.contains("type"), "unexpected message: {msg}")
        }
        other => panic!("expected a header type error, got {other:?}"),
    }
}

// -------------------------------------------------------------------------
// exit codes and configuration
// -------------------------------------------------------------------------

#[test]
fn even_dimension_is_a_usage_error() {
    let dir = scratch("even-n");
    let out = run(
        &["frame", "--n", "34", "--out", dir.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("n:"), "stderr should name the field: {err}");
}

#[test]
fn non_frame_window_fails_numerically_with_exit_2() {
    let dir = scratch("no-frame");
    let out = run(
        &[
            "frame",
            "--window",
            "delta",
            "--out",
            dir.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("isFrame"), "stderr names the metric: {err}");
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(report.contains("\"pass\": false"));
}

#[test]
fn delta_window_generates_a_frame_on_a_denser_lattice() {
    let dir = scratch("delta-frame");
    let out = run(
        &[
            "frame",
            "--window",
            "delta",
            "--alpha",
            "1",
            "--beta",
            "3",
            "--out",
            dir.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = scratch("cfg-prec");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 15, "seed": 11}"#).unwrap();
    let out = run(
        &[
            "covariance",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "12",
            "--out",
            dir.to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{:?}", out);
    let report = std::fs::read_to_string(dir.join("report.json")).unwrap();
    assert!(report.contains("\"n\": 15"), "file value survives");
    assert!(report.contains("\"seed\": 12"), "flag wins over file");
}

#[test]
fn unknown_config_fields_are_named() {
    let dir = scratch("cfg-unknown");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"dimension": 15}"#).unwrap();
    let out = run(&["frame", "--config", cfg.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("dimension"), "names the bad field: {err}");
}

#[test]
fn help_exits_cleanly() {
    let out = run(&["--help"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for suite in ["frame", "covariance", "aldiag", "appendix"] {
        assert!(text.contains(suite), "--help lists {suite}");
    }
}
