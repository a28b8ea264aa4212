use std::ffi::{c_char, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use sentitrade::pipeline::synthetic::{generate, SynthOptions};
use sentitrade::pipeline::RunConfig;
use sentitrade_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { st_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(511)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn ledger_round_trip() {
    let closes = [100.0, 110.0, 105.0, 115.0];
    let dirs = [1i8, 0, 1];
    let mut l = ptr::null_mut();
    let s = unsafe { st_simulate(closes.as_ptr(), 4, dirs.as_ptr(), 3, 0.002, 1000.0, &mut l) };
    assert_eq!(s, StStatus::Ok);
    unsafe {
        assert_eq!(format!("{:.2}", st_ledger_final_value(l)), "1197.55");
        assert_eq!(st_ledger_transactions(l), 3);
        assert!((st_ledger_total_cost(l) - 6.3868).abs() < 1e-3);
        st_ledger_free(l);
    }
    let mut best = ptr::null_mut();
    assert_eq!(unsafe { st_ideal(closes.as_ptr(), 4, 0.0, 1000.0, &mut best) }, StStatus::Ok);
    unsafe {
        assert_eq!(format!("{:.2}", st_ledger_final_value(best)), "1204.76");
        st_ledger_free(best);
    }
}

#[test]
fn errors_carry_status_and_message() {
    let mut l = ptr::null_mut();
    let s = unsafe { st_simulate(ptr::null(), 3, ptr::null(), 0, 0.0, 1000.0, &mut l) };
    assert_eq!(s, StStatus::NullPointer);
    assert!(last_error().contains("closes"));
    assert!(l.is_null());

    let closes = [100.0, 101.0, 102.0];
    let dirs = [1i8];
    let s = unsafe { st_simulate(closes.as_ptr(), 3, dirs.as_ptr(), 1, 0.0, 1000.0, &mut l) };
    assert_eq!(s, StStatus::InvalidArgument);
    assert!(!last_error().is_empty());

    // a short buffer is truncated but still terminated
    let mut small = [1 as c_char; 4];
    let full = unsafe { st_last_error(small.as_mut_ptr(), 4) };
    assert!(full > 3);
    assert_eq!(small[3], 0);

    unsafe {
        st_ledger_free(ptr::null_mut());
        st_config_free(ptr::null_mut());
        st_model_free(ptr::null_mut());
        assert!(st_ledger_final_value(ptr::null()).is_nan());
    }
}

#[test]
fn statistics_and_vif() {
    let g = [0.1, 0.2, 0.3];
    let (mut t, mut p) = (0.0, 0.0);
    assert_eq!(unsafe { st_t_test(g.as_ptr(), 3, &mut t, &mut p) }, StStatus::Ok);
    assert!((t - 3.4641).abs() < 1e-3);
    assert!(p > 0.0 && p < 0.1);
    assert_eq!(st_daily_score(3, 1, 1), 0.4);
    assert_eq!(st_daily_score(0, 0, 0), 0.0);

    // column-major: a, b, a + b
    let a = [1.0, 2.0, 4.0, 3.0, 7.0, 5.0];
    let b = [0.5, -1.0, 2.0, 0.0, 1.0, 3.0];
    let mut data: Vec<f64> = a.to_vec();
    data.extend(b);
    data.extend(a.iter().zip(&b).map(|(x, y)| x + y));
    let mut out = [0.0; 3];
    assert_eq!(unsafe { st_vif(data.as_ptr(), 6, 3, out.as_mut_ptr()) }, StStatus::Ok);
    assert!(out.iter().all(|v| v.is_infinite()));
}

#[test]
fn pipeline_and_model_handles() {
    let tmp = tempfile::tempdir().unwrap();
    let files = generate(tmp.path(), &SynthOptions::default()).unwrap();
    let path = CString::new(files.btc.to_str().unwrap()).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(unsafe { st_config_load(path.as_ptr(), &mut cfg) }, StStatus::Ok);
    let stage = CString::new("backtest").unwrap();
    assert_eq!(unsafe { st_run(cfg, stage.as_ptr()) }, StStatus::Dependency);
    assert!(last_error().contains("backtest"));
    let bogus = CString::new("bogus").unwrap();
    assert_eq!(unsafe { st_run(cfg, bogus.as_ptr()) }, StStatus::InvalidArgument);
    let all = CString::new("all").unwrap();
    assert_eq!(unsafe { st_run(cfg, all.as_ptr()) }, StStatus::Ok);
    unsafe { st_config_free(cfg) };

    let missing = CString::new(tmp.path().join("none.toml").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { st_config_load(missing.as_ptr(), &mut cfg) }, StStatus::Validation);

    let run = RunConfig::load(&files.btc).unwrap().out();
    let model_path = CString::new(run.join("train/models/ridge.json").to_str().unwrap()).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { st_model_load(model_path.as_ptr(), &mut m) }, StStatus::Ok);
    let p = unsafe { st_model_n_features(m) };
    assert_eq!(p, 178);

    // same directions as the in-process prediction on the matrix rows
    let matrix = sentitrade::ingest::read_matrix(&run.join("features/matrix.csv")).unwrap();
    let rows = matrix.slice_rows(matrix.n_rows() - 20, matrix.n_rows());
    let flat: Vec<f64> = rows.rows().concat();
    let mut dirs = vec![-1i8; 20];
    assert_eq!(unsafe { st_model_predict(m, flat.as_ptr(), 20, p, dirs.as_mut_ptr()) }, StStatus::Ok);
    let art: sentitrade::pipeline::ModelArtifact =
        serde_json::from_str(&std::fs::read_to_string(run.join("train/models/ridge.json")).unwrap()).unwrap();
    let want: Vec<i8> = sentitrade::models::predict(&art.model, &rows)
        .unwrap()
        .directions()
        .iter()
        .map(|d| i8::from(*d == sentitrade::models::Direction::Up))
        .collect();
    assert_eq!(dirs, want);
    assert_eq!(
        unsafe { st_model_predict(m, flat.as_ptr(), 20, p - 1, dirs.as_mut_ptr()) },
        StStatus::InvalidArgument
    );
    unsafe { st_model_free(m) };
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/sentitrade.h")
}

#[test]
fn header_declares_every_export() {
    let h = std::fs::read_to_string(header()).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for f in exports {
        assert!(h.contains(&format!("{f}(")), "{f} missing from header");
    }
    for t in ["typedef struct StLedger StLedger", "typedef struct StConfig StConfig", "typedef struct StModel StModel"] {
        assert!(h.contains(t));
    }
}

#[test]
fn c_program_links_against_static_library() {
    // target/<profile>/deps/<test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libsentitrade_ffi.a");
    assert!(lib.is_file(), "{} not built", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let c = tmp.path().join("main.c");
    std::fs::write(
        &c,
        r#"#include <stdio.h>
#include "sentitrade.h"
int main(void) {
    double closes[4] = {100.0, 110.0, 105.0, 115.0};
    int8_t dirs[3] = {1, 0, 1};
    StLedger *l = NULL;
    if (st_simulate(closes, 4, dirs, 3, 0.002, 1000.0, &l) != ST_STATUS_OK) return 1;
    printf("%.2f %zu\n", st_ledger_final_value(l), st_ledger_transactions(l));
    st_ledger_free(l);
    if (st_simulate(NULL, 4, dirs, 3, 0.002, 1000.0, &l) != ST_STATUS_NULL_POINTER) return 2;
    char msg[64];
    st_last_error(msg, sizeof msg);
    printf("%s\n", msg);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = tmp.path().join("main");
    let out = Command::new("cc")
        .arg(&c)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .expect("a C compiler is available");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success());
    assert_eq!(String::from_utf8(run.stdout).unwrap(), "1197.55 3\n`closes` is null\n");
}
