//! C interface to the sentitrade engine.
//!
//! Every fallible call returns an [`StStatus`]; on failure the message is
//! available from [`st_last_error`] on the same thread. Objects cross the
//! boundary as opaque handles that must be released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use sentitrade::backtest::{ideal_scenario, simulate_strategy, t_test, TradeLedger};
use sentitrade::featselect::vif_columns;
use sentitrade::ingest::{ColumnKind, FeatureMatrix};
use sentitrade::models::{predict, Direction};
use sentitrade::pipeline::{run, run_all, ModelArtifact, RunConfig, Stage};
use sentitrade::sentiment::daily_score;
use sentitrade::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Invalid configuration or malformed input data.
    Validation = 3,
    /// A pipeline stage ran before the stages it depends on.
    Dependency = 4,
    Runtime = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_of(e: &Error) -> StStatus {
    match e {
        Error::Config(_) | Error::Validation(_) | Error::Format { .. } => StStatus::Validation,
        Error::Dependency { .. } => StStatus::Dependency,
        Error::Argument(_) | Error::Range(_) => StStatus::InvalidArgument,
        _ => StStatus::Runtime,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (StStatus, String)>) -> StStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => StStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            StStatus::Panic
        }
    }
}

fn fail(e: Error) -> (StStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (StStatus, String) {
    (StStatus::NullPointer, format!("`{what}` is null"))
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], (StStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn string<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, (StStatus, String)> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| (StStatus::InvalidArgument, format!("`{what}` is not UTF-8")))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), (StStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn st_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            buf.add(n).write(0);
        }
        msg.len()
    })
}

/// `(pos - neg) / (pos + neu + neg)`; 0 when there are no posts.
#[no_mangle]
pub extern "C" fn st_daily_score(pos: u64, neu: u64, neg: u64) -> f64 {
    daily_score(pos, neu, neg)
}

/// One-sample t statistic and two-tailed p-value against a zero mean.
///
/// # Safety
/// `values` must point to `n` doubles; `t` and `p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn st_t_test(values: *const f64, n: usize, t: *mut f64, p: *mut f64) -> StStatus {
    guard(|| {
        let v = slice(values, n, "values")?;
        let (_, _, tv, pv) = t_test(v).map_err(fail)?;
        put(t, tv, "t")?;
        put(p, pv, "p")
    })
}

/// VIF of each column of a column-major `n_rows` x `n_cols` matrix, written
/// to `out` (`n_cols` doubles; infinity for an exact linear dependence).
///
/// # Safety
/// `data` must hold `n_rows * n_cols` doubles and `out` room for `n_cols`.
#[no_mangle]
pub unsafe extern "C" fn st_vif(data: *const f64, n_rows: usize, n_cols: usize, out: *mut f64) -> StStatus {
    guard(|| {
        let total = n_rows
            .checked_mul(n_cols)
            .ok_or((StStatus::InvalidArgument, "matrix size overflows".to_string()))?;
        let d = slice(data, total, "data")?;
        let cols: Vec<&[f64]> = (0..n_cols).map(|j| &d[j * n_rows..(j + 1) * n_rows]).collect();
        let v = vif_columns(&cols).map_err(fail)?;
        if out.is_null() {
            return Err(null("out"));
        }
        std::ptr::copy_nonoverlapping(v.as_ptr(), out, v.len());
        Ok(())
    })
}

/// Result of a simulated trading run.
pub struct StLedger(TradeLedger);

fn directions(raw: &[i8]) -> Vec<Direction> {
    raw.iter().map(|&d| if d > 0 { Direction::Up } else { Direction::Down }).collect()
}

/// Trades `closes` following `dirs` (positive = up, otherwise down; length
/// `n` or `n - 1`).
///
/// # Safety
/// `closes` must hold `n` doubles, `dirs` `n_dirs` bytes, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn st_simulate(
    closes: *const f64,
    n: usize,
    dirs: *const i8,
    n_dirs: usize,
    cost_rate: f64,
    initial: f64,
    out: *mut *mut StLedger,
) -> StStatus {
    guard(|| {
        let c = slice(closes, n, "closes")?;
        let d = directions(slice(dirs, n_dirs, "dirs")?);
        let l = simulate_strategy(c, &d, cost_rate, initial).map_err(fail)?;
        put(out, Box::into_raw(Box::new(StLedger(l))), "out")
    })
}

/// Best achievable schedule with perfect foresight.
///
/// # Safety
/// `closes` must hold `n` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn st_ideal(closes: *const f64, n: usize, cost_rate: f64, initial: f64, out: *mut *mut StLedger) -> StStatus {
    guard(|| {
        let c = slice(closes, n, "closes")?;
        let l = ideal_scenario(c, cost_rate, initial).map_err(fail)?;
        put(out, Box::into_raw(Box::new(StLedger(l))), "out")
    })
}

/// # Safety
/// `ledger` must come from this library and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn st_ledger_final_value(ledger: *const StLedger) -> f64 {
    ledger.as_ref().map_or(f64::NAN, |l| l.0.final_value)
}

/// # Safety
/// `ledger` must come from this library and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn st_ledger_transactions(ledger: *const StLedger) -> usize {
    ledger.as_ref().map_or(0, |l| l.0.transactions())
}

/// # Safety
/// `ledger` must come from this library and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn st_ledger_total_cost(ledger: *const StLedger) -> f64 {
    ledger.as_ref().map_or(f64::NAN, |l| l.0.total_cost())
}

/// # Safety
/// `ledger` must be null or come from this library; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn st_ledger_free(ledger: *mut StLedger) {
    if !ledger.is_null() {
        drop(Box::from_raw(ledger));
    }
}

/// A validated run configuration.
pub struct StConfig(RunConfig);

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn st_config_load(path: *const c_char, out: *mut *mut StConfig) -> StStatus {
    guard(|| {
        let p = string(path, "path")?;
        let cfg = RunConfig::load(Path::new(p)).map_err(fail)?;
        put(out, Box::into_raw(Box::new(StConfig(cfg))), "out")
    })
}

/// Runs one stage by name, or every stage for `"all"`.
///
/// # Safety
/// `config` must come from `st_config_load`; `stage` must be a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn st_run(config: *const StConfig, stage: *const c_char) -> StStatus {
    guard(|| {
        let cfg = config.as_ref().ok_or_else(|| null("config"))?;
        let name = string(stage, "stage")?;
        if name == "all" {
            run_all(&cfg.0).map_err(fail)?;
        } else {
            let s: Stage = name.parse().map_err(fail)?;
            run(&cfg.0, &[s]).map_err(fail)?;
        }
        Ok(())
    })
}

/// # Safety
/// `config` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn st_config_free(config: *mut StConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// A trained model read from a train-stage artifact.
pub struct StModel(ModelArtifact);

/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn st_model_load(path: *const c_char, out: *mut *mut StModel) -> StStatus {
    guard(|| {
        let p = string(path, "path")?;
        let text = std::fs::read_to_string(p).map_err(|e| (StStatus::Runtime, format!("{p}: {e}")))?;
        let art: ModelArtifact =
            serde_json::from_str(&text).map_err(|e| (StStatus::Validation, format!("{p}: {e}")))?;
        put(out, Box::into_raw(Box::new(StModel(art))), "out")
    })
}

/// Number of feature columns the model expects.
///
/// # Safety
/// `model` must come from this library and not yet be freed.
#[no_mangle]
pub unsafe extern "C" fn st_model_n_features(model: *const StModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.model.manifest.len())
}

/// Predicted direction (1 up, 0 down) for each row of a row-major matrix
/// whose columns follow the model's training order.
///
/// # Safety
/// `data` must hold `n_rows * n_cols` doubles and `out` room for `n_rows`.
#[no_mangle]
pub unsafe extern "C" fn st_model_predict(
    model: *const StModel,
    data: *const f64,
    n_rows: usize,
    n_cols: usize,
    out: *mut i8,
) -> StStatus {
    guard(|| {
        let m = &model.as_ref().ok_or_else(|| null("model"))?.0.model;
        if n_cols != m.manifest.len() {
            return Err((
                StStatus::InvalidArgument,
                format!("model expects {} columns, got {n_cols}", m.manifest.len()),
            ));
        }
        let total = n_rows
            .checked_mul(n_cols)
            .ok_or((StStatus::InvalidArgument, "matrix size overflows".to_string()))?;
        let d = slice(data, total, "data")?;
        // rows only need distinct increasing dates
        let day0 = chrono::NaiveDate::default();
        let dates = (0..n_rows).map(|i| day0 + chrono::Days::new(i as u64)).collect();
        let mut fm = FeatureMatrix::new(dates, vec![0.0; n_rows]).map_err(fail)?;
        for (j, name) in m.manifest.iter().enumerate() {
            let col = (0..n_rows).map(|i| d[i * n_cols + j]).collect();
            fm.push_column(name.clone(), ColumnKind::Continuous, col).map_err(fail)?;
        }
        let dirs = predict(m, &fm).map_err(fail)?.directions();
        if out.is_null() && n_rows > 0 {
            return Err(null("out"));
        }
        for (i, d) in dirs.iter().enumerate() {
            out.add(i).write(if *d == Direction::Up { 1 } else { 0 });
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn st_model_free(model: *mut StModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}
