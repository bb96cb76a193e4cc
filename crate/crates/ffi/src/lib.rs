//! C ABI over the `qkdnet` library.
//!
//! Every fallible call returns a [`QkdStatus`] and writes its result through
//! an out-pointer. Objects are opaque handles released with the matching
//! `_free` function. After a non-OK status, [`qkd_last_error`] describes the
//! failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use qkdnet::bb84::secure_rate_bb84;
use qkdnet::common::{Profile, ProtocolParams};
use qkdnet::error::Error;
use qkdnet::experiment::{sweep_and_summarize, write_outputs, ExperimentConfig};
use qkdnet::graph::{generate, GraphSpec, NetworkGraph};
use qkdnet::pathloss::{build_loss_table, LossModel};
use qkdnet::placement::{GraphCapacities, RateModels, Solution};
use qkdnet::tf::{TfModel, TfRateCache};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Disconnected = 3,
    Io = 4,
    Parse = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdProfile {
    Hot = 0,
    Cold = 1,
}

impl From<QkdProfile> for Profile {
    fn from(p: QkdProfile) -> Self {
        match p {
            QkdProfile::Hot => Profile::Hot,
            QkdProfile::Cold => Profile::Cold,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QkdSolution {
    Bb84Uncooled = 0,
    Bb84Cooled = 1,
    TfUncooled = 2,
    TfCooled = 3,
}

impl From<QkdSolution> for Solution {
    fn from(s: QkdSolution) -> Self {
        match s {
            QkdSolution::Bb84Uncooled => Solution::Bb84Uncooled,
            QkdSolution::Bb84Cooled => Solution::Bb84Cooled,
            QkdSolution::TfUncooled => Solution::TfUncooled,
            QkdSolution::TfCooled => Solution::TfCooled,
        }
    }
}

/// Twin-field rate evaluator with a private memo table.
pub struct QkdTfModel(TfRateCache);

pub struct QkdGraph(NetworkGraph);

/// Capacities of the four solutions on one graph.
pub struct QkdAnalysis(GraphCapacities);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: QkdStatus, msg: impl Into<String>) -> QkdStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> QkdStatus {
    match e {
        Error::Disconnected { .. } => QkdStatus::Disconnected,
        Error::Io { .. } => QkdStatus::Io,
        Error::Json(_) | Error::Csv(_) => QkdStatus::Parse,
        _ => QkdStatus::InvalidArgument,
    }
}

/// Run `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), QkdStatus>) -> QkdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QkdStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(QkdStatus::Internal, "panic inside qkdnet"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, QkdStatus>;
}

impl<T> OrStatus<T> for qkdnet::error::Result<T> {
    fn or_status(self) -> Result<T, QkdStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, QkdStatus> {
    p.as_ref()
        .ok_or_else(|| fail(QkdStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, QkdStatus> {
    p.as_mut()
        .ok_or_else(|| fail(QkdStatus::NullPointer, format!("{what} is NULL")))
}

unsafe fn utf8<'a>(p: *const c_char, what: &str) -> Result<&'a str, QkdStatus> {
    if p.is_null() {
        return Err(fail(QkdStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(QkdStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qkd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn qkd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn qkd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Decoy BB84 secret key rate in bits/s for `loss_db` of channel loss.
///
/// # Safety
/// `out_bits_per_s` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qkd_bb84_rate(loss_db: f64, profile: QkdProfile, out_bits_per_s: *mut f64) -> QkdStatus {
    guard(|| {
        let dst = out(out_bits_per_s, "out_bits_per_s")?;
        let params = ProtocolParams::for_profile(profile.into());
        *dst = secure_rate_bb84(loss_db, &params).or_status()?.bits_per_s;
        Ok(())
    })
}

/// # Safety
/// `out_model` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qkd_tf_model_new(profile: QkdProfile, out_model: *mut *mut QkdTfModel) -> QkdStatus {
    guard(|| {
        let dst = out(out_model, "out_model")?;
        let model = TfModel::new(&ProtocolParams::for_profile(profile.into())).or_status()?;
        *dst = Box::into_raw(Box::new(QkdTfModel(TfRateCache::new(model))));
        Ok(())
    })
}

/// Twin-field secret key rate in bits/s for the two arm losses in dB.
/// Losses are rounded to 0.01 dB.
///
/// # Safety
/// `model` must be a live handle; `out_bits_per_s` must be NULL or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn qkd_tf_model_rate(
    model: *const QkdTfModel,
    loss_a_db: f64,
    loss_b_db: f64,
    out_bits_per_s: *mut f64,
) -> QkdStatus {
    guard(|| {
        let m = deref(model, "model")?;
        let dst = out(out_bits_per_s, "out_bits_per_s")?;
        *dst = m.0.bits_per_s(loss_a_db, loss_b_db).or_status()?;
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn qkd_tf_model_free(model: *mut QkdTfModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Random network in a square box. Node ids below `n_sources` are sources.
///
/// # Safety
/// `out_graph` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qkd_graph_generate(
    box_km: f64,
    n_sources: usize,
    n_candidates: usize,
    mean_degree: f64,
    seed: u64,
    out_graph: *mut *mut QkdGraph,
) -> QkdStatus {
    guard(|| {
        let dst = out(out_graph, "out_graph")?;
        let g = generate(&GraphSpec::new(box_km, n_sources, n_candidates, mean_degree), seed).or_status()?;
        *dst = Box::into_raw(Box::new(QkdGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `json` must be NULL or a NUL-terminated string; `out_graph` must be NULL or
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qkd_graph_from_json(json: *const c_char, out_graph: *mut *mut QkdGraph) -> QkdStatus {
    guard(|| {
        let text = utf8(json, "json")?;
        let dst = out(out_graph, "out_graph")?;
        let g = NetworkGraph::from_json(text).or_status()?;
        *dst = Box::into_raw(Box::new(QkdGraph(g)));
        Ok(())
    })
}

/// Serialise a graph. The string is released with [`qkd_string_free`].
///
/// # Safety
/// `graph` must be a live handle; `out_json` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qkd_graph_to_json(graph: *const QkdGraph, out_json: *mut *mut c_char) -> QkdStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        let dst = out(out_json, "out_json")?;
        let text = g.0.to_json().or_status()?;
        *dst = CString::new(text).expect("JSON has no NUL").into_raw();
        Ok(())
    })
}

/// Number of nodes, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qkd_graph_node_count(graph: *const QkdGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.nodes.len())
}

/// Number of edges, or 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qkd_graph_edge_count(graph: *const QkdGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edges.len())
}

/// # Safety
/// `graph` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn qkd_graph_free(graph: *mut QkdGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Capacities of all four solutions with `n_bob` cooled detector sites and
/// `switch_db` of loss per switch traversal. Fibre loss is 0.2 dB/km.
///
/// # Safety
/// `graph` must be a live handle; `out_analysis` must be NULL or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn qkd_analysis_new(
    graph: *const QkdGraph,
    switch_db: f64,
    n_bob: usize,
    out_analysis: *mut *mut QkdAnalysis,
) -> QkdStatus {
    guard(|| {
        let g = deref(graph, "graph")?;
        let dst = out(out_analysis, "out_analysis")?;
        let params = ProtocolParams::default();
        let losses =
            build_loss_table(&g.0, &LossModel::new(params.alpha_db_per_km, switch_db).or_status()?).or_status()?;
        let models = RateModels::new(&params).or_status()?;
        let caps = GraphCapacities::evaluate(&losses, &models, n_bob).or_status()?;
        *dst = Box::into_raw(Box::new(QkdAnalysis(caps)));
        Ok(())
    })
}

/// Network capacity of one solution in bits/s.
///
/// # Safety
/// `analysis` must be a live handle; `out_bits_per_s` must be NULL or valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn qkd_analysis_capacity(
    analysis: *const QkdAnalysis,
    solution: QkdSolution,
    out_bits_per_s: *mut f64,
) -> QkdStatus {
    guard(|| {
        let a = deref(analysis, "analysis")?;
        *out(out_bits_per_s, "out_bits_per_s")? = a.0.capacity(solution.into());
        Ok(())
    })
}

/// Number of source pairs with zero capacity under one solution.
///
/// # Safety
/// `analysis` must be a live handle; `out_count` must be NULL or valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn qkd_analysis_zero_pairs(
    analysis: *const QkdAnalysis,
    solution: QkdSolution,
    out_count: *mut usize,
) -> QkdStatus {
    guard(|| {
        let a = deref(analysis, "analysis")?;
        *out(out_count, "out_count")? = a.0.matrix(solution.into()).zero_pairs();
        Ok(())
    })
}

/// Copy the chosen detector node ids into `buf`. `out_len` receives the full
/// count even when `capacity` is too small, in which case nothing is copied
/// and the status is `QKD_STATUS_INVALID_ARGUMENT`.
///
/// # Safety
/// `analysis` must be a live handle; `buf` must be valid for `capacity`
/// writes (or NULL when `capacity` is 0); `out_len` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qkd_analysis_detectors(
    analysis: *const QkdAnalysis,
    buf: *mut usize,
    capacity: usize,
    out_len: *mut usize,
) -> QkdStatus {
    guard(|| {
        let a = deref(analysis, "analysis")?;
        let len = out(out_len, "out_len")?;
        let chosen = &a.0.placement.chosen;
        *len = chosen.len();
        if capacity < chosen.len() {
            return Err(fail(
                QkdStatus::InvalidArgument,
                format!("buffer holds {capacity}, need {}", chosen.len()),
            ));
        }
        if buf.is_null() {
            return Err(fail(QkdStatus::NullPointer, "buf is NULL"));
        }
        ptr::copy_nonoverlapping(chosen.as_ptr(), buf, chosen.len());
        Ok(())
    })
}

/// # Safety
/// `analysis` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn qkd_analysis_free(analysis: *mut QkdAnalysis) {
    if !analysis.is_null() {
        drop(Box::from_raw(analysis));
    }
}

/// Run a full sweep and write `results.json`, `fractions.csv` and
/// `ratios.csv` into the existing directory `out_dir`. A NULL `config_json`
/// uses the defaults.
///
/// # Safety
/// Both arguments must be NULL or NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn qkd_simulate(config_json: *const c_char, out_dir: *const c_char) -> QkdStatus {
    guard(|| {
        let dir = utf8(out_dir, "out_dir")?;
        let cfg = if config_json.is_null() {
            ExperimentConfig::default()
        } else {
            ExperimentConfig::from_json(utf8(config_json, "config_json")?).or_status()?
        };
        let summary = sweep_and_summarize(&cfg).or_status()?;
        write_outputs(&summary, Path::new(dir)).or_status()?;
        Ok(())
    })
}
