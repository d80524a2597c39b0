//! C interface to `ripple_opf`.
//!
//! Networks live behind an opaque handle. Results that carry structure are
//! returned as JSON strings owned by the library and released with
//! [`ropf_string_free`]. Every fallible call returns a [`RopfStatus`]; the
//! message of the most recent failure on the calling thread is available
//! from [`ropf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use ripple_opf::network::Network;
use ripple_opf::opf::{self, ConstraintToggles, ObjectiveSpec, OpfProblem};
use ripple_opf::{oracle, power_flow, presets, vsc, Error};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RopfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    SolverFailure = 3,
    Internal = 4,
}

/// Loaded, validated network.
pub struct RopfNetwork {
    inner: Network,
}

/// Headline numbers of one dc-link simulation.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RopfOracleSummary {
    pub proposed_ripple_w: f64,
    pub simulated_ripple_w: f64,
    pub proposed_ir_a: f64,
    pub simulated_ir_a: f64,
    pub lowfreq_rms_w: f64,
    pub lowfreq_rms_a: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RopfStatus {
    if e.is_solver_failure() {
        RopfStatus::SolverFailure
    } else {
        RopfStatus::InvalidInput
    }
}

fn fail(status: RopfStatus, msg: String) -> RopfStatus {
    set_error(msg);
    status
}

/// Runs `f`, recording errors and turning panics into `Internal`.
fn guard(f: impl FnOnce() -> Result<(), (RopfStatus, String)>) -> RopfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RopfStatus::Ok,
        Ok(Err((s, m))) => fail(s, m),
        Err(_) => fail(RopfStatus::Internal, "internal panic".into()),
    }
}

fn lib_err(e: Error) -> (RopfStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (RopfStatus, String)> {
    if p.is_null() {
        return Err((RopfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (RopfStatus::InvalidInput, format!("{what} is not UTF-8")))
}

fn to_c_string(s: String) -> Result<*mut c_char, (RopfStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (RopfStatus::Internal, "output contains a NUL byte".into()))
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, (RopfStatus, String)> {
    serde_json::to_string(v).map_err(|e| (RopfStatus::Internal, e.to_string()))
}

unsafe fn store_network(
    net: Network,
    out: *mut *mut RopfNetwork,
) -> Result<(), (RopfStatus, String)> {
    net.ensure_valid().map_err(lib_err)?;
    *out = Box::into_raw(Box::new(RopfNetwork { inner: net }));
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn ropf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a network from a JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ropf_network_from_json(
    json: *const c_char,
    out: *mut *mut RopfNetwork,
) -> RopfStatus {
    guard(|| {
        if out.is_null() {
            return Err((RopfStatus::NullPointer, "out is null".into()));
        }
        let text = read_str(json, "json")?;
        store_network(Network::from_json(text).map_err(lib_err)?, out)
    })
}

/// Loads a network from a JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ropf_network_load_file(
    path: *const c_char,
    out: *mut *mut RopfNetwork,
) -> RopfStatus {
    guard(|| {
        if out.is_null() {
            return Err((RopfStatus::NullPointer, "out is null".into()));
        }
        let path = read_str(path, "path")?;
        store_network(Network::load_file(path).map_err(lib_err)?, out)
    })
}

/// Loads a bundled network (`statcom_toy`, `demo_feeder`, `sop_two_feeder`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ropf_network_preset(
    name: *const c_char,
    out: *mut *mut RopfNetwork,
) -> RopfStatus {
    guard(|| {
        if out.is_null() {
            return Err((RopfStatus::NullPointer, "out is null".into()));
        }
        let name = read_str(name, "name")?;
        let net = presets::network(name)
            .ok_or_else(|| (RopfStatus::InvalidInput, format!("no preset `{name}`")))?;
        store_network(net, out)
    })
}

/// Releases a network handle. Null is ignored.
///
/// # Safety
/// `net` must come from one of the constructors and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ropf_network_free(net: *mut RopfNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of buses, or 0 for a null handle.
///
/// # Safety
/// `net` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ropf_network_bus_count(net: *const RopfNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.inner.buses.len())
}

/// Power flow with all converters idle; writes the solved state as JSON.
///
/// # Safety
/// `net` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ropf_power_flow(
    net: *const RopfNetwork,
    out_json: *mut *mut c_char,
) -> RopfStatus {
    guard(|| {
        let net = net
            .as_ref()
            .ok_or((RopfStatus::NullPointer, "net is null".into()))?;
        if out_json.is_null() {
            return Err((RopfStatus::NullPointer, "out_json is null".into()));
        }
        let n = &net.inner;
        let r = power_flow::solve(n, &power_flow::zero_setpoints(n)).map_err(lib_err)?;
        *out_json = to_c_string(json(&r)?)?;
        Ok(())
    })
}

/// Optimal power flow. `objective_json` holds an objective specification;
/// null selects minimum peak current on the branch leaving the source.
/// Writes the solution as JSON, also when the optimizer stops short of a
/// local optimum, in which case `SolverFailure` is returned.
///
/// # Safety
/// `net` must be a live handle, `objective_json` null or a NUL-terminated
/// string, and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ropf_opf(
    net: *const RopfNetwork,
    objective_json: *const c_char,
    out_json: *mut *mut c_char,
) -> RopfStatus {
    guard(|| {
        let net = net
            .as_ref()
            .ok_or((RopfStatus::NullPointer, "net is null".into()))?;
        if out_json.is_null() {
            return Err((RopfStatus::NullPointer, "out_json is null".into()));
        }
        let objective = if objective_json.is_null() {
            let mut o = ObjectiveSpec::min_max_current("");
            o.target_branch = None;
            o
        } else {
            serde_json::from_str(read_str(objective_json, "objective_json")?)
                .map_err(|e| (RopfStatus::InvalidInput, e.to_string()))?
        };
        let problem = OpfProblem {
            network: net.inner.clone(),
            objective,
            toggles: ConstraintToggles::default(),
        };
        let sol = opf::solve_opf(&problem, None).map_err(lib_err)?;
        *out_json = to_c_string(json(&sol)?)?;
        if sol.solver_stats.status != ripple_opf::nlp::IpmStatus::LocalOptimum {
            return Err((
                RopfStatus::SolverFailure,
                format!("optimizer stopped with {:?}", sol.solver_stats.status),
            ));
        }
        Ok(())
    })
}

/// Runs a bundled dc-link simulation case (`3a` to `3f`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ropf_oracle_case(
    name: *const c_char,
    out: *mut RopfOracleSummary,
) -> RopfStatus {
    guard(|| {
        if out.is_null() {
            return Err((RopfStatus::NullPointer, "out is null".into()));
        }
        let name = read_str(name, "name")?;
        let cfg = oracle::case(name)
            .ok_or_else(|| (RopfStatus::InvalidInput, format!("no case `{name}`")))?;
        let (r, _) = oracle::compare_to_bilinear(&cfg).map_err(lib_err)?;
        *out = RopfOracleSummary {
            proposed_ripple_w: r.proposed_ripple_w,
            simulated_ripple_w: r.simulated_ripple_w,
            proposed_ir_a: r.proposed_ir_a,
            simulated_ir_a: r.simulated_ir_a,
            lowfreq_rms_w: r.lowfreq_rms_w,
            lowfreq_rms_a: r.lowfreq_rms_a,
        };
        Ok(())
    })
}

/// 2ω ripple phasor `Σ V·I` of `legs` legs. `v` and `i` hold interleaved
/// real and imaginary parts, `2·legs` values each.
///
/// # Safety
/// `v` and `i` must point to `2·legs` doubles; `out_re`, `out_im` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ropf_ripple_phasor(
    v: *const f64,
    i: *const f64,
    legs: usize,
    out_re: *mut f64,
    out_im: *mut f64,
) -> RopfStatus {
    guard(|| {
        if v.is_null() || i.is_null() || out_re.is_null() || out_im.is_null() {
            return Err((RopfStatus::NullPointer, "null argument".into()));
        }
        let pairs = |p: *const f64| -> Vec<Complex64> {
            std::slice::from_raw_parts(p, 2 * legs)
                .chunks_exact(2)
                .map(|c| Complex64::new(c[0], c[1]))
                .collect()
        };
        let op = vsc::VscOperatingPoint {
            terminal_voltages: pairs(v),
            leg_currents: pairs(i),
        };
        let p = vsc::ripple_phasor(&op).map_err(lib_err)?;
        *out_re = p.re;
        *out_im = p.im;
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ropf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
