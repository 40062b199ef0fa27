//! C ABI over the chargecav simulator.
//!
//! Objects cross the boundary as opaque handles created by `cq_*_from_*` or
//! gate constructors and released with the matching `cq_*_free`. Every
//! fallible call returns a [`CqStatus`]; on failure the message is available
//! from [`cq_last_error`] on the same thread until the next failing call.
//! Panics are caught and reported as [`CqStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use chargecav::cli::{self, Overrides, ScenarioKind, SpectrumOperator};
use chargecav::device::DeviceModel;
use chargecav::gates::cnot::{cnot_composition, CnotVariant};
use chargecav::gates::sideband::swap_qubit_photon;
use chargecav::hamiltonian::{ApproximationLevel, Frame};
use chargecav::transfer::TransferConfig;
use chargecav::{Error, Operator};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CqStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed or inconsistent input.
    Invalid = 3,
    /// Numerical failure.
    Numeric = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CqCnotVariant {
    Verified = 0,
    Literal = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CqCommand {
    GateAudit = 0,
    Schedule = 1,
    Transfer = 2,
    Sweep = 3,
    Spectrum = 4,
}

/// Opaque device handle.
pub struct CqDevice(DeviceModel);

/// Opaque square complex matrix.
pub struct CqOperator(Operator);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CqGateReport {
    pub fidelity: f64,
    pub leakage: f64,
    pub makhlin_g1_re: f64,
    pub makhlin_g1_im: f64,
    pub makhlin_g2: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CqTransferReport {
    /// Final receiver population.
    pub fidelity: f64,
    pub photon1: f64,
    pub photon2: f64,
    pub loss: f64,
    pub max_norm_increase: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(CqStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = if e.is_validation() {
            CqStatus::Invalid
        } else {
            CqStatus::Numeric
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> CqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CqStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            CqStatus::Panic
        }
    }
}

fn null(name: &str) -> Fail {
    Fail(CqStatus::NullPointer, format!("{name} is null"))
}

/// # Safety
/// `p` must be null or a valid nul-terminated string.
unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(CqStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

/// # Safety
/// `p` must be null or point to a live `T`.
unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(name))
}

/// # Safety
/// `p` must be null or valid for a write of `T`.
unsafe fn write_out<T>(p: *mut T, v: T, name: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(name));
    }
    p.write(v);
    Ok(())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn cq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failing call on this thread, or null if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Parses a device from a JSON string.
///
/// # Safety
/// `json` must be a valid nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_device_from_json(json: *const c_char, out: *mut *mut CqDevice) -> CqStatus {
    guard(|| {
        let d = DeviceModel::from_json_str(str_arg(json, "json")?)?;
        write_out(out, Box::into_raw(Box::new(CqDevice(d))), "out")
    })
}

/// Loads a device from a JSON file.
///
/// # Safety
/// `path` must be a valid nul-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_device_from_path(path: *const c_char, out: *mut *mut CqDevice) -> CqStatus {
    guard(|| {
        let d = DeviceModel::from_path(str_arg(path, "path")?)?;
        write_out(out, Box::into_raw(Box::new(CqDevice(d))), "out")
    })
}

/// Number of qubits, or 0 for a null handle.
///
/// # Safety
/// `dev` must be null or a live device handle.
#[no_mangle]
pub unsafe extern "C" fn cq_device_n_qubits(dev: *const CqDevice) -> usize {
    dev.as_ref().map_or(0, |d| d.0.n_qubits())
}

/// Hilbert-space dimension `2^n_qubits · n_ph`.
///
/// # Safety
/// `dev` must be a live device handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_device_dim(dev: *const CqDevice, out: *mut usize) -> CqStatus {
    guard(|| {
        let d = ref_arg(dev, "dev")?;
        write_out(out, d.0.space()?.dim(), "out")
    })
}

/// # Safety
/// `dev` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cq_device_free(dev: *mut CqDevice) {
    if !dev.is_null() {
        drop(Box::from_raw(dev));
    }
}

/// Matrix dimension, or 0 for a null handle.
///
/// # Safety
/// `op` must be null or a live operator handle.
#[no_mangle]
pub unsafe extern "C" fn cq_operator_dim(op: *const CqOperator) -> usize {
    op.as_ref().map_or(0, |o| o.0.dim())
}

/// Reads entry `(row, col)`.
///
/// # Safety
/// `op` must be a live operator handle; `re` and `im` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_operator_get(
    op: *const CqOperator,
    row: usize,
    col: usize,
    re: *mut f64,
    im: *mut f64,
) -> CqStatus {
    guard(|| {
        let o = &ref_arg(op, "op")?.0;
        if row >= o.dim() || col >= o.dim() {
            return Err(Fail(
                CqStatus::Invalid,
                format!("index ({row}, {col}) outside dimension {}", o.dim()),
            ));
        }
        let z = o.get(row, col);
        write_out(re, z.re, "re")?;
        write_out(im, z.im, "im")
    })
}

/// # Safety
/// `op` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cq_operator_free(op: *mut CqOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Ideal qubit-to-photon swap on qubit `k` with winding number `n_winding`.
///
/// # Safety
/// `dev` must be a live device handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_gate_swap_qubit_photon(
    dev: *const CqDevice,
    k: usize,
    n_winding: i64,
    out: *mut *mut CqOperator,
) -> CqStatus {
    guard(|| {
        let u = swap_qubit_photon(k, n_winding, &ref_arg(dev, "dev")?.0)?;
        write_out(out, Box::into_raw(Box::new(CqOperator(u))), "out")
    })
}

/// CNOT composition with control `j` and target `k`, audited on the photon
/// vacuum. `out_op` may be null when only the report is wanted.
///
/// # Safety
/// `dev` must be a live device handle, `report` writable and `out_op` null
/// or writable.
#[no_mangle]
pub unsafe extern "C" fn cq_gate_cnot(
    dev: *const CqDevice,
    j: usize,
    k: usize,
    variant: CqCnotVariant,
    out_op: *mut *mut CqOperator,
    report: *mut CqGateReport,
) -> CqStatus {
    guard(|| {
        let v = match variant {
            CqCnotVariant::Verified => CnotVariant::Verified,
            CqCnotVariant::Literal => CnotVariant::Literal,
        };
        let (u, r) = cnot_composition(j, k, &ref_arg(dev, "dev")?.0, v)?;
        let r = CqGateReport {
            fidelity: r.fidelity,
            leakage: r.leakage,
            makhlin_g1_re: r.makhlin_g1_re,
            makhlin_g1_im: r.makhlin_g1_im,
            makhlin_g2: r.makhlin_g2,
        };
        write_out(report, r, "report")?;
        if !out_op.is_null() {
            out_op.write(Box::into_raw(Box::new(CqOperator(u))));
        }
        Ok(())
    })
}

/// Ascending eigenvalues of the exact lab-frame Hamiltonian with the
/// device's default terms.
///
/// `*len` receives the number of eigenvalues. If `values` is null or
/// `capacity` is smaller, nothing is copied and `CQ_STATUS_INVALID` is
/// returned, so a first call with `values = NULL` sizes the buffer.
///
/// # Safety
/// `dev` must be a live device handle, `len` writable and `values` null or
/// valid for `capacity` writes.
#[no_mangle]
pub unsafe extern "C" fn cq_spectrum(
    dev: *const CqDevice,
    values: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> CqStatus {
    guard(|| {
        let op = SpectrumOperator::Spec {
            level: ApproximationLevel::Exact,
            frame: Frame::Lab,
            terms: None,
        };
        let e = cli::spectrum(&op, &ref_arg(dev, "dev")?.0)?;
        write_out(len, e.len(), "len")?;
        if values.is_null() || capacity < e.len() {
            return Err(Fail(
                CqStatus::Invalid,
                format!("buffer holds {capacity} values, {} needed", e.len()),
            ));
        }
        std::slice::from_raw_parts_mut(values, e.len()).copy_from_slice(&e);
        Ok(())
    })
}

/// Runs a transfer configuration given as JSON (the `params` object of a
/// transfer scenario).
///
/// # Safety
/// `config_json` must be a valid nul-terminated string and `report` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_transfer_run(config_json: *const c_char, report: *mut CqTransferReport) -> CqStatus {
    guard(|| {
        let cfg = TransferConfig::from_json_str(str_arg(config_json, "config_json")?)?;
        let r = cfg.run()?.report;
        let r = CqTransferReport {
            fidelity: r.fidelity,
            photon1: r.photon1,
            photon2: r.photon2,
            loss: r.loss,
            max_norm_increase: r.max_norm_increase,
            accepted_steps: r.accepted_steps,
            rejected_steps: r.rejected_steps,
        };
        write_out(report, r, "report")
    })
}

/// Runs a scenario file as the `sim` binary would and stores its exit code
/// (0 pass, 1 failure, 2 invalid input) in `exit_code`. `out_path` may be
/// null to keep the scenario's output path. Returns `CQ_STATUS_OK` whenever
/// the command ran to a verdict.
///
/// # Safety
/// `config_path` must be a valid nul-terminated string, `out_path` null or
/// one, and `exit_code` writable.
#[no_mangle]
pub unsafe extern "C" fn cq_run_scenario(
    command: CqCommand,
    config_path: *const c_char,
    out_path: *const c_char,
    exit_code: *mut i32,
) -> CqStatus {
    guard(|| {
        let kind = match command {
            CqCommand::GateAudit => ScenarioKind::GateAudit,
            CqCommand::Schedule => ScenarioKind::Schedule,
            CqCommand::Transfer => ScenarioKind::Transfer,
            CqCommand::Sweep => ScenarioKind::Sweep,
            CqCommand::Spectrum => ScenarioKind::Spectrum,
        };
        let config = Path::new(str_arg(config_path, "config_path")?);
        let out = if out_path.is_null() {
            None
        } else {
            Some(PathBuf::from(str_arg(out_path, "out_path")?))
        };
        let (code, summary) = cli::run_path(kind, config, &Overrides { out, tol: None });
        if code != cli::EXIT_PASS {
            set_error(summary);
        }
        write_out(exit_code, code, "exit_code")
    })
}
