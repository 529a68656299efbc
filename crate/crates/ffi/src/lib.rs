//! C ABI over `mimopnc`.
//!
//! Conventions:
//! - every fallible call returns a [`MimopncStatus`]; `MIMOPNC_STATUS_OK` is 0;
//! - on failure, [`mimopnc_last_error`] returns a NUL-terminated message that
//!   stays valid until the next failing call on the same thread;
//! - simulation configurations and result sets are opaque handles created by
//!   `*_new`/`mimopnc_sweep`/`mimopnc_results_read_csv` and released with the
//!   matching `*_free`;
//! - detectors are passed as `uint32_t` values of [`MimopncDetector`].
//!
//! The header `include/mimopnc.h` is generated by cbindgen at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use mimopnc::detect::{self, DetectorId, DetectorInput};
use mimopnc::harness::{self, BerRecord, ChannelMode, SimConfig};
use mimopnc::linalg::{qr_decompose, Cplx, Mat2, Vec2};
use mimopnc::phy::NoiseParams;
use mimopnc::{cli, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MimopncStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateChannel = 3,
    InvalidCoefficient = 4,
    Config = 5,
    NoCrossing = 6,
    Io = 7,
    Parse = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MimopncDetector {
    VblastNc = 0,
    VblastPnc = 1,
    SortedVblastNc = 2,
    SortedVblastPnc = 3,
    LinearZfNc = 4,
    MlOracle = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MimopncComplex {
    pub re: f64,
    pub im: f64,
}

/// Row-major 2x2 complex matrix.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MimopncMat2 {
    pub h11: MimopncComplex,
    pub h12: MimopncComplex,
    pub h21: MimopncComplex,
    pub h22: MimopncComplex,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MimopncVec2 {
    pub a: MimopncComplex,
    pub b: MimopncComplex,
}

/// XOR decision; each field is 0 or 1.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MimopncBits {
    pub re: u8,
    pub im: u8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MimopncBerRecord {
    pub detector: u32,
    pub snr_db: f64,
    pub bits_total: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub degenerate_count: u64,
}

/// Opaque simulation configuration.
pub struct MimopncConfig {
    inner: SimConfig,
}

/// Opaque list of BER records.
pub struct MimopncResults {
    records: Vec<BerRecord>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> MimopncStatus {
    match e {
        Error::DegenerateChannel(_) => MimopncStatus::DegenerateChannel,
        Error::InvalidCoefficient(_) => MimopncStatus::InvalidCoefficient,
        Error::Config(_) | Error::Usage(_) => MimopncStatus::Config,
        Error::NoCrossing(_) => MimopncStatus::NoCrossing,
        Error::Parse { .. } => MimopncStatus::Parse,
        Error::Io(_) => MimopncStatus::Io,
    }
}

fn fail(status: MimopncStatus, msg: impl Into<String>) -> MimopncStatus {
    set_last_error(msg.into());
    status
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), MimopncStatus>) -> MimopncStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MimopncStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(MimopncStatus::Panic, msg)
        }
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, MimopncStatus>;
}

impl<T> OrStatus<T> for mimopnc::Result<T> {
    fn or_status(self) -> Result<T, MimopncStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, MimopncStatus> {
    // SAFETY: caller passes either null or a pointer to a live, aligned T.
    unsafe { p.as_ref() }.ok_or_else(|| fail(MimopncStatus::NullPointer, format!("{what} is null")))
}

fn non_null_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, MimopncStatus> {
    // SAFETY: caller passes either null or a pointer to a live, aligned T.
    unsafe { p.as_mut() }.ok_or_else(|| fail(MimopncStatus::NullPointer, format!("{what} is null")))
}

fn detector_from(id: u32) -> Result<DetectorId, MimopncStatus> {
    DetectorId::ALL.get(id as usize).copied().ok_or_else(|| {
        fail(
            MimopncStatus::InvalidArgument,
            format!("unknown detector id {id}"),
        )
    })
}

fn path_from(p: *const c_char) -> Result<PathBuf, MimopncStatus> {
    if p.is_null() {
        return Err(fail(MimopncStatus::NullPointer, "path is null"));
    }
    // SAFETY: non-null, caller guarantees a NUL-terminated string.
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| fail(MimopncStatus::InvalidArgument, "path is not UTF-8"))?;
    Ok(PathBuf::from(s))
}

fn slice_from<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], MimopncStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(MimopncStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null; caller guarantees `len` readable elements.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

impl From<MimopncComplex> for Cplx {
    fn from(c: MimopncComplex) -> Self {
        Cplx::new(c.re, c.im)
    }
}

impl From<Cplx> for MimopncComplex {
    fn from(c: Cplx) -> Self {
        MimopncComplex { re: c.re, im: c.im }
    }
}

impl From<MimopncMat2> for Mat2 {
    fn from(m: MimopncMat2) -> Self {
        Mat2::new(m.h11.into(), m.h12.into(), m.h21.into(), m.h22.into())
    }
}

impl From<Mat2> for MimopncMat2 {
    fn from(m: Mat2) -> Self {
        MimopncMat2 {
            h11: m.h11.into(),
            h12: m.h12.into(),
            h21: m.h21.into(),
            h22: m.h22.into(),
        }
    }
}

impl From<&BerRecord> for MimopncBerRecord {
    fn from(r: &BerRecord) -> Self {
        MimopncBerRecord {
            detector: r.detector.index() as u32,
            snr_db: r.snr_db,
            bits_total: r.bits_total,
            bit_errors: r.bit_errors,
            ber: r.ber,
            degenerate_count: r.degenerate_count,
        }
    }
}

/// Message for the most recent failure on this thread ("" if none).
#[no_mangle]
pub extern "C" fn mimopnc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Canonical name of a detector (e.g. "vblast_pnc"), or null for an unknown id.
#[no_mangle]
pub extern "C" fn mimopnc_detector_name(detector: u32) -> *const c_char {
    const NAMES: [&CStr; 6] = [
        c"vblast_nc",
        c"vblast_pnc",
        c"sorted_vblast_nc",
        c"sorted_vblast_pnc",
        c"linear_zf_nc",
        c"ml_oracle",
    ];
    NAMES
        .get(detector as usize)
        .map_or(std::ptr::null(), |n| n.as_ptr())
}

/// QR factorization with real nonnegative diagonal.
///
/// # Safety
/// `h`, `q_out` and `r_out` must be null or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_qr_decompose(
    h: *const MimopncMat2,
    q_out: *mut MimopncMat2,
    r_out: *mut MimopncMat2,
) -> MimopncStatus {
    guard(|| {
        let h = non_null(h, "h")?;
        let q_out = non_null_mut(q_out, "q_out")?;
        let r_out = non_null_mut(r_out, "r_out")?;
        let f = qr_decompose(&(*h).into()).or_status()?;
        *q_out = f.q.into();
        *r_out = f.r.into();
        Ok(())
    })
}

/// Run one detector on a received vector. `noise_var` is the per-dimension
/// noise variance; only the ML oracle uses it.
///
/// # Safety
/// `y`, `h` and `out` must be null or valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_detect(
    detector: u32,
    y: *const MimopncVec2,
    h: *const MimopncMat2,
    noise_var: f64,
    out: *mut MimopncBits,
) -> MimopncStatus {
    guard(|| {
        let id = detector_from(detector)?;
        let y = non_null(y, "y")?;
        let h = non_null(h, "h")?;
        let out = non_null_mut(out, "out")?;
        if !(noise_var.is_finite() && noise_var >= 0.0) {
            return Err(fail(
                MimopncStatus::InvalidArgument,
                "noise_var must be finite and >= 0",
            ));
        }
        let input = DetectorInput {
            y: Vec2::new(y.a.into(), y.b.into()),
            h: (*h).into(),
            noise: NoiseParams::from_variance(noise_var),
        };
        let est = detect::detect(id, &input).or_status()?;
        *out = MimopncBits {
            re: est.bits.re as u8,
            im: est.bits.im as u8,
        };
        Ok(())
    })
}

/// New configuration with all six detectors and Rayleigh fading.
///
/// # Safety
/// `grid` must hold `grid_len` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_config_new(
    grid: *const f64,
    grid_len: usize,
    symbols_per_point: u64,
    seed: u64,
    out: *mut *mut MimopncConfig,
) -> MimopncStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let grid = slice_from(grid, grid_len, "grid")?;
        let inner = SimConfig::new(grid.to_vec(), symbols_per_point, seed);
        inner.validate().or_status()?;
        *out = Box::into_raw(Box::new(MimopncConfig { inner }));
        Ok(())
    })
}

/// Replace the detector set.
///
/// # Safety
/// `cfg` must come from [`mimopnc_config_new`]; `ids` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_config_set_detectors(
    cfg: *mut MimopncConfig,
    ids: *const u32,
    len: usize,
) -> MimopncStatus {
    guard(|| {
        let cfg = non_null_mut(cfg, "cfg")?;
        let ids = slice_from(ids, len, "ids")?;
        let detectors = ids
            .iter()
            .map(|&i| detector_from(i))
            .collect::<Result<Vec<_>, _>>()?;
        let next = cfg.inner.clone().with_detectors(&detectors);
        next.validate().or_status()?;
        cfg.inner = next;
        Ok(())
    })
}

/// Hold the channel fixed at `h` for every symbol (null restores Rayleigh).
///
/// # Safety
/// `cfg` must come from [`mimopnc_config_new`]; `h` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_config_set_fixed_channel(
    cfg: *mut MimopncConfig,
    h: *const MimopncMat2,
) -> MimopncStatus {
    guard(|| {
        let cfg = non_null_mut(cfg, "cfg")?;
        // SAFETY: null or valid per contract.
        let mode = match unsafe { h.as_ref() } {
            Some(h) => ChannelMode::Fixed((*h).into()),
            None => ChannelMode::RayleighBlock,
        };
        let next = cfg.inner.clone().with_channel(mode);
        next.validate().or_status()?;
        cfg.inner = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or come from [`mimopnc_config_new`], freed once.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_config_free(cfg: *mut MimopncConfig) {
    if !cfg.is_null() {
        // SAFETY: allocated by Box::into_raw in mimopnc_config_new.
        drop(unsafe { Box::from_raw(cfg) });
    }
}

/// Run the full sweep on `workers` threads (0 = default pool). Results do
/// not depend on `workers`.
///
/// # Safety
/// `cfg` must come from [`mimopnc_config_new`]; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_sweep(
    cfg: *const MimopncConfig,
    workers: u32,
    out: *mut *mut MimopncResults,
) -> MimopncStatus {
    guard(|| {
        let cfg = non_null(cfg, "cfg")?;
        let out = non_null_mut(out, "out")?;
        let records = if workers == 0 {
            harness::run_sweep(&cfg.inner)
        } else {
            harness::with_workers(workers as usize, || harness::run_sweep(&cfg.inner))
                .and_then(|r| r)
        }
        .or_status()?;
        *out = Box::into_raw(Box::new(MimopncResults { records }));
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a live results handle.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_results_len(res: *const MimopncResults) -> usize {
    // SAFETY: null or valid per contract.
    unsafe { res.as_ref() }.map_or(0, |r| r.records.len())
}

/// # Safety
/// `res` must be a live results handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_results_get(
    res: *const MimopncResults,
    index: usize,
    out: *mut MimopncBerRecord,
) -> MimopncStatus {
    guard(|| {
        let res = non_null(res, "res")?;
        let out = non_null_mut(out, "out")?;
        let r = res.records.get(index).ok_or_else(|| {
            fail(
                MimopncStatus::InvalidArgument,
                format!("index {index} out of range ({} records)", res.records.len()),
            )
        })?;
        *out = r.into();
        Ok(())
    })
}

/// Write results in the CLI's CSV format.
///
/// # Safety
/// `res` must be a live results handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_results_write_csv(
    res: *const MimopncResults,
    path: *const c_char,
) -> MimopncStatus {
    guard(|| {
        let res = non_null(res, "res")?;
        let path = path_from(path)?;
        cli::write_csv(&res.records, &path).or_status()
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_results_read_csv(
    path: *const c_char,
    out: *mut *mut MimopncResults,
) -> MimopncStatus {
    guard(|| {
        let path = path_from(path)?;
        let out = non_null_mut(out, "out")?;
        let records = cli::read_csv(&path).or_status()?;
        *out = Box::into_raw(Box::new(MimopncResults { records }));
        Ok(())
    })
}

/// SNR gap `snr(b) - snr(a)` in dB at `target_ber`.
///
/// # Safety
/// `res` must be a live results handle; `out_db` must be valid.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_results_gap_db(
    res: *const MimopncResults,
    det_a: u32,
    det_b: u32,
    target_ber: f64,
    out_db: *mut f64,
) -> MimopncStatus {
    guard(|| {
        let res = non_null(res, "res")?;
        let out_db = non_null_mut(out_db, "out_db")?;
        let a = detector_from(det_a)?;
        let b = detector_from(det_b)?;
        *out_db = harness::estimate_gap_db(&res.records, a, b, target_ber).or_status()?;
        Ok(())
    })
}

/// # Safety
/// `res` must be null or a results handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn mimopnc_results_free(res: *mut MimopncResults) {
    if !res.is_null() {
        // SAFETY: allocated by Box::into_raw in this crate.
        drop(unsafe { Box::from_raw(res) });
    }
}
