//! C ABI over radlib: opaque handles, integer status codes, thread-local error text.
//!
//! Strings returned through `char **` out-parameters are owned by the caller and must be
//! released with `radlib_string_free`. Handles are released with their `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use radlib::app::{run, RunOptions};
use radlib::config::{load_config, RunConfig};
use radlib::export::{export_table, read_csv, ExportFormat};
use radlib::identify::{qualify_peaks, Peak, PeakList, PeakMatch};
use radlib::library::{prune, EntryFlag, LibraryEntry, PruneBounds, RadionuclideLibrary};
use radlib::model::{HalfLife, Nuclide, RadiationType};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadlibStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    Data = 6,
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadlibRadiation {
    Alpha = 0,
    BetaMinus = 1,
    BetaPlusEc = 2,
    Gamma = 3,
    Electron = 4,
    Xray = 5,
}

impl From<RadiationType> for RadlibRadiation {
    fn from(r: RadiationType) -> Self {
        match r {
            RadiationType::Alpha => RadlibRadiation::Alpha,
            RadiationType::BetaMinus => RadlibRadiation::BetaMinus,
            RadiationType::BetaPlusEc => RadlibRadiation::BetaPlusEc,
            RadiationType::Gamma => RadlibRadiation::Gamma,
            RadiationType::Electron => RadlibRadiation::Electron,
            RadiationType::Xray => RadlibRadiation::Xray,
        }
    }
}

pub const RADLIB_FLAG_UNVALIDATED: u32 = 1;
pub const RADLIB_FLAG_NO_UNCERTAINTY: u32 = 2;
pub const RADLIB_FLAG_NO_INTENSITY: u32 = 4;

/// One library line. Missing intensity and unknown half-life are NaN; stable is +infinity.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadlibEntry {
    pub radiation: RadlibRadiation,
    pub energy_kev: f64,
    pub energy_unc_kev: f64,
    pub intensity_pct: f64,
    pub intensity_unc_pct: f64,
    pub half_life_s: f64,
    pub parent_level_kev: f64,
    pub flags: u32,
}

impl From<&LibraryEntry> for RadlibEntry {
    fn from(e: &LibraryEntry) -> Self {
        let flags = e.flags.iter().fold(0, |acc, f| {
            acc | match f {
                EntryFlag::Unvalidated => RADLIB_FLAG_UNVALIDATED,
                EntryFlag::NoUncertainty => RADLIB_FLAG_NO_UNCERTAINTY,
                EntryFlag::NoIntensity => RADLIB_FLAG_NO_INTENSITY,
            }
        });
        RadlibEntry {
            radiation: e.radiation.into(),
            energy_kev: e.energy.kev,
            energy_unc_kev: e.energy.uncertainty_kev,
            intensity_pct: e.intensity_percent.unwrap_or(f64::NAN),
            intensity_unc_pct: e.intensity_uncertainty,
            half_life_s: e.half_life.map_or(f64::NAN, |h| match h {
                HalfLife::Stable => f64::INFINITY,
                HalfLife::Finite { seconds, .. } => seconds,
            }),
            parent_level_kev: e.parent_level_kev,
            flags,
        }
    }
}

/// Closed intervals; the half-life axis applies only when `use_half_life` is nonzero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadlibBounds {
    pub energy_lo_kev: f64,
    pub energy_hi_kev: f64,
    pub intensity_lo_pct: f64,
    pub intensity_hi_pct: f64,
    pub use_half_life: i32,
    pub half_life_lo_s: f64,
    pub half_life_hi_s: f64,
}

/// Opaque library handle.
pub struct RadlibLibrary {
    inner: RadionuclideLibrary,
}

/// Opaque result of `radlib_qualify`.
pub struct RadlibMatches {
    inner: Vec<PeakMatch>,
}

/// Opaque run configuration.
pub struct RadlibConfig {
    inner: RunConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Failure = (RadlibStatus, String);

fn fail<T>(status: RadlibStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err((status, msg.into()))
}

/// Runs `f`, records any failure as the thread's last error and maps panics to `Internal`.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RadlibStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RadlibStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RadlibStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(RadlibStatus::NullArgument, format!("{name} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(RadlibStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or((RadlibStatus::NullArgument, format!("{name} is null")))
}

unsafe fn put<T>(out: *mut T, v: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return fail(RadlibStatus::NullArgument, format!("{name} is null"));
    }
    out.write(v);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Last error message on this thread, or NULL. Valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn radlib_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn radlib_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Canonical id of a nuclide written in any accepted notation.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radlib_nuclide_canonical(id: *const c_char, out: *mut *mut c_char) -> RadlibStatus {
    guard(|| {
        let n: Nuclide = text(id, "id")?.parse().or_else(|e| fail(RadlibStatus::Parse, format!("{e}")))?;
        put(out, owned_string(n.to_string()), "out")
    })
}

/// Reads a library CSV written by the exporter.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radlib_library_read_csv(path: *const c_char, out: *mut *mut RadlibLibrary) -> RadlibStatus {
    guard(|| {
        let p = text(path, "path")?;
        let lib = read_csv(Path::new(p), RadiationType::Gamma).or_else(|e| {
            let status = match e {
                radlib::export::ExportError::Io { .. } => RadlibStatus::Io,
                _ => RadlibStatus::Parse,
            };
            fail(status, e.to_string())
        })?;
        put(out, Box::into_raw(Box::new(RadlibLibrary { inner: lib })), "out")
    })
}

/// Number of entries; 0 for NULL.
///
/// # Safety
/// `lib` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn radlib_library_len(lib: *const RadlibLibrary) -> usize {
    lib.as_ref().map_or(0, |l| l.inner.entries.len())
}

unsafe fn entry_at<'a>(lib: *const RadlibLibrary, index: usize) -> Result<&'a LibraryEntry, Failure> {
    let l = handle(lib, "lib")?;
    l.inner
        .entries
        .get(index)
        .ok_or((RadlibStatus::InvalidArgument, format!("index {index} out of range ({})", l.inner.entries.len())))
}

/// Copies entry `index` into `out`.
///
/// # Safety
/// `lib` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radlib_library_entry(
    lib: *const RadlibLibrary,
    index: usize,
    out: *mut RadlibEntry,
) -> RadlibStatus {
    guard(|| {
        let e = entry_at(lib, index)?;
        put(out, RadlibEntry::from(e), "out")
    })
}

/// Canonical id of the emitter of entry `index`.
///
/// # Safety
/// `lib` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radlib_library_entry_nuclide(
    lib: *const RadlibLibrary,
    index: usize,
    out: *mut *mut c_char,
) -> RadlibStatus {
    guard(|| {
        let e = entry_at(lib, index)?;
        put(out, owned_string(e.nuclide.to_string()), "out")
    })
}

/// New handle holding the entries of `lib` inside `bounds`.
///
/// # Safety
/// `lib` and `bounds` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radlib_library_prune(
    lib: *const RadlibLibrary,
    bounds: *const RadlibBounds,
    out: *mut *mut RadlibLibrary,
) -> RadlibStatus {
    guard(|| {
        let l = handle(lib, "lib")?;
        let b = handle(bounds, "bounds")?;
        let pb = PruneBounds {
            energy_kev: (b.energy_lo_kev, b.energy_hi_kev),
            intensity_percent: (b.intensity_lo_pct, b.intensity_hi_pct),
            half_life_s: (b.use_half_life != 0).then_some((b.half_life_lo_s, b.half_life_hi_s)),
        };
        let pruned = prune(&l.inner, &pb).or_else(|e| fail(RadlibStatus::InvalidArgument, e.to_string()))?;
        put(out, Box::into_raw(Box::new(RadlibLibrary { inner: pruned })), "out")
    })
}

/// Writes `lib` as `csv`, `html`, `xml`, `tex` or `json`.
///
/// # Safety
/// `lib` must be a live handle; strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn radlib_library_write(
    lib: *const RadlibLibrary,
    format: *const c_char,
    path: *const c_char,
) -> RadlibStatus {
    guard(|| {
        let l = handle(lib, "lib")?;
        let f: ExportFormat = text(format, "format")?
            .parse()
            .or_else(|e: radlib::export::ExportError| fail(RadlibStatus::InvalidArgument, e.to_string()))?;
        export_table(&l.inner, f, Path::new(text(path, "path")?)).or_else(|e| fail(RadlibStatus::Io, e.to_string()))
    })
}

/// # Safety
/// `lib` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn radlib_library_free(lib: *mut RadlibLibrary) {
    if !lib.is_null() {
        drop(Box::from_raw(lib));
    }
}

/// Matches `n` peak centroids against `lib` within `tol_kev`.
///
/// # Safety
/// `centroids` must point to `n` doubles (may be NULL when `n` is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radlib_qualify(
    lib: *const RadlibLibrary,
    centroids: *const f64,
    n: usize,
    tol_kev: f64,
    out: *mut *mut RadlibMatches,
) -> RadlibStatus {
    guard(|| {
        let l = handle(lib, "lib")?;
        if !(tol_kev > 0.0 && tol_kev.is_finite()) {
            return fail(RadlibStatus::InvalidArgument, "tol_kev must be positive");
        }
        let c: &[f64] = if n == 0 {
            &[]
        } else if centroids.is_null() {
            return fail(RadlibStatus::NullArgument, "centroids is null");
        } else {
            std::slice::from_raw_parts(centroids, n)
        };
        if let Some(bad) = c.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return fail(RadlibStatus::InvalidArgument, format!("invalid centroid {bad}"));
        }
        let peaks = PeakList { peaks: c.iter().map(|&x| Peak { centroid_kev: x, net_area: None }).collect() };
        let m = qualify_peaks(&peaks, &l.inner, tol_kev);
        put(out, Box::into_raw(Box::new(RadlibMatches { inner: m })), "out")
    })
}

/// Number of peaks; 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn radlib_matches_len(m: *const RadlibMatches) -> usize {
    m.as_ref().map_or(0, |m| m.inner.len())
}

/// Number of candidates of peak `peak`; 0 when out of range (unassigned).
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn radlib_matches_candidate_count(m: *const RadlibMatches, peak: usize) -> usize {
    m.as_ref().and_then(|m| m.inner.get(peak)).map_or(0, |p| p.candidates.len())
}

unsafe fn candidate<'a>(m: *const RadlibMatches, peak: usize, k: usize) -> Result<&'a LibraryEntry, Failure> {
    let m = handle(m, "matches")?;
    m.inner
        .get(peak)
        .and_then(|p| p.candidates.get(k))
        .map(|c| &c.entry)
        .ok_or((RadlibStatus::InvalidArgument, format!("no candidate {k} for peak {peak}")))
}

/// Copies candidate `k` (best first) of peak `peak`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radlib_matches_candidate(
    m: *const RadlibMatches,
    peak: usize,
    k: usize,
    out: *mut RadlibEntry,
) -> RadlibStatus {
    guard(|| put(out, RadlibEntry::from(candidate(m, peak, k)?), "out"))
}

/// Canonical id of candidate `k` of peak `peak`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radlib_matches_candidate_nuclide(
    m: *const RadlibMatches,
    peak: usize,
    k: usize,
    out: *mut *mut c_char,
) -> RadlibStatus {
    guard(|| put(out, owned_string(candidate(m, peak, k)?.nuclide.to_string()), "out"))
}

/// # Safety
/// `m` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn radlib_matches_free(m: *mut RadlibMatches) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Loads and validates a YAML run configuration.
///
/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn radlib_config_load(path: *const c_char, out: *mut *mut RadlibConfig) -> RadlibStatus {
    guard(|| {
        let p = text(path, "path")?;
        let cfg = load_config(Path::new(p)).or_else(|e| {
            let status = match e {
                radlib::config::ConfigError::Io { .. } => RadlibStatus::Io,
                _ => RadlibStatus::Parse,
            };
            fail(status, e.to_string())
        })?;
        put(out, Box::into_raw(Box::new(RadlibConfig { inner: cfg })), "out")
    })
}

/// Runs every job, writing outputs and reports into `out_dir`; `report_json` receives the run report.
/// Returns `Data` when any job failed (the report is still produced).
///
/// # Safety
/// `cfg` must be a live handle; `out_dir` NUL-terminated; `report_json` writable or NULL.
#[no_mangle]
pub unsafe extern "C" fn radlib_config_run(
    cfg: *const RadlibConfig,
    out_dir: *const c_char,
    offline: i32,
    report_json: *mut *mut c_char,
) -> RadlibStatus {
    guard(|| {
        let c = handle(cfg, "cfg")?;
        let opts = RunOptions {
            out_dir: Path::new(text(out_dir, "out_dir")?).to_path_buf(),
            offline: offline != 0,
            parallel_jobs: 1,
            ..Default::default()
        }
        .with_env();
        let report = run(&c.inner, &opts).or_else(|e| fail(RadlibStatus::Io, format!("{e:#}")))?;
        if !report_json.is_null() {
            report_json.write(owned_string(report.to_json()));
        }
        if report.success() {
            Ok(())
        } else {
            fail(RadlibStatus::Data, format!("{} job(s) failed", report.failed))
        }
    })
}

/// # Safety
/// `cfg` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn radlib_config_free(cfg: *mut RadlibConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}
