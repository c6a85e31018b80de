//! C ABI for the dyncenter library.
//!
//! Every fallible function returns a [`DcStatus`]; on failure a message is
//! available from [`dc_last_error_message`] on the same thread. Tables and
//! linkage reports are opaque handles released with their `_free` function.
//! Strings returned through `char **` out-parameters are released with
//! [`dc_string_free`]. No Rust panic crosses the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dyncenter::engine::{evaluate, PlanError, ProductionPlan};
use dyncenter::io_core::{IoError, IoTable};
use dyncenter::linkage::{LinkageReport, VThresholdRule};
use dyncenter::matrix::Matrix;
use dyncenter::merger::{self, MarketClass, MergerAction, MergerScenario};
use dyncenter::structure::{entropy, normalize, Orientation, ZeroLinePolicy};
use dyncenter::tech::{self, TechnologyProfile};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    ParseError = 4,
    NotProductive = 5,
    Singular = 6,
    IndexOutOfRange = 7,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcMarketClass {
    Unconcentrated = 0,
    ModeratelyConcentrated = 1,
    HighlyConcentrated = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DcMergerAction {
    NoFurtherAnalysis = 0,
    PotentialConcernScrutiny = 1,
    PresumedEnhancesMarketPower = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcHhiVerdict {
    pub pre_hhi: f64,
    pub delta_hhi: f64,
    pub post_hhi: f64,
    pub market_class: DcMarketClass,
    pub action: DcMergerAction,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcTechProfile {
    pub technoware: f64,
    pub inforware: f64,
    pub humanware: f64,
    pub orgaware: f64,
    /// Exponents in T, I, H, O order.
    pub beta: [f64; 4],
    pub alpha: f64,
    pub eva: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcSectorLinkage {
    pub u_backward: f64,
    pub u_forward: f64,
    pub v_backward: f64,
    pub v_forward: f64,
    pub key_sector: bool,
}

/// Opaque input-output table.
pub struct DcIoTable {
    inner: IoTable,
}

/// Opaque linkage report.
pub struct DcLinkage {
    inner: LinkageReport,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

type Failure = (DcStatus, String);

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            DcStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            DcStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    (DcStatus::NullPointer, format!("{what} is null"))
}

fn invalid(e: impl ToString) -> Failure {
    (DcStatus::InvalidArgument, e.to_string())
}

fn io_failure(e: IoError) -> Failure {
    let status = match e {
        IoError::NonProductive { .. } => DcStatus::NotProductive,
        IoError::Singular(_) | IoError::IllConditioned { .. } => DcStatus::Singular,
        IoError::Csv { .. } | IoError::Parse { .. } | IoError::Header(_) => DcStatus::ParseError,
        _ => DcStatus::InvalidArgument,
    };
    (status, e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (DcStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn slice_arg<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the thread.
#[no_mangle]
pub extern "C" fn dc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a table from CSV text (`sector,<labels>,final_demand,gross_output`).
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_io_table_from_csv(csv: *const c_char, out: *mut *mut DcIoTable) -> DcStatus {
    guard(|| {
        let text = str_arg(csv, "csv")?;
        let inner = IoTable::from_csv_reader(text.as_bytes()).map_err(io_failure)?;
        write_out(out, Box::into_raw(Box::new(DcIoTable { inner })), "out")
    })
}

/// Builds a table from row-major `flows` (n*n), `final_demand` and
/// `gross_output` (n each). Sectors are labelled `s1..sn`.
///
/// # Safety
/// Array pointers must reference the stated number of doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_io_table_from_arrays(
    n: usize,
    flows: *const f64,
    final_demand: *const f64,
    gross_output: *const f64,
    out: *mut *mut DcIoTable,
) -> DcStatus {
    guard(|| {
        if n == 0 {
            return Err(invalid("a table needs at least one sector"));
        }
        let cells = n.checked_mul(n).ok_or_else(|| invalid("n too large"))?;
        let z = slice_arg(flows, cells, "flows")?;
        let f = slice_arg(final_demand, n, "final_demand")?;
        let x = slice_arg(gross_output, n, "gross_output")?;
        let labels = (1..=n).map(|i| format!("s{i}")).collect();
        let m = Matrix::from_row_major(n, n, z.to_vec()).map_err(invalid)?;
        let inner = IoTable::new(labels, m, f.to_vec(), x.to_vec()).map_err(io_failure)?;
        write_out(out, Box::into_raw(Box::new(DcIoTable { inner })), "out")
    })
}

/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_io_table_sector_count(table: *const DcIoTable, out: *mut usize) -> DcStatus {
    guard(|| {
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        write_out(out, t.inner.len(), "out")
    })
}

/// # Safety
/// `table` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_io_table_free(table: *mut DcIoTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

unsafe fn linkage_with(table: *const DcIoTable, rule: VThresholdRule, out: *mut *mut DcLinkage) -> DcStatus {
    guard(|| {
        let t = table.as_ref().ok_or_else(|| null("table"))?;
        let a = dyncenter::technical_coefficients(&t.inner).map_err(io_failure)?;
        let b = dyncenter::leontief_inverse(&a).map_err(io_failure)?;
        let inner = LinkageReport::compute(&b, rule);
        write_out(out, Box::into_raw(Box::new(DcLinkage { inner })), "out")
    })
}

/// Dispersion indices and key sectors with median V thresholds.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_linkage_compute(table: *const DcIoTable, out: *mut *mut DcLinkage) -> DcStatus {
    linkage_with(table, VThresholdRule::Median, out)
}

/// As [`dc_linkage_compute`] with fixed V thresholds.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_linkage_compute_fixed(
    table: *const DcIoTable,
    v_backward_max: f64,
    v_forward_max: f64,
    out: *mut *mut DcLinkage,
) -> DcStatus {
    linkage_with(
        table,
        VThresholdRule::Fixed {
            backward: v_backward_max,
            forward: v_forward_max,
        },
        out,
    )
}

/// # Safety
/// `linkage` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_linkage_len(linkage: *const DcLinkage, out: *mut usize) -> DcStatus {
    guard(|| {
        let l = linkage.as_ref().ok_or_else(|| null("linkage"))?;
        write_out(out, l.inner.len(), "out")
    })
}

/// Indices for zero-based sector `k`.
///
/// # Safety
/// `linkage` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_linkage_get(linkage: *const DcLinkage, k: usize, out: *mut DcSectorLinkage) -> DcStatus {
    guard(|| {
        let l = &linkage.as_ref().ok_or_else(|| null("linkage"))?.inner;
        if k >= l.len() {
            return Err((
                DcStatus::IndexOutOfRange,
                format!("sector {k} out of range for {} sectors", l.len()),
            ));
        }
        let s = DcSectorLinkage {
            u_backward: l.u_backward[k],
            u_forward: l.u_forward[k],
            v_backward: l.v_backward[k],
            v_forward: l.v_forward[k],
            key_sector: l.key_sector[k],
        };
        write_out(out, s, "out")
    })
}

/// # Safety
/// `linkage` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_linkage_free(linkage: *mut DcLinkage) {
    if !linkage.is_null() {
        drop(Box::from_raw(linkage));
    }
}

/// Sum of squared percentage shares.
///
/// # Safety
/// `shares` must reference `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_hhi(shares: *const f64, n: usize, out: *mut f64) -> DcStatus {
    guard(|| {
        let s = slice_arg(shares, n, "shares")?;
        write_out(out, merger::hhi(s).map_err(invalid)?, "out")
    })
}

/// `2 * s_a * s_b`.
#[no_mangle]
pub extern "C" fn dc_delta_hhi(s_a: f64, s_b: f64) -> f64 {
    merger::delta_hhi(s_a, s_b)
}

/// Screens a merger of zero-based firms `a` and `b`.
///
/// # Safety
/// `shares` must reference `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_merger_screen(
    shares: *const f64,
    n: usize,
    a: usize,
    b: usize,
    out: *mut DcHhiVerdict,
) -> DcStatus {
    guard(|| {
        let s = slice_arg(shares, n, "shares")?;
        let scenario = MergerScenario::new(s.to_vec(), a, b).map_err(|e| match e {
            merger::MergerError::IndexOutOfRange { .. } => (DcStatus::IndexOutOfRange, e.to_string()),
            other => invalid(other),
        })?;
        let v = merger::screen(&scenario);
        let verdict = DcHhiVerdict {
            pre_hhi: v.pre_hhi,
            delta_hhi: v.delta_hhi,
            post_hhi: v.post_hhi,
            market_class: match v.market_class {
                MarketClass::Unconcentrated => DcMarketClass::Unconcentrated,
                MarketClass::ModeratelyConcentrated => DcMarketClass::ModeratelyConcentrated,
                MarketClass::HighlyConcentrated => DcMarketClass::HighlyConcentrated,
            },
            action: match v.action {
                MergerAction::NoFurtherAnalysis => DcMergerAction::NoFurtherAnalysis,
                MergerAction::PotentialConcernScrutiny => DcMergerAction::PotentialConcernScrutiny,
                MergerAction::PresumedEnhancesMarketPower => DcMergerAction::PresumedEnhancesMarketPower,
            },
        };
        write_out(out, verdict, "out")
    })
}

fn profile_from(p: &DcTechProfile) -> TechnologyProfile {
    TechnologyProfile {
        technoware: p.technoware,
        inforware: p.inforware,
        humanware: p.humanware,
        orgaware: p.orgaware,
        betas: p.beta,
        alpha_climate: p.alpha,
        eva: p.eva,
        tech_class: None,
        best_practice_reference: None,
    }
}

/// Technology content coefficient of a profile.
///
/// # Safety
/// `profile` must be readable; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_tcc(profile: *const DcTechProfile, out: *mut f64) -> DcStatus {
    guard(|| {
        let p = profile.as_ref().ok_or_else(|| null("profile"))?;
        write_out(out, tech::tcc(&profile_from(p)).map_err(invalid)?, "out")
    })
}

/// `TCC / 9 * EVA`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_tca(tcc: f64, eva: f64, out: *mut f64) -> DcStatus {
    guard(|| write_out(out, tech::tca(tcc, eva).map_err(invalid)?, "out"))
}

/// Shannon entropy in nats of non-negative weights, normalized to shares first.
///
/// # Safety
/// `weights` must reference `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dc_entropy(weights: *const f64, n: usize, out: *mut f64) -> DcStatus {
    guard(|| {
        let w = slice_arg(weights, n, "weights")?;
        if w.is_empty() {
            return Err(invalid("no weights given"));
        }
        if let Some(bad) = w.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(invalid(format!("weight {bad} is not a finite non-negative number")));
        }
        let m = Matrix::from_row_major(1, w.len(), w.to_vec()).map_err(invalid)?;
        let shares = normalize(&m, Orientation::Row, ZeroLinePolicy::Error).map_err(invalid)?;
        let h = entropy(&shares)[0].ok_or_else(|| invalid("weights sum to zero"))?;
        write_out(out, h, "out")
    })
}

/// Evaluates a production plan given as JSON; writes the evaluation JSON to `out_json`.
///
/// # Safety
/// `plan_json` must be a NUL-terminated string; `out_json` must be writable.
/// Release the result with [`dc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn dc_evaluate_plan_json(plan_json: *const c_char, out_json: *mut *mut c_char) -> DcStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let text = str_arg(plan_json, "plan_json")?;
        let plan: ProductionPlan =
            serde_json::from_str(text).map_err(|e| (DcStatus::ParseError, e.to_string()))?;
        let evaluation = evaluate(&plan).map_err(|e: PlanError| invalid(e))?;
        let json = serde_json::to_string(&evaluation).map_err(invalid)?;
        let c = CString::new(json).map_err(invalid)?;
        write_out(out_json, c.into_raw(), "out_json")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
