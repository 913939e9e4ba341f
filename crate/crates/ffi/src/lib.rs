//! C ABI over `dgm-core`.
//!
//! Models are opaque handles created by `dgm_model_from_json` or
//! `dgm_model_from_file` and released with `dgm_model_free`. Every fallible
//! call returns a [`DgmStatus`]; on failure the message is available from
//! `dgm_last_error_message` on the same thread. Strings returned through
//! `char **` out-parameters are owned by the caller and must be released
//! with `dgm_string_free`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dgm_core::cut::{cut_decomposition, cut_reference_prior};
use dgm_core::io::{parse_model, parse_params, to_json, CutDump, ModelFile, ParamDump, PriorDump};
use dgm_core::likelihood::{loglik, SufficientStats};
use dgm_core::model::Model;
use dgm_core::oracle::{verify, VerifyTarget};
use dgm_core::prior::{fictitious_counts, reference_prior_pcond};
use dgm_core::table::ContingencyTable;
use dgm_core::theta::ThetaKind;
use dgm_core::transform::{convert, ParamKind, Params};
use dgm_core::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgmStatus {
    Ok = 0,
    /// Invalid input: malformed files, non-decomposable graphs, bad parameters.
    UserError = 1,
    /// A defect inside the library, including caught panics.
    InternalError = 2,
    /// A required pointer argument was NULL.
    NullPointer = 3,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 4,
}

/// A parsed, decomposable model.
pub struct DgmModel {
    inner: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(DgmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_internal() {
            DgmStatus::InternalError
        } else {
            DgmStatus::UserError
        };
        Failure(status, e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn guard(f: impl FnOnce() -> Outcome<()>) -> DgmStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DgmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal defect (panic)");
            DgmStatus::InternalError
        }
    }
}

unsafe fn str_arg<'a>(p: *const libc::c_char, name: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(Failure(DgmStatus::NullPointer, format!("`{name}` is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(DgmStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn model_arg<'a>(m: *const DgmModel) -> Outcome<&'a Model> {
    m.as_ref()
        .map(|m| &m.inner)
        .ok_or_else(|| Failure(DgmStatus::NullPointer, "`model` is NULL".into()))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Outcome<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Failure(DgmStatus::NullPointer, format!("`{name}` is NULL")))
}

fn into_c_string(s: String) -> Outcome<*mut libc::c_char> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(DgmStatus::InternalError, "output contains NUL".into()))
}

unsafe fn table_arg(model: &Model, counts: *const u64, n_counts: usize) -> Outcome<ContingencyTable> {
    if counts.is_null() {
        return Err(Failure(DgmStatus::NullPointer, "`counts` is NULL".into()));
    }
    let counts = std::slice::from_raw_parts(counts, n_counts).to_vec();
    Ok(ContingencyTable::from_counts(model.spec().clone(), counts)?)
}

fn kind_arg(s: &str) -> Outcome<ParamKind> {
    Ok(s.parse::<ParamKind>()?)
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn dgm_last_error_message() -> *const libc::c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dgm_version() -> *const libc::c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dgm_string_free(s: *mut libc::c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a model description (JSON text).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dgm_model_from_json(json: *const libc::c_char, out: *mut *mut DgmModel) -> DgmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let model = parse_model(str_arg(json, "json")?, "<json>")?;
        *out = Box::into_raw(Box::new(DgmModel { inner: model }));
        Ok(())
    })
}

/// Reads a model description from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn dgm_model_from_file(path: *const libc::c_char, out: *mut *mut DgmModel) -> DgmStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let model = dgm_core::io::read_model(Path::new(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(DgmModel { inner: model }));
        Ok(())
    })
}

/// Releases a model. NULL is ignored.
///
/// # Safety
/// `model` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn dgm_model_free(model: *mut DgmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of variables and number of free parameters.
///
/// # Safety
/// `model` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dgm_model_dimensions(
    model: *const DgmModel,
    n_variables: *mut usize,
    n_parameters: *mut usize,
    n_joint_cells: *mut usize,
) -> DgmStatus {
    guard(|| {
        let m = model_arg(model)?;
        *out_arg(n_variables, "n_variables")? = m.n_vars();
        *out_arg(n_parameters, "n_parameters")? = m.layout().len();
        *out_arg(n_joint_cells, "n_joint_cells")? = m.spec().cells(m.spec().all());
        Ok(())
    })
}

/// The model with its clique order, as JSON.
///
/// # Safety
/// `model` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dgm_model_to_json(model: *const DgmModel, out: *mut *mut libc::c_char) -> DgmStatus {
    guard(|| {
        let m = model_arg(model)?;
        let out = out_arg(out, "out")?;
        *out = into_c_string(to_json(&ModelFile::from_model(m))?)?;
        Ok(())
    })
}

/// Converts a parameter dump to the kind `to` (joint, pcond, mod, cond,
/// cliq or xi). `tolerance` bounds the Markov check on joint tables.
///
/// # Safety
/// `model` must be a live handle, the strings NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dgm_transform(
    model: *const DgmModel,
    params_json: *const libc::c_char,
    to: *const libc::c_char,
    tolerance: f64,
    out: *mut *mut libc::c_char,
) -> DgmStatus {
    guard(|| {
        let m = model_arg(model)?;
        let out = out_arg(out, "out")?;
        let params = parse_params(m, str_arg(params_json, "params_json")?, "<params>")?;
        let to = kind_arg(str_arg(to, "to")?)?;
        let result = convert(m, &params, to, tolerance)?;
        *out = into_c_string(to_json(&ParamDump::from_params(m, &result))?)?;
        Ok(())
    })
}

/// Log-likelihood of a parameter point evaluated in parametrization `as`,
/// for joint counts in row-major order (last variable fastest).
///
/// # Safety
/// `counts` must point to `n_counts` values; other pointers as above.
#[no_mangle]
pub unsafe extern "C" fn dgm_loglik(
    model: *const DgmModel,
    params_json: *const libc::c_char,
    as_kind: *const libc::c_char,
    counts: *const u64,
    n_counts: usize,
    tolerance: f64,
    out: *mut f64,
) -> DgmStatus {
    guard(|| {
        let m = model_arg(model)?;
        let out = out_arg(out, "out")?;
        let params = parse_params(m, str_arg(params_json, "params_json")?, "<params>")?;
        let point = convert(m, &params, kind_arg(str_arg(as_kind, "as_kind")?)?, tolerance)?;
        let t = table_arg(m, counts, n_counts)?;
        let stats = SufficientStats::from_table(m, &t)?.to_f64();
        *out = loglik(m, &point, &stats)?;
        Ok(())
    })
}

/// Reference prior dump for `kind` (pcond, cond, cliq, mod or xi).
///
/// # Safety
/// Pointers as above.
#[no_mangle]
pub unsafe extern "C" fn dgm_prior(
    model: *const DgmModel,
    kind: *const libc::c_char,
    out: *mut *mut libc::c_char,
) -> DgmStatus {
    guard(|| {
        let m = model_arg(model)?;
        let out = out_arg(out, "out")?;
        let kind = kind_arg(str_arg(kind, "kind")?)?;
        let mut dump = PriorDump::new(m.graph(), m.spec(), &kind.to_string(), &reference_prior_pcond(m));
        match kind {
            ParamKind::Joint => {
                return Err(Failure(DgmStatus::UserError, "no reference prior on the joint table".into()))
            }
            ParamKind::Theta(k @ (ThetaKind::Cond | ThetaKind::Cliq)) => {
                dump = dump.with_fictitious(m, &fictitious_counts(m, k)?);
            }
            _ => {}
        }
        *out = into_c_string(to_json(&dump)?)?;
        Ok(())
    })
}

/// Posterior hyperparameters after observing the joint counts.
///
/// # Safety
/// `counts` must point to `n_counts` values; other pointers as above.
#[no_mangle]
pub unsafe extern "C" fn dgm_posterior(
    model: *const DgmModel,
    counts: *const u64,
    n_counts: usize,
    out: *mut *mut libc::c_char,
) -> DgmStatus {
    guard(|| {
        let m = model_arg(model)?;
        let out = out_arg(out, "out")?;
        let t = table_arg(m, counts, n_counts)?;
        let post = reference_prior_pcond(m).posterior(&t)?;
        *out = into_c_string(to_json(&PriorDump::new(m.graph(), m.spec(), "pcond", &post))?)?;
        Ok(())
    })
}

/// `n_draws` draws in parametrization `kind` as a JSON array of dumps. With
/// `counts` NULL the draws come from the prior, otherwise from the posterior.
///
/// # Safety
/// `counts` is NULL or points to `n_counts` values; other pointers as above.
#[no_mangle]
pub unsafe extern "C" fn dgm_sample(
    model: *const DgmModel,
    kind: *const libc::c_char,
    n_draws: usize,
    seed: u64,
    counts: *const u64,
    n_counts: usize,
    out: *mut *mut libc::c_char,
) -> DgmStatus {
    guard(|| {
        let m = model_arg(model)?;
        let out = out_arg(out, "out")?;
        let kind = kind_arg(str_arg(kind, "kind")?)?;
        let mut blocks = reference_prior_pcond(m);
        if !counts.is_null() {
            blocks = blocks.posterior(&table_arg(m, counts, n_counts)?)?;
        }
        let draws = blocks
            .sample(seed, n_draws)
            .into_iter()
            .map(|cp| convert(m, &Params::PCond(cp), kind, f64::INFINITY).map(|p| ParamDump::from_params(m, &p)))
            .collect::<dgm_core::Result<Vec<_>>>()?;
        *out = into_c_string(to_json(&draws)?)?;
        Ok(())
    })
}

/// Cut decomposition along the comma-separated variables `set`, as JSON.
/// Returns `UserError` with a witness when `set` is not a cut.
///
/// # Safety
/// Pointers as above.
#[no_mangle]
pub unsafe extern "C" fn dgm_cut(
    model: *const DgmModel,
    set: *const libc::c_char,
    with_prior: bool,
    out: *mut *mut libc::c_char,
) -> DgmStatus {
    guard(|| {
        let m = model_arg(model)?;
        let out = out_arg(out, "out")?;
        let names: Vec<&str> = str_arg(set, "set")?
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect();
        let g = m.graph();
        let d = cut_decomposition(g, g.set_of(&names)?)?;
        let mut value = serde_json::to_value(CutDump::new(g, &d))
            .map_err(|e| Failure(DgmStatus::InternalError, e.to_string()))?;
        if with_prior {
            let prior = PriorDump::new(g, m.spec(), "cut", &cut_reference_prior(&d, m.spec()));
            value["prior"] = serde_json::to_value(prior)
                .map_err(|e| Failure(DgmStatus::InternalError, e.to_string()))?;
        }
        *out = into_c_string(to_json(&value)?)?;
        Ok(())
    })
}

/// Runs the built-in verification suite. `all_passed` receives 1 when every
/// check passed; `report` receives the JSON report.
///
/// # Safety
/// The out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn dgm_verify(seed: u64, all_passed: *mut i32, report: *mut *mut libc::c_char) -> DgmStatus {
    guard(|| {
        let all_passed = out_arg(all_passed, "all_passed")?;
        let report = out_arg(report, "report")?;
        let r = verify(&VerifyTarget::Builtin, seed)?;
        *all_passed = i32::from(r.all_passed());
        *report = into_c_string(to_json(&r)?)?;
        Ok(())
    })
}
