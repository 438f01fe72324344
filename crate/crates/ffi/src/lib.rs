//! C ABI over `dcause`. Models live behind opaque handles; every call
//! returns a `DcStatus` and writes its result through an out pointer. The
//! message of the last failure on the calling thread is available from
//! `dc_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dcause::canonical::to_canonical;
use dcause::counterfactual::{evaluate_with, CounterfactualQuery, TwinMode};
use dcause::decide::value_of_information;
use dcause::error::ErrorKind;
use dcause::format::{self, Model};
use dcause::sem::{parameter_count_diagram, parameter_count_sem, to_canonical_from_sem};
use dcause::space::{self, Act, Assignment};
use dcause::{CanonicalDiagram, Distribution, Error};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Input = 3,
    Model = 4,
    ImpossibleEvidence = 5,
    Definedness = 6,
    Form = 7,
    Limit = 8,
    Format = 9,
    WrongModelKind = 10,
    Panic = 11,
}

/// A parsed model file.
pub struct DcModel {
    model: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Status(DcStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn status_of(kind: ErrorKind) -> DcStatus {
    match kind {
        ErrorKind::Input => DcStatus::Input,
        ErrorKind::Model => DcStatus::Model,
        ErrorKind::ImpossibleEvidence => DcStatus::ImpossibleEvidence,
        ErrorKind::Definedness => DcStatus::Definedness,
        ErrorKind::Form => DcStatus::Form,
        ErrorKind::Limit => DcStatus::Limit,
        ErrorKind::Format => DcStatus::Format,
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> DcStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DcStatus::Ok,
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(e.kind())
        }
        Err(_) => {
            set_error("internal panic".into());
            DcStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(DcStatus::NullArgument, format!("`{what}` is null"))
}

/// # Safety
/// `p` is null or a NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Status(DcStatus::InvalidUtf8, format!("`{what}` is not UTF-8")))
}

/// # Safety
/// As `text`; null reads as the empty string.
unsafe fn optional<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        Ok("")
    } else {
        text(p, what)
    }
}

/// # Safety
/// `m` is null or a live handle.
unsafe fn model<'a>(m: *const DcModel) -> Result<&'a Model, Failure> {
    m.as_ref().map(|h| &h.model).ok_or_else(|| null("model"))
}

/// # Safety
/// `p` is null or valid for writes.
unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn wrong(m: &Model, want: &str) -> Failure {
    Failure::Status(DcStatus::WrongModelKind, format!("a {} model cannot be used here; need {want}", m.tag()))
}

fn list(s: &str) -> Vec<String> {
    s.split(',').map(str::trim).filter(|v| !v.is_empty()).map(str::to_owned).collect()
}

fn canonical_of(m: &Model) -> Result<CanonicalDiagram, Failure> {
    match m {
        Model::Canonical(cd) => Ok(cd.clone()),
        Model::WorldTable(t) => Ok(to_canonical(t, None)?),
        Model::Sem(s) => Ok(to_canonical_from_sem(s)?),
        other => Err(wrong(other, "a canonical diagram")),
    }
}

/// Probability of `event` under `dist`, whose variables follow the event's
/// keys in order.
fn event_probability(dist: &Distribution, event: &Assignment) -> Result<f64, Failure> {
    let renamed: Assignment = dist
        .variables()
        .iter()
        .cloned()
        .zip(event.values().cloned())
        .collect();
    Ok(dist.prob(&renamed)?)
}

/// # Safety
/// `out` is null or valid for writes.
unsafe fn string_out(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let slot = out_ptr(out, "out")?;
    *slot = CString::new(s)
        .map_err(|_| Failure::Status(DcStatus::Input, "output holds a NUL byte".into()))?
        .into_raw();
    Ok(())
}

/// # Safety
/// `out` is null or valid for writes.
unsafe fn handle_out(out: *mut *mut DcModel, model: Model) -> Result<(), Failure> {
    let slot = out_ptr(out, "out")?;
    *slot = Box::into_raw(Box::new(DcModel { model }));
    Ok(())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn dc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn dc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a model from JSON text.
///
/// # Safety
/// `json` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_model_from_json(json: *const c_char, out: *mut *mut DcModel) -> DcStatus {
    guard(|| {
        let m = format::parse(text(json, "json")?)?;
        handle_out(out, m)
    })
}

/// Reads a model file.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_model_from_path(path: *const c_char, out: *mut *mut DcModel) -> DcStatus {
    guard(|| {
        let m = format::read(Path::new(text(path, "path")?))?;
        handle_out(out, m)
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `m` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_model_free(m: *mut DcModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The model tag (`world_table`, `canonical`, ...) into a new string.
///
/// # Safety
/// `m` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_model_kind(m: *const DcModel, out: *mut *mut c_char) -> DcStatus {
    guard(|| string_out(out, model(m)?.tag().to_owned()))
}

/// Serializes a model to its JSON file form.
///
/// # Safety
/// `m` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_model_to_json(m: *const DcModel, out: *mut *mut c_char) -> DcStatus {
    guard(|| string_out(out, format::serialize(model(m)?)))
}

/// Canonical-form diagram of a priced world table or a structural model.
///
/// # Safety
/// `m` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_canonicalize(m: *const DcModel, out: *mut *mut DcModel) -> DcStatus {
    guard(|| {
        let cd = canonical_of(model(m)?)?;
        handle_out(out, Model::Canonical(cd))
    })
}

/// Whether chance variables `vars` (comma-separated) of a world table are
/// responsive to the decisions in states limited by `limited_by`, which may
/// be null.
///
/// # Safety
/// `m` is a live handle; strings are NUL-terminated or null where allowed;
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_is_responsive(
    m: *const DcModel,
    vars: *const c_char,
    limited_by: *const c_char,
    out: *mut bool,
) -> DcStatus {
    guard(|| {
        let Model::WorldTable(t) = model(m)? else {
            return Err(wrong(model(m)?, "a world table"));
        };
        let x = list(text(vars, "vars")?);
        let y = list(optional(limited_by, "limited_by")?);
        let unresponsive = t.is_unresponsive_limited(&x, &y)?;
        *out_ptr(out, "out")? = !unresponsive;
        Ok(())
    })
}

/// Minimal cause sets of `var` in a world table, as a JSON array of sorted
/// arrays of ids.
///
/// # Safety
/// `m` is a live handle; `var` is NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_find_causes(m: *const DcModel, var: *const c_char, out: *mut *mut c_char) -> DcStatus {
    guard(|| {
        let Model::WorldTable(t) = model(m)? else {
            return Err(wrong(model(m)?, "a world table"));
        };
        let causes = t.find_causes(text(var, "var")?)?;
        let json = serde_json::to_string(&causes).expect("sets of strings serialize");
        string_out(out, json)
    })
}

/// Number of free probabilities: diagram parameters for a diagram,
/// disturbance parameters for a structural model.
///
/// # Safety
/// `m` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_count_params(m: *const DcModel, out: *mut u64) -> DcStatus {
    guard(|| {
        let total = match model(m)? {
            Model::Canonical(cd) => parameter_count_diagram(&cd.diagram).total,
            Model::InfluenceDiagram(d) => parameter_count_diagram(d).total,
            Model::Sem(s) => parameter_count_sem(s).total,
            other => return Err(wrong(other, "a diagram or structural model")),
        };
        *out_ptr(out, "out")? = total as u64;
        Ok(())
    })
}

/// `P(event | act, evidence)`. Assignments are written `a=x,b=y`; `act`
/// and `evidence` may be null.
///
/// # Safety
/// `m` is a live handle; strings are NUL-terminated or null where allowed;
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_infer_probability(
    m: *const DcModel,
    act: *const c_char,
    evidence: *const c_char,
    event: *const c_char,
    out: *mut f64,
) -> DcStatus {
    guard(|| {
        let act = Act::from(space::parse_assignment(optional(act, "act")?)?);
        let evidence = space::parse_assignment(optional(evidence, "evidence")?)?;
        let event = space::parse_assignment(text(event, "event")?)?;
        let query: Vec<String> = event.keys().cloned().collect();
        let mut vars = query.clone();
        vars.extend(evidence.keys().filter(|k| !query.contains(k)).cloned());
        let dist = match model(m)? {
            Model::Canonical(cd) => cd.diagram.infer(&act, &evidence, &query)?,
            Model::InfluenceDiagram(d) => d.infer(&act, &evidence, &query)?,
            Model::WorldTable(t) => t.induced_distribution(&act, &vars)?.condition(&evidence)?.marginal(&query)?,
            Model::Sem(s) => s.distribution(&act, &vars)?.condition(&evidence)?.marginal(&query)?,
        };
        *out_ptr(out, "out")? = event_probability(&dist, &event)?;
        Ok(())
    })
}

/// Probability of `event` in the counterfactual world where `cf_act` was
/// taken, given that `factual_act` was taken and `factual_evidence` seen.
/// Event ids are read in the counterfactual world. `full` selects the full
/// twin diagram instead of the minimal one.
///
/// # Safety
/// `m` is a live handle; strings are NUL-terminated or null where allowed;
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_counterfactual_probability(
    m: *const DcModel,
    factual_act: *const c_char,
    factual_evidence: *const c_char,
    cf_act: *const c_char,
    event: *const c_char,
    full: bool,
    out: *mut f64,
) -> DcStatus {
    guard(|| {
        let cd = canonical_of(model(m)?)?;
        let factual = Act::from(space::parse_assignment(optional(factual_act, "factual_act")?)?);
        let evidence = space::parse_assignment(optional(factual_evidence, "factual_evidence")?)?;
        let cf = Act::from(space::parse_assignment(optional(cf_act, "cf_act")?)?);
        let event = space::parse_assignment(text(event, "event")?)?;
        let q = CounterfactualQuery::new(factual, evidence, cf, Assignment::new(), event.keys().cloned());
        let mode = if full { TwinMode::Full } else { TwinMode::Minimal };
        let dist = evaluate_with(&cd, &q, mode)?;
        *out_ptr(out, "out")? = event_probability(&dist, &event)?;
        Ok(())
    })
}

/// Value of observing the unresponsive node `var` before deciding.
///
/// # Safety
/// `m` is a live handle; `var` is NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn dc_value_of_information(m: *const DcModel, var: *const c_char, out: *mut f64) -> DcStatus {
    guard(|| {
        let voi = match model(m)? {
            Model::Canonical(cd) => value_of_information(&cd.diagram, text(var, "var")?, &cd.responsive)?,
            Model::InfluenceDiagram(d) => value_of_information(d, text(var, "var")?, &Default::default())?,
            other => return Err(wrong(other, "an influence diagram")),
        };
        *out_ptr(out, "out")? = voi;
        Ok(())
    })
}
