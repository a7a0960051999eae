//! C ABI over the aloof library.
//!
//! Every fallible call returns an [`AloofStatus`]; on failure the message is
//! available from [`aloof_last_error`] on the same thread. Handles are opaque
//! and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use aloof::dataio::{load_csv, read_csv, MissingPolicy};
use aloof::ensemble::{GbConfig, RfConfig};
use aloof::eval::{sign_test, FittedModel, LearnerSpec};
use aloof::loo::{select_variable, LooConfig};
use aloof::tree::{default_impurity, GrowConfig, Selector};
use aloof::{Dataset, Error, Schema};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AloofStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Schema = 4,
    Format = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AloofLearner {
    Tree = 0,
    GradientBoosting = 1,
    RandomForest = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AloofSelector {
    Cart = 0,
    Aloof = 1,
}

/// Fit settings. Zero in a numeric field means "library default" (no limit
/// for `max_depth` and `max_categories`).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct AloofFitOptions {
    pub learner: AloofLearner,
    pub selector: AloofSelector,
    pub max_depth: u32,
    pub min_leaf: u32,
    pub max_categories: u32,
    pub trees: u32,
    pub seed: u64,
}

/// Opaque dataset handle.
pub struct AloofDataset(Dataset);

/// Opaque model handle.
pub struct AloofModel(FittedModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AloofStatus {
    match e {
        Error::Io(_) => AloofStatus::Io,
        Error::Schema(_) | Error::SchemaMismatch(_) | Error::Ingest { .. } | Error::Csv(_) | Error::EmptyData => {
            AloofStatus::Schema
        }
        Error::Format(_) | Error::Version { .. } => AloofStatus::Format,
        _ => AloofStatus::InvalidArgument,
    }
}

struct Fail(AloofStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> AloofStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AloofStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AloofStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(AloofStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(AloofStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library on this thread.
#[no_mangle]
pub extern "C" fn aloof_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Defaults: single ALOOF tree, library size limits, seed 0.
#[no_mangle]
pub extern "C" fn aloof_fit_options_default() -> AloofFitOptions {
    AloofFitOptions {
        learner: AloofLearner::Tree,
        selector: AloofSelector::Aloof,
        max_depth: 0,
        min_leaf: 0,
        max_categories: 0,
        trees: 0,
        seed: 0,
    }
}

/// Loads a CSV file described by a schema file.
///
/// # Safety
/// Paths must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aloof_dataset_load(
    csv_path: *const c_char,
    schema_path: *const c_char,
    out: *mut *mut AloofDataset,
) -> AloofStatus {
    guard(|| {
        let (csv, schema) = (text(csv_path, "csv_path")?, text(schema_path, "schema_path")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let d = load_csv(csv, &Schema::from_file(schema)?, MissingPolicy::DropRow)?;
        *out = Box::into_raw(Box::new(AloofDataset(d)));
        Ok(())
    })
}

/// Parses CSV and schema text held in memory.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aloof_dataset_parse(
    csv_text: *const c_char,
    schema_text: *const c_char,
    out: *mut *mut AloofDataset,
) -> AloofStatus {
    guard(|| {
        let (csv, schema) = (text(csv_text, "csv_text")?, text(schema_text, "schema_text")?);
        if out.is_null() {
            return Err(null("out"));
        }
        let d = read_csv(csv.as_bytes(), &Schema::parse(schema)?, MissingPolicy::DropRow)?;
        *out = Box::into_raw(Box::new(AloofDataset(d)));
        Ok(())
    })
}

/// Row and feature counts.
///
/// # Safety
/// `d` must be a live dataset handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn aloof_dataset_shape(d: *const AloofDataset, rows: *mut usize, features: *mut usize) -> AloofStatus {
    guard(|| {
        let d = handle(d, "dataset")?;
        if rows.is_null() || features.is_null() {
            return Err(null("output"));
        }
        *rows = d.0.n();
        *features = d.0.n_features();
        Ok(())
    })
}

/// # Safety
/// `d` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn aloof_dataset_free(d: *mut AloofDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

fn nonzero(v: u32) -> Option<usize> {
    (v != 0).then_some(v as usize)
}

fn learner_spec(o: &AloofFitOptions, d: &Dataset) -> LearnerSpec {
    let selector = match o.selector {
        AloofSelector::Cart => Selector::Cart,
        AloofSelector::Aloof => Selector::Aloof,
    };
    match o.learner {
        AloofLearner::Tree => {
            let mut g = GrowConfig::new(selector, default_impurity(d.task()));
            g.max_depth = nonzero(o.max_depth);
            g.max_categories = nonzero(o.max_categories);
            g.seed = o.seed;
            if let Some(m) = nonzero(o.min_leaf) {
                g.min_leaf = m;
                g.min_node = g.min_node.max(2 * m);
            }
            LearnerSpec::Tree {
                grow: g,
                prune_folds: None,
            }
        }
        AloofLearner::GradientBoosting => {
            let mut c = GbConfig::for_task(selector, d.task());
            c.max_depth = nonzero(o.max_depth);
            c.max_categories = nonzero(o.max_categories);
            c.trees = nonzero(o.trees).unwrap_or(c.trees);
            c.seed = o.seed;
            LearnerSpec::Gb(c)
        }
        AloofLearner::RandomForest => {
            let mut c = RfConfig::new(selector);
            c.max_depth = nonzero(o.max_depth);
            c.max_categories = nonzero(o.max_categories);
            c.min_leaf = nonzero(o.min_leaf);
            c.trees = nonzero(o.trees).unwrap_or(c.trees);
            c.seed = o.seed;
            LearnerSpec::Rf(c)
        }
    }
}

/// Fits a model. `options` may be NULL for the defaults.
///
/// # Safety
/// `d` must be a live dataset handle; `options` NULL or valid; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aloof_model_fit(
    d: *const AloofDataset,
    options: *const AloofFitOptions,
    out: *mut *mut AloofModel,
) -> AloofStatus {
    guard(|| {
        let d = handle(d, "dataset")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let o = options.as_ref().copied().unwrap_or_else(|| aloof_fit_options_default());
        let m = learner_spec(&o, &d.0).fit(&d.0)?;
        *out = Box::into_raw(Box::new(AloofModel(m)));
        Ok(())
    })
}

/// Writes one prediction per dataset row into `out[0..len]`; `len` must equal
/// the row count.
///
/// # Safety
/// Handles must be live; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn aloof_model_predict(
    m: *const AloofModel,
    d: *const AloofDataset,
    out: *mut f64,
    len: usize,
) -> AloofStatus {
    guard(|| {
        let (m, d) = (handle(m, "model")?, handle(d, "dataset")?);
        if out.is_null() {
            return Err(null("out"));
        }
        if len != d.0.n() {
            return Err(Fail(
                AloofStatus::BufferTooSmall,
                format!("buffer holds {len} values for {} rows", d.0.n()),
            ));
        }
        let p = m.0.predict(&d.0)?;
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&p);
        Ok(())
    })
}

/// Serializes a tree or ensemble model. Release the string with
/// [`aloof_string_free`].
///
/// # Safety
/// `m` must be a live model handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aloof_model_to_json(m: *const AloofModel, out: *mut *mut c_char) -> AloofStatus {
    guard(|| {
        let m = handle(m, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = m.0.to_json()?;
        *out = CString::new(json)
            .map_err(|_| Fail(AloofStatus::Format, "model JSON contains NUL".into()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `json` must be NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aloof_model_from_json(json: *const c_char, out: *mut *mut AloofModel) -> AloofStatus {
    guard(|| {
        let json = text(json, "json")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = Box::into_raw(Box::new(AloofModel(FittedModel::from_json(json)?)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from this library and not be used afterwards. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn aloof_model_free(m: *mut AloofModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `s` must come from this library. NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn aloof_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Leave-one-out score of every feature at the root, with the default
/// impurity and `min_leaf`. `scores` and `valid` must hold one entry per
/// feature; invalid features get a score of +inf.
///
/// # Safety
/// `d` must be a live handle; output buffers must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn aloof_loo_scores(
    d: *const AloofDataset,
    min_leaf: u32,
    scores: *mut f64,
    valid: *mut u8,
    len: usize,
    baseline: *mut f64,
) -> AloofStatus {
    guard(|| {
        let d = handle(d, "dataset")?;
        if scores.is_null() || valid.is_null() || baseline.is_null() {
            return Err(null("output"));
        }
        let p = d.0.n_features();
        if len != p {
            return Err(Fail(
                AloofStatus::BufferTooSmall,
                format!("buffers hold {len} entries for {p} features"),
            ));
        }
        let cfg = LooConfig::new(default_impurity(d.0.task()), (min_leaf as usize).max(1));
        let sel = select_variable(&d.0, &(0..p).collect::<Vec<_>>(), &cfg)?;
        let (s, v) = (std::slice::from_raw_parts_mut(scores, p), std::slice::from_raw_parts_mut(valid, p));
        for (j, score) in sel.table.scores {
            s[j] = if score.valid { score.total } else { f64::INFINITY };
            v[j] = score.valid as u8;
        }
        *baseline = sel.table.baseline;
        Ok(())
    })
}

/// One-sided sign test: exact binomial tail and continuity-corrected normal
/// approximation.
///
/// # Safety
/// Outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn aloof_sign_test(wins: u64, trials: u64, exact: *mut f64, normal: *mut f64) -> AloofStatus {
    guard(|| {
        if exact.is_null() || normal.is_null() {
            return Err(null("output"));
        }
        let s = sign_test(wins, trials)?;
        *exact = s.exact;
        *normal = s.normal;
        Ok(())
    })
}
