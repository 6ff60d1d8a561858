//! C interface to `motifmdl`.
//!
//! Every function returns a [`MotifmdlStatus`]. On failure the message is
//! available from [`motifmdl_last_error`] on the same thread. Handles are
//! opaque and released with their `_free` function; strings returned by the
//! library are released with [`motifmdl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use motifmdl::bench::score_database;
use motifmdl::pipeline::{fit, FitConfig};
use motifmdl::{EnumerationConfig, Error, GraphDatabase};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MotifmdlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Config = 5,
    Capacity = 6,
    Coverage = 7,
    Decode = 8,
    Io = 9,
    Invariant = 10,
    BufferSize = 11,
    Panic = 12,
    Other = 13,
}

impl From<&Error> for MotifmdlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Format(_) | Error::Csv(_) | Error::Json(_) => Self::Parse,
            Error::EmptyDatabase | Error::Validation(_) => Self::Validation,
            Error::Config(_) | Error::Domain(_) => Self::Config,
            Error::Capacity(_) | Error::MotifTooLarge { .. } => Self::Capacity,
            Error::Coverage(_) | Error::DegenerateTable => Self::Coverage,
            Error::Decode(_) => Self::Decode,
            Error::Io(_) => Self::Io,
            Error::Invariant(_) => Self::Invariant,
            _ => Self::Other,
        }
    }
}

/// A parsed graph database.
pub struct MotifmdlDatabase {
    db: GraphDatabase,
}

/// A fitted motif table with the per-graph scores of the database it was
/// fitted on.
pub struct MotifmdlModel {
    total_bits: f64,
    scores: Vec<f64>,
    table_json: String,
    motif_count: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), (MotifmdlStatus, String)>) -> MotifmdlStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MotifmdlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside motifmdl".into());
            MotifmdlStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (MotifmdlStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(what: &str) -> (MotifmdlStatus, String) {
    (MotifmdlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (MotifmdlStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (MotifmdlStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library and valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn motifmdl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses an edge-list CSV held in memory.
///
/// # Safety
/// `csv` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_database_from_csv(
    csv: *const c_char,
    out: *mut *mut MotifmdlDatabase,
) -> MotifmdlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let db = GraphDatabase::parse_edge_list_str(text(csv, "csv")?).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MotifmdlDatabase { db }));
        Ok(())
    })
}

/// Reads an edge-list CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_database_from_file(
    path: *const c_char,
    out: *mut *mut MotifmdlDatabase,
) -> MotifmdlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = text(path, "path")?;
        let file = std::fs::File::open(path).map_err(|e| lib_err(Error::Io(e)))?;
        let db = GraphDatabase::parse_edge_list(std::io::BufReader::new(file)).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(MotifmdlDatabase { db }));
        Ok(())
    })
}

/// Number of graphs in the database.
///
/// # Safety
/// `db` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_database_len(db: *const MotifmdlDatabase, out: *mut usize) -> MotifmdlStatus {
    guard(|| {
        let db = db.as_ref().ok_or_else(|| null("db"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = db.db.len();
        Ok(())
    })
}

/// Releases a database. Null is ignored.
///
/// # Safety
/// `db` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_database_free(db: *mut MotifmdlDatabase) {
    if !db.is_null() {
        drop(Box::from_raw(db));
    }
}

/// Fits a motif table to `db` and scores every graph.
///
/// # Safety
/// `db` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_fit(
    db: *const MotifmdlDatabase,
    k_min: usize,
    k_max: usize,
    budget: usize,
    weighted: bool,
    out: *mut *mut MotifmdlModel,
) -> MotifmdlStatus {
    guard(|| {
        let db = &db.as_ref().ok_or_else(|| null("db"))?.db;
        if out.is_null() {
            return Err(null("out"));
        }
        let enumeration = EnumerationConfig::new(k_min, k_max, budget).map_err(lib_err)?;
        let model = fit(db, &FitConfig { enumeration, weighted }).map_err(lib_err)?;
        let scores = score_database(db, &model.table, &model.covers).map_err(lib_err)?.scores();
        let table_json =
            serde_json::to_string(&model.table.to_json(Some(db.alphabet()))).map_err(|e| lib_err(Error::Json(e)))?;
        *out = Box::into_raw(Box::new(MotifmdlModel {
            total_bits: model.state.total,
            scores,
            table_json,
            motif_count: model.table.len(),
        }));
        Ok(())
    })
}

/// Total description length of the fitted database in bits.
///
/// # Safety
/// `model` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_model_total_bits(model: *const MotifmdlModel, out: *mut f64) -> MotifmdlStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = m.total_bits;
        Ok(())
    })
}

/// Number of motifs in the table, typed edges included.
///
/// # Safety
/// `model` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_model_motif_count(model: *const MotifmdlModel, out: *mut usize) -> MotifmdlStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = m.motif_count;
        Ok(())
    })
}

/// Copies the anomaly score of each graph, in database order, into `out`.
/// `len` must equal the number of graphs.
///
/// # Safety
/// `model` must come from this library and `out` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_model_scores(
    model: *const MotifmdlModel,
    out: *mut f64,
    len: usize,
) -> MotifmdlStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len != m.scores.len() {
            return Err((
                MotifmdlStatus::BufferSize,
                format!("buffer holds {len} scores, model has {}", m.scores.len()),
            ));
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(&m.scores);
        Ok(())
    })
}

/// The motif table as JSON. Release the string with
/// [`motifmdl_string_free`].
///
/// # Safety
/// `model` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_model_table_json(
    model: *const MotifmdlModel,
    out: *mut *mut c_char,
) -> MotifmdlStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let c = CString::new(m.table_json.as_str()).map_err(|e| (MotifmdlStatus::Other, e.to_string()))?;
        *out = c.into_raw();
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_model_free(model: *mut MotifmdlModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn motifmdl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
