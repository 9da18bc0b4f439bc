//! C ABI over `ceres-core`.
//!
//! Handles are opaque and owned by the caller until passed to their free
//! function. Every string returned through an out-pointer is heap allocated
//! and must be released with [`ceres_string_free`]. Functions report a
//! [`CeresStatus`]; the message of the last failure on the calling thread is
//! available from [`ceres_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ceres_core::clause_sets::{clauses_to_json, clauses_to_text, clauses_to_tptp, nia_clause_set, DEFAULT_BUDGET};
use ceres_core::herbrand::{herbrand_cnf, herbrand_sequent, verify_sequent, Axioms};
use ceres_core::math::refute_math;
use ceres_core::nia::{refute_with, Reading};
use ceres_core::resolution::{check_tree, ResolutionTree};
use ceres_core::saturate::{saturate_with, DEFAULT_CLAUSE_BUDGET};
use ceres_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CeresStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BudgetExhausted = 3,
    /// The computation ran but gave a negative answer, e.g. no refutation.
    NotFound = 4,
    Internal = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CeresFormat {
    Text = 0,
    Json = 1,
    Tptp = 2,
    Dot = 3,
    Dimacs = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CeresMode {
    /// ρ1–ρ4 under the repaired reading.
    Schema = 0,
    /// ρ1–ρ4 exactly as printed; expected to exhaust its budget.
    SchemaPrinted = 1,
    Math = 2,
    Saturate = 3,
}

/// A refutation of `C(n)` built by [`ceres_refute`].
pub struct CeresTree {
    n: u64,
    tree: ResolutionTree,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> CeresStatus {
    match e {
        Error::Budget { .. } => CeresStatus::BudgetExhausted,
        Error::Range(_) | Error::Syntax { .. } | Error::Load(_) => CeresStatus::InvalidArgument,
        _ => CeresStatus::Internal,
    }
}

/// Runs `f`, turning errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (CeresStatus, String)>) -> CeresStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CeresStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside ceres".into());
            CeresStatus::Panic
        }
    }
}

fn core<T>(r: ceres_core::Result<T>) -> Result<T, (CeresStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null() -> (CeresStatus, String) {
    (CeresStatus::NullPointer, "null pointer argument".into())
}

fn bad_format(f: CeresFormat) -> (CeresStatus, String) {
    (CeresStatus::InvalidArgument, format!("format {:?} is not supported here", f))
}

/// # Safety
/// `out` must be null or valid for a pointer write.
unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), (CeresStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    let c = CString::new(s).map_err(|_| (CeresStatus::Internal, "interior NUL in output".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ceres_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failed call on this thread, or null. Free with
/// [`ceres_string_free`].
#[no_mangle]
pub extern "C" fn ceres_last_error() -> *mut c_char {
    LAST_ERROR
        .with(|e| e.borrow().clone())
        .and_then(|m| CString::new(m).ok())
        .map_or(ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `s` must be null or a string returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ceres_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `C(n)` as text, JSON or TPTP.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ceres_clause_set(n: u64, format: CeresFormat, out: *mut *mut c_char) -> CeresStatus {
    guard(|| {
        let cs = nia_clause_set(n);
        let s = match format {
            CeresFormat::Text => clauses_to_text(&cs),
            CeresFormat::Json => clauses_to_json(&cs).to_string(),
            CeresFormat::Tptp => clauses_to_tptp(&cs),
            f => return Err(bad_format(f)),
        };
        write_string(out, s)
    })
}

/// Builds a refutation of `C(n)`. `budget` of 0 selects the mode's default;
/// `depth` is only read by saturation (0 selects `n + 1`). The tree is
/// returned even when it fails the checker; use [`ceres_tree_check`].
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ceres_refute(
    n: u64,
    mode: CeresMode,
    budget: u64,
    depth: u64,
    out: *mut *mut CeresTree,
) -> CeresStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let tree = match mode {
            CeresMode::Schema | CeresMode::SchemaPrinted => {
                let reading = if mode == CeresMode::Schema { Reading::Repaired } else { Reading::Printed };
                core(refute_with(n, reading, if budget == 0 { DEFAULT_BUDGET } else { budget }))?
            }
            CeresMode::Math => core(refute_math(n))?,
            CeresMode::Saturate => {
                let b = if budget == 0 { DEFAULT_CLAUSE_BUDGET } else { budget as usize };
                let d = if depth == 0 { n + 1 } else { depth };
                let (t, stats) = core(saturate_with(n, d, b))?;
                match t {
                    Some(t) => t,
                    None if stats.budget_exhausted => {
                        return Err((CeresStatus::BudgetExhausted, format!("saturation budget {} exhausted", b)))
                    }
                    None => return Err((CeresStatus::NotFound, format!("no refutation at depth {}", d))),
                }
            }
        };
        *out = Box::into_raw(Box::new(CeresTree { n, tree }));
        Ok(())
    })
}

/// # Safety
/// `tree` must be null or a handle from [`ceres_refute`], freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ceres_tree_free(tree: *mut CeresTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Tree size with shared subtrees counted once per use; 0 for null.
///
/// # Safety
/// `tree` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ceres_tree_size(tree: *const CeresTree) -> u64 {
    tree.as_ref().map_or(0, |t| t.tree.size() as u64)
}

/// Re-checks the tree against `C(n)`: leaves are instances, every step is
/// re-derived and the root is empty.
///
/// # Safety
/// `tree` must be a live handle and `passes` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ceres_tree_check(tree: *const CeresTree, passes: *mut bool) -> CeresStatus {
    guard(|| {
        let (Some(t), false) = (tree.as_ref(), passes.is_null()) else { return Err(null()) };
        *passes = check_tree(&t.tree, &nia_clause_set(t.n)).passes();
        Ok(())
    })
}

/// The tree as indented text, JSON or Graphviz dot.
///
/// # Safety
/// `tree` must be a live handle and `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ceres_tree_render(tree: *const CeresTree, format: CeresFormat, out: *mut *mut c_char) -> CeresStatus {
    guard(|| {
        let t = tree.as_ref().ok_or_else(null)?;
        let s = match format {
            CeresFormat::Text => t.tree.to_text(),
            CeresFormat::Json => t.tree.to_json().to_string(),
            CeresFormat::Dot => t.tree.to_dot(),
            f => return Err(bad_format(f)),
        };
        write_string(out, s)
    })
}

/// Decides validity of the Herbrand sequent `S(n)` under the chosen axioms.
///
/// # Safety
/// `valid` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn ceres_herbrand_verify(n: u64, equality_axioms: bool, order_axioms: bool, valid: *mut bool) -> CeresStatus {
    guard(|| {
        if valid.is_null() {
            return Err(null());
        }
        let v = core(verify_sequent(&herbrand_sequent(n), Axioms { equality: equality_axioms, order: order_axioms }))?;
        *valid = v.valid;
        Ok(())
    })
}

/// `S(n)` as text or JSON, or its validity problem as DIMACS.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn ceres_herbrand_render(n: u64, format: CeresFormat, out: *mut *mut c_char) -> CeresStatus {
    guard(|| {
        let seq = herbrand_sequent(n);
        let s = match format {
            CeresFormat::Text => seq.to_text(),
            CeresFormat::Json => seq.to_json().to_string(),
            CeresFormat::Dimacs => core(herbrand_cnf(&seq, Axioms::default()))?.to_dimacs(),
            f => return Err(bad_format(f)),
        };
        write_string(out, s)
    })
}
