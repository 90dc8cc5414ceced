//! C ABI for the cayleylab core.
//!
//! Groups travel as opaque `ClGroup` handles created by [`cl_group_parse`]
//! and released by [`cl_group_free`].  Every function returns a [`ClStatus`];
//! on anything but `CL_OK` the thread-local message retrieved by
//! [`cl_last_error_message`] explains what went wrong.  Strings returned
//! through `char **` are owned by the caller and must be released with
//! [`cl_string_free`].  Panics never cross the boundary; they surface as
//! `CL_INTERNAL_ERROR`.
//!
//! The C header is generated into `include/cayleylab.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use cayleylab::circle::{relation_defect, eval_word, CircleError, CircleWord};
use cayleylab::complex::{cell_types_and_neighbors, maximal_cells, ComplexError, ComplexOptions};
use cayleylab::go::{enumerate_admissible, GoError};
use cayleylab::group::{ball, icc_evidence, GroupError, IccVerdict, MarkedGroup};
use cayleylab::trunc::{identity_defect, TruncError};

/// Result of every FFI call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClStatus {
    /// Success.
    ClOk = 0,
    /// A required pointer argument was null.
    ClNullArgument = 1,
    /// A presentation, word or rule failed to parse.
    ClParseError = 2,
    /// An enumeration cap or search budget was exhausted.
    ClCapExceeded = 3,
    /// The inputs parse but name an impossible computation.
    ClDomainError = 4,
    /// A panic or unclassified failure inside the library.
    ClInternalError = 5,
}

/// Opaque marked-group handle.
pub struct ClGroup {
    inner: Arc<MarkedGroup>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(clean).expect("nul bytes stripped"));
    });
}

fn fail(status: ClStatus, message: &str) -> ClStatus {
    set_error(message);
    status
}

fn classify_group(e: &GroupError) -> ClStatus {
    match e {
        GroupError::Parse { .. } | GroupError::WordParse { .. } => ClStatus::ClParseError,
        GroupError::BallCap { .. } | GroupError::CompletionBudget { .. } => {
            ClStatus::ClCapExceeded
        }
    }
}

fn from_group(e: GroupError) -> ClStatus {
    fail(classify_group(&e), &e.to_string())
}

fn from_go(e: GoError) -> ClStatus {
    let status = match &e {
        GoError::EnumerationCap { .. } => ClStatus::ClCapExceeded,
        GoError::Group(g) => classify_group(g),
        GoError::Operator(_) => ClStatus::ClInternalError,
        _ => ClStatus::ClDomainError,
    };
    fail(status, &e.to_string())
}

fn from_complex(e: ComplexError) -> ClStatus {
    let status = match &e {
        ComplexError::SearchBudget { .. } => ClStatus::ClCapExceeded,
        ComplexError::Group(g) => classify_group(g),
        _ => ClStatus::ClDomainError,
    };
    fail(status, &e.to_string())
}

fn from_trunc(e: TruncError) -> ClStatus {
    let status = match &e {
        TruncError::Group(g) => classify_group(g),
        TruncError::Operator(_) => ClStatus::ClInternalError,
        _ => ClStatus::ClDomainError,
    };
    fail(status, &e.to_string())
}

fn from_circle(e: CircleError) -> ClStatus {
    fail(ClStatus::ClParseError, &e.to_string())
}

/// Shields C callers from panics and turns them into `CL_INTERNAL_ERROR`.
fn guarded(body: impl FnOnce() -> ClStatus) -> ClStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(ClStatus::ClInternalError, &format!("internal panic: {msg}"))
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid nul-terminated string.
unsafe fn text<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, ClStatus> {
    if ptr.is_null() {
        return Err(fail(ClStatus::ClNullArgument, &format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(ClStatus::ClParseError, &format!("{what} is not UTF-8")))
}

unsafe fn handle<'a>(ptr: *const ClGroup) -> Result<&'a ClGroup, ClStatus> {
    if ptr.is_null() {
        return Err(fail(ClStatus::ClNullArgument, "group handle is null"));
    }
    Ok(&*ptr)
}

fn store<T>(out: *mut T, value: T) -> ClStatus {
    if out.is_null() {
        return fail(ClStatus::ClNullArgument, "output pointer is null");
    }
    unsafe { out.write(value) };
    ClStatus::ClOk
}

/// The message of the most recent failure on this thread, or null if the
/// last call succeeded.  The pointer is owned by the library and valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.as_ptr())
            .unwrap_or(std::ptr::null())
    })
}

/// Releases a string returned through a `char **` output.
///
/// # Safety
/// `s` must be a pointer previously returned by this library and not yet
/// freed; null is tolerated.
#[no_mangle]
pub unsafe extern "C" fn cl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a presentation such as `<a,b|[a,b]>` into a group handle.
///
/// # Safety
/// `presentation` must be a valid nul-terminated string; `out` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_group_parse(
    presentation: *const c_char,
    out: *mut *mut ClGroup,
) -> ClStatus {
    guarded(|| {
        let textual = match text(presentation, "presentation") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match MarkedGroup::parse(textual) {
            Ok(inner) => store(out, Box::into_raw(Box::new(ClGroup { inner }))),
            Err(e) => from_group(e),
        }
    })
}

/// Releases a group handle.
///
/// # Safety
/// `group` must be null or a handle from [`cl_group_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_group_free(group: *mut ClGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Number of elements within `radius` of the identity, at most `cap`.
///
/// # Safety
/// `group` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_group_ball_size(
    group: *const ClGroup,
    radius: u32,
    cap: usize,
    out: *mut usize,
) -> ClStatus {
    guarded(|| {
        let g = match handle(group) {
            Ok(g) => g,
            Err(s) => return s,
        };
        match ball(&g.inner, radius, cap) {
            Ok(w) => store(out, w.len()),
            Err(e) => from_group(e),
        }
    })
}

/// Geodesic word length of `word` with respect to the marking.
///
/// # Safety
/// `group` must be a live handle; `word` a valid string; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cl_group_word_length(
    group: *const ClGroup,
    word: *const c_char,
    out: *mut usize,
) -> ClStatus {
    guarded(|| {
        let g = match handle(group) {
            Ok(g) => g,
            Err(s) => return s,
        };
        let w = match text(word, "word") {
            Ok(w) => w,
            Err(s) => return s,
        };
        match g.inner.parse_word(w) {
            Ok(e) => store(out, e.len()),
            Err(e) => from_group(e),
        }
    })
}

/// Canonical rendering of the product `a * b`; release with
/// [`cl_string_free`].
///
/// # Safety
/// `group` must be a live handle; `a`, `b` valid strings; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn cl_group_multiply(
    group: *const ClGroup,
    a: *const c_char,
    b: *const c_char,
    out: *mut *mut c_char,
) -> ClStatus {
    guarded(|| {
        let g = match handle(group) {
            Ok(g) => g,
            Err(s) => return s,
        };
        let (ta, tb) = match (text(a, "left word"), text(b, "right word")) {
            (Ok(x), Ok(y)) => (x, y),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let ea = match g.inner.parse_word(ta) {
            Ok(e) => e,
            Err(e) => return from_group(e),
        };
        let eb = match g.inner.parse_word(tb) {
            Ok(e) => e,
            Err(e) => return from_group(e),
        };
        let rendering = g.inner.render(&g.inner.multiply(&ea, &eb));
        let c = CString::new(rendering).expect("renderings never contain nul");
        store(out, c.into_raw())
    })
}

/// Conjugacy-growth verdict on the ball of `radius`: 1 = all tracked classes
/// keep growing, 0 = some class is provably finite, -1 = inconclusive.
///
/// # Safety
/// `group` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_group_icc_verdict(
    group: *const ClGroup,
    radius: u32,
    cap: usize,
    out: *mut i32,
) -> ClStatus {
    guarded(|| {
        let g = match handle(group) {
            Ok(g) => g,
            Err(s) => return s,
        };
        match icc_evidence(&g.inner, radius, cap) {
            Ok(report) => store(
                out,
                match report.verdict {
                    IccVerdict::IccConsistent => 1,
                    IccVerdict::NotIcc => 0,
                    IccVerdict::Inconclusive => -1,
                },
            ),
            Err(e) => from_group(e),
        }
    })
}

/// Number of positions reachable by at most `depth` legal moves on the ball
/// of `radius`; enumeration stops with `CL_CAP_EXCEEDED` past `state_cap`.
///
/// # Safety
/// `group` must be a live handle; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_go_admissible_count(
    group: *const ClGroup,
    radius: u32,
    depth: u32,
    ball_cap: usize,
    state_cap: usize,
    out: *mut usize,
) -> ClStatus {
    guarded(|| {
        let g = match handle(group) {
            Ok(g) => g,
            Err(s) => return s,
        };
        let w = match ball(&g.inner, radius, ball_cap) {
            Ok(w) => w,
            Err(e) => return from_group(e),
        };
        match enumerate_admissible(&w, depth, state_cap) {
            Ok(adm) => store(out, adm.len()),
            Err(e) => from_go(e),
        }
    })
}

/// Translation types of maximal cells on the ball of `radius`: writes the
/// number of types and the dimension bound.
///
/// # Safety
/// `group` must be a live handle; `out_types` and `out_dimension_bound`
/// must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cl_complex_type_count(
    group: *const ClGroup,
    radius: u32,
    ball_cap: usize,
    out_types: *mut usize,
    out_dimension_bound: *mut u32,
) -> ClStatus {
    guarded(|| {
        let g = match handle(group) {
            Ok(g) => g,
            Err(s) => return s,
        };
        let w = match ball(&g.inner, radius, ball_cap) {
            Ok(w) => w,
            Err(e) => return from_group(e),
        };
        let opts = ComplexOptions::default();
        let mc = match maximal_cells(&w, &opts) {
            Ok(mc) => mc,
            Err(e) => return from_complex(e),
        };
        let report = match cell_types_and_neighbors(&w, &mc.cells) {
            Ok(r) => r,
            Err(e) => return from_complex(e),
        };
        let status = store(out_types, report.types.len());
        if status != ClStatus::ClOk {
            return status;
        }
        store(out_dimension_bound, mc.dimension_bound)
    })
}

/// Defect of the creation identity for `generator` on the ball of `radius`:
/// writes the number of nonzero entries and whether they sit at the identity
/// alone (1) or elsewhere too (0).
///
/// # Safety
/// `group` must be a live handle; `generator` a valid string;
/// `out_entries` and `out_identity_only` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn cl_trunc_defect(
    group: *const ClGroup,
    radius: u32,
    ball_cap: usize,
    generator: *const c_char,
    out_entries: *mut usize,
    out_identity_only: *mut i32,
) -> ClStatus {
    guarded(|| {
        let g = match handle(group) {
            Ok(g) => g,
            Err(s) => return s,
        };
        let s = match text(generator, "generator") {
            Ok(s) => s,
            Err(st) => return st,
        };
        let w = match ball(&g.inner, radius, ball_cap) {
            Ok(w) => w,
            Err(e) => return from_group(e),
        };
        match identity_defect(&w, s) {
            Ok(report) => {
                let status = store(out_entries, report.entries.len());
                if status != ClStatus::ClOk {
                    return status;
                }
                store(out_identity_only, i32::from(report.identity_only))
            }
            Err(e) => from_trunc(e),
        }
    })
}

/// Applies the piecewise circle word to `x` (both in [0, 1)).
///
/// # Safety
/// `word` must be a valid string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_circle_eval(
    word: *const c_char,
    theta: f64,
    x: f64,
    out: *mut f64,
) -> ClStatus {
    guarded(|| {
        let t = match text(word, "word") {
            Ok(t) => t,
            Err(s) => return s,
        };
        if !(0.0..1.0).contains(&x) {
            return fail(ClStatus::ClDomainError, "x must lie in [0, 1)");
        }
        match CircleWord::parse(t) {
            Ok(w) => store(out, eval_word(&w, theta, x)),
            Err(e) => from_circle(e),
        }
    })
}

/// Sup-distance of the word's action from the identity over `samples`
/// deterministic sample points.
///
/// # Safety
/// `word` must be a valid string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_circle_relation_sup(
    word: *const c_char,
    theta: f64,
    samples: usize,
    out: *mut f64,
) -> ClStatus {
    guarded(|| {
        let t = match text(word, "word") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match CircleWord::parse(t) {
            Ok(w) => store(out, relation_defect(&w, theta, samples).sup),
            Err(e) => from_circle(e),
        }
    })
}
