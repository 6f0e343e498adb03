//! C interface. Objects are opaque handles created by `rg_*_new`-style functions and released
//! with the matching `rg_*_free`. Every fallible call returns an [`RgStatus`]; the message of
//! the last failure on the calling thread is available from [`rg_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use recordgraph::codec::{phi_r_resolved, psi_r, CodeSequence};
use recordgraph::increments::{IncrementLaw, TrajectoryWindow};
use recordgraph::recorder::{big_L, children_of, component_ball, record_of, ChildrenMode, Resolution};
use recordgraph::trees::{parse, serialize, OrderedTree};
use recordgraph::walk_analytics::hitting_prob_c;
use recordgraph::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidLaw = 3,
    NotSkipFree = 4,
    Parse = 5,
    NotFinite = 6,
    Censored = 7,
    BufferTooSmall = 8,
    Internal = 9,
}

/// How a query about the record graph was answered.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RgResolution {
    Resolved = 0,
    /// The answer is "none" (for example no record ever occurs).
    ProvedInfinite = 1,
    /// The window or budget ran out before the answer was certain.
    Censored = 2,
}

pub struct RgIncrementLaw(IncrementLaw);

pub struct RgWindow(TrajectoryWindow);

pub struct RgTree(OrderedTree);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: RgStatus, message: impl Into<String>) -> RgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = message.into());
    status
}

fn from_error(e: Error) -> RgStatus {
    let status = match &e {
        Error::InvalidLaw(_) => RgStatus::InvalidLaw,
        Error::NotSkipFree => RgStatus::NotSkipFree,
        Error::Parse { .. } => RgStatus::Parse,
        Error::NotFinite => RgStatus::NotFinite,
        Error::CensoredWindow { .. } | Error::UnresolvedBall { .. } => RgStatus::Censored,
        _ => RgStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> RgStatus) -> RgStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(RgStatus::Internal, "panic inside recordgraph"))
}

fn resolution_of<V>(r: Resolution<V>) -> (RgResolution, Option<V>) {
    match r {
        Resolution::Resolved(v) => (RgResolution::Resolved, Some(v)),
        Resolution::ProvedInfinite => (RgResolution::ProvedInfinite, None),
        Resolution::Censored(_) => (RgResolution::Censored, None),
    }
}

fn into_handle<T>(value: T, out: *mut *mut T) -> RgStatus {
    // SAFETY: callers check `out` for null first
    unsafe { *out = Box::into_raw(Box::new(value)) };
    RgStatus::Ok
}

/// Copies `bytes` plus a NUL terminator into `buf`. `*out_len` receives the length without
/// the terminator even when the buffer is too small.
unsafe fn write_text(text: &str, buf: *mut c_char, cap: usize, out_len: *mut usize) -> RgStatus {
    if out_len.is_null() {
        return fail(RgStatus::NullPointer, "out_len is null");
    }
    *out_len = text.len();
    if buf.is_null() || cap < text.len() + 1 {
        return fail(RgStatus::BufferTooSmall, format!("need {} bytes", text.len() + 1));
    }
    ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
    *buf.add(text.len()) = 0;
    RgStatus::Ok
}

unsafe fn write_i64s(values: &[i64], buf: *mut i64, cap: usize, out_len: *mut usize) -> RgStatus {
    if out_len.is_null() {
        return fail(RgStatus::NullPointer, "out_len is null");
    }
    *out_len = values.len();
    if values.len() > cap || (buf.is_null() && !values.is_empty()) {
        return fail(RgStatus::BufferTooSmall, format!("need {} values", values.len()));
    }
    if !values.is_empty() {
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    RgStatus::Ok
}

/// Version of the library as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the message of the last failed call on this thread into `buf`.
///
/// # Safety
/// `buf` must be null or valid for `cap` bytes; `out_len` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rg_last_error(buf: *mut c_char, cap: usize, out_len: *mut usize) -> RgStatus {
    let message = LAST_ERROR.with(|e| e.borrow().clone());
    write_text(&message, buf, cap, out_len)
}

/// Increment law with atoms `values[k]` of probability `probs[k]`.
///
/// # Safety
/// `values` and `probs` must be valid for `len` reads; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rg_law_new(
    values: *const i64,
    probs: *const f64,
    len: usize,
    out: *mut *mut RgIncrementLaw,
) -> RgStatus {
    guard(|| {
        if values.is_null() || probs.is_null() || out.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        let values = std::slice::from_raw_parts(values, len);
        let probs = std::slice::from_raw_parts(probs, len);
        match IncrementLaw::new(values.iter().copied().zip(probs.iter().copied()).collect()) {
            Ok(law) => into_handle(RgIncrementLaw(law), out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `law` must be null or a handle from [`rg_law_new`] that was not freed before.
#[no_mangle]
pub unsafe extern "C" fn rg_law_free(law: *mut RgIncrementLaw) {
    if !law.is_null() {
        drop(Box::from_raw(law));
    }
}

/// # Safety
/// `law` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rg_law_mean(law: *const RgIncrementLaw, out: *mut f64) -> RgStatus {
    if law.is_null() || out.is_null() {
        return fail(RgStatus::NullPointer, "null argument");
    }
    *out = (*law).0.mean();
    RgStatus::Ok
}

/// Probability that the walk started at 0 ever hits -1.
///
/// # Safety
/// `law` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rg_law_hitting_prob(law: *const RgIncrementLaw, out: *mut f64) -> RgStatus {
    guard(|| {
        if law.is_null() || out.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        match hitting_prob_c(&(*law).0) {
            Ok(c) => {
                *out = c;
                RgStatus::Ok
            }
            Err(e) => from_error(e),
        }
    })
}

/// Lazily generated i.i.d. walk. `certificate_eps <= 0` disables probabilistic certificates.
///
/// # Safety
/// `law` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rg_window_iid(
    law: *const RgIncrementLaw,
    seed: u64,
    certificate_eps: f64,
    out: *mut *mut RgWindow,
) -> RgStatus {
    guard(|| {
        if law.is_null() || out.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        let eps = (certificate_eps > 0.0).then_some(certificate_eps);
        let w = TrajectoryWindow::iid(&(*law).0, seed).with_chunk(64).with_certificate_eps(eps);
        into_handle(RgWindow(w), out)
    })
}

/// Deterministic window with `xs[k] = x_{lo+k}`. With `padded != 0` every increment outside
/// the data equals `pad`; otherwise nothing exists outside it.
///
/// # Safety
/// `xs` must be valid for `len` reads; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rg_window_fixed(
    lo: i64,
    xs: *const i64,
    len: usize,
    padded: i32,
    pad: i64,
    out: *mut *mut RgWindow,
) -> RgStatus {
    guard(|| {
        if (xs.is_null() && len > 0) || out.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        let xs = if len == 0 { &[][..] } else { std::slice::from_raw_parts(xs, len) };
        let w = if padded != 0 { TrajectoryWindow::padded(lo, xs, pad) } else { TrajectoryWindow::fixed(lo, xs) };
        match w {
            Ok(w) => into_handle(RgWindow(w), out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `window` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rg_window_free(window: *mut RgWindow) {
    if !window.is_null() {
        drop(Box::from_raw(window));
    }
}

/// Prefix sum `S_n`, extending the window if needed.
///
/// # Safety
/// `window` must be a live handle; `out` and `kind` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_window_prefix(window: *mut RgWindow, n: i64, out: *mut i64, kind: *mut RgResolution) -> RgStatus {
    guard(|| {
        if window.is_null() || out.is_null() || kind.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        match (*window).0.s(n) {
            Ok(s) => {
                *out = s;
                *kind = RgResolution::Resolved;
            }
            Err(_) => *kind = RgResolution::Censored,
        }
        RgStatus::Ok
    })
}

unsafe fn scalar_query(
    window: *mut RgWindow,
    out: *mut i64,
    kind: *mut RgResolution,
    query: impl FnOnce(&mut TrajectoryWindow) -> Resolution<i64>,
) -> RgStatus {
    guard(|| {
        if window.is_null() || out.is_null() || kind.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        let (k, v) = resolution_of(query(&mut (*window).0));
        *kind = k;
        if let Some(v) = v {
            *out = v;
        }
        RgStatus::Ok
    })
}

/// Record `R(i)`: the parent of `i` in the record graph.
///
/// # Safety
/// `window` must be a live handle; `out` and `kind` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_record_of(window: *mut RgWindow, i: i64, out: *mut i64, kind: *mut RgResolution) -> RgStatus {
    scalar_query(window, out, kind, |w| record_of(w, i))
}

/// Smallest descendant `L(i)`; the descendants of `i` are `[L(i), i]`.
///
/// # Safety
/// `window` must be a live handle; `out` and `kind` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_smallest_descendant(
    window: *mut RgWindow,
    i: i64,
    out: *mut i64,
    kind: *mut RgResolution,
) -> RgStatus {
    scalar_query(window, out, kind, |w| big_L(w, i))
}

/// Children of `i`, eldest first. Requires a skip-free window. On `BufferTooSmall`
/// `*out_len` holds the required length.
///
/// # Safety
/// `window` must be a live handle; `buf` must be valid for `cap` writes; `out_len` and `kind`
/// must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_children_of(
    window: *mut RgWindow,
    i: i64,
    buf: *mut i64,
    cap: usize,
    out_len: *mut usize,
    kind: *mut RgResolution,
) -> RgStatus {
    guard(|| {
        if window.is_null() || out_len.is_null() || kind.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        match children_of(&mut (*window).0, i, ChildrenMode::Formula) {
            Ok(r) => {
                let (k, v) = resolution_of(r);
                *kind = k;
                write_i64s(&v.unwrap_or_default(), buf, cap, out_len)
            }
            Err(e) => from_error(e),
        }
    })
}

/// Ball of radius `radius` around 0 in the record graph, as a labelled ordered tree.
///
/// # Safety
/// `window` must be a live handle; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rg_component_ball(
    window: *mut RgWindow,
    radius: usize,
    node_budget: usize,
    out: *mut *mut RgTree,
) -> RgStatus {
    guard(|| {
        if window.is_null() || out.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        into_handle(RgTree(component_ball(&mut (*window).0, radius, node_budget)), out)
    })
}

/// Parses the text form of an ordered tree.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rg_tree_parse(text: *const c_char, out: *mut *mut RgTree) -> RgStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        let Ok(text) = CStr::from_ptr(text).to_str() else {
            return fail(RgStatus::Parse, "tree text is not UTF-8");
        };
        match parse(text) {
            Ok(t) => into_handle(RgTree(t), out),
            Err(e) => from_error(e),
        }
    })
}

/// # Safety
/// `tree` must be null or a live handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rg_tree_free(tree: *mut RgTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `tree` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rg_tree_len(tree: *const RgTree) -> usize {
    if tree.is_null() {
        0
    } else {
        (*tree).0.len()
    }
}

/// Text form of the tree, NUL-terminated. On `BufferTooSmall` `*out_len` holds the
/// length without the terminator.
///
/// # Safety
/// `tree` must be a live handle; `buf` must be null or valid for `cap` bytes; `out_len`
/// must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rg_tree_serialize(tree: *const RgTree, buf: *mut c_char, cap: usize, out_len: *mut usize) -> RgStatus {
    guard(|| {
        if tree.is_null() {
            return fail(RgStatus::NullPointer, "null tree");
        }
        write_text(&serialize(&(*tree).0), buf, cap, out_len)
    })
}

/// Offspring code of the tree along its succession line through the root, starting at index
/// `*out_lo`.
///
/// # Safety
/// `tree` must be a live handle; `buf` must be valid for `cap` writes; `out_lo` and
/// `out_len` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rg_tree_encode(
    tree: *const RgTree,
    buf: *mut i64,
    cap: usize,
    out_lo: *mut i64,
    out_len: *mut usize,
) -> RgStatus {
    guard(|| {
        if tree.is_null() || out_lo.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        let t = &(*tree).0;
        let code = phi_r_resolved(t, t.root(), usize::MAX, usize::MAX).code;
        *out_lo = code.lo;
        write_i64s(&code.values, buf, cap, out_len)
    })
}

/// Component of 0 in the record graph of the code `values[k] = y_{lo+k}`.
///
/// # Safety
/// `values` must be valid for `len` reads; `out` must be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rg_tree_decode(lo: i64, values: *const i64, len: usize, out: *mut *mut RgTree) -> RgStatus {
    guard(|| {
        if (values.is_null() && len > 0) || out.is_null() {
            return fail(RgStatus::NullPointer, "null argument");
        }
        let values = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(values, len).to_vec() };
        match CodeSequence::new(lo, values).and_then(|y| psi_r(&y)) {
            Ok(t) => into_handle(RgTree(t), out),
            Err(e) => from_error(e),
        }
    })
}
