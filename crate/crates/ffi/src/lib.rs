//! C ABI over `polycap`.
//!
//! Every entry point returns a [`PcStatus`]. On failure the message is
//! available from [`pc_last_error`] on the same thread. Objects are handed
//! out as opaque pointers and must be released with the matching `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nalgebra::DMatrix;
use polycap::{
    describe, force_polytope_vertices, jacobian, lambda_policy, velocity_polytope_vertices, Error, JointBox,
    JointConfig, RobotModel, SearchOptions, TaskFrame, VertexSet,
};

/// Result code of every call. Values 1 to 3 agree with the command-line
/// exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    /// Bad input: schema, dimensions, parse or validation failures.
    InvalidInput = 1,
    RankDeficient = 2,
    Capacity = 3,
    Degenerate = 4,
    NullPointer = 5,
    /// A Rust panic was caught at the boundary.
    Internal = 6,
}

/// Opaque robot model.
pub struct PcModel(RobotModel);

/// Opaque vertex set in canonical (lexicographic) order.
pub struct PcVertexSet(VertexSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PcStatus {
    match err {
        Error::RankDeficient { .. } => PcStatus::RankDeficient,
        Error::Capacity(_) => PcStatus::Capacity,
        Error::Degenerate(_) => PcStatus::Degenerate,
        _ => PcStatus::InvalidInput,
    }
}

struct Fail(PcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(PcStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PcStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PcStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(PcStatus::InvalidInput, format!("{what} is not UTF-8")))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn frame_arg(model: &RobotModel, axes: *const c_char) -> Result<TaskFrame, Fail> {
    if axes.is_null() {
        return Ok(TaskFrame::default_for(model));
    }
    Ok(str_arg(axes, "axes")?.parse::<TaskFrame>()?)
}

unsafe fn emit(out: *mut *mut PcVertexSet, set: VertexSet) {
    *out = Box::into_raw(Box::new(PcVertexSet(set)));
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn pc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a robot model from a JSON file. Bare names of bundled fixtures
/// such as `"panda7.json"` also resolve.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_model_load(path: *const c_char, out: *mut *mut PcModel) -> PcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let model = describe(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(PcModel(model)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from `pc_model_load` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pc_model_free(model: *mut PcModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of joints, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_model_dof(model: *const PcModel) -> usize {
    model.as_ref().map_or(0, |m| m.0.dof())
}

/// Force polytope of `model` at `q`. `axes` is a comma-separated task
/// frame such as `"x,y,z"`; null selects the model default.
///
/// # Safety
/// `q` must point to `q_len` doubles, `axes` must be null or NUL-terminated
/// and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_force_polytope(
    model: *const PcModel,
    q: *const f64,
    q_len: usize,
    axes: *const c_char,
    out: *mut *mut PcVertexSet,
) -> PcStatus {
    guard(|| {
        let model = &model.as_ref().ok_or_else(|| null("model"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let q = JointConfig::new(slice_arg(q, q_len, "q")?.to_vec());
        let frame = frame_arg(model, axes)?;
        let j = jacobian(model, &q, &frame)?;
        let (lo, hi) = model.torque_limits();
        let set = force_polytope_vertices(&j, &JointBox::new(lo, hi)?, &SearchOptions::default())?;
        emit(out, set);
        Ok(())
    })
}

/// Force polytope of a raw `m x n` Jacobian stored row-major, with torque
/// limits `lo` and `hi` of length `n`.
///
/// # Safety
/// `jac` must hold `m * n` doubles, `lo` and `hi` `n` each; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pc_force_polytope_raw(
    jac: *const f64,
    m: usize,
    n: usize,
    lo: *const f64,
    hi: *const f64,
    out: *mut *mut PcVertexSet,
) -> PcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if m == 0 || n == 0 {
            return Err(Fail(PcStatus::InvalidInput, "Jacobian must be non-empty".into()));
        }
        let j = DMatrix::from_row_slice(m, n, slice_arg(jac, m * n, "jac")?);
        let bx = JointBox::new(slice_arg(lo, n, "lo")?.to_vec(), slice_arg(hi, n, "hi")?.to_vec())?;
        emit(out, force_polytope_vertices(&j, &bx, &SearchOptions::default())?);
        Ok(())
    })
}

/// Velocity polytope of `model` at `q` from the joint velocity limits.
///
/// # Safety
/// Same contract as `pc_force_polytope`.
#[no_mangle]
pub unsafe extern "C" fn pc_velocity_polytope(
    model: *const PcModel,
    q: *const f64,
    q_len: usize,
    axes: *const c_char,
    out: *mut *mut PcVertexSet,
) -> PcStatus {
    guard(|| {
        let model = &model.as_ref().ok_or_else(|| null("model"))?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        let q = JointConfig::new(slice_arg(q, q_len, "q")?.to_vec());
        let frame = frame_arg(model, axes)?;
        let j = jacobian(model, &q, &frame)?;
        let (lo, hi) = model.velocity_limits();
        emit(out, velocity_polytope_vertices(&j, &JointBox::new(lo, hi)?)?);
        Ok(())
    })
}

/// Number of vertices, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_vertex_set_len(set: *const PcVertexSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Task-space dimension, or 0 for a null handle.
///
/// # Safety
/// `set` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pc_vertex_set_dim(set: *const PcVertexSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.task_dim)
}

/// Copies the vertices row-major into `buf`, which must hold at least
/// `len * dim` doubles.
///
/// # Safety
/// `buf` must point to `buf_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_vertex_set_copy(set: *const PcVertexSet, buf: *mut f64, buf_len: usize) -> PcStatus {
    guard(|| {
        let set = &set.as_ref().ok_or_else(|| null("set"))?.0;
        let need = set.len() * set.task_dim;
        if buf_len < need {
            return Err(Fail(PcStatus::InvalidInput, format!("buffer holds {buf_len} values, need {need}")));
        }
        if need == 0 {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (chunk, v) in dst.chunks_mut(set.task_dim).zip(&set.vertices) {
            chunk.copy_from_slice(v);
        }
        Ok(())
    })
}

/// # Safety
/// `set` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pc_vertex_set_free(set: *mut PcVertexSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Payload share for robot 1 given both directional capacities.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pc_lambda_policy(f1_max: f64, f2_max: f64, out: *mut f64) -> PcStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lambda_policy(f1_max, f2_max)?;
        Ok(())
    })
}
