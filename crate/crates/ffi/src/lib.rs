//! C ABI for `configcount`.
//!
//! Objects are opaque heap handles created by `cc_*_new` style calls and
//! released with the matching `cc_*_free`. Every fallible call returns a
//! [`CcStatus`]; on failure `cc_last_error_message` describes the cause for the
//! calling thread. Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use configcount::ff::{sphere_decay, FieldFunction};
use configcount::forms::{box_norm, eval_m, eval_n, min_box_norm, ConfigurationSpace, EdgeFunctionFamily};
use configcount::hypergraph::BundleSpec;
use configcount::lattice::{count_copies, density_increment, q_epsilon, uniformity_test, GridCube, IncrementStatus, LatticeSet, SimplexSpec};
use configcount::regularity::{weak_regularize, Regularization};
use configcount::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPrime = 3,
    DimensionMismatch = 4,
    Unbounded = 5,
    DegenerateSimplex = 6,
    NoCopies = 7,
    CapExceeded = 8,
    WitnessNotFound = 9,
    Parse = 10,
    Io = 11,
    BufferTooSmall = 12,
    Panic = 13,
}

impl From<&Error> for CcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NotPrime(_) | Error::ZeroElement { .. } => CcStatus::NotPrime,
            Error::DimensionMismatch(_) => CcStatus::DimensionMismatch,
            Error::Unbounded { .. } => CcStatus::Unbounded,
            Error::DegenerateSimplex => CcStatus::DegenerateSimplex,
            Error::NoCopies(_) => CcStatus::NoCopies,
            Error::CapExceeded(_) => CcStatus::CapExceeded,
            Error::WitnessNotFound { .. } => CcStatus::WitnessNotFound,
            Error::Parse(_) => CcStatus::Parse,
            Error::Io(_) => CcStatus::Io,
            _ => CcStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), (CcStatus, String)>) -> CcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            CcStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CcStatus::Panic
        }
    }
}

fn lib<T>(r: configcount::Result<T>) -> Result<T, (CcStatus, String)> {
    r.map_err(|e| (CcStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (CcStatus, String) {
    (CcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (CcStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (CcStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (CcStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Copies `text` plus a terminating NUL into `buf` when it fits. `needed`
/// always receives the full size including the NUL.
unsafe fn write_string(text: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), (CcStatus, String)> {
    let size = text.len() + 1;
    if !needed.is_null() {
        *needed = size;
    }
    if buf.is_null() || len < size {
        return Err((CcStatus::BufferTooSmall, format!("buffer of {len} bytes, {size} needed")));
    }
    ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
    *buf.add(text.len()) = 0;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the last error of this thread into `buf`. Returns the size needed
/// including the NUL; nothing is written when `len` is too small.
#[no_mangle]
pub unsafe extern "C" fn cc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let text = e.borrow();
        let size = text.len() + 1;
        if !buf.is_null() && len >= size {
            ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
            *buf.add(text.len()) = 0;
        }
        size
    })
}

/// A real table over `F_q^m`.
pub struct CcFieldFunction(FieldFunction);

/// `values` holds `q^m` entries in row-major coordinate order.
#[no_mangle]
pub unsafe extern "C" fn cc_field_function_new(
    q: usize,
    m: usize,
    values: *const f64,
    len: usize,
    out_handle: *mut *mut CcFieldFunction,
) -> CcStatus {
    guard(|| {
        let out_handle = out(out_handle, "out_handle")?;
        let values = slice_arg(values, len, "values")?;
        let f = lib(FieldFunction::from_values(q, m, values.to_vec()))?;
        *out_handle = Box::into_raw(Box::new(CcFieldFunction(f)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_field_function_free(f: *mut CcFieldFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// `||f||_box` over `k` blocks of `F_q^2`.
#[no_mangle]
pub unsafe extern "C" fn cc_box_norm(f: *const CcFieldFunction, k: usize, result: *mut f64) -> CcStatus {
    guard(|| {
        let f = handle(f, "f")?;
        *out(result, "result")? = lib(box_norm(&f.0, k))?;
        Ok(())
    })
}

/// One function per edge of the rectangle bundle on `d` blocks with
/// `k`-element base edges.
pub struct CcFamily(EdgeFunctionFamily);

/// `functions` lists one handle per edge in bundle order; the tables are copied.
#[no_mangle]
pub unsafe extern "C" fn cc_family_new(
    d: usize,
    k: usize,
    q: usize,
    functions: *const *const CcFieldFunction,
    count: usize,
    out_handle: *mut *mut CcFamily,
) -> CcStatus {
    guard(|| {
        let out_handle = out(out_handle, "out_handle")?;
        let handles = slice_arg(functions, count, "functions")?;
        let tables = handles
            .iter()
            .map(|&h| handle(h, "function").map(|f| f.0.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = lib(BundleSpec::rectangle(d, k))?;
        let fam = lib(EdgeFunctionFamily::new(spec, q, tables))?;
        *out_handle = Box::into_raw(Box::new(CcFamily(fam)));
        Ok(())
    })
}

/// The same table on every edge.
#[no_mangle]
pub unsafe extern "C" fn cc_family_uniform(
    d: usize,
    k: usize,
    f: *const CcFieldFunction,
    out_handle: *mut *mut CcFamily,
) -> CcStatus {
    guard(|| {
        let out_handle = out(out_handle, "out_handle")?;
        let f = handle(f, "f")?;
        let spec = lib(BundleSpec::rectangle(d, k))?;
        let fam = lib(EdgeFunctionFamily::uniform(spec, f.0.clone()))?;
        *out_handle = Box::into_raw(Box::new(CcFamily(fam)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_family_free(fam: *mut CcFamily) {
    if !fam.is_null() {
        drop(Box::from_raw(fam));
    }
}

/// Number of edges, i.e. the number of functions `cc_family_new` expects.
#[no_mangle]
pub unsafe extern "C" fn cc_family_edge_count(fam: *const CcFamily) -> usize {
    fam.as_ref().map_or(0, |f| f.0.edges().len())
}

/// `N_t` for a `d = k` family with one side length per block.
#[no_mangle]
pub unsafe extern "C" fn cc_eval_n(fam: *const CcFamily, ts: *const u64, len: usize, result: *mut f64) -> CcStatus {
    guard(|| {
        let fam = handle(fam, "fam")?;
        let ts = slice_arg(ts, len, "ts")?;
        let space = lib(ConfigurationSpace::new(fam.0.q() as u64, ts))?;
        *out(result, "result")? = lib(eval_n(&space, &fam.0))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_eval_m(fam: *const CcFamily, result: *mut f64) -> CcStatus {
    guard(|| {
        let fam = handle(fam, "fam")?;
        *out(result, "result")? = lib(eval_m(&fam.0))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_min_box_norm(fam: *const CcFamily, result: *mut f64) -> CcStatus {
    guard(|| {
        let fam = handle(fam, "fam")?;
        *out(result, "result")? = lib(min_box_norm(&fam.0))?;
        Ok(())
    })
}

/// Output of the weak regularity loop.
pub struct CcRegularization(Regularization);

#[no_mangle]
pub unsafe extern "C" fn cc_weak_regularize(
    fam: *const CcFamily,
    eps: f64,
    out_handle: *mut *mut CcRegularization,
) -> CcStatus {
    guard(|| {
        let out_handle = out(out_handle, "out_handle")?;
        let fam = handle(fam, "fam")?;
        let reg = lib(weak_regularize(&fam.0, eps))?;
        *out_handle = Box::into_raw(Box::new(CcRegularization(reg)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_regularization_free(reg: *mut CcRegularization) {
    if !reg.is_null() {
        drop(Box::from_raw(reg));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cc_regularization_iterations(reg: *const CcRegularization) -> usize {
    reg.as_ref().map_or(0, |r| r.0.iterations)
}

/// Largest final residual box norm.
#[no_mangle]
pub unsafe extern "C" fn cc_regularization_max_residual(reg: *const CcRegularization) -> f64 {
    reg.as_ref().map_or(f64::NAN, |r| r.0.final_box_norms.iter().copied().fold(0.0, f64::max))
}

/// Final energy, the last entry of the energy trace.
#[no_mangle]
pub unsafe extern "C" fn cc_regularization_energy(reg: *const CcRegularization) -> f64 {
    reg.as_ref().and_then(|r| r.0.energy_trace.last().copied()).unwrap_or(f64::NAN)
}

/// `|E sigma_t - 1| sqrt(q)` and `max_{xi != 0} |sigma_t^(xi)| sqrt(q)`.
#[no_mangle]
pub unsafe extern "C" fn cc_sphere_decay(q: u64, t: u64, mean_deviation: *mut f64, max_decay_const: *mut f64) -> CcStatus {
    guard(|| {
        let s = lib(sphere_decay(q, t))?;
        *out(mean_deviation, "mean_deviation")? = s.mean_deviation;
        *out(max_decay_const, "max_decay_const")? = s.max_decay_const;
        Ok(())
    })
}

/// A lattice simplex with its first point at the origin.
pub struct CcSimplex(SimplexSpec);

/// `points` holds `k * n` coordinates, one point per row, the first row zero.
#[no_mangle]
pub unsafe extern "C" fn cc_simplex_new(
    n: usize,
    k: usize,
    points: *const i64,
    len: usize,
    out_handle: *mut *mut CcSimplex,
) -> CcStatus {
    guard(|| {
        let out_handle = out(out_handle, "out_handle")?;
        let coords = slice_arg(points, len, "points")?;
        if n == 0 || coords.len() != n * k {
            return Err((CcStatus::DimensionMismatch, format!("{} coordinates for {k} points in Z^{n}", coords.len())));
        }
        let spec = lib(SimplexSpec::new(n, coords.chunks(n).map(|c| c.to_vec()).collect()))?;
        *out_handle = Box::into_raw(Box::new(CcSimplex(spec)));
        Ok(())
    })
}

/// Parses `{"n": .., "points": [[..], ..]}`.
#[no_mangle]
pub unsafe extern "C" fn cc_simplex_from_json(json: *const c_char, out_handle: *mut *mut CcSimplex) -> CcStatus {
    guard(|| {
        let out_handle = out(out_handle, "out_handle")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| (CcStatus::Parse, e.to_string()))?;
        let spec = lib(SimplexSpec::from_json(text))?;
        *out_handle = Box::into_raw(Box::new(CcSimplex(spec)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_simplex_free(s: *mut CcSimplex) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of copies of `lambda Delta` with vertex differences in `(qZ)^n`.
#[no_mangle]
pub unsafe extern "C" fn cc_count_copies(s: *const CcSimplex, lambda2: u64, q: u64, result: *mut u64) -> CcStatus {
    guard(|| {
        let s = handle(s, "simplex")?;
        *out(result, "result")? = lib(count_copies(&s.0, lambda2, q))?;
        Ok(())
    })
}

/// A finite set inside a cube window of `Z^n`.
pub struct CcLatticeSet(LatticeSet);

/// `members` holds `side^n` flags (nonzero = member) in row-major order
/// starting at `corner`.
#[no_mangle]
pub unsafe extern "C" fn cc_lattice_set_new(
    n: usize,
    corner: *const i64,
    side: u64,
    members: *const u8,
    len: usize,
    out_handle: *mut *mut CcLatticeSet,
) -> CcStatus {
    guard(|| {
        let out_handle = out(out_handle, "out_handle")?;
        let corner = slice_arg(corner, n, "corner")?;
        let members = slice_arg(members, len, "members")?;
        let window = lib(GridCube::new(corner.to_vec(), side))?;
        let set = lib(LatticeSet::new(window, members.iter().map(|&b| b != 0).collect()))?;
        *out_handle = Box::into_raw(Box::new(CcLatticeSet(set)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn cc_lattice_set_free(s: *mut CcLatticeSet) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn cc_lattice_set_density(s: *const CcLatticeSet) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.0.density())
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct CcUniformity {
    pub overall: f64,
    pub max_relative: f64,
    pub is_uniform: bool,
}

/// `worst_residue` receives `n` coordinates when non-null.
#[no_mangle]
pub unsafe extern "C" fn cc_uniformity_test(
    s: *const CcLatticeSet,
    eps: f64,
    modulus: u64,
    result: *mut CcUniformity,
    worst_residue: *mut i64,
) -> CcStatus {
    guard(|| {
        let s = handle(s, "set")?;
        let r = lib(uniformity_test(&s.0, eps, modulus))?;
        *out(result, "result")? = CcUniformity { overall: r.overall, max_relative: r.max_relative, is_uniform: r.is_uniform };
        if !worst_residue.is_null() {
            ptr::copy_nonoverlapping(r.worst_residue.as_ptr(), worst_residue, r.worst_residue.len());
        }
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CcIncrementStatus {
    Uniform = 0,
    WindowExhausted = 1,
    StepBound = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct CcIncrement {
    pub steps: usize,
    pub step_bound: usize,
    pub start_density: f64,
    pub final_density: f64,
    pub status: CcIncrementStatus,
}

#[no_mangle]
pub unsafe extern "C" fn cc_density_increment(
    s: *const CcLatticeSet,
    eps: f64,
    modulus: u64,
    result: *mut CcIncrement,
) -> CcStatus {
    guard(|| {
        let s = handle(s, "set")?;
        let r = lib(density_increment(&s.0, eps, modulus))?;
        *out(result, "result")? = CcIncrement {
            steps: r.steps,
            step_bound: r.step_bound,
            start_density: s.0.density(),
            final_density: r.final_set.density(),
            status: match r.status {
                IncrementStatus::Uniform => CcIncrementStatus::Uniform,
                IncrementStatus::WindowExhausted => CcIncrementStatus::WindowExhausted,
                IncrementStatus::StepBound => CcIncrementStatus::StepBound,
            },
        };
        Ok(())
    })
}

/// `lcm(1..floor(c eps^{-10}))` in decimal; ranges beyond `cap` are refused.
#[no_mangle]
pub unsafe extern "C" fn cc_q_epsilon(
    eps: f64,
    c: f64,
    cap: u64,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> CcStatus {
    guard(|| {
        let q = lib(q_epsilon(eps, c, cap))?;
        write_string(&q.to_string(), buf, len, needed)
    })
}
