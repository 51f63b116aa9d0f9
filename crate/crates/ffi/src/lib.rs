//! C interface to `nodalgeom`.
//!
//! Every function returns an [`NgStatus`]; on failure the message is kept
//! per thread and read with [`ng_last_error`]. Objects are opaque handles
//! released with their `_free` function. The header `include/nodalgeom.h`
//! is generated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use nodalgeom::asymmetry::scan_asymmetry;
use nodalgeom::capacity::concentric_ball_capacity;
use nodalgeom::domain::{build_grid, sample_closed_form, DomainSpec, ScalarField};
use nodalgeom::eigen::{assemble_operator, lowest_eigenpairs, DEFAULT_TOL};
use nodalgeom::nodal::{extract_nodal_domains, NodalDecomposition};
use nodalgeom::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidDomain = 3,
    Resolution = 4,
    Convergence = 5,
    NoNodalSet = 6,
    Precondition = 7,
    Unsupported = 8,
    Io = 9,
    Panic = 10,
    Other = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NgDomainKind {
    Rectangle = 0,
    Torus = 1,
    Disk = 2,
    Stadium = 3,
}

/// Sampled field with its eigenvalue.
pub struct NgField {
    field: ScalarField,
    lambda: f64,
}

/// Nodal domains of a field.
pub struct NgDecomposition {
    inner: NodalDecomposition,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NgComponent {
    pub id: usize,
    pub sign: i32,
    pub node_count: usize,
    pub volume: f64,
    pub inradius: f64,
    pub deepest: [f64; 3],
}

/// Missing statistics are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NgAsymmetrySummary {
    pub probes: usize,
    pub unclipped: usize,
    pub min: f64,
    pub p05: f64,
    pub min_scaled: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct NgCapacity {
    pub computed: f64,
    pub exact: f64,
    pub relative_error: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> NgStatus {
    match e {
        Error::InvalidDomain(_) | Error::EmptyDomain | Error::UnsupportedMode(_) => {
            NgStatus::InvalidDomain
        }
        Error::InvalidResolution(_) | Error::Resolution(_) | Error::UnderResolvedBall { .. } => {
            NgStatus::Resolution
        }
        Error::Convergence { .. } => NgStatus::Convergence,
        Error::NoNodalSet | Error::AllNodal => NgStatus::NoNodalSet,
        Error::Precondition(_) | Error::OutOfDomain(_) => NgStatus::Precondition,
        Error::UnsupportedDimension(_) => NgStatus::Unsupported,
        Error::Io(_) => NgStatus::Io,
        Error::Config(_) | Error::UnknownComponent(_) => NgStatus::InvalidArgument,
        _ => NgStatus::Other,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (NgStatus, String)>) -> NgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NgStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            NgStatus::Panic
        }
    }
}

fn lib(e: Error) -> (NgStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (NgStatus, String) {
    (NgStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (NgStatus, String) {
    (NgStatus::InvalidArgument, msg.into())
}

/// # Safety
/// `ptr` must be null or point to `len` readable values.
unsafe fn slice<'a, T>(
    ptr: *const T,
    len: usize,
    what: &str,
) -> Result<&'a [T], (NgStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn domain(kind: NgDomainKind, dims: &[f64], radius: f64) -> Result<DomainSpec, (NgStatus, String)> {
    let spec = match kind {
        NgDomainKind::Rectangle => DomainSpec::rectangle(dims),
        NgDomainKind::Torus => DomainSpec::torus(dims),
        NgDomainKind::Disk => DomainSpec::disk(radius, dims.len().max(2)),
        NgDomainKind::Stadium => DomainSpec::stadium(dims.first().copied().unwrap_or(0.0), radius),
    };
    spec.validate().map_err(lib)?;
    Ok(spec)
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ng_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ng_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}

/// Samples a closed-form eigenfunction. `dims` holds the box sides for
/// rectangles and tori, one entry per axis for disks (only the count is
/// used) and the straight length for stadiums. `cells` is the number of
/// cells along the longest side.
///
/// # Safety
/// `dims` and `mode` must point to `ndim` and `nmode` values; `out` must be
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ng_field_closed_form(
    kind: NgDomainKind,
    dims: *const f64,
    ndim: usize,
    radius: f64,
    mode: *const i64,
    nmode: usize,
    cells: usize,
    out: *mut *mut NgField,
) -> NgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = domain(kind, slice(dims, ndim, "dims")?, radius)?;
        let grid = Arc::new(build_grid(&spec, cells).map_err(lib)?);
        let (lambda, field) =
            sample_closed_form(&spec, slice(mode, nmode, "mode")?, &grid).map_err(lib)?;
        *out = Box::into_raw(Box::new(NgField { field, lambda }));
        Ok(())
    })
}

/// Computes the `index`-th (1-based) Dirichlet eigenpair numerically.
///
/// # Safety
/// As for [`ng_field_closed_form`].
#[no_mangle]
pub unsafe extern "C" fn ng_field_eigen(
    kind: NgDomainKind,
    dims: *const f64,
    ndim: usize,
    radius: f64,
    cells: usize,
    index: usize,
    out: *mut *mut NgField,
) -> NgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if index == 0 {
            return Err(invalid("eigen index starts at 1"));
        }
        let spec = domain(kind, slice(dims, ndim, "dims")?, radius)?;
        let grid = Arc::new(build_grid(&spec, cells).map_err(lib)?);
        let op = assemble_operator(&grid, None).map_err(lib)?;
        let p = lowest_eigenpairs(&op, index, DEFAULT_TOL)
            .map_err(lib)?
            .swap_remove(index - 1);
        *out = Box::into_raw(Box::new(NgField {
            field: p.field,
            lambda: p.eigenvalue,
        }));
        Ok(())
    })
}

/// # Safety
/// `field` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ng_field_free(field: *mut NgField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live handle; `lambda` and `len` must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn ng_field_info(
    field: *const NgField,
    lambda: *mut f64,
    len: *mut usize,
) -> NgStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if !lambda.is_null() {
            *lambda = f.lambda;
        }
        if !len.is_null() {
            *len = f.field.values().len();
        }
        Ok(())
    })
}

/// Copies the node values (first axis fastest) into `buf`, which must hold
/// at least the length reported by [`ng_field_info`].
///
/// # Safety
/// `buf` must point to `cap` writable values.
#[no_mangle]
pub unsafe extern "C" fn ng_field_values(
    field: *const NgField,
    buf: *mut f64,
    cap: usize,
) -> NgStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let v = f.field.values();
        if cap < v.len() {
            return Err(invalid(format!(
                "buffer holds {cap} values, need {}",
                v.len()
            )));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len());
        Ok(())
    })
}

/// Splits the field into nodal domains.
///
/// # Safety
/// `field` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ng_nodal_decompose(
    field: *const NgField,
    zero_tol: f64,
    out: *mut *mut NgDecomposition,
) -> NgStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = extract_nodal_domains(&f.field, zero_tol).map_err(lib)?;
        *out = Box::into_raw(Box::new(NgDecomposition { inner }));
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ng_nodal_free(d: *mut NgDecomposition) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle and `count` valid.
#[no_mangle]
pub unsafe extern "C" fn ng_nodal_count(d: *const NgDecomposition, count: *mut usize) -> NgStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("decomposition"))?;
        *count.as_mut().ok_or_else(|| null("count"))? = d.inner.len();
        Ok(())
    })
}

/// Component `id`, counted from 1.
///
/// # Safety
/// `d` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ng_nodal_component(
    d: *const NgDecomposition,
    id: usize,
    out: *mut NgComponent,
) -> NgStatus {
    guard(|| {
        let d = d.as_ref().ok_or_else(|| null("decomposition"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = d.inner.component(id).map_err(lib)?;
        *out = NgComponent {
            id: c.id,
            sign: c.sign as i32,
            node_count: c.node_count,
            volume: c.volume,
            inradius: c.inradius,
            deepest: c.deepest_point,
        };
        Ok(())
    })
}

/// Asymmetry of balls of the given radii around subsampled nodal points.
///
/// # Safety
/// `radii` must point to `nradii` values; `field` live; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ng_asymmetry_scan(
    field: *const NgField,
    radii: *const f64,
    nradii: usize,
    max_centers: usize,
    seed: u64,
    out: *mut NgAsymmetrySummary,
) -> NgStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = scan_asymmetry(
            &f.field,
            f.lambda,
            slice(radii, nradii, "radii")?,
            max_centers,
            seed,
        )
        .map_err(lib)?
        .summary;
        *out = NgAsymmetrySummary {
            probes: s.probes,
            unclipped: s.unclipped,
            min: s.min.unwrap_or(f64::NAN),
            p05: s.p05.unwrap_or(f64::NAN),
            min_scaled: s.min_scaled.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}

/// Capacity of concentric balls on a lattice with `cells` cells per axis.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ng_concentric_capacity(
    dim: usize,
    cells: usize,
    inner: f64,
    outer: f64,
    out: *mut NgCapacity,
) -> NgStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = concentric_ball_capacity(dim, cells, inner, outer).map_err(lib)?;
        *out = NgCapacity {
            computed: r.computed,
            exact: r.exact,
            relative_error: r.relative_error,
        };
        Ok(())
    })
}
