//! C ABI over `eit_thermal`.
//!
//! Every function returns an [`EitStatus`]; on failure the message is kept in a
//! thread-local slot readable through [`eit_last_error_message`]. Fields cross
//! the boundary as opaque [`EitField`] handles released with [`eit_field_free`].
//! Complex arrays are interleaved `(re, im)` doubles in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use eit_thermal::dicke::{apply_filter, chi31_dicke, FilterParams, WindowShape};
use eit_thermal::diffusion::{evolve_stored, StoredCoherence};
use eit_thermal::field::{Cf64File, ComplexField2D};
use eit_thermal::ramsey::{s_correction, BeamShape, RamseyGeometry, RamseyParams};
use eit_thermal::susceptibility::{chi31_general, fwhm_analytic};
use eit_thermal::{BeamParams, Error, MediumParams, Vec3};
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    Overflow = 4,
    NonConvergence = 5,
    GridTooNarrow = 6,
    NoCrossing = 7,
    Resolution = 8,
    NonStationary = 9,
    Format = 10,
    Io = 11,
    Panic = 12,
}

impl From<&Error> for EitStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => EitStatus::Domain,
            Error::Overflow(_) => EitStatus::Overflow,
            Error::InvalidParameter { .. } => EitStatus::InvalidParameter,
            Error::NonConvergence { .. } => EitStatus::NonConvergence,
            Error::GridTooNarrow => EitStatus::GridTooNarrow,
            Error::NoCrossing(_) => EitStatus::NoCrossing,
            Error::Resolution { .. } => EitStatus::Resolution,
            Error::NonStationary { .. } => EitStatus::NonStationary,
            Error::Format(_) => EitStatus::Format,
            Error::Io(_) => EitStatus::Io,
        }
    }
}

/// Vapour constants; rates in s^-1, `coupling` in 1/(m s).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EitMedium {
    pub v_th: f64,
    pub gamma: f64,
    pub gamma_d: f64,
    pub gamma_21: f64,
    pub omega_21: f64,
    pub coupling: f64,
}

/// Beam geometry; wave numbers in 1/m.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EitBeams {
    pub q1: f64,
    pub delta_q: [f64; 3],
    pub omega_2_re: f64,
    pub omega_2_im: f64,
    pub delta_1: f64,
    pub delta: f64,
}

/// Opaque complex 2D field.
pub struct EitField {
    inner: ComplexField2D,
}

impl From<EitMedium> for MediumParams {
    fn from(m: EitMedium) -> Self {
        MediumParams {
            v_th: m.v_th,
            gamma: m.gamma,
            gamma_d: m.gamma_d,
            gamma_21: m.gamma_21,
            omega_21: m.omega_21,
            coupling: m.coupling,
        }
    }
}

impl From<EitBeams> for BeamParams {
    fn from(b: EitBeams) -> Self {
        BeamParams {
            q1: b.q1,
            delta_q: Vec3::new(b.delta_q[0], b.delta_q[1], b.delta_q[2]),
            omega_2: Complex64::new(b.omega_2_re, b.omega_2_im),
            delta_1: b.delta_1,
            delta: b.delta,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

enum Failure {
    Null(&'static str),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> EitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            EitStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(&format!("null pointer: {what}"));
            EitStatus::NullPointer
        }
        Ok(Err(Failure::Engine(e))) => {
            set_last_error(&e.to_string());
            EitStatus::from(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            EitStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes either null or a valid, aligned pointer.
    unsafe { p.as_ref() }.ok_or(Failure::Null(what))
}

unsafe fn write_out<T>(p: *mut T, v: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    // SAFETY: non-null and, per the contract, valid for writes.
    unsafe { p.write(v) };
    Ok(())
}

unsafe fn write_complex(out: *mut f64, z: Complex64) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    // SAFETY: `out` points to two writable doubles.
    unsafe {
        out.write(z.re);
        out.add(1).write(z.im);
    }
    Ok(())
}

unsafe fn path_arg(path: *const c_char) -> Result<String, Failure> {
    if path.is_null() {
        return Err(Failure::Null("path"));
    }
    // SAFETY: non-null, NUL-terminated per the contract.
    let s = unsafe { CStr::from_ptr(path) };
    Ok(s.to_string_lossy().into_owned())
}

fn into_handle(field: ComplexField2D) -> *mut EitField {
    Box::into_raw(Box::new(EitField { inner: field }))
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn eit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn eit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// General susceptibility `chi_31`; writes `(re, im)` to `out[0..2]`.
///
/// # Safety
/// `medium`, `beams` and `k_perp` (three doubles) must be valid for reads,
/// `out` valid for two double writes.
#[no_mangle]
pub unsafe extern "C" fn eit_chi31_general(
    medium: *const EitMedium,
    beams: *const EitBeams,
    k_perp: *const f64,
    omega: f64,
    out: *mut f64,
) -> EitStatus {
    guard(|| unsafe {
        let (m, b) = (*deref(medium, "medium")?, *deref(beams, "beams")?);
        let k = deref(k_perp.cast::<[f64; 3]>(), "k_perp")?;
        let chi = chi31_general(Vec3::new(k[0], k[1], k[2]), omega, &m.into(), &b.into())?;
        write_complex(out, chi)
    })
}

/// Diffusion-limit susceptibility; same contract as [`eit_chi31_general`].
///
/// # Safety
/// See [`eit_chi31_general`].
#[no_mangle]
pub unsafe extern "C" fn eit_chi31_dicke(
    medium: *const EitMedium,
    beams: *const EitBeams,
    k_perp: *const f64,
    omega: f64,
    out: *mut f64,
) -> EitStatus {
    guard(|| unsafe {
        let (m, b) = (*deref(medium, "medium")?, *deref(beams, "beams")?);
        let k = deref(k_perp.cast::<[f64; 3]>(), "k_perp")?;
        let chi = chi31_dicke(Vec3::new(k[0], k[1], k[2]), omega, &m.into(), &b.into())?;
        write_complex(out, chi)
    })
}

/// Motional EIT width for transverse wave number `k`.
///
/// # Safety
/// `medium` valid for reads, `out` valid for one double write.
#[no_mangle]
pub unsafe extern "C" fn eit_fwhm_analytic(k: f64, medium: *const EitMedium, out: *mut f64) -> EitStatus {
    guard(|| unsafe {
        let m: MediumParams = (*deref(medium, "medium")?).into();
        m.validate()?;
        write_out(out, fwhm_analytic(k, &m), "out")
    })
}

/// Finite-beam correction `S_D(delta)`; `cylinder` non-zero selects the 2D beam.
///
/// # Safety
/// `out` valid for two double writes.
#[no_mangle]
pub unsafe extern "C" fn eit_ramsey_s_correction(
    delta: f64,
    a: f64,
    cylinder: c_int,
    gamma: f64,
    k_pow: f64,
    d: f64,
    out: *mut f64,
) -> EitStatus {
    guard(|| unsafe {
        let dim = if cylinder != 0 { BeamShape::Cylinder2d } else { BeamShape::Sheet1d };
        let s = s_correction(delta, &RamseyGeometry { a, dim }, &RamseyParams { gamma, k_pow, d })?;
        write_complex(out, s)
    })
}

/// Creates a field from `2 nx ny` interleaved doubles.
///
/// # Safety
/// `values` valid for `2 nx ny` double reads, `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn eit_field_new(
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    values: *const f64,
    out: *mut *mut EitField,
) -> EitStatus {
    guard(|| unsafe {
        if values.is_null() {
            return Err(Failure::Null("values"));
        }
        let len = nx.checked_mul(ny).and_then(|n| n.checked_mul(2)).ok_or_else(|| Error::Overflow("nx * ny".into()))?;
        let raw = std::slice::from_raw_parts(values, len);
        let v = raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
        let field = ComplexField2D::new(nx, ny, dx, dy, v)?;
        write_out(out, into_handle(field), "out")
    })
}

/// Reads a CF64 file.
///
/// # Safety
/// `path` is a NUL-terminated string, `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn eit_field_read(path: *const c_char, out: *mut *mut EitField) -> EitStatus {
    guard(|| unsafe {
        let f = Cf64File::read(path_arg(path)?)?;
        write_out(out, into_handle(f.field), "out")
    })
}

/// Writes a CF64 file (atomically) with unit string `unit`.
///
/// # Safety
/// `field` is a live handle; `path` and `unit` are NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn eit_field_write(field: *const EitField, path: *const c_char, unit: *const c_char) -> EitStatus {
    guard(|| unsafe {
        let f = deref(field, "field")?;
        let unit = if unit.is_null() { String::new() } else { CStr::from_ptr(unit).to_string_lossy().into_owned() };
        Cf64File::new(f.inner.clone(), unit).write(path_arg(path)?)?;
        Ok(())
    })
}

/// Grid size of a field.
///
/// # Safety
/// `field` is a live handle; `nx` and `ny` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn eit_field_shape(field: *const EitField, nx: *mut usize, ny: *mut usize) -> EitStatus {
    guard(|| unsafe {
        let f = deref(field, "field")?;
        write_out(nx, f.inner.nx(), "nx")?;
        write_out(ny, f.inner.ny(), "ny")
    })
}

/// Copies the `2 nx ny` interleaved values into `buf` of length `len` doubles.
///
/// # Safety
/// `field` is a live handle; `buf` valid for `len` double writes.
#[no_mangle]
pub unsafe extern "C" fn eit_field_values(field: *const EitField, buf: *mut f64, len: usize) -> EitStatus {
    guard(|| unsafe {
        let f = deref(field, "field")?;
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        let need = 2 * f.inner.values().len();
        if len < need {
            return Err(Error::InvalidParameter { field: "len", reason: format!("buffer holds {len} doubles, need {need}") }.into());
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (c, v) in dst.chunks_exact_mut(2).zip(f.inner.values()) {
            c[0] = v.re;
            c[1] = v.im;
        }
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `field` is null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn eit_field_free(field: *mut EitField) {
    if !field.is_null() {
        // SAFETY: created by `into_handle` and not freed before.
        drop(unsafe { Box::from_raw(field) });
    }
}

/// Propagates a probe image through `propagation_length` metres of medium
/// (exact Lorentzian window).
///
/// # Safety
/// `field` is a live handle, `medium`/`beams` valid for reads, `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn eit_filter_apply(
    field: *const EitField,
    medium: *const EitMedium,
    beams: *const EitBeams,
    include_diffraction: c_int,
    propagation_length: f64,
    out: *mut *mut EitField,
) -> EitStatus {
    guard(|| unsafe {
        let f = deref(field, "field")?;
        let params = FilterParams {
            medium: (*deref(medium, "medium")?).into(),
            beams: (*deref(beams, "beams")?).into(),
            include_diffraction: include_diffraction != 0,
            propagation_length,
            window: WindowShape::Exact,
        };
        let r = apply_filter(&f.inner, &params)?;
        write_out(out, into_handle(r.field), "out")
    })
}

/// Evolves a stored coherence for `dt` seconds.
///
/// # Safety
/// `field` is a live handle, `medium` valid for reads, `out` valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn eit_evolve_stored(
    field: *const EitField,
    medium: *const EitMedium,
    dt: f64,
    out: *mut *mut EitField,
) -> EitStatus {
    guard(|| unsafe {
        let f = deref(field, "field")?;
        let m: MediumParams = (*deref(medium, "medium")?).into();
        let r = evolve_stored(&StoredCoherence { field: f.inner.clone(), t: 0.0 }, dt, &m)?;
        write_out(out, into_handle(r.field), "out")
    })
}
