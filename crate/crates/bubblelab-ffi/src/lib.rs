//! C ABI over bubblelab. Objects are opaque handles created by `bl_*_new` and
//! released by the matching `bl_*_free`. Every fallible call returns a `BlStatus`;
//! the message of the last failure on the calling thread is available through
//! `bl_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bubblelab::bubbles::{BubbleSpec, Configuration};
use bubblelab::energy::sum_energy_report;
use bubblelab::homology::{barycenter_complex, homology, relative_homology, triangulate_model, BarycenterComplexPair, TriangulatedKind};
use bubblelab::manifold::{make_model, IntegrateOptions, ManifoldModel, ModelKind};
use bubblelab::operators::{gjms_constants, green, GjmsConstants};
use bubblelab::LabError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NonConvergence = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlModel {
    RoundSphere = 0,
    AntipodalQuotient = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlTriangulation {
    Circle = 0,
    Sphere2 = 1,
}

/// Scalar constants for one (n, k).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BlConstantsView {
    pub n: u32,
    pub k: u32,
    pub two_star: f64,
    pub c: f64,
    pub b: f64,
    pub y: f64,
    pub norm_two_star: f64,
    pub norm_two_star_minus_one: f64,
}

/// Sum energy of a configuration with its quadrature error and thresholds.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct BlEnergy {
    pub j: f64,
    pub j_error: f64,
    pub threshold_strict: f64,
    pub threshold_loose: f64,
    pub epsilon_sum: f64,
}

pub struct BlConstants {
    inner: GjmsConstants,
}

pub struct BlConfiguration {
    model: ManifoldModel,
    constants: GjmsConstants,
    specs: Vec<BubbleSpec>,
}

pub struct BlComplex {
    pair: BarycenterComplexPair,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &LabError) -> BlStatus {
    match e {
        LabError::QuadratureNonConvergence { .. } | LabError::StepAdaptation { .. } | LabError::OptimizerNonConvergence { .. } => {
            BlStatus::NonConvergence
        }
        _ => BlStatus::InvalidParameter,
    }
}

fn guard(f: impl FnOnce() -> Result<(), BlStatus>) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BlStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside bubblelab".into());
            BlStatus::Panic
        }
    }
}

fn lab<T>(r: bubblelab::Result<T>) -> Result<T, BlStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null() -> BlStatus {
    set_error("null pointer argument".into());
    BlStatus::NullPointer
}

fn model_of(m: BlModel, n: u32) -> bubblelab::Result<ManifoldModel> {
    let kind = match m {
        BlModel::RoundSphere => ModelKind::RoundSphere,
        BlModel::AntipodalQuotient => ModelKind::AntipodalQuotient,
    };
    make_model(kind, n as usize)
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap` bytes). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bl_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn bl_constants_new(n: u32, k: u32, out: *mut *mut BlConstants) -> BlStatus {
    if out.is_null() {
        return null();
    }
    guard(|| {
        let c = lab(gjms_constants(n as usize, k as usize))?;
        *out = Box::into_raw(Box::new(BlConstants { inner: c }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from `bl_constants_new` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_constants_view(h: *const BlConstants, out: *mut BlConstantsView) -> BlStatus {
    if h.is_null() || out.is_null() {
        return null();
    }
    let c = &(*h).inner;
    *out = BlConstantsView {
        n: c.n as u32,
        k: c.k as u32,
        two_star: c.two_star,
        c: c.c_nk,
        b: c.b_nk,
        y: c.y_sphere,
        norm_two_star: c.norm_2star,
        norm_two_star_minus_one: c.norm_2star_minus1,
    };
    BlStatus::Ok
}

/// # Safety
/// `h` must be null or come from `bl_constants_new`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_constants_free(h: *mut BlConstants) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Green's function of P_g between two unit vectors of length n+1.
///
/// # Safety
/// `x` and `y` must point to `len` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_green(
    model: BlModel,
    k: u32,
    x: *const f64,
    y: *const f64,
    len: usize,
    out: *mut f64,
) -> BlStatus {
    if x.is_null() || y.is_null() || out.is_null() {
        return null();
    }
    guard(|| {
        if len < 2 {
            set_error("points need at least two coordinates".into());
            return Err(BlStatus::InvalidParameter);
        }
        let m = lab(model_of(model, len as u32 - 1))?;
        let c = lab(gjms_constants(m.n, k as usize))?;
        let xs = lab(m.point(std::slice::from_raw_parts(x, len)))?;
        let ys = lab(m.point(std::slice::from_raw_parts(y, len)))?;
        *out = lab(green(&m, &c, &xs.coords, &ys.coords))?;
        Ok(())
    })
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn bl_configuration_new(model: BlModel, n: u32, k: u32, out: *mut *mut BlConfiguration) -> BlStatus {
    if out.is_null() {
        return null();
    }
    guard(|| {
        let m = lab(model_of(model, n))?;
        let c = lab(gjms_constants(n as usize, k as usize))?;
        lab(m.check_order(k as usize))?;
        *out = Box::into_raw(Box::new(BlConfiguration { model: m, constants: c, specs: Vec::new() }));
        Ok(())
    })
}

/// Adds a bubble centred at the unit vector `center` (n+1 doubles).
///
/// # Safety
/// `h` must come from `bl_configuration_new`; `center` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bl_configuration_add_bubble(
    h: *mut BlConfiguration,
    center: *const f64,
    len: usize,
    mu: f64,
    delta: f64,
    weight: f64,
) -> BlStatus {
    if h.is_null() || center.is_null() {
        return null();
    }
    guard(|| {
        let cfg = &mut *h;
        if len != cfg.model.n + 1 {
            set_error(format!("center needs {} coordinates, got {len}", cfg.model.n + 1));
            return Err(BlStatus::InvalidParameter);
        }
        let p = lab(cfg.model.point_normalized(std::slice::from_raw_parts(center, len)))?;
        let spec = BubbleSpec::new(p, mu, delta).with_weight(weight);
        let mut trial = cfg.specs.clone();
        trial.push(spec.clone());
        lab(Configuration::new(cfg.model, cfg.constants.clone(), trial))?;
        cfg.specs.push(spec);
        Ok(())
    })
}

/// Number of bubbles in the configuration.
///
/// # Safety
/// `h` must come from `bl_configuration_new`.
#[no_mangle]
pub unsafe extern "C" fn bl_configuration_len(h: *const BlConfiguration) -> usize {
    if h.is_null() {
        return 0;
    }
    (*h).specs.len()
}

/// Sum energy 𝒥 of the configuration at relative quadrature tolerance `rel_tol`.
///
/// # Safety
/// `h` must come from `bl_configuration_new` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_configuration_energy(h: *const BlConfiguration, rel_tol: f64, out: *mut BlEnergy) -> BlStatus {
    if h.is_null() || out.is_null() {
        return null();
    }
    guard(|| {
        let cfg = &*h;
        let c = lab(Configuration::new(cfg.model, cfg.constants.clone(), cfg.specs.clone()))?;
        let r = lab(sum_energy_report(&c, IntegrateOptions::with_tol(rel_tol)))?;
        *out = BlEnergy {
            j: r.energy.j.value,
            j_error: r.energy.j.error,
            threshold_strict: r.energy.threshold_strict,
            threshold_loose: r.energy.threshold_loose,
            epsilon_sum: r.epsilon_sum,
        };
        Ok(())
    })
}

/// # Safety
/// `h` must be null or come from `bl_configuration_new`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_configuration_free(h: *mut BlConfiguration) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Builds ℬ_d(M) for a triangulated model M with its subcomplex ℬ_{d-1}(M).
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn bl_complex_new(kind: BlTriangulation, resolution: u32, d: u32, out: *mut *mut BlComplex) -> BlStatus {
    if out.is_null() {
        return null();
    }
    guard(|| {
        let kind = match kind {
            BlTriangulation::Circle => TriangulatedKind::Circle,
            BlTriangulation::Sphere2 => TriangulatedKind::Sphere2,
        };
        let m = lab(triangulate_model(kind, resolution as usize))?;
        let pair = lab(barycenter_complex(&m, d as usize))?;
        *out = Box::into_raw(Box::new(BlComplex { pair }));
        Ok(())
    })
}

/// Z₂ Betti numbers of ℬ_d(M), or of the pair (ℬ_d, ℬ_{d-1}) when `relative` is
/// nonzero. Writes up to `cap` values and stores the full count in `len`.
///
/// # Safety
/// `h` must come from `bl_complex_new`; `buf` must hold `cap` values; `len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_complex_betti(
    h: *const BlComplex,
    relative: i32,
    buf: *mut u64,
    cap: usize,
    len: *mut usize,
) -> BlStatus {
    if h.is_null() || len.is_null() || (buf.is_null() && cap > 0) {
        return null();
    }
    guard(|| {
        let pair = &(*h).pair;
        let b = if relative != 0 { relative_homology(pair) } else { homology(&pair.complex) };
        *len = b.len();
        if cap < b.len() {
            set_error(format!("buffer holds {cap} values, need {}", b.len()));
            return Err(BlStatus::BufferTooSmall);
        }
        for (i, v) in b.iter().enumerate() {
            *buf.add(i) = *v as u64;
        }
        Ok(())
    })
}

/// Writes the simplex list of the complex into `buf` as NUL-terminated text.
/// Stores the required size including the NUL in `len`.
///
/// # Safety
/// `h` must come from `bl_complex_new`; `buf` must hold `cap` bytes; `len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_complex_simplex_list(h: *const BlComplex, buf: *mut c_char, cap: usize, len: *mut usize) -> BlStatus {
    if h.is_null() || len.is_null() || (buf.is_null() && cap > 0) {
        return null();
    }
    guard(|| {
        let text = (*h).pair.complex.to_simplex_list();
        *len = text.len() + 1;
        if cap < text.len() + 1 {
            set_error(format!("buffer holds {cap} bytes, need {}", text.len() + 1));
            return Err(BlStatus::BufferTooSmall);
        }
        ptr::copy_nonoverlapping(text.as_ptr() as *const c_char, buf, text.len());
        *buf.add(text.len()) = 0;
        Ok(())
    })
}

/// # Safety
/// `h` must be null or come from `bl_complex_new`, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_complex_free(h: *mut BlComplex) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Parses a model name ("sphere", "quotient", ...) into `out`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_model_from_name(name: *const c_char, out: *mut BlModel) -> BlStatus {
    if name.is_null() || out.is_null() {
        return null();
    }
    guard(|| {
        let s = CStr::from_ptr(name).to_str().map_err(|_| {
            set_error("model name is not UTF-8".into());
            BlStatus::InvalidParameter
        })?;
        *out = match lab(s.parse::<ModelKind>())? {
            ModelKind::RoundSphere => BlModel::RoundSphere,
            ModelKind::AntipodalQuotient => BlModel::AntipodalQuotient,
        };
        Ok(())
    })
}
