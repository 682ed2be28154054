//! C ABI over hdgkit. Every entry point returns an [`HdgStatus`]; on failure
//! the message is kept per thread and read back with `hdg_last_error`.
//! Handles are opaque and owned by the caller until passed to their `_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hdgkit::hdg;
use hdgkit::inequalities::{self, AuditConfig, IneqId, Lambda};
use hdgkit::mesh::{build_structured, check_regularity, load_mesh, save_mesh, Mesh, TagRule};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownName = 3,
    MeshError = 4,
    ComputeError = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Boundary tagging for generated meshes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HdgTagRule {
    AllDirichlet = 0,
    LeftDirichlet = 1,
    AllNeumann = 2,
}

/// Opaque triangle mesh.
pub struct HdgMesh(Mesh);

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct HdgMeshInfo {
    pub n_vertices: usize,
    pub n_cells: usize,
    pub n_faces: usize,
    pub h_max: f64,
    pub kappa: f64,
    pub theta: f64,
    /// 1 when the mesh satisfies the regularity assumptions.
    pub regular: i32,
}

/// One audit result. `unbounded` is 1 when B vanishes where A does not,
/// and `lambda` is then +inf.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct HdgAudit {
    pub lambda: f64,
    pub h_max: f64,
    pub n_dof: usize,
    pub unbounded: i32,
}

/// One HDG solve. Quantities without an exact reference are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct HdgReport {
    pub h_max: f64,
    pub n_dof: usize,
    pub energy: f64,
    pub err_u: f64,
    pub err_p: f64,
    pub residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Fail(HdgStatus, String);

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HdgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            HdgStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            HdgStatus::Panic
        }
    }
}

fn fail(s: HdgStatus, e: impl ToString) -> Fail {
    Fail(s, e.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(fail(HdgStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(HdgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| fail(HdgStatus::NullPointer, format!("{what} is null")))
}

unsafe fn mesh_arg<'a>(p: *const HdgMesh) -> Result<&'a Mesh, Fail> {
    p.as_ref()
        .map(|m| &m.0)
        .ok_or_else(|| fail(HdgStatus::NullPointer, "mesh is null"))
}

/// Copies `s` NUL-terminated into `buf`. `needed` receives the byte count
/// including the terminator, so callers can size a retry.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Fail> {
    if let Some(n) = needed.as_mut() {
        *n = s.len() + 1;
    }
    if buf.is_null() || len < s.len() + 1 {
        return Err(fail(
            HdgStatus::BufferTooSmall,
            format!("buffer needs {} bytes", s.len() + 1),
        ));
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    Ok(())
}

fn range(name: &str, v: u32, lo: u32, hi: u32) -> Result<usize, Fail> {
    if (lo..=hi).contains(&v) {
        Ok(v as usize)
    } else {
        Err(fail(
            HdgStatus::InvalidArgument,
            format!("{name} = {v} outside {lo}..={hi}"),
        ))
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Same buffer protocol as `hdg_mesh_write`.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null; `needed` may be null.
#[no_mangle]
pub unsafe extern "C" fn hdg_last_error(buf: *mut c_char, len: usize, needed: *mut usize) -> HdgStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match copy_out(&msg, buf, len, needed) {
        Ok(()) => HdgStatus::Ok,
        Err(Fail(s, _)) => s,
    }
}

/// Structured n×n unit-square mesh.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hdg_mesh_structured(n: u32, tags: HdgTagRule, out: *mut *mut HdgMesh) -> HdgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let n = range("n", n, 1, 1024)?;
        let rule = match tags {
            HdgTagRule::AllDirichlet => TagRule::AllDirichlet,
            HdgTagRule::LeftDirichlet => TagRule::LeftDirichlet,
            HdgTagRule::AllNeumann => TagRule::AllNeumann,
        };
        *out = Box::into_raw(Box::new(HdgMesh(build_structured(n, rule))));
        Ok(())
    })
}

/// Parses a mesh in the text format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hdg_mesh_parse(text: *const c_char, out: *mut *mut HdgMesh) -> HdgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let m = load_mesh(str_arg(text, "text")?).map_err(|e| fail(HdgStatus::MeshError, e))?;
        *out = Box::into_raw(Box::new(HdgMesh(m)));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from this library and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn hdg_mesh_free(mesh: *mut HdgMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn hdg_mesh_info(mesh: *const HdgMesh, out: *mut HdgMeshInfo) -> HdgStatus {
    guard(|| {
        let m = mesh_arg(mesh)?;
        let out = out_arg(out, "out")?;
        let r = check_regularity(m);
        *out = HdgMeshInfo {
            n_vertices: m.n_vertices(),
            n_cells: m.n_cells(),
            n_faces: m.n_faces(),
            h_max: m.h_max(),
            kappa: r.kappa,
            theta: r.theta,
            regular: r.ok() as i32,
        };
        Ok(())
    })
}

/// Serializes the mesh into `buf` (NUL-terminated). When the buffer is too
/// small, `needed` still receives the required size.
///
/// # Safety
/// `mesh` must be valid, `buf` valid for `len` bytes or null, `needed` valid or null.
#[no_mangle]
pub unsafe extern "C" fn hdg_mesh_write(
    mesh: *const HdgMesh,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> HdgStatus {
    guard(|| copy_out(&save_mesh(mesh_arg(mesh)?), buf, len, needed))
}

/// Sharp constant of inequality `id` on the level-`level` structured mesh
/// (eigen mode, Γ = left edge).
///
/// # Safety
/// `id` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hdg_audit(id: *const c_char, k: u32, level: u32, out: *mut HdgAudit) -> HdgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let id = IneqId::parse(str_arg(id, "id")?).map_err(|e| fail(HdgStatus::UnknownName, e))?;
        let r = inequalities::audit(
            id,
            range("k", k, 0, 4)?,
            range("level", level, 1, 7)?,
            &AuditConfig::default(),
        )
        .map_err(|e| fail(HdgStatus::ComputeError, e))?;
        let (lambda, unbounded) = match r.lambda {
            Some(Lambda::Bounded(l)) => (l, 0),
            _ => (f64::INFINITY, 1),
        };
        *out = HdgAudit {
            lambda,
            h_max: r.h_max,
            n_dof: r.n_dof,
            unbounded,
        };
        Ok(())
    })
}

/// Audits levels 1..=levels and applies the default verdict. `lambdas` must
/// hold `levels` entries; `pass` receives 1 or 0.
///
/// # Safety
/// `id` must be a NUL-terminated string, `lambdas` valid for `levels` writes, `pass` valid.
#[no_mangle]
pub unsafe extern "C" fn hdg_audit_sweep(
    id: *const c_char,
    k: u32,
    levels: u32,
    lambdas: *mut f64,
    pass: *mut i32,
) -> HdgStatus {
    guard(|| {
        let pass = out_arg(pass, "pass")?;
        if lambdas.is_null() {
            return Err(fail(HdgStatus::NullPointer, "lambdas is null"));
        }
        let id = IneqId::parse(str_arg(id, "id")?).map_err(|e| fail(HdgStatus::UnknownName, e))?;
        let levels = range("levels", levels, 1, 7)?;
        let s = inequalities::sweep(id, range("k", k, 0, 4)?, levels, &AuditConfig::default())
            .map_err(|e| fail(HdgStatus::ComputeError, e))?;
        let out = std::slice::from_raw_parts_mut(lambdas, levels);
        for (o, r) in out.iter_mut().zip(&s.rows) {
            *o = r.value().unwrap_or(f64::INFINITY);
        }
        *pass = s.verdict.pass as i32;
        Ok(())
    })
}

/// Solves a registered problem on the level-`level` mesh.
///
/// # Safety
/// `problem` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hdg_solve(
    problem: *const c_char,
    k: u32,
    level: u32,
    tau: f64,
    out: *mut HdgReport,
) -> HdgStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let p = hdg::problem(str_arg(problem, "problem")?).map_err(|e| fail(HdgStatus::UnknownName, e))?;
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(fail(
                HdgStatus::InvalidArgument,
                format!("tau = {tau} must be positive"),
            ));
        }
        let r = hdg::solve_level(&p, range("k", k, 1, 4)?, range("level", level, 1, 7)?, tau)
            .map_err(|e| fail(HdgStatus::ComputeError, e))?;
        *out = HdgReport {
            h_max: r.h_max,
            n_dof: r.n_dof,
            energy: r.energy,
            err_u: r.err_u.unwrap_or(f64::NAN),
            err_p: r.err_p.unwrap_or(f64::NAN),
            residual: r.residual,
        };
        Ok(())
    })
}
