//! C ABI for the goafem adaptive solver.
//!
//! Every fallible function returns a [`GoafemStatus`]; on failure the message
//! is kept per thread and read with [`goafem_last_error_message`]. Handles are
//! opaque and freed by their matching `*_free` function.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::Arc;

use goafem::adaptive::{run_with, ConvergenceLog};
use goafem::mesh::{initial_mesh, write_mesh, Mesh};
use goafem::mlspace::Assembler;
use goafem::output::{self, Settings};
use goafem::problem::ProblemSpec;
use goafem::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoafemStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Solver = 4,
    Io = 5,
    Panic = 6,
}

/// Run configuration: a setup number plus `key = value` overrides.
pub struct GoafemConfig {
    setup: u8,
    entries: BTreeMap<String, String>,
}

/// Convergence log of a finished run.
pub struct GoafemLog {
    log: ConvergenceLog,
    mesh: Option<Arc<Mesh>>,
}

pub struct GoafemMesh {
    mesh: Arc<Mesh>,
}

/// One iteration of the adaptive loop.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GoafemRecord {
    pub iter: usize,
    pub dofs: usize,
    pub mu: f64,
    pub zeta: f64,
    pub product: f64,
    pub goal_value: f64,
    pub n_indices: usize,
    pub max_param: u32,
    pub seconds: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GoafemStatus {
    match e {
        Error::Config(_) | Error::Parse { .. } => GoafemStatus::Config,
        Error::NonConvergence(_) | Error::Factorization(_) => GoafemStatus::Solver,
        Error::Io { .. } => GoafemStatus::Io,
        _ => GoafemStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (GoafemStatus, String)>) -> GoafemStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GoafemStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            GoafemStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (GoafemStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (GoafemStatus, String) {
    (GoafemStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (GoafemStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (GoafemStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn goafem_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn goafem_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a configuration with the defaults of `setup` (1 to 4).
///
/// # Safety
/// `out` must be null or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn goafem_config_new(setup: u8, out: *mut *mut GoafemConfig) -> GoafemStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        Settings::from_map(Some(setup), &BTreeMap::new()).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(GoafemConfig { setup, entries: BTreeMap::new() }));
        Ok(())
    })
}

/// Sets one configuration entry, using the keys of the config-file format
/// (`theta`, `tol`, `max_iter`, `solver_tol`, `freeze_indices`, ...).
///
/// # Safety
/// `cfg` must come from [`goafem_config_new`]; `key` and `value` must be null
/// or NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn goafem_config_set(
    cfg: *mut GoafemConfig,
    key: *const c_char,
    value: *const c_char,
) -> GoafemStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let key = str_arg(key, "key")?.trim().replace('-', "_");
        let value = str_arg(value, "value")?.trim().to_string();
        let mut entries = cfg.entries.clone();
        entries.insert(key, value);
        Settings::from_map(Some(cfg.setup), &entries)
            .and_then(|s| s.validate())
            .map_err(lib_err)?;
        cfg.entries = entries;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be null or come from [`goafem_config_new`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn goafem_config_free(cfg: *mut GoafemConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the adaptive loop and returns its log.
///
/// # Safety
/// `cfg` must come from [`goafem_config_new`]; `out` must point to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn goafem_run(cfg: *const GoafemConfig, out: *mut *mut GoafemLog) -> GoafemStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = Settings::from_map(Some(cfg.setup), &cfg.entries).map_err(lib_err)?;
        s.validate().map_err(lib_err)?;
        let asm = Assembler::new(ProblemSpec::setup(s.run.setup).map_err(lib_err)?).map_err(lib_err)?;
        let mut mesh = None;
        let log = run_with(&asm, &s.run, |st, _| mesh = Some(st.structure.meshes()[0].clone())).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(GoafemLog { log, mesh }));
        Ok(())
    })
}

/// # Safety
/// `log` must come from [`goafem_run`]; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn goafem_log_len(log: *const GoafemLog, len: *mut usize) -> GoafemStatus {
    guard(|| {
        let log = log.as_ref().ok_or_else(|| null("log"))?;
        *len.as_mut().ok_or_else(|| null("len"))? = log.log.records.len();
        Ok(())
    })
}

/// Whether the run reached its tolerance (1) or stopped at `max_iter` (0).
///
/// # Safety
/// `log` must come from [`goafem_run`]; `converged` must be writable.
#[no_mangle]
pub unsafe extern "C" fn goafem_log_converged(log: *const GoafemLog, converged: *mut bool) -> GoafemStatus {
    guard(|| {
        let log = log.as_ref().ok_or_else(|| null("log"))?;
        *converged.as_mut().ok_or_else(|| null("converged"))? = log.log.converged;
        Ok(())
    })
}

/// # Safety
/// `log` must come from [`goafem_run`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn goafem_log_record(
    log: *const GoafemLog,
    index: usize,
    out: *mut GoafemRecord,
) -> GoafemStatus {
    guard(|| {
        let log = log.as_ref().ok_or_else(|| null("log"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = log.log.records.get(index).ok_or_else(|| {
            (
                GoafemStatus::InvalidArgument,
                format!("record {index} out of range ({} records)", log.log.records.len()),
            )
        })?;
        *out = GoafemRecord {
            iter: r.iter,
            dofs: r.dofs,
            mu: r.mu,
            zeta: r.zeta,
            product: r.product,
            goal_value: r.goal_value,
            n_indices: r.n_indices,
            max_param: r.max_param,
            seconds: r.seconds,
        };
        Ok(())
    })
}

/// Writes the log in the convergence CSV format.
///
/// # Safety
/// `log` must come from [`goafem_run`]; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn goafem_log_write_csv(log: *const GoafemLog, path: *const c_char) -> GoafemStatus {
    guard(|| {
        let log = log.as_ref().ok_or_else(|| null("log"))?;
        let path = str_arg(path, "path")?;
        output::write_file(Path::new(path), &output::convergence_csv(&log.log.records)).map_err(lib_err)
    })
}

/// Final mesh of the zero index; free it with [`goafem_mesh_free`].
///
/// # Safety
/// `log` must come from [`goafem_run`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn goafem_log_mesh(log: *const GoafemLog, out: *mut *mut GoafemMesh) -> GoafemStatus {
    guard(|| {
        let log = log.as_ref().ok_or_else(|| null("log"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mesh = log.mesh.clone().ok_or((GoafemStatus::InvalidArgument, "log has no mesh".to_string()))?;
        *out = Box::into_raw(Box::new(GoafemMesh { mesh }));
        Ok(())
    })
}

/// # Safety
/// `log` must be null or come from [`goafem_run`] and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn goafem_log_free(log: *mut GoafemLog) {
    if !log.is_null() {
        drop(Box::from_raw(log));
    }
}

/// Initial mesh of `setup`.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn goafem_initial_mesh(setup: u8, out: *mut *mut GoafemMesh) -> GoafemStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = ProblemSpec::setup(setup).map_err(lib_err)?;
        let mesh = initial_mesh(spec.domain, spec.initial_triangles).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(GoafemMesh { mesh: Arc::new(mesh) }));
        Ok(())
    })
}

/// Vertex, triangle and interior-dof counts.
///
/// # Safety
/// `mesh` must come from this library; the count pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn goafem_mesh_counts(
    mesh: *const GoafemMesh,
    vertices: *mut usize,
    triangles: *mut usize,
    dofs: *mut usize,
) -> GoafemStatus {
    guard(|| {
        let m = &mesh.as_ref().ok_or_else(|| null("mesh"))?.mesh;
        *vertices.as_mut().ok_or_else(|| null("vertices"))? = m.n_vertices();
        *triangles.as_mut().ok_or_else(|| null("triangles"))? = m.n_triangles();
        *dofs.as_mut().ok_or_else(|| null("dofs"))? = m.n_dofs();
        Ok(())
    })
}

/// Writes the mesh in the plain-text dump format.
///
/// # Safety
/// `mesh` must come from this library; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn goafem_mesh_write(mesh: *const GoafemMesh, path: *const c_char) -> GoafemStatus {
    guard(|| {
        let m = &mesh.as_ref().ok_or_else(|| null("mesh"))?.mesh;
        let path = str_arg(path, "path")?;
        let file = std::fs::File::create(path).map_err(|e| (GoafemStatus::Io, format!("{path}: {e}")))?;
        write_mesh(m, std::io::BufWriter::new(file)).map_err(|e| (GoafemStatus::Io, format!("{path}: {e}")))
    })
}

/// # Safety
/// `mesh` must be null or come from this library and not be freed yet.
#[no_mangle]
pub unsafe extern "C" fn goafem_mesh_free(mesh: *mut GoafemMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}
