//! C interface to pamkit.
//!
//! Objects are opaque handles created by `*_new` functions and released with
//! the matching `*_free`. Every fallible call returns a [`PamkitStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`pamkit_last_error`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pamkit::chaos::chaos_partial_sum;
use pamkit::cli::{self, Command, ExperimentConfig};
use pamkit::hamiltonian::{expected_hamiltonian, Mode};
use pamkit::mc::McConfig;
use pamkit::model::{parse_kernel, parse_process};
use pamkit::moments::{moment_skorohod, moment_stratonovich};
use pamkit::oracles::dirichlet_beta_integral;
use pamkit::pathsim::TimeGrid;
use pamkit::spectral::{check_hypothesis_i, check_hypothesis_ii};
use pamkit::{Error, InitialCondition, LevyProcessSpec, NoiseSpec};

/// Status codes; 2 to 5 match the exit codes of the command line tool.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PamkitStatus {
    Ok = 0,
    Failure = 1,
    Config = 2,
    HypothesisViolated = 3,
    Divergence = 4,
    InsufficientData = 5,
    NullPointer = 6,
    InvalidUtf8 = 7,
    Panic = 8,
}

/// A Lévy process paired with a noise specification.
pub struct PamkitModel {
    process: LevyProcessSpec,
    noise: NoiseSpec,
}

/// A resolved experiment configuration.
pub struct PamkitConfig {
    inner: ExperimentConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PamkitStatus {
    match cli::exit_code(e) {
        2 => PamkitStatus::Config,
        3 => PamkitStatus::HypothesisViolated,
        4 => PamkitStatus::Divergence,
        5 => PamkitStatus::InsufficientData,
        _ => PamkitStatus::Failure,
    }
}

enum Fail {
    Lib(Error),
    Null(&'static str),
    Utf8(&'static str),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PamkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PamkitStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null(name))) => {
            set_error(&format!("{name} is null"));
            PamkitStatus::NullPointer
        }
        Ok(Err(Fail::Utf8(name))) => {
            set_error(&format!("{name} is not valid UTF-8"));
            PamkitStatus::InvalidUtf8
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("panic: {msg}"));
            PamkitStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Utf8(name))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(name))
}

unsafe fn model_arg<'a>(p: *const PamkitModel) -> Result<&'a PamkitModel, Fail> {
    p.as_ref().ok_or(Fail::Null("model"))
}

/// Message of the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pamkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pamkit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a model from spec strings such as `stable:alpha=1.5` and
/// `riesz:beta=0.5`.
///
/// # Safety
/// `process` and `kernel` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn pamkit_model_new(
    process: *const c_char,
    kernel: *const c_char,
    dim: usize,
    beta0: f64,
    out: *mut *mut PamkitModel,
) -> PamkitStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let process = parse_process(str_arg(process, "process")?, dim)?;
        let kernel = parse_kernel(str_arg(kernel, "kernel")?, dim)?;
        let noise = NoiseSpec::new(beta0, kernel)?;
        *out = Box::into_raw(Box::new(PamkitModel { process, noise }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`pamkit_model_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pamkit_model_free(model: *mut PamkitModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Checks hypothesis (I) (`which = 1`) or (II) (`which = 2`).
///
/// # Safety
/// `model` must be a live handle; `holds` must be writable; `integral` may
/// be null.
#[no_mangle]
pub unsafe extern "C" fn pamkit_check_hypothesis(
    model: *const PamkitModel,
    which: u32,
    holds: *mut bool,
    integral: *mut f64,
) -> PamkitStatus {
    guard(|| {
        let m = model_arg(model)?;
        let holds = out_arg(holds, "holds")?;
        let report = match which {
            1 => check_hypothesis_i(&m.process, &m.noise)?,
            2 => check_hypothesis_ii(&m.process, &m.noise)?,
            _ => return Err(Error::Config(format!("unknown hypothesis {which} (expected 1 or 2)")).into()),
        };
        *holds = report.holds;
        if let Some(v) = integral.as_mut() {
            *v = report.integral_value.unwrap_or(f64::INFINITY);
        }
        Ok(())
    })
}

/// `E H` over `[0, t]²`; `cross = false` for the self Hamiltonian.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pamkit_expected_hamiltonian(model: *const PamkitModel, t: f64, cross: bool, out: *mut f64) -> PamkitStatus {
    guard(|| {
        let m = model_arg(model)?;
        let out = out_arg(out, "out")?;
        let mode = if cross { Mode::Cross } else { Mode::SelfPath };
        *out = expected_hamiltonian(&m.process, m.noise.kernel(), m.noise.beta0(), t, mode)?;
        Ok(())
    })
}

/// Monte Carlo estimate of `E u(t,x)^p` for `u₀ ≡ u0`; `skorohod = false`
/// selects the Stratonovich sense. `x` has `dim` entries.
///
/// # Safety
/// `model` must be a live handle, `x` must point to `dim` doubles and
/// `value`, `stderr` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pamkit_moment(
    model: *const PamkitModel,
    skorohod: bool,
    p: usize,
    t: f64,
    x: *const f64,
    u0: f64,
    steps: usize,
    replicates: usize,
    seed: u64,
    value: *mut f64,
    stderr: *mut f64,
) -> PamkitStatus {
    guard(|| {
        let m = model_arg(model)?;
        if x.is_null() {
            return Err(Fail::Null("x"));
        }
        let x = std::slice::from_raw_parts(x, m.process.dim());
        let value = out_arg(value, "value")?;
        let stderr = out_arg(stderr, "stderr")?;
        let grid = TimeGrid::new(t, steps)?;
        let mc = McConfig::new(replicates, seed);
        let u0 = InitialCondition::constant(u0);
        let est = if skorohod {
            moment_skorohod(p, t, x, &u0, &m.process, &m.noise, &grid, &mc)?
        } else {
            moment_stratonovich(p, t, x, &u0, &m.process, &m.noise, &grid, &mc)?
        };
        *value = est.value;
        *stderr = est.stderr;
        Ok(())
    })
}

/// Partial sums `S_0..S_N` of the chaos series for `E u(t,x)²` with
/// `u₀ ≡ u0`, written to `sums[0..=n_terms]`.
///
/// # Safety
/// `model` must be a live handle; `sums` must hold `n_terms + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn pamkit_chaos_partial_sums(
    model: *const PamkitModel,
    n_terms: usize,
    t: f64,
    u0: f64,
    steps: usize,
    replicates: usize,
    seed: u64,
    sums: *mut f64,
) -> PamkitStatus {
    guard(|| {
        let m = model_arg(model)?;
        if sums.is_null() {
            return Err(Fail::Null("sums"));
        }
        let grid = TimeGrid::new(t, steps)?;
        let s = chaos_partial_sum(
            n_terms,
            t,
            &InitialCondition::constant(u0),
            &m.process,
            &m.noise,
            &grid,
            &McConfig::new(replicates, seed),
        )?;
        std::slice::from_raw_parts_mut(sums, n_terms + 1).copy_from_slice(&s.partial_sums);
        Ok(())
    })
}

/// `Π Γ(α_i+1) t^{Σα+n} / Γ(Σα+n+1)` for `n = len` exponents.
///
/// # Safety
/// `alphas` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pamkit_dirichlet_beta_integral(alphas: *const f64, len: usize, t: f64, out: *mut f64) -> PamkitStatus {
    guard(|| {
        if alphas.is_null() {
            return Err(Fail::Null("alphas"));
        }
        let out = out_arg(out, "out")?;
        *out = dirichlet_beta_integral(std::slice::from_raw_parts(alphas, len), t)?;
        Ok(())
    })
}

/// Parses a config file text (the command line `--config` format).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pamkit_config_parse(text: *const c_char, out: *mut *mut PamkitConfig) -> PamkitStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inner = cli::parse_config(str_arg(text, "text")?)?;
        *out = Box::into_raw(Box::new(PamkitConfig { inner }));
        Ok(())
    })
}

/// Overrides one key, as the matching command line flag would.
///
/// # Safety
/// `config` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn pamkit_config_set(config: *mut PamkitConfig, key: *const c_char, value: *const c_char) -> PamkitStatus {
    guard(|| {
        let c = config.as_mut().ok_or(Fail::Null("config"))?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        let mut b = cli::ConfigBuilder::new();
        b.apply_text(&c.inner.to_text(false))?;
        b.set(key, value)?;
        c.inner = b.build()?;
        Ok(())
    })
}

/// # Safety
/// `config` must come from [`pamkit_config_parse`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pamkit_config_free(config: *mut PamkitConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a subcommand (`"moments"`, `"chaos"`, ...) and writes its
/// artifacts to the configured output directory.
///
/// # Safety
/// `config` must be a live handle; `command` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pamkit_run(config: *const PamkitConfig, command: *const c_char) -> PamkitStatus {
    guard(|| {
        let c = config.as_ref().ok_or(Fail::Null("config"))?;
        let command: Command = str_arg(command, "command")?.parse()?;
        cli::run(command, &c.inner)?;
        Ok(())
    })
}
