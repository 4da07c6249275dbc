//! C ABI over the `pdmod` engine.
//!
//! Operators cross the boundary as opaque `PdmodOperator` handles. Every fallible call
//! returns a `PdmodStatus`; on failure the message is available from
//! `pdmod_last_error_message` on the same thread. Strings returned through out-pointers
//! are owned by the caller and released with `pdmod_string_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pdmod::cc::{generate_cc, verify_cc};
use pdmod::cli::{self, Input, Options, OutputFormat};
use pdmod::duality::{differential_rank, double_duality_test};
use pdmod::format::{parse_operator_file, print_operator_file};
use pdmod::rowmodule::row_module_eq;
use pdmod::{Error, OpMatrix};

/// Result codes. `PDMOD_STATUS_OK` is zero; every other value names a failure class.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PdmodStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Shape = 4,
    Parse = 5,
    Syntax = 6,
    UndeclaredSymbol = 7,
    NonRationalCoefficient = 8,
    OrderBudgetExceeded = 9,
    PreconditionFailed = 10,
    NotTorsionFree = 11,
    DegenerateMetric = 12,
    UnsupportedDimension = 13,
    Unknown = 14,
    Io = 15,
    Panic = 16,
}

impl From<&Error> for PdmodStatus {
    fn from(e: &Error) -> PdmodStatus {
        match e {
            Error::Domain(_) => PdmodStatus::Domain,
            Error::Shape(_) => PdmodStatus::Shape,
            Error::Parse(_) => PdmodStatus::Parse,
            Error::Syntax { .. } => PdmodStatus::Syntax,
            Error::UndeclaredSymbol { .. } => PdmodStatus::UndeclaredSymbol,
            Error::NonRationalCoefficient { .. } => PdmodStatus::NonRationalCoefficient,
            Error::OrderBudgetExceeded { .. } => PdmodStatus::OrderBudgetExceeded,
            Error::PreconditionFailed(_) => PdmodStatus::PreconditionFailed,
            Error::NotTorsionFree { .. } => PdmodStatus::NotTorsionFree,
            Error::DegenerateMetric(_) => PdmodStatus::DegenerateMetric,
            Error::UnsupportedDimension(_) => PdmodStatus::UnsupportedDimension,
            Error::Unknown(_) => PdmodStatus::Unknown,
            Error::Io(_) => PdmodStatus::Io,
        }
    }
}

/// Opaque matrix of linear differential operators.
pub struct PdmodOperator {
    inner: OpMatrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(PdmodStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(PdmodStatus::from(&e), e.to_string())
    }
}

type FfiResult = Result<(), Failure>;

fn guard(f: impl FnOnce() -> FfiResult) -> PdmodStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PdmodStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal panic".into());
            set_error(format!("internal panic: {msg}"));
            PdmodStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(PdmodStatus::NullPointer, format!("null pointer: {what}"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(PdmodStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn op_arg<'a>(p: *const PdmodOperator, what: &str) -> Result<&'a OpMatrix, Failure> {
    p.as_ref().map(|h| &h.inner).ok_or_else(|| null(what))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn into_handle(op: OpMatrix) -> *mut PdmodOperator {
    Box::into_raw(Box::new(PdmodOperator { inner: op }))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn pdmod_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pdmod_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses an operator file (`dim`, `unknowns`, `eq` lines).
#[no_mangle]
pub unsafe extern "C" fn pdmod_operator_parse(text: *const c_char, out: *mut *mut PdmodOperator) -> PdmodStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        *out = into_handle(parse_operator_file(text)?);
        Ok(())
    })
}

/// Builds a gallery operator. `n == 0` selects the default dimension; a NULL metric means `euclid`.
#[no_mangle]
pub unsafe extern "C" fn pdmod_operator_gallery(
    name: *const c_char,
    n: usize,
    metric: *const c_char,
    out: *mut *mut PdmodOperator,
) -> PdmodStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let name = str_arg(name, "name")?;
        let metric = if metric.is_null() { "euclid" } else { str_arg(metric, "metric")? };
        let input = cli::gallery_input(name, (n > 0).then_some(n), metric)?;
        *out = into_handle(input.op);
        Ok(())
    })
}

/// Releases a handle. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pdmod_operator_free(op: *mut PdmodOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Copies a handle.
#[no_mangle]
pub unsafe extern "C" fn pdmod_operator_clone(op: *const PdmodOperator, out: *mut *mut PdmodOperator) -> PdmodStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = into_handle(op_arg(op, "op")?.clone());
        Ok(())
    })
}

/// Dimension, row count, column count and order of an operator. Any out-pointer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn pdmod_operator_shape(
    op: *const PdmodOperator,
    n: *mut usize,
    rows: *mut usize,
    cols: *mut usize,
    order: *mut usize,
) -> PdmodStatus {
    guard(|| {
        let a = op_arg(op, "op")?;
        for (p, v) in [(n, a.n()), (rows, a.nrows()), (cols, a.ncols()), (order, a.order())] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Operator in file syntax. Free the result with `pdmod_string_free`.
#[no_mangle]
pub unsafe extern "C" fn pdmod_operator_to_string(op: *const PdmodOperator, out: *mut *mut c_char) -> PdmodStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = into_c_string(print_operator_file(op_arg(op, "op")?));
        Ok(())
    })
}

/// Formal adjoint.
#[no_mangle]
pub unsafe extern "C" fn pdmod_operator_adjoint(op: *const PdmodOperator, out: *mut *mut PdmodOperator) -> PdmodStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = into_handle(op_arg(op, "op")?.adjoint());
        Ok(())
    })
}

/// Composition `a` after `b`.
#[no_mangle]
pub unsafe extern "C" fn pdmod_operator_compose(
    a: *const PdmodOperator,
    b: *const PdmodOperator,
    out: *mut *mut PdmodOperator,
) -> PdmodStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = into_handle(op_arg(a, "a")?.matmul(op_arg(b, "b")?)?);
        Ok(())
    })
}

/// Generating compatibility conditions. `max_order == 0` means operator order + 5.
#[no_mangle]
pub unsafe extern "C" fn pdmod_operator_cc(
    op: *const PdmodOperator,
    max_order: usize,
    out: *mut *mut PdmodOperator,
) -> PdmodStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let a = op_arg(op, "op")?;
        let budget = if max_order == 0 { a.order() + 5 } else { max_order };
        *out = into_handle(generate_cc(a, budget)?.cc);
        Ok(())
    })
}

/// Whether `cc` composed with `a` vanishes.
#[no_mangle]
pub unsafe extern "C" fn pdmod_verify_cc(
    cc: *const PdmodOperator,
    a: *const PdmodOperator,
    out: *mut bool,
) -> PdmodStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = verify_cc(op_arg(cc, "cc")?, op_arg(a, "a")?)?;
        Ok(())
    })
}

/// Whether two operators generate the same row module.
#[no_mangle]
pub unsafe extern "C" fn pdmod_row_module_eq(
    a: *const PdmodOperator,
    b: *const PdmodOperator,
    out: *mut bool,
) -> PdmodStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = row_module_eq(op_arg(a, "a")?, op_arg(b, "b")?)?;
        Ok(())
    })
}

/// Differential rank of an operator.
#[no_mangle]
pub unsafe extern "C" fn pdmod_differential_rank(op: *const PdmodOperator, out: *mut usize) -> PdmodStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = differential_rank(op_arg(op, "op")?)?.rank;
        Ok(())
    })
}

/// Double-duality torsion test. `generators` receives the number of torsion generators;
/// either out-pointer may be NULL. `max_order == 0` means operator order + 5.
#[no_mangle]
pub unsafe extern "C" fn pdmod_torsion_test(
    op: *const PdmodOperator,
    max_order: usize,
    torsion_free: *mut bool,
    generators: *mut usize,
) -> PdmodStatus {
    guard(|| {
        let a = op_arg(op, "op")?;
        let budget = if max_order == 0 { a.order() + 5 } else { max_order };
        let report = double_duality_test(a, budget)?;
        if let Some(p) = torsion_free.as_mut() {
            *p = report.torsion_free;
        }
        if let Some(p) = generators.as_mut() {
            *p = report.torsion_generators.len();
        }
        Ok(())
    })
}

/// Runs a CLI command on `count` operators and returns its JSON report.
/// `exit_code` receives the status the command-line tool would exit with.
#[no_mangle]
pub unsafe extern "C" fn pdmod_run_command(
    command: *const c_char,
    inputs: *const *const PdmodOperator,
    count: usize,
    seed: u64,
    json_out: *mut *mut c_char,
    exit_code: *mut i32,
) -> PdmodStatus {
    guard(|| {
        let json_out = out_arg(json_out, "json_out")?;
        let command = str_arg(command, "command")?;
        if inputs.is_null() && count > 0 {
            return Err(null("inputs"));
        }
        let mut ops = Vec::with_capacity(count);
        for i in 0..count {
            let op = op_arg(*inputs.add(i), "inputs[i]")?;
            ops.push(Input { source: format!("handle:{i}"), op: op.clone() });
        }
        let opts = Options { seed, format: OutputFormat::Json, ..Options::default() };
        let report = cli::run_command(command, &ops, &opts);
        if let Some(p) = exit_code.as_mut() {
            *p = report.exit_code;
        }
        *json_out = into_c_string(report.render(OutputFormat::Json));
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn pdmod_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
