//! C ABI for the program analyses.
//!
//! The entry point is [`cup_analyze`]: it parses a program source, runs one
//! analysis and returns an opaque handle carrying a status code and a report
//! payload. Reports are JSON for every command except `CUP_CMD_GRAPH`, which
//! yields DOT. The header `include/cupverify.h` is generated at build time.
//!
//! All returned strings are owned by the handle and live until
//! [`cup_analysis_free`].

use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cupverify::explorer::{
    bisim_validate, check_coherence, decide_reachability, explore, invariants, Budgets,
    ExplorerError, Verdict,
};
use cupverify::report;
use cupverify::upl::parse;

/// Analysis selector.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CupCommand {
    /// Program structure only.
    CupCmdParse = 0,
    /// Check the memoizing and early-assume conditions.
    CupCmdCoherence = 1,
    /// Decide reachability of program completion.
    CupCmdReach = 2,
    /// Extract per-location inductive assertions.
    CupCmdInvariants = 3,
    /// Emit the abstract transition system in DOT.
    CupCmdGraph = 4,
    /// Validate the abstraction against bounded concrete execution.
    CupCmdBisimCheck = 5,
}

/// Status of a finished analysis. Values match the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum CupStatus {
    CupOk = 0,
    CupParseError = 2,
    CupBudgetExceeded = 3,
    CupInvalidArgument = 4,
}

/// Tuning knobs; zero fields fall back to defaults.
#[repr(C)]
#[derive(Clone, Copy)]
pub struct CupOptions {
    pub max_nodes: usize,
    pub max_steps: usize,
    pub jobs: usize,
    pub bisim_bound: usize,
}

/// Opaque analysis result.
pub struct CupAnalysis {
    status: CupStatus,
    report: Option<CString>,
    error: Option<CString>,
    /// 1 reachable, 0 unreachable, -1 not applicable.
    verdict: c_int,
}

/// Default options: the CLI defaults.
#[no_mangle]
pub extern "C" fn cup_options_default() -> CupOptions {
    CupOptions {
        max_nodes: 100_000,
        max_steps: 1_000_000,
        jobs: 1,
        bisim_bound: 40,
    }
}

fn c_string(s: String) -> CString {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed")
}

fn failure(status: CupStatus, msg: String) -> CupAnalysis {
    CupAnalysis {
        status,
        report: None,
        error: Some(c_string(msg)),
        verdict: -1,
    }
}

fn success(report: String, verdict: c_int) -> CupAnalysis {
    CupAnalysis {
        status: CupStatus::CupOk,
        report: Some(c_string(report)),
        error: None,
        verdict,
    }
}

fn explorer_failure(err: ExplorerError) -> CupAnalysis {
    let status = match err {
        ExplorerError::BudgetExceeded { .. } | ExplorerError::Truncated => {
            CupStatus::CupBudgetExceeded
        }
        ExplorerError::Abstraction(_) => CupStatus::CupInvalidArgument,
    };
    failure(status, err.to_string())
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization")
}

fn analyze(source: &str, command: CupCommand, opts: CupOptions) -> CupAnalysis {
    let program = match parse(source) {
        Ok(p) => p,
        Err(e) => return failure(CupStatus::CupParseError, e.to_string()),
    };
    let budgets = Budgets {
        max_nodes: if opts.max_nodes == 0 { 100_000 } else { opts.max_nodes },
        max_steps: if opts.max_steps == 0 { 1_000_000 } else { opts.max_steps },
    };
    let jobs = opts.jobs.max(1);
    match command {
        CupCommand::CupCmdParse => success(json(&report::program_json(&program)), -1),
        CupCommand::CupCmdCoherence => match check_coherence(&program, budgets) {
            Ok(r) => success(json(&report::coherence_json(&program, &r)), -1),
            Err(e) => explorer_failure(e),
        },
        CupCommand::CupCmdReach => {
            let coherence = match check_coherence(&program, budgets) {
                Ok(r) => r,
                Err(e) => return explorer_failure(e),
            };
            match decide_reachability(&program, budgets, jobs) {
                Ok((verdict, ts)) => {
                    let flag = matches!(verdict, Verdict::Reachable { .. }) as c_int;
                    success(
                        json(&report::reach_json(&program, &verdict, &ts, &coherence)),
                        flag,
                    )
                }
                Err(e) => explorer_failure(e),
            }
        }
        CupCommand::CupCmdInvariants => match explore(&program, budgets, jobs) {
            Ok(ts) if ts.truncated => explorer_failure(ExplorerError::Truncated),
            Ok(ts) => match invariants(&program, &ts) {
                Ok(map) => success(json(&report::invariants_json(&program, &map)), -1),
                Err(e) => explorer_failure(e),
            },
            Err(e) => explorer_failure(e),
        },
        CupCommand::CupCmdGraph => match explore(&program, budgets, jobs) {
            Ok(ts) if ts.truncated => explorer_failure(ExplorerError::Truncated),
            Ok(ts) => success(report::dot(&program, &ts), -1),
            Err(e) => explorer_failure(e),
        },
        CupCommand::CupCmdBisimCheck => match explore(&program, budgets, jobs) {
            Ok(ts) if ts.truncated => explorer_failure(ExplorerError::Truncated),
            Ok(ts) => {
                let bound = if opts.bisim_bound == 0 { 40 } else { opts.bisim_bound };
                match bisim_validate(&program, &ts, bound, budgets.max_nodes) {
                    Ok(r) => success(json(&report::bisim_json(&r, &ts)), -1),
                    Err(e) => explorer_failure(e),
                }
            }
            Err(e) => explorer_failure(e),
        },
    }
}

/// Runs one analysis over a NUL-terminated program source. Never returns
/// NULL; inspect the status with `cup_analysis_status`. Pass NULL options
/// for defaults. Free the result with `cup_analysis_free`.
///
/// # Safety
/// `source` must be a valid NUL-terminated string; `options`, when non-NULL,
/// must point to a valid `CupOptions`.
#[no_mangle]
pub unsafe extern "C" fn cup_analyze(
    source: *const c_char,
    command: CupCommand,
    options: *const CupOptions,
) -> *mut CupAnalysis {
    let opts = if options.is_null() {
        cup_options_default()
    } else {
        *options
    };
    let result = if source.is_null() {
        failure(
            CupStatus::CupInvalidArgument,
            "source must not be NULL".to_string(),
        )
    } else {
        let bytes = CStr::from_ptr(source);
        match bytes.to_str() {
            Ok(text) => {
                let text = text.to_string();
                catch_unwind(AssertUnwindSafe(move || analyze(&text, command, opts)))
                    .unwrap_or_else(|_| {
                        failure(
                            CupStatus::CupInvalidArgument,
                            "internal panic during analysis".to_string(),
                        )
                    })
            }
            Err(_) => failure(
                CupStatus::CupInvalidArgument,
                "source must be valid UTF-8".to_string(),
            ),
        }
    };
    Box::into_raw(Box::new(result))
}

/// Status code of a finished analysis.
///
/// # Safety
/// `analysis` must come from `cup_analyze` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cup_analysis_status(analysis: *const CupAnalysis) -> CupStatus {
    if analysis.is_null() {
        return CupStatus::CupInvalidArgument;
    }
    (*analysis).status
}

/// Report payload: JSON, or DOT for `CUP_CMD_GRAPH`. NULL unless the status
/// is `CUP_OK`. Owned by the handle.
///
/// # Safety
/// `analysis` must come from `cup_analyze` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cup_analysis_report(analysis: *const CupAnalysis) -> *const c_char {
    if analysis.is_null() {
        return ptr::null();
    }
    match &(*analysis).report {
        Some(s) => s.as_ptr(),
        None => ptr::null(),
    }
}

/// Error message for a failed analysis, NULL on success. Owned by the handle.
///
/// # Safety
/// `analysis` must come from `cup_analyze` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cup_analysis_error(analysis: *const CupAnalysis) -> *const c_char {
    if analysis.is_null() {
        return ptr::null();
    }
    match &(*analysis).error {
        Some(s) => s.as_ptr(),
        None => ptr::null(),
    }
}

/// For `CUP_CMD_REACH`: 1 when a terminal configuration is reachable, 0 when
/// not, -1 when not applicable.
///
/// # Safety
/// `analysis` must come from `cup_analyze` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn cup_analysis_verdict(analysis: *const CupAnalysis) -> c_int {
    if analysis.is_null() {
        return -1;
    }
    (*analysis).verdict
}

/// Releases a handle. NULL is tolerated.
///
/// # Safety
/// `analysis` must come from `cup_analyze` and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cup_analysis_free(analysis: *mut CupAnalysis) {
    if !analysis.is_null() {
        drop(Box::from_raw(analysis));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn cup_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}
