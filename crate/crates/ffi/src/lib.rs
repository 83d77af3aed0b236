//! C ABI over the `secgame` solvers.
//!
//! Games and equilibria are opaque handles created by this library and
//! released with the matching `*_free` call. Every fallible function returns
//! an [`SgStatus`]; on failure [`sg_last_error`] describes what went wrong on
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use secgame::oracle::epsilon_nash_check_with;
use secgame::{validate_spec, BudgetDomain, Equilibrium, GameSpec, ModelError, SolveError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidSpec = 4,
    SolverFailed = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// A validated game instance.
pub struct SgGame {
    spec: GameSpec,
}

/// An equilibrium of the game it was solved from.
pub struct SgEquilibrium {
    eq: Equilibrium,
}

/// Best-response gains and the overall verdict of a verification.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SgVerification {
    pub passed: bool,
    pub eps_attacker: f64,
    pub eps_defender: f64,
    pub kkt_residual: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Fail(SgStatus, String);

impl From<SolveError> for Fail {
    fn from(e: SolveError) -> Self {
        let status = match e {
            SolveError::Model(ModelError::InvalidSpec(_)) => SgStatus::InvalidSpec,
            _ => SgStatus::SolverFailed,
        };
        Fail(status, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            SgStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside secgame");
            SgStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(SgStatus::NullPointer, format!("{what} is null")))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(SgStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread, or an empty string.
/// The pointer stays valid until the next call into this library.
#[no_mangle]
pub extern "C" fn sg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses and validates a game from a NUL-terminated JSON string.
///
/// # Safety
/// `json` must be null or a valid C string; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn sg_game_from_json(json: *const c_char, out: *mut *mut SgGame) -> SgStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = ptr::null_mut();
        if json.is_null() {
            return Err(Fail(SgStatus::NullPointer, "json is null".into()));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(SgStatus::InvalidUtf8, e.to_string()))?;
        let spec: GameSpec = serde_json::from_str(text).map_err(|e| Fail(SgStatus::ParseError, e.to_string()))?;
        let violations = validate_spec(&spec);
        if !violations.is_empty() {
            let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Fail(SgStatus::InvalidSpec, lines.join("; ")));
        }
        *out = Box::into_raw(Box::new(SgGame { spec }));
        Ok(())
    })
}

/// # Safety
/// `game` must be null or a handle from [`sg_game_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_game_free(game: *mut SgGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Number of targets, or 0 for a null handle.
///
/// # Safety
/// `game` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_game_num_targets(game: *const SgGame) -> usize {
    game.as_ref().map_or(0, |g| g.spec.n)
}

/// Copy of `game` with new budgets.
///
/// # Safety
/// `game` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn sg_game_with_budgets(
    game: *const SgGame,
    budget_attacker: f64,
    budget_defender: f64,
    out: *mut *mut SgGame,
) -> SgStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = ptr::null_mut();
        let g = deref(game, "game")?;
        let spec = g.spec.with_budgets(budget_attacker, budget_defender);
        let violations = validate_spec(&spec);
        if !violations.is_empty() {
            let lines: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Fail(SgStatus::InvalidSpec, lines.join("; ")));
        }
        *out = Box::into_raw(Box::new(SgGame { spec }));
        Ok(())
    })
}

/// Solves `game`. For a family of equilibria the representative member is returned.
///
/// # Safety
/// `game` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn sg_solve(game: *const SgGame, out: *mut *mut SgEquilibrium) -> SgStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = ptr::null_mut();
        let g = deref(game, "game")?;
        let eq = secgame::solve::solve(&g.spec)?;
        *out = Box::into_raw(Box::new(SgEquilibrium { eq }));
        Ok(())
    })
}

/// # Safety
/// `eq` must be null or a handle from [`sg_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_equilibrium_free(eq: *mut SgEquilibrium) {
    if !eq.is_null() {
        drop(Box::from_raw(eq));
    }
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Fail> {
    check_out(buf, "buf")?;
    if len < src.len() {
        return Err(Fail(
            SgStatus::BufferTooSmall,
            format!("need {} entries, got {len}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Writes the attacker's allocation into `buf`, which holds `len` doubles.
///
/// # Safety
/// `eq` must be null or a live handle; `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sg_equilibrium_attacker(eq: *const SgEquilibrium, buf: *mut f64, len: usize) -> SgStatus {
    guard(|| copy_out(&deref(eq, "eq")?.eq.alloc.x, buf, len))
}

/// Writes the defender's allocation into `buf`, which holds `len` doubles.
///
/// # Safety
/// `eq` must be null or a live handle; `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn sg_equilibrium_defender(eq: *const SgEquilibrium, buf: *mut f64, len: usize) -> SgStatus {
    guard(|| copy_out(&deref(eq, "eq")?.eq.alloc.y, buf, len))
}

/// Shadow prices of the attacker and defender budgets.
///
/// # Safety
/// `eq` must be null or a live handle; `lambda` and `rho` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn sg_equilibrium_duals(eq: *const SgEquilibrium, lambda: *mut f64, rho: *mut f64) -> SgStatus {
    guard(|| {
        check_out(lambda, "lambda")?;
        check_out(rho, "rho")?;
        let e = &deref(eq, "eq")?.eq;
        *lambda = e.lambda;
        *rho = e.rho;
        Ok(())
    })
}

/// # Safety
/// `eq` must be null or a live handle; both outputs must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn sg_equilibrium_utilities(
    eq: *const SgEquilibrium,
    attacker: *mut f64,
    defender: *mut f64,
) -> SgStatus {
    guard(|| {
        check_out(attacker, "attacker")?;
        check_out(defender, "defender")?;
        let e = &deref(eq, "eq")?.eq;
        *attacker = e.utility_attacker;
        *defender = e.utility_defender;
        Ok(())
    })
}

/// Budget domain as 1 to 4, or 0 for a null handle.
///
/// # Safety
/// `eq` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_equilibrium_domain(eq: *const SgEquilibrium) -> u32 {
    eq.as_ref().map_or(0, |e| match e.eq.budget_domain {
        BudgetDomain::D1 => 1,
        BudgetDomain::D2 => 2,
        BudgetDomain::D3 => 3,
        BudgetDomain::D4 => 4,
    })
}

/// The equilibrium as JSON. Release the string with [`sg_string_free`].
///
/// # Safety
/// `eq` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn sg_equilibrium_to_json(eq: *const SgEquilibrium, out: *mut *mut c_char) -> SgStatus {
    guard(|| {
        check_out(out, "out")?;
        *out = ptr::null_mut();
        let text =
            serde_json::to_string(&deref(eq, "eq")?.eq).map_err(|e| Fail(SgStatus::ParseError, e.to_string()))?;
        *out = CString::new(text)
            .map_err(|e| Fail(SgStatus::ParseError, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Checks `eq` against both players' best responses with relative
/// tolerance `tol`, plus feasibility, KKT and ordering invariants.
/// A failed check is reported through `out.passed`, not the status.
///
/// # Safety
/// `game` and `eq` must be null or live handles; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn sg_verify(
    game: *const SgGame,
    eq: *const SgEquilibrium,
    tol: f64,
    out: *mut SgVerification,
) -> SgStatus {
    guard(|| {
        check_out(out, "out")?;
        let g = deref(game, "game")?;
        let e = deref(eq, "eq")?;
        let report = epsilon_nash_check_with(&g.spec, &e.eq, tol)?;
        *out = SgVerification {
            passed: report.passed(),
            eps_attacker: report.eps_attacker,
            eps_defender: report.eps_defender,
            kkt_residual: report.kkt_max_residual,
        };
        Ok(())
    })
}
