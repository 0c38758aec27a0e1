//! C ABI for `swing-lattice`.
//!
//! Handles are opaque pointers owned by the caller and released with the
//! matching `*_free` function. Functions return an [`SlStatus`]; on failure
//! [`sl_last_error`] describes what went wrong on the calling thread.
//! Strings handed out by the library are NUL-terminated UTF-8 and must be
//! released with [`sl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use swing_lattice::congruence;
use swing_lattice::diagram::{Diagram, PrimeInterval};
use swing_lattice::game::{EffectRecord, GameConfig, GameEvent, GameState};
use swing_lattice::swing::{self, SequenceVariant};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidJson = 3,
    InvalidDiagram = 4,
    InvalidArgument = 5,
    GameError = 6,
    Panic = 7,
}

/// A validated lattice diagram.
pub struct SlDiagram(Diagram);

/// A running game.
pub struct SlGame(GameState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(SlStatus, String);

impl Fail {
    fn new(status: SlStatus, msg: impl std::fmt::Display) -> Self {
        Fail(status, msg.to_string())
    }
}

/// Runs `f`, turning errors and panics into a status plus a stored message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            SlStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SlStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail::new(SlStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Fail::new(SlStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail::new(SlStatus::NullPointer, format!("{what} is null")))
}

unsafe fn handle_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut()
        .ok_or_else(|| Fail::new(SlStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::new(SlStatus::NullPointer, "output pointer is null"));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|e| Fail::new(SlStatus::InvalidArgument, e))?;
    put(out, c.into_raw())
}

fn edge(d: &Diagram, lower: usize, upper: usize) -> Result<PrimeInterval, Fail> {
    d.edge(lower, upper).map_err(|e| Fail::new(SlStatus::InvalidArgument, e))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn sl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `{"size": n, "upper_covers": [[...], ...]}` into a diagram.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_diagram_from_json(json: *const c_char, out: *mut *mut SlDiagram) -> SlStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let d = Diagram::from_json_str(text).map_err(|e| {
            let status = if serde_json::from_str::<serde_json::Value>(text).is_err() {
                SlStatus::InvalidJson
            } else {
                SlStatus::InvalidDiagram
            };
            Fail::new(status, e)
        })?;
        put(out, Box::into_raw(Box::new(SlDiagram(d))))
    })
}

/// # Safety
/// `d` must come from [`sl_diagram_from_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_diagram_free(d: *mut SlDiagram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live diagram handle.
#[no_mangle]
pub unsafe extern "C" fn sl_diagram_size(d: *const SlDiagram, out: *mut usize) -> SlStatus {
    guard(|| put(out, handle(d, "diagram")?.0.size()))
}

/// # Safety
/// `d` must be a live diagram handle.
#[no_mangle]
pub unsafe extern "C" fn sl_diagram_edge_count(d: *const SlDiagram, out: *mut usize) -> SlStatus {
    guard(|| put(out, handle(d, "diagram")?.0.edge_count()))
}

/// The diagram as JSON, with layout coordinates.
///
/// # Safety
/// `d` must be a live diagram handle; free the result with [`sl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sl_diagram_to_json(d: *const SlDiagram, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        let d = &handle(d, "diagram")?.0;
        put_string(out, serde_json::to_string(&d.layout()).expect("diagram serializes"))
    })
}

/// `con([lower, upper])` as `{"blocks": [[...], ...]}`.
///
/// # Safety
/// `d` must be a live diagram handle; free the result with [`sl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sl_principal_congruence(
    d: *const SlDiagram,
    lower: usize,
    upper: usize,
    out: *mut *mut c_char,
) -> SlStatus {
    guard(|| {
        let d = &handle(d, "diagram")?.0;
        let p = edge(d, lower, upper)?;
        let con = congruence::principal_congruence(d, p).map_err(|e| Fail::new(SlStatus::InvalidArgument, e))?;
        put_string(out, serde_json::to_string(&con).expect("partition serializes"))
    })
}

/// Edges reachable from `[lower, upper]` as a JSON array of pairs.
/// `variant` is one of `SL`, `SSL`, `SS`, `UpwardCP`.
///
/// # Safety
/// `d` must be a live diagram handle, `variant` a NUL-terminated string;
/// free the result with [`sl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sl_reachable(
    d: *const SlDiagram,
    lower: usize,
    upper: usize,
    variant: *const c_char,
    out: *mut *mut c_char,
) -> SlStatus {
    guard(|| {
        let d = &handle(d, "diagram")?.0;
        let variant: SequenceVariant = str_arg(variant, "variant")?
            .parse()
            .map_err(|e| Fail::new(SlStatus::InvalidArgument, e))?;
        let p = edge(d, lower, upper)?;
        let edges = swing::reachable(d, p, variant).map_err(|e| Fail::new(SlStatus::InvalidDiagram, e))?;
        put_string(out, serde_json::to_string(&edges).expect("edges serialize"))
    })
}

/// Checks the Swing Lemma on every ordered edge pair. Writes the number of
/// discrepancies to `discrepancies` and, if `report` is not NULL, the full
/// report as JSON.
///
/// # Safety
/// `d` must be a live diagram handle; free the report with [`sl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sl_verify_swing_lemma(
    d: *const SlDiagram,
    discrepancies: *mut usize,
    report: *mut *mut c_char,
) -> SlStatus {
    guard(|| {
        let d = &handle(d, "diagram")?.0;
        let r = swing::verify_swing_lemma(d).map_err(|e| Fail::new(SlStatus::InvalidDiagram, e))?;
        put(discrepancies, r.discrepancies.len())?;
        if !report.is_null() {
            put_string(report, serde_json::to_string(&r).expect("report serializes"))?;
        }
        Ok(())
    })
}

/// Starts a game. `config_json` may be NULL for the defaults; missing
/// fields take their default values.
///
/// # Safety
/// `config_json` must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_game_new(config_json: *const c_char, out: *mut *mut SlGame) -> SlStatus {
    guard(|| {
        let config = if config_json.is_null() {
            GameConfig::default()
        } else {
            serde_json::from_str(str_arg(config_json, "config")?).map_err(|e| Fail::new(SlStatus::InvalidJson, e))?
        };
        let state = GameState::new(config).map_err(|e| Fail::new(SlStatus::GameError, e))?;
        put(out, Box::into_raw(Box::new(SlGame(state))))
    })
}

/// # Safety
/// `g` must come from [`sl_game_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sl_game_free(g: *mut SlGame) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Applies one event (`{"type":"tick","ms":100}`, `{"type":"click_cell",...}`
/// or `{"type":"choose_start_edge",...}`) and writes the resulting effects
/// as a JSON array.
///
/// # Safety
/// `g` must be a live game handle; free the result with [`sl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sl_game_handle_event(g: *mut SlGame, event_json: *const c_char, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        let g = &mut handle_mut(g, "game")?.0;
        let event: GameEvent =
            serde_json::from_str(str_arg(event_json, "event")?).map_err(|e| Fail::new(SlStatus::InvalidJson, e))?;
        let records: Vec<EffectRecord> = g
            .handle_event(&event)
            .into_iter()
            .map(|effect| EffectRecord {
                move_count: g.move_count(),
                effect,
            })
            .collect();
        put_string(out, serde_json::to_string(&records).expect("effects serialize"))
    })
}

/// The current game snapshot as JSON.
///
/// # Safety
/// `g` must be a live game handle; free the result with [`sl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sl_game_snapshot(g: *const SlGame, out: *mut *mut c_char) -> SlStatus {
    guard(|| {
        let g = &handle(g, "game")?.0;
        put_string(out, serde_json::to_string(&g.snapshot()).expect("snapshot serializes"))
    })
}

/// Lives left, or 0 once the game is over.
///
/// # Safety
/// `g` must be a live game handle.
#[no_mangle]
pub unsafe extern "C" fn sl_game_lives(g: *const SlGame, out: *mut u32) -> SlStatus {
    guard(|| put(out, handle(g, "game")?.0.lives()))
}
