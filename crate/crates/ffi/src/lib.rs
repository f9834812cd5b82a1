//! C ABI for the ontonav engine.
//!
//! An [`OntonavEngine`] is an opaque handle created by [`ontonav_engine_open`]
//! and released with [`ontonav_engine_free`]. Calls return an
//! [`OntonavStatus`]; on failure [`ontonav_last_error`] describes the error
//! for the calling thread. Strings handed out through `out` parameters are
//! UTF-8, NUL-terminated, and must be released with [`ontonav_string_free`].
//! A handle may be shared between threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ontonav::engine::{Engine, EngineConfig};
use ontonav::service::{ApiRequest, Service};
use ontonav::textproc::Language;
use ontonav::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OntonavStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    NotFound = 3,
    InvalidInput = 4,
    Conflict = 5,
    Internal = 6,
    Panic = 7,
}

/// Opaque engine handle.
pub struct OntonavEngine {
    service: Service,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: impl Into<Vec<u8>>) {
    let mut bytes = message.into();
    bytes.retain(|b| *b != 0);
    let c = CString::new(bytes).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> OntonavStatus {
    match e {
        Error::NotFound { .. } => OntonavStatus::NotFound,
        Error::Conflict(_) => OntonavStatus::Conflict,
        e if e.is_user_error() => OntonavStatus::InvalidInput,
        _ => OntonavStatus::Internal,
    }
}

struct Failure(OntonavStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), format!("{}: {e}", e.code()))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(OntonavStatus::Internal, e.to_string())
    }
}

/// Run `f`, converting errors and panics into a status and the thread's
/// last-error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> OntonavStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OntonavStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("panic: {message}"));
            OntonavStatus::Panic
        }
    }
}

/// # Safety
/// `p` is null or points to a NUL-terminated string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(OntonavStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(OntonavStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `p` is null or points to a NUL-terminated string.
unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

fn engine<'a>(handle: *const OntonavEngine) -> Result<&'a OntonavEngine, Failure> {
    // SAFETY: handles come from `ontonav_engine_open` and live until freed.
    unsafe { handle.as_ref() }.ok_or_else(|| Failure(OntonavStatus::NullArgument, "engine is null".into()))
}

fn out_string(out: *mut *mut c_char, value: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(OntonavStatus::NullArgument, "out pointer is null".into()));
    }
    let c = CString::new(value).map_err(|_| Failure(OntonavStatus::Internal, "result contains a NUL byte".into()))?;
    // SAFETY: checked non-null; the caller provides writable storage.
    unsafe { *out = c.into_raw() };
    Ok(())
}

fn language(lang: Option<&str>) -> Result<Language, Failure> {
    Ok(lang.map(str::parse).transpose()?.unwrap_or(Language::En))
}

/// Open an engine. `data_dir` may be null for an in-memory engine seeded
/// from the bundled fixtures; `providers` may be null for the default
/// provider config.
///
/// # Safety
/// String arguments are null or NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn ontonav_engine_open(
    data_dir: *const c_char,
    providers: *const c_char,
    out: *mut *mut OntonavEngine,
) -> OntonavStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(OntonavStatus::NullArgument, "out pointer is null".into()));
        }
        let config = EngineConfig {
            data_dir: optional_text(data_dir, "data_dir")?.map(Into::into),
            providers: optional_text(providers, "providers")?.map(Into::into),
            ..EngineConfig::default()
        };
        let engine = Engine::open(config)?;
        let handle = Box::new(OntonavEngine {
            service: Service::new(engine),
        });
        *out = Box::into_raw(handle);
        Ok(())
    })
}

/// Release an engine. Null is ignored.
///
/// # Safety
/// `engine` is null or a handle from `ontonav_engine_open` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ontonav_engine_free(engine: *mut OntonavEngine) {
    if !engine.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(engine))));
    }
}

/// Resolve a query (`lang` "en" or "fr", null for "en") to a JSON
/// resolution document. A miss is a success with `"outcome": "miss"`.
///
/// # Safety
/// See the module documentation.
#[no_mangle]
pub unsafe extern "C" fn ontonav_resolve(
    engine: *const OntonavEngine,
    query: *const c_char,
    lang: *const c_char,
    out_json: *mut *mut c_char,
) -> OntonavStatus {
    guard(|| {
        let e = self::engine(engine)?;
        let query = text(query, "query")?;
        let lang = language(optional_text(lang, "lang")?)?;
        let res = e.service.read(|en| en.resolve(query, lang))?;
        out_string(out_json, serde_json::to_string(&res)?)
    })
}

/// Search the corpus through the node the query resolves to; JSON result.
///
/// # Safety
/// See the module documentation.
#[no_mangle]
pub unsafe extern "C" fn ontonav_search(
    engine: *const OntonavEngine,
    query: *const c_char,
    lang: *const c_char,
    limit: usize,
    out_json: *mut *mut c_char,
) -> OntonavStatus {
    guard(|| {
        let e = self::engine(engine)?;
        let query = text(query, "query")?;
        let lang = language(optional_text(lang, "lang")?)?;
        let res = e.service.read(|en| en.search(query, lang, limit.max(1)))?;
        out_string(out_json, serde_json::to_string(&res)?)
    })
}

/// Meta-query URLs for a node as a JSON array of `{provider, terms, url}`.
///
/// # Safety
/// See the module documentation.
#[no_mangle]
pub unsafe extern "C" fn ontonav_node_metaqueries(
    engine: *const OntonavEngine,
    code: *const c_char,
    out_json: *mut *mut c_char,
) -> OntonavStatus {
    guard(|| {
        let e = self::engine(engine)?;
        let code = text(code, "code")?;
        let res = e.service.read(|en| en.node_metaqueries(code))?;
        out_string(out_json, serde_json::to_string(&res)?)
    })
}

/// Send one API request, e.g. method "GET" and target "/node/H.3". `body`
/// may be null when `body_len` is 0. The HTTP-style status goes to
/// `out_status` and the response body to `out_body`; API-level errors are
/// reported there, not through the return value.
///
/// # Safety
/// See the module documentation; `body` points to `body_len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn ontonav_dispatch(
    engine: *const OntonavEngine,
    method: *const c_char,
    target: *const c_char,
    content_type: *const c_char,
    body: *const u8,
    body_len: usize,
    out_status: *mut u16,
    out_body: *mut *mut c_char,
) -> OntonavStatus {
    guard(|| {
        let e = self::engine(engine)?;
        let mut req = ApiRequest::new(text(method, "method")?, text(target, "target")?);
        req.content_type = optional_text(content_type, "content_type")?.map(str::to_string);
        if body_len > 0 {
            if body.is_null() {
                return Err(Failure(OntonavStatus::NullArgument, "body is null".into()));
            }
            req.body = std::slice::from_raw_parts(body, body_len).to_vec();
        }
        if out_status.is_null() {
            return Err(Failure(OntonavStatus::NullArgument, "out_status is null".into()));
        }
        let res = e.service.dispatch(&req);
        out_string(out_body, res.body)?;
        *out_status = res.status;
        Ok(())
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` is null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ontonav_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ontonav_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn ontonav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
