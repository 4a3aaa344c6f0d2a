//! C ABI over `gwcert`.
//!
//! Every entry point returns a [`GwcStatus`]. Results come back through out
//! pointers; strings handed out by the library are freed with
//! [`gwc_string_free`], rings with [`gwc_ring_free`]. On failure the message
//! is kept per thread and can be fetched with [`gwc_last_error`].

use gwcert::certificate::{build_and_verify, select_prime, CertificateConfig};
use gwcert::cli::parse_generators;
use gwcert::fieldspec::FieldSpec;
use gwcert::numberfield::FieldElement;
use gwcert::residue::{t_order_prime, t_order_rational};
use gwcert::valuation::OwRing;
use gwcert::verify::{verify_all, VerifyConfig};
use gwcert::word::{GeneratingSet, Gw};
use gwcert::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GwcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Unsupported = 4,
    InvalidArgument = 5,
    CapExceeded = 6,
    Counterexample = 7,
    Internal = 8,
    Panic = 9,
}

/// Opaque handle: the ring O_w for one field and one w.
pub struct GwcRing {
    ow: OwRing,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<String>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> GwcStatus {
    match e {
        Error::Parse(_) => GwcStatus::Parse,
        Error::UnsupportedDegree(_) | Error::UnsupportedField(_) | Error::FactorLimit(_) => GwcStatus::Unsupported,
        Error::GroupTooLarge { .. } | Error::CapExceeded(_) | Error::BallTooLarge(_) | Error::BusemannCap(_) => GwcStatus::CapExceeded,
        Error::CounterexampleFound(_) | Error::NoConjugatorFound => GwcStatus::Counterexample,
        Error::Anomaly(_) => GwcStatus::Internal,
        _ => GwcStatus::InvalidArgument,
    }
}

// Runs `f`, turning errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (GwcStatus, String)>>(f: F) -> GwcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GwcStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside gwcert".into());
            GwcStatus::Panic
        }
    }
}

fn lib<T>(r: gwcert::Result<T>) -> Result<T, (GwcStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

unsafe fn opt_str<'a>(p: *const c_char) -> Result<Option<&'a str>, (GwcStatus, String)> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p).to_str().map(Some).map_err(|_| (GwcStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn req_str<'a>(p: *const c_char) -> Result<&'a str, (GwcStatus, String)> {
    opt_str(p)?.ok_or((GwcStatus::NullPointer, "required string is NULL".into()))
}

unsafe fn ring_ref<'a>(r: *const GwcRing) -> Result<&'a GwcRing, (GwcStatus, String)> {
    r.as_ref().ok_or((GwcStatus::NullPointer, "ring handle is NULL".into()))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), (GwcStatus, String)> {
    if out.is_null() {
        return Err((GwcStatus::NullPointer, "output pointer is NULL".into()));
    }
    out.write(v);
    Ok(())
}

fn to_c(s: String) -> Result<*mut c_char, (GwcStatus, String)> {
    CString::new(s).map(CString::into_raw).map_err(|_| (GwcStatus::Internal, "interior NUL in output".into()))
}

fn gens(ow: &OwRing, text: Option<&str>) -> gwcert::Result<GeneratingSet> {
    let gw = Gw::new(ow)?;
    match text {
        Some(t) => parse_generators(&gw, t),
        None => Ok(gw.standard_generators()),
    }
}

/// Builds O_w. `field_toml` is a field-spec document, or NULL for Q.
///
/// # Safety
/// String arguments must be NULL or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gwc_ring_new(field_toml: *const c_char, w: *const c_char, out: *mut *mut GwcRing) -> GwcStatus {
    guard(|| {
        let spec = match opt_str(field_toml)? {
            Some(t) => lib(FieldSpec::from_toml(t))?,
            None => FieldSpec::rationals(),
        };
        let (field, ring) = lib(spec.build())?;
        let w = lib(FieldElement::parse(&field, req_str(w)?))?;
        let ow = lib(OwRing::new(&ring, &w))?;
        put(out, Box::into_raw(Box::new(GwcRing { ow })))
    })
}

/// # Safety
/// `ring` must come from [`gwc_ring_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn gwc_ring_free(ring: *mut GwcRing) {
    if !ring.is_null() {
        drop(Box::from_raw(ring));
    }
}

/// Order of w in (O_w/q^s)^×.
///
/// # Safety
/// `ring` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gwc_t_order(ring: *const GwcRing, q: u64, s: u32, out: *mut u64) -> GwcStatus {
    guard(|| {
        let r = ring_ref(ring)?;
        put(out, lib(t_order_rational(&r.ow, q, s))?)
    })
}

/// Order of w in (O_w/𝔮^s)^× for the `prime_index`-th prime above q.
///
/// # Safety
/// `ring` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gwc_t_order_prime(ring: *const GwcRing, q: u64, prime_index: usize, s: u32, out: *mut u64) -> GwcStatus {
    guard(|| {
        let r = ring_ref(ring)?;
        let primes = lib(r.ow.ring().primes_above(q))?;
        let p = primes.get(prime_index).ok_or((GwcStatus::InvalidArgument, format!("no prime {prime_index} above {q}")))?;
        put(out, lib(t_order_prime(&r.ow, p, s))?)
    })
}

/// The prime q chosen for scale n and m₂.
///
/// # Safety
/// `ring` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn gwc_select_prime(ring: *const GwcRing, n: u32, m2: u64, out: *mut u64) -> GwcStatus {
    guard(|| {
        let r = ring_ref(ring)?;
        put(out, lib(select_prime(&r.ow, n, m2))?)
    })
}

/// Certificate JSON for scale n. `gens_text` uses the "x,z;x,z" format, NULL for the standard set.
/// Returns `Counterexample` (with the JSON still written) when any verdict fails.
///
/// # Safety
/// `ring` must be a live handle, `gens_text` NULL or NUL-terminated, `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn gwc_certificate_json(
    ring: *const GwcRing,
    n: u32,
    gens_text: *const c_char,
    cap_order: u64,
    seed: u64,
    out_json: *mut *mut c_char,
) -> GwcStatus {
    let mut found = false;
    let st = guard(|| {
        let r = ring_ref(ring)?;
        let s = lib(gens(&r.ow, opt_str(gens_text)?))?;
        let cfg = CertificateConfig { cap_order, seed, ..Default::default() };
        let cert = lib(build_and_verify(&r.ow, n, &s, &cfg))?;
        found = !cert.counterexamples().is_empty();
        put(out_json, to_c(serde_json::to_string(&cert).map_err(|e| (GwcStatus::Internal, e.to_string()))?)?)
    });
    if st == GwcStatus::Ok && found {
        set_error("counterexample in certificate".into());
        return GwcStatus::Counterexample;
    }
    st
}

/// Runs every verification suite; JSON report in `out_json`.
///
/// # Safety
/// As for [`gwc_certificate_json`].
#[no_mangle]
pub unsafe extern "C" fn gwc_verify_all_json(
    ring: *const GwcRing,
    n: u32,
    gens_text: *const c_char,
    samples: usize,
    seed: u64,
    out_json: *mut *mut c_char,
) -> GwcStatus {
    let mut failures = 0;
    let st = guard(|| {
        let r = ring_ref(ring)?;
        let s = lib(gens(&r.ow, opt_str(gens_text)?))?;
        let cfg = VerifyConfig { seed, samples, n, ..Default::default() };
        let rep = lib(verify_all(&r.ow, &s, &cfg))?;
        failures = rep.failures();
        put(out_json, to_c(serde_json::to_string(&rep).map_err(|e| (GwcStatus::Internal, e.to_string()))?)?)
    });
    if st == GwcStatus::Ok && failures > 0 {
        set_error(format!("{failures} failed checks"));
        return GwcStatus::Counterexample;
    }
    st
}

/// The last error message on this thread, or NULL. Free with [`gwc_string_free`].
#[no_mangle]
pub extern "C" fn gwc_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        Some(m) => CString::new(m.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw),
        None => ptr::null_mut(),
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn gwc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
