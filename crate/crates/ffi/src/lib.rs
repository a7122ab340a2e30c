//! C ABI for `hopex`.
//!
//! Every fallible call returns a [`HopexStatus`]; on failure the message is
//! kept per thread and read with [`hopex_last_error_message`]. Objects cross
//! the boundary as opaque handles, each with its own `_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hopex::cli::{execute, parse_config, Artifact};
use hopex::error::Error;
use hopex::exponents::{eta, eta_oracle_many, lossless_bound, wyner_ziv_rmin, DistortionSpec};
use hopex::probcore::{mutual_information, Alphabet, JointPmf};
use hopex::schemes::HopNetworkSpec;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HopexStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Probability = 3,
    Exponents = 4,
    Schemes = 5,
    Simulator = 6,
    Diagnostics = 7,
    Config = 8,
    Io = 9,
    Panic = 10,
    BufferTooSmall = 11,
}

/// Pmf over a product of finite alphabets.
pub struct HopexPmf {
    inner: JointPmf,
}

/// K-hop network: source pmf, rates and type-I targets.
pub struct HopexNetwork {
    inner: HopNetworkSpec,
}

/// Artifacts of one executed run config.
pub struct HopexRun {
    artifacts: Vec<(CString, CString)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HopexStatus {
    match e {
        Error::Prob(_) => HopexStatus::Probability,
        Error::Exponents(_) => HopexStatus::Exponents,
        Error::Schemes(_) => HopexStatus::Schemes,
        Error::Simulator(_) => HopexStatus::Simulator,
        Error::Diagnostics(_) => HopexStatus::Diagnostics,
        Error::Config(_) => HopexStatus::Config,
        Error::Io(_) => HopexStatus::Io,
    }
}

struct Failure(HopexStatus, String);

impl<E: Into<Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let e = e.into();
        Failure(status_of(&e), e.to_string())
    }
}

fn invalid(msg: &str) -> Failure {
    Failure(HopexStatus::InvalidArgument, msg.to_string())
}

fn null(what: &str) -> Failure {
    Failure(HopexStatus::NullPointer, format!("`{what}` is null"))
}

/// Run `f`, turning errors and panics into a status plus a stored message.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> HopexStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            HopexStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".to_string());
            set_error(format!("panic: {msg}"));
            HopexStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Copy `s` with its terminating nul into `buf` when it fits. `needed`
/// always receives the full size including the nul.
unsafe fn copy_out(s: &CStr, buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), Failure> {
    let bytes = s.to_bytes_with_nul();
    if let Some(n) = needed.as_mut() {
        *n = bytes.len();
    }
    if buf.is_null() && cap == 0 {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    if cap < bytes.len() {
        return Err(Failure(HopexStatus::BufferTooSmall, format!("buffer holds {cap} bytes, {} needed", bytes.len())));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
    Ok(())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn hopex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the message of the last failed call on this thread into `buf`.
/// Returns the number of bytes the message needs (with the nul), or 0 if
/// the last call succeeded. Nothing is written when `cap` is too small.
#[no_mangle]
pub unsafe extern "C" fn hopex_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && cap >= bytes.len() {
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
            }
            bytes.len()
        }
    })
}

/// Pmf with `rank` axes of sizes `shape`, symbols labelled `0, 1, ...` and
/// axes named `Y0, Y1, ...`; `probs` is row-major with the last axis
/// fastest.
#[no_mangle]
pub unsafe extern "C" fn hopex_pmf_new(
    shape: *const usize,
    rank: usize,
    probs: *const f64,
    len: usize,
    out_pmf: *mut *mut HopexPmf,
) -> HopexStatus {
    guard(|| {
        let out_pmf = out(out_pmf, "out_pmf")?;
        let shape = slice(shape, rank, "shape")?;
        if shape.is_empty() {
            return Err(invalid("rank must be at least 1"));
        }
        let axes = shape
            .iter()
            .enumerate()
            .map(|(i, &s)| Alphabet::indexed(format!("Y{i}"), s))
            .collect::<Result<Vec<_>, _>>()?;
        let inner = JointPmf::new(axes, slice(probs, len, "probs")?.to_vec())?;
        *out_pmf = Box::into_raw(Box::new(HopexPmf { inner }));
        Ok(())
    })
}

/// Doubly symmetric binary source with crossover `p`.
#[no_mangle]
pub unsafe extern "C" fn hopex_pmf_dsbs(p: f64, out_pmf: *mut *mut HopexPmf) -> HopexStatus {
    guard(|| {
        let out_pmf = out(out_pmf, "out_pmf")?;
        let inner = JointPmf::dsbs(p)?;
        *out_pmf = Box::into_raw(Box::new(HopexPmf { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hopex_pmf_free(pmf: *mut HopexPmf) {
    if !pmf.is_null() {
        drop(Box::from_raw(pmf));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hopex_pmf_rank(pmf: *const HopexPmf, out_rank: *mut usize) -> HopexStatus {
    guard(|| {
        *out(out_rank, "out_rank")? = handle(pmf, "pmf")?.inner.rank();
        Ok(())
    })
}

/// `I(Y_a; Y_b)` in bits for two distinct axes.
#[no_mangle]
pub unsafe extern "C" fn hopex_mutual_information(
    pmf: *const HopexPmf,
    axis_a: usize,
    axis_b: usize,
    out_bits: *mut f64,
) -> HopexStatus {
    guard(|| {
        let o = out(out_bits, "out_bits")?;
        *o = mutual_information(&handle(pmf, "pmf")?.inner, &[axis_a], &[axis_b])?;
        Ok(())
    })
}

/// `eta(R)` of a two-axis pmf `(Y_{l-1}, Y_l)`.
#[no_mangle]
pub unsafe extern "C" fn hopex_eta(pair: *const HopexPmf, rate: f64, aux_card: usize, out_bits: *mut f64) -> HopexStatus {
    guard(|| {
        let o = out(out_bits, "out_bits")?;
        *o = eta(&handle(pair, "pair")?.inner, rate, aux_card)?.value;
        Ok(())
    })
}

/// Grid-search reference for [`hopex_eta`] on small alphabets.
#[no_mangle]
pub unsafe extern "C" fn hopex_eta_oracle(
    pair: *const HopexPmf,
    rate: f64,
    grid_steps: usize,
    aux_card: usize,
    out_bits: *mut f64,
) -> HopexStatus {
    guard(|| {
        let o = out(out_bits, "out_bits")?;
        *o = eta_oracle_many(&handle(pair, "pair")?.inner, &[rate], grid_steps, aux_card)?[0];
        Ok(())
    })
}

/// `H(X|Y)` of a two-axis pmf `(X, Y)`.
#[no_mangle]
pub unsafe extern "C" fn hopex_lossless_bound(pair: *const HopexPmf, out_bits: *mut f64) -> HopexStatus {
    guard(|| {
        let o = out(out_bits, "out_bits")?;
        *o = lossless_bound(&handle(pair, "pair")?.inner)?;
        Ok(())
    })
}

/// Wyner-Ziv rate of `(X, Y)` under Hamming distortion at most `d`.
#[no_mangle]
pub unsafe extern "C" fn hopex_wyner_ziv_hamming(
    pair: *const HopexPmf,
    d: f64,
    s_card: usize,
    out_bits: *mut f64,
) -> HopexStatus {
    guard(|| {
        let o = out(out_bits, "out_bits")?;
        let p = &handle(pair, "pair")?.inner;
        let dist = DistortionSpec::hamming(p.shape()[0], d)?;
        *o = wyner_ziv_rmin(p, &dist, s_card)?.rate;
        Ok(())
    })
}

/// Network over the axes of `pmf` with `hops = rank - 1` rates and targets.
#[no_mangle]
pub unsafe extern "C" fn hopex_network_new(
    pmf: *const HopexPmf,
    rates: *const f64,
    epsilons: *const f64,
    hops: usize,
    out_network: *mut *mut HopexNetwork,
) -> HopexStatus {
    guard(|| {
        let out_network = out(out_network, "out_network")?;
        let p = handle(pmf, "pmf")?.inner.clone();
        let rates = slice(rates, hops, "rates")?.to_vec();
        let epsilons = slice(epsilons, hops, "epsilons")?.to_vec();
        let inner = HopNetworkSpec::new(p, rates, epsilons)?;
        *out_network = Box::into_raw(Box::new(HopexNetwork { inner }));
        Ok(())
    })
}

/// Markov chain of binary symmetric steps with uniform `Y0`.
#[no_mangle]
pub unsafe extern "C" fn hopex_network_dsbs_chain(
    crossovers: *const f64,
    rates: *const f64,
    epsilons: *const f64,
    hops: usize,
    out_network: *mut *mut HopexNetwork,
) -> HopexStatus {
    guard(|| {
        let out_network = out(out_network, "out_network")?;
        let c = slice(crossovers, hops, "crossovers")?;
        let rates = slice(rates, hops, "rates")?.to_vec();
        let epsilons = slice(epsilons, hops, "epsilons")?.to_vec();
        let inner = HopNetworkSpec::dsbs_chain(c, rates, epsilons)?;
        *out_network = Box::into_raw(Box::new(HopexNetwork { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hopex_network_free(network: *mut HopexNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hopex_network_hops(network: *const HopexNetwork, out_hops: *mut usize) -> HopexStatus {
    guard(|| {
        *out(out_hops, "out_hops")? = handle(network, "network")?.inner.hops();
        Ok(())
    })
}

/// New handle on the pair `(Y_{hop-1}, Y_hop)` of a network.
#[no_mangle]
pub unsafe extern "C" fn hopex_network_hop_pair(
    network: *const HopexNetwork,
    hop: usize,
    out_pmf: *mut *mut HopexPmf,
) -> HopexStatus {
    guard(|| {
        let out_pmf = out(out_pmf, "out_pmf")?;
        let inner = handle(network, "network")?.inner.hop_pair(hop)?;
        *out_pmf = Box::into_raw(Box::new(HopexPmf { inner }));
        Ok(())
    })
}

/// Parse and execute a JSON run config (the format `hopex` reads) without
/// writing files. Relative paths resolve against the working directory.
#[no_mangle]
pub unsafe extern "C" fn hopex_run_config(config_json: *const c_char, out_run: *mut *mut HopexRun) -> HopexStatus {
    guard(|| {
        let out_run = out(out_run, "out_run")?;
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        let text = CStr::from_ptr(config_json).to_str().map_err(|_| invalid("config is not UTF-8"))?;
        let cfg = parse_config(text).map_err(Error::Config)?;
        let artifacts = execute(&cfg)?
            .into_iter()
            .map(|Artifact { name, contents }| {
                let c = |s: String| CString::new(s).map_err(|_| invalid("artifact contains a nul byte"));
                Ok((c(name)?, c(contents)?))
            })
            .collect::<Result<Vec<_>, Failure>>()?;
        *out_run = Box::into_raw(Box::new(HopexRun { artifacts }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn hopex_run_free(run: *mut HopexRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

#[no_mangle]
pub unsafe extern "C" fn hopex_run_artifact_count(run: *const HopexRun, out_count: *mut usize) -> HopexStatus {
    guard(|| {
        *out(out_count, "out_count")? = handle(run, "run")?.artifacts.len();
        Ok(())
    })
}

unsafe fn artifact<'a>(run: *const HopexRun, index: usize) -> Result<&'a (CString, CString), Failure> {
    let run = handle(run, "run")?;
    run.artifacts
        .get(index)
        .ok_or_else(|| invalid(&format!("artifact {index} out of range ({} available)", run.artifacts.len())))
}

/// File name of artifact `index`. Pass a null `buf` with `cap = 0` to
/// query the size through `needed`.
#[no_mangle]
pub unsafe extern "C" fn hopex_run_artifact_name(
    run: *const HopexRun,
    index: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> HopexStatus {
    guard(|| copy_out(&artifact(run, index)?.0, buf, cap, needed))
}

/// Contents of artifact `index`, same buffer protocol as the name.
#[no_mangle]
pub unsafe extern "C" fn hopex_run_artifact_contents(
    run: *const HopexRun,
    index: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> HopexStatus {
    guard(|| copy_out(&artifact(run, index)?.1, buf, cap, needed))
}
