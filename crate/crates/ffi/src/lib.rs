//! C ABI over `scpdp-core`.
//!
//! Objects are opaque handles released with their `_free` function. Every
//! call returns a [`ScpdpStatus`]; on failure `scpdp_last_error` describes
//! what went wrong on the calling thread. Strings handed out by the library
//! are released with `scpdp_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use scpdp_core::faultsim::{
    exhaustive_single_fault, run_campaign, CampaignConfig, CoverageReport, FaultMode, InputPolicy,
    Polarity, ReportMode,
};
use scpdp_core::netlist::{expand_dual_rail, parse_netlist, simulate};
use scpdp_core::sbox::{build_sbox_netlist, CompositeFieldParams};
use scpdp_core::{eval_gate, DualRailNetlist, GateKind, LocalFaultSite, RailPair};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScpdpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Campaign = 4,
    Panic = 5,
}

/// Compiled netlist.
pub struct ScpdpNetlist {
    dual: DualRailNetlist,
}

/// Coverage report of a campaign.
pub struct ScpdpReport {
    report: CoverageReport,
}

/// Campaign settings. Fault sizes run from `min_size` to `max_size`
/// inclusive; `trials` patterns are spread evenly over them.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ScpdpCampaignConfig {
    /// 0: stuck-at-0, 1: stuck-at-1.
    pub polarity: u32,
    /// 0: random, 1: burst.
    pub mode: u32,
    pub min_size: u32,
    pub max_size: u32,
    pub trials: u64,
    pub seed: u64,
    /// Nonzero applies each pattern to every input vector.
    pub exhaustive_inputs: u8,
    /// 0 uses all cores.
    pub workers: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScpdpStratum {
    pub polarity: u32,
    /// 0: random, 1: burst, 2: exhaustive single fault.
    pub mode: u32,
    pub fault_size: u32,
    pub trials: u64,
    pub masked: u64,
    pub detected: u64,
    pub sdc: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct ScpdpFault {
    /// Index into the netlist's fault-site list.
    pub site: usize,
    pub stuck: u8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = s);
}

fn guard(f: impl FnOnce() -> Result<(), (ScpdpStatus, String)>) -> ScpdpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ScpdpStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ScpdpStatus::Panic
        }
    }
}

fn null(what: &str) -> (ScpdpStatus, String) {
    (ScpdpStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> (ScpdpStatus, String) {
    (ScpdpStatus::InvalidArgument, msg.into())
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (ScpdpStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, v: T, what: &str) -> Result<(), (ScpdpStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s)
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Library version, static storage.
#[no_mangle]
pub extern "C" fn scpdp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn scpdp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn scpdp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse netlist text (NUL-terminated) and compile it.
///
/// # Safety
/// `text` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scpdp_netlist_parse(
    text: *const c_char,
    out: *mut *mut ScpdpNetlist,
) -> ScpdpStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| invalid(format!("text is not UTF-8: {e}")))?;
        let n = parse_netlist(text).map_err(|e| (ScpdpStatus::Parse, e.to_string()))?;
        let h = Box::new(ScpdpNetlist {
            dual: expand_dual_rail(&n),
        });
        put(out, Box::into_raw(h), "out")
    })
}

/// The built-in composite-field AES S-box.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scpdp_netlist_sbox(out: *mut *mut ScpdpNetlist) -> ScpdpStatus {
    guard(|| {
        let n = build_sbox_netlist(&CompositeFieldParams::standard())
            .map_err(|e| invalid(e.to_string()))?;
        put(
            out,
            Box::into_raw(Box::new(ScpdpNetlist {
                dual: expand_dual_rail(&n),
            })),
            "out",
        )
    })
}

/// # Safety
/// `n` must come from this library or be null, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn scpdp_netlist_free(n: *mut ScpdpNetlist) {
    if !n.is_null() {
        drop(Box::from_raw(n));
    }
}

/// Primary inputs, primary outputs, dual-rail gates and fault sites. Any
/// output pointer may be null.
///
/// # Safety
/// `n` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn scpdp_netlist_counts(
    n: *const ScpdpNetlist,
    inputs: *mut usize,
    outputs: *mut usize,
    gates: *mut usize,
    sites: *mut usize,
) -> ScpdpStatus {
    guard(|| {
        let d = &handle(n, "netlist")?.dual;
        for (p, v) in [
            (inputs, d.input_count()),
            (outputs, d.output_count()),
            (gates, d.gates().len()),
            (sites, d.site_count()),
        ] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Name of fault site `index`; free the string with `scpdp_string_free`.
///
/// # Safety
/// `n` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scpdp_netlist_site_name(
    n: *const ScpdpNetlist,
    index: usize,
    out: *mut *mut c_char,
) -> ScpdpStatus {
    guard(|| {
        let d = &handle(n, "netlist")?.dual;
        let site = d.fault_sites().get(index).ok_or_else(|| {
            invalid(format!(
                "site {index} out of range (S = {})",
                d.site_count()
            ))
        })?;
        put(out, owned_string(d.site_name(site)), "out")
    })
}

/// Evaluate one input vector. `inputs` holds one byte (0 or 1) per primary
/// input; `rails` receives `hi, lo` for each output, so it must hold twice
/// the output count.
///
/// # Safety
/// Array pointers must be valid for the given lengths.
#[no_mangle]
pub unsafe extern "C" fn scpdp_netlist_simulate(
    n: *const ScpdpNetlist,
    inputs: *const u8,
    n_inputs: usize,
    faults: *const ScpdpFault,
    n_faults: usize,
    rails: *mut u8,
    rails_len: usize,
) -> ScpdpStatus {
    guard(|| {
        let d = &handle(n, "netlist")?.dual;
        if n_inputs != d.input_count() {
            return Err(invalid(format!(
                "expected {} inputs, got {n_inputs}",
                d.input_count()
            )));
        }
        if rails_len < 2 * d.output_count() {
            return Err(invalid(format!(
                "rails buffer needs {} bytes",
                2 * d.output_count()
            )));
        }
        if (inputs.is_null() && n_inputs > 0)
            || (faults.is_null() && n_faults > 0)
            || rails.is_null()
        {
            return Err(null("array"));
        }
        let ins: Vec<bool> = if n_inputs == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(inputs, n_inputs)
                .iter()
                .map(|&b| b != 0)
                .collect()
        };
        let fs = if n_faults == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(faults, n_faults)
        };
        let mut list = Vec::with_capacity(fs.len());
        for f in fs {
            let site = *d
                .fault_sites()
                .get(f.site)
                .ok_or_else(|| invalid(format!("fault site {} out of range", f.site)))?;
            list.push((site, f.stuck != 0));
        }
        let out = simulate(d, &ins, &list);
        let dst = std::slice::from_raw_parts_mut(rails, rails_len);
        for (i, p) in out.iter().enumerate() {
            dst[2 * i] = p.hi as u8;
            dst[2 * i + 1] = p.lo as u8;
        }
        Ok(())
    })
}

/// One gate on rail values. `kind` is 0 and, 1 or, 2 xor. `fault_site` is a
/// local site index 0..16 or -1 for none.
///
/// # Safety
/// `out_hi` and `out_lo` must be writable.
#[no_mangle]
pub unsafe extern "C" fn scpdp_eval_gate(
    kind: u32,
    a_hi: u8,
    a_lo: u8,
    b_hi: u8,
    b_lo: u8,
    fault_site: i32,
    stuck: u8,
    out_hi: *mut u8,
    out_lo: *mut u8,
) -> ScpdpStatus {
    guard(|| {
        let kind = *GateKind::ALL
            .get(kind as usize)
            .ok_or_else(|| invalid(format!("unknown gate kind {kind}")))?;
        let faults: Vec<(LocalFaultSite, bool)> = if fault_site < 0 {
            Vec::new()
        } else {
            let s = LocalFaultSite::from_index(fault_site as usize)
                .ok_or_else(|| invalid(format!("local site {fault_site} out of range")))?;
            vec![(s, stuck != 0)]
        };
        let o = eval_gate(
            kind,
            RailPair::new(a_hi != 0, a_lo != 0),
            RailPair::new(b_hi != 0, b_lo != 0),
            &faults,
        );
        put(out_hi, o.hi as u8, "out_hi")?;
        put(out_lo, o.lo as u8, "out_lo")
    })
}

/// # Safety
/// `n` must be a live handle, `cfg` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scpdp_campaign_run(
    n: *const ScpdpNetlist,
    cfg: *const ScpdpCampaignConfig,
    out: *mut *mut ScpdpReport,
) -> ScpdpStatus {
    guard(|| {
        let d = &handle(n, "netlist")?.dual;
        let c = *handle(cfg, "config")?;
        let polarity = match c.polarity {
            0 => Polarity::Sa0,
            1 => Polarity::Sa1,
            p => return Err(invalid(format!("polarity must be 0 or 1, got {p}"))),
        };
        let mode = match c.mode {
            0 => FaultMode::Random,
            1 => FaultMode::Burst,
            m => return Err(invalid(format!("mode must be 0 or 1, got {m}"))),
        };
        if c.min_size > c.max_size {
            return Err(invalid("min_size > max_size"));
        }
        let cfg = CampaignConfig {
            polarity,
            mode,
            sizes: (c.min_size as usize..=c.max_size as usize).collect(),
            trials: c.trials,
            seed: c.seed,
            inputs: if c.exhaustive_inputs != 0 {
                InputPolicy::Exhaustive
            } else {
                InputPolicy::Random
            },
            workers: c.workers as usize,
            record_trials: false,
        };
        let r = run_campaign(d, &cfg).map_err(|e| (ScpdpStatus::Campaign, e.to_string()))?;
        put(
            out,
            Box::into_raw(Box::new(ScpdpReport { report: r.report })),
            "out",
        )
    })
}

/// Every site at both polarities on every input vector (or on
/// `vector_budget` seeded vectors for wide netlists).
///
/// # Safety
/// `n` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scpdp_single_fault_run(
    n: *const ScpdpNetlist,
    vector_budget: u64,
    seed: u64,
    workers: u32,
    out: *mut *mut ScpdpReport,
) -> ScpdpStatus {
    guard(|| {
        let d = &handle(n, "netlist")?.dual;
        let r = exhaustive_single_fault(d, vector_budget, seed, workers as usize)
            .map_err(|e| (ScpdpStatus::Campaign, e.to_string()))?;
        put(
            out,
            Box::into_raw(Box::new(ScpdpReport { report: r.report })),
            "out",
        )
    })
}

/// # Safety
/// `r` must come from this library or be null, and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn scpdp_report_free(r: *mut ScpdpReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Number of strata, 0 for a null handle.
///
/// # Safety
/// `r` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn scpdp_report_strata_count(r: *const ScpdpReport) -> usize {
    r.as_ref().map_or(0, |r| r.report.strata.len())
}

/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scpdp_report_stratum(
    r: *const ScpdpReport,
    index: usize,
    out: *mut ScpdpStratum,
) -> ScpdpStatus {
    guard(|| {
        let r = &handle(r, "report")?.report;
        let s = r
            .strata
            .get(index)
            .ok_or_else(|| invalid(format!("stratum {index} out of range")))?;
        let v = ScpdpStratum {
            polarity: s.polarity as u32,
            mode: match s.mode {
                ReportMode::Random => 0,
                ReportMode::Burst => 1,
                ReportMode::Exhaustive => 2,
            },
            fault_size: s.fault_size as u32,
            trials: s.trials,
            masked: s.masked,
            detected: s.detected,
            sdc: s.sdc,
        };
        put(out, v, "out")
    })
}

/// Aggregate fault coverage in [0, 1], or -1 for a null handle.
///
/// # Safety
/// `r` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn scpdp_report_fc(r: *const ScpdpReport) -> f64 {
    r.as_ref().map_or(-1.0, |r| r.report.fc())
}

/// Summary CSV; free with `scpdp_string_free`.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scpdp_report_csv(
    r: *const ScpdpReport,
    out: *mut *mut c_char,
) -> ScpdpStatus {
    guard(|| {
        let r = &handle(r, "report")?.report;
        put(out, owned_string(r.to_csv()), "out")
    })
}

/// JSON report; free with `scpdp_string_free`.
///
/// # Safety
/// `r` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn scpdp_report_json(
    r: *const ScpdpReport,
    out: *mut *mut c_char,
) -> ScpdpStatus {
    guard(|| {
        let r = &handle(r, "report")?.report;
        put(out, owned_string(r.to_json()), "out")
    })
}
