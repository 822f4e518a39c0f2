//! C ABI for the placement engine: opaque handles, integer status codes,
//! and a thread-local last-error message. The header is generated into
//! `include/picplace.h` at build time.

use picplace::benchgen::{gen_butterfly, gen_clements, ButterflySpec, ClementsSpec, SizeClass};
use picplace::geom::Point;
use picplace::legalize::{legalize, verify_legal, LegalizeStatus};
use picplace::metrics::{evaluate, LossModel};
use picplace::netlist::{parse_design, write_placement, Design, PlacementMeta};
use picplace::placer::{full_positions, run_global, RunConfig, RunStatus};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

/// Result codes returned by fallible calls.
/// cbindgen:prefix-with-name
#[repr(C)]
#[derive(PartialEq, Eq, Clone, Copy, Debug)]
pub enum PpStatus {
    Ok = 0,
    InvalidArgument = 1,
    ParseError = 2,
    Diverged = 3,
    LegalizeFailed = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

/// Opaque parsed design.
pub struct PpDesign {
    inner: Design,
}

/// Opaque placement result: one position per component.
pub struct PpPlacement {
    positions: Vec<Point>,
    status: PpStatus,
    iterations: usize,
    overflow: f64,
    seed: u64,
    legalized: bool,
}

/// Tunable subset of the run configuration.
#[repr(C)]
pub struct PpRunOptions {
    pub seed: u64,
    pub iterations: usize,
    pub overflow_stop: f64,
    pub target_density: f64,
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call.
#[no_mangle]
pub extern "C" fn pp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Fill `opts` with the engine defaults. Returns false on null input.
///
/// # Safety
/// `opts` must be null or point to writable storage for a PpRunOptions.
#[no_mangle]
pub unsafe extern "C" fn pp_run_options_default(opts: *mut PpRunOptions) -> bool {
    if opts.is_null() {
        set_error("null options pointer");
        return false;
    }
    let cfg = RunConfig::default();
    unsafe {
        (*opts).seed = cfg.seed;
        (*opts).iterations = cfg.iters;
        (*opts).overflow_stop = cfg.density.stop_overflow;
        (*opts).target_density = cfg.density.target_density;
    }
    true
}

/// Parse a YAML netlist document. Returns null on error; see pp_last_error.
///
/// # Safety
/// `text` must be a valid null-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pp_design_parse_yaml(text: *const c_char) -> *mut PpDesign {
    if text.is_null() {
        set_error("null document pointer");
        return ptr::null_mut();
    }
    let text = match unsafe { CStr::from_ptr(text) }.to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("document is not valid UTF-8");
            return ptr::null_mut();
        }
    };
    match parse_design(text) {
        Ok(inner) => Box::into_raw(Box::new(PpDesign { inner })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Parse a YAML netlist file from disk.
///
/// # Safety
/// `path` must be a valid null-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pp_design_load(path: *const c_char) -> *mut PpDesign {
    if path.is_null() {
        set_error("null path pointer");
        return ptr::null_mut();
    }
    let path = match unsafe { CStr::from_ptr(path) }.to_str() {
        Ok(p) => p,
        Err(_) => {
            set_error("path is not valid UTF-8");
            return ptr::null_mut();
        }
    };
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            set_error(format!("cannot read '{path}': {e}"));
            return ptr::null_mut();
        }
    };
    let text = match CString::new(text) {
        Ok(c) => c,
        Err(_) => {
            set_error("document contains interior NUL bytes");
            return ptr::null_mut();
        }
    };
    unsafe { pp_design_parse_yaml(text.as_ptr()) }
}

/// Generate a Clements MZI mesh with `modes` modes.
#[no_mangle]
pub extern "C" fn pp_design_clements(modes: usize, large_die: bool) -> *mut PpDesign {
    let class = if large_die { SizeClass::L } else { SizeClass::S };
    match gen_clements(&ClementsSpec::new(modes, class)) {
        Ok(inner) => Box::into_raw(Box::new(PpDesign { inner })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Generate a butterfly interconnect with `ports` ports (power of two).
#[no_mangle]
pub extern "C" fn pp_design_butterfly(ports: usize, large_die: bool) -> *mut PpDesign {
    let class = if large_die { SizeClass::L } else { SizeClass::S };
    match gen_butterfly(&ButterflySpec::new(ports, class)) {
        Ok(inner) => Box::into_raw(Box::new(PpDesign { inner })),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `design` must come from a pp_design_* constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pp_design_free(design: *mut PpDesign) {
    if !design.is_null() {
        drop(unsafe { Box::from_raw(design) });
    }
}

/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pp_design_component_count(design: *const PpDesign) -> usize {
    if design.is_null() {
        return 0;
    }
    unsafe { &*design }.inner.components.len()
}

/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pp_design_net_count(design: *const PpDesign) -> usize {
    if design.is_null() {
        return 0;
    }
    unsafe { &*design }.inner.nets.len()
}

/// Run global placement. Returns a placement handle even when the run
/// diverged (query pp_placement_status); null only on invalid arguments.
///
/// # Safety
/// `design` must be a live handle; `opts` may be null for defaults.
#[no_mangle]
pub unsafe extern "C" fn pp_place(
    design: *const PpDesign,
    opts: *const PpRunOptions,
) -> *mut PpPlacement {
    if design.is_null() {
        set_error("null design handle");
        return ptr::null_mut();
    }
    let design = &unsafe { &*design }.inner;
    let mut cfg = RunConfig::default();
    if !opts.is_null() {
        let o = unsafe { &*opts };
        cfg.seed = o.seed;
        cfg.iters = o.iterations.max(1);
        cfg.density.stop_overflow = o.overflow_stop;
        cfg.density.target_density = o.target_density;
    }
    match run_global(design, &cfg) {
        Ok(out) => {
            let status = match out.status {
                RunStatus::Diverged => PpStatus::Diverged,
                _ => PpStatus::Ok,
            };
            if status == PpStatus::Diverged {
                set_error("placement diverged; handle holds the last good state");
            }
            Box::into_raw(Box::new(PpPlacement {
                positions: full_positions(design, &out.state),
                status,
                iterations: out.state.iteration,
                overflow: out.final_overflow,
                seed: cfg.seed,
                legalized: false,
            }))
        }
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Remove residual overlaps in place.
///
/// # Safety
/// Both handles must be live and belong together.
#[no_mangle]
pub unsafe extern "C" fn pp_legalize(
    design: *const PpDesign,
    placement: *mut PpPlacement,
) -> PpStatus {
    if design.is_null() || placement.is_null() {
        set_error("null handle");
        return PpStatus::InvalidArgument;
    }
    let design = &unsafe { &*design }.inner;
    let placement = unsafe { &mut *placement };
    if placement.positions.len() != design.components.len() {
        set_error("placement does not match the design");
        return PpStatus::InvalidArgument;
    }
    let halos: Vec<f64> = design.components.iter().map(|c| c.halo).collect();
    let result = legalize(design, &placement.positions, &halos);
    placement.positions = result.positions;
    placement.legalized = true;
    if result.status == LegalizeStatus::Success {
        PpStatus::Ok
    } else {
        let violations = verify_legal(design, &placement.positions, &halos);
        set_error(format!("legalization failed with {} residual violations", violations.len()));
        PpStatus::LegalizeFailed
    }
}

/// # Safety
/// `placement` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pp_placement_status(placement: *const PpPlacement) -> PpStatus {
    if placement.is_null() {
        return PpStatus::InvalidArgument;
    }
    unsafe { &*placement }.status
}

/// # Safety
/// `placement` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pp_placement_iterations(placement: *const PpPlacement) -> usize {
    if placement.is_null() {
        return 0;
    }
    unsafe { &*placement }.iterations
}

/// Final density overflow of the run.
///
/// # Safety
/// `placement` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pp_placement_overflow(placement: *const PpPlacement) -> f64 {
    if placement.is_null() {
        return f64::NAN;
    }
    unsafe { &*placement }.overflow
}

/// Lower-left corner of one component. Returns false on bad indices.
///
/// # Safety
/// Pointers must be valid; `x`/`y` must point to writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pp_placement_position(
    placement: *const PpPlacement,
    component: usize,
    x: *mut f64,
    y: *mut f64,
) -> bool {
    if placement.is_null() || x.is_null() || y.is_null() {
        set_error("null pointer");
        return false;
    }
    let placement = unsafe { &*placement };
    match placement.positions.get(component) {
        Some(p) => {
            unsafe {
                *x = p.x;
                *y = p.y;
            }
            true
        }
        None => {
            set_error(format!("component index {component} out of range"));
            false
        }
    }
}

fn export_string(s: String) -> *mut c_char {
    match CString::new(s) {
        Ok(c) => c.into_raw(),
        Err(_) => {
            set_error("output contained interior NUL bytes");
            ptr::null_mut()
        }
    }
}

/// Serialize the placed design as a YAML document. Free with pp_string_free.
///
/// # Safety
/// Both handles must be live and belong together.
#[no_mangle]
pub unsafe extern "C" fn pp_placement_to_yaml(
    design: *const PpDesign,
    placement: *const PpPlacement,
) -> *mut c_char {
    if design.is_null() || placement.is_null() {
        set_error("null handle");
        return ptr::null_mut();
    }
    let design = &unsafe { &*design }.inner;
    let placement = unsafe { &*placement };
    let movable: Vec<Point> = design
        .movable_indices()
        .iter()
        .map(|&i| placement.positions[i])
        .collect();
    let meta = PlacementMeta {
        iterations: placement.iterations,
        final_overflow: placement.overflow,
        seed: placement.seed,
    };
    match write_placement(design, &movable, meta) {
        Ok(text) => export_string(text),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Quality report as a JSON object. Free with pp_string_free.
///
/// # Safety
/// Both handles must be live and belong together.
#[no_mangle]
pub unsafe extern "C" fn pp_metrics_json(
    design: *const PpDesign,
    placement: *const PpPlacement,
) -> *mut c_char {
    if design.is_null() || placement.is_null() {
        set_error("null handle");
        return ptr::null_mut();
    }
    let design = &unsafe { &*design }.inner;
    let placement = unsafe { &*placement };
    if placement.positions.len() != design.components.len() {
        set_error("placement does not match the design");
        return ptr::null_mut();
    }
    let report = evaluate(design, &placement.positions, &LossModel::default());
    match serde_json::to_string_pretty(&report) {
        Ok(json) => export_string(json),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `placement` must come from pp_place and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pp_placement_free(placement: *mut PpPlacement) {
    if !placement.is_null() {
        drop(unsafe { Box::from_raw(placement) });
    }
}

/// # Safety
/// `s` must come from a pp_* string-returning call and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn pp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
