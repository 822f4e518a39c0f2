//! Exercise the C ABI end to end through the exported symbols.

use picplace_capi::*;
use std::ffi::{CStr, CString};

fn last_error() -> String {
    unsafe { CStr::from_ptr(pp_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn generate_place_legalize_report() {
    unsafe {
        let design = pp_design_clements(4, false);
        assert!(!design.is_null(), "{}", last_error());
        assert_eq!(pp_design_component_count(design), 14); // 6 MZIs + 8 terminals
        assert_eq!(pp_design_net_count(design), 16);

        let mut opts = std::mem::zeroed::<PpRunOptions>();
        assert!(pp_run_options_default(&mut opts));
        assert_eq!(opts.iterations, 1500);
        opts.seed = 11;

        let placement = pp_place(design, &opts);
        assert!(!placement.is_null(), "{}", last_error());
        assert_eq!(pp_placement_status(placement), PpStatus::Ok);
        assert!(pp_placement_iterations(placement) > 0);
        assert!(pp_placement_overflow(placement) < 0.07);

        assert_eq!(pp_legalize(design, placement), PpStatus::Ok, "{}", last_error());

        let mut x = 0.0;
        let mut y = 0.0;
        for i in 0..pp_design_component_count(design) {
            assert!(pp_placement_position(placement, i, &mut x, &mut y));
            assert!(x.is_finite() && y.is_finite());
        }
        assert!(!pp_placement_position(placement, 9999, &mut x, &mut y));

        let yaml = pp_placement_to_yaml(design, placement);
        assert!(!yaml.is_null(), "{}", last_error());
        let text = CStr::from_ptr(yaml).to_str().unwrap().to_owned();
        pp_string_free(yaml);
        // The exported document parses back through the same ABI.
        let ctext = CString::new(text).unwrap();
        let reparsed = pp_design_parse_yaml(ctext.as_ptr());
        assert!(!reparsed.is_null(), "{}", last_error());
        pp_design_free(reparsed);

        let json = pp_metrics_json(design, placement);
        assert!(!json.is_null(), "{}", last_error());
        let report = CStr::from_ptr(json).to_str().unwrap();
        assert!(report.contains("\"#CR\""));
        assert!(report.contains("\"IL_max\""));
        pp_string_free(json);

        pp_placement_free(placement);
        pp_design_free(design);
    }
}

#[test]
fn parse_errors_are_reported() {
    unsafe {
        let bad = CString::new("design: {name: broken}").unwrap();
        let d = pp_design_parse_yaml(bad.as_ptr());
        assert!(d.is_null());
        assert!(!last_error().is_empty());

        let missing = CString::new("/definitely/not/here.yaml").unwrap();
        assert!(pp_design_load(missing.as_ptr()).is_null());
        assert!(last_error().contains("not/here.yaml"));

        assert!(pp_design_parse_yaml(std::ptr::null()).is_null());
        assert_eq!(pp_design_clements(3, false), std::ptr::null_mut());
        assert!(last_error().contains("even"));
    }
}

#[test]
fn null_handles_are_rejected() {
    unsafe {
        assert_eq!(pp_placement_status(std::ptr::null()), PpStatus::InvalidArgument);
        assert_eq!(pp_legalize(std::ptr::null(), std::ptr::null_mut()), PpStatus::InvalidArgument);
        assert!(pp_place(std::ptr::null(), std::ptr::null()).is_null());
        assert!(pp_metrics_json(std::ptr::null(), std::ptr::null()).is_null());
        assert_eq!(pp_design_component_count(std::ptr::null()), 0);
        // Frees tolerate null.
        pp_design_free(std::ptr::null_mut());
        pp_placement_free(std::ptr::null_mut());
        pp_string_free(std::ptr::null_mut());
    }
}

#[test]
fn header_is_generated_with_the_expected_surface() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/picplace.h"))
        .expect("build script must generate include/picplace.h");
    for symbol in [
        "PICPLACE_H",
        "typedef struct PpDesign PpDesign;",
        "typedef struct PpPlacement PpPlacement;",
        "pp_design_parse_yaml",
        "pp_place",
        "pp_legalize",
        "pp_metrics_json",
        "pp_string_free",
        "pp_last_error",
    ] {
        assert!(header.contains(symbol), "header missing: {symbol}");
    }
}
