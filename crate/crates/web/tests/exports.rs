use dnls_web::{branch_curve_js, ground_state_profile_js, rearrange_demo_js};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn exports_return_plot_ready_json() {
    let b = parse(branch_curve_js(3.0, 0.0, 2.0, 64).unwrap());
    assert_eq!(b["lambda"].as_array().unwrap().len(), 64);
    assert!(b["forbidden"].is_null());
    assert!(b["infimum"].as_f64().unwrap() > 0.0);

    let g = parse(ground_state_profile_js(1.0, 3.0, 0.0, 1024).unwrap());
    let r = g["r"].as_array().unwrap();
    assert_eq!(r.len(), g["u"].as_array().unwrap().len());
    assert!(g["energy"].as_f64().unwrap() < 0.0);

    let d = parse(rearrange_demo_js(7, 48).unwrap());
    assert_eq!(d["f_star"].as_array().unwrap().len(), 48 * 48);
    assert_eq!(d["equimeasurable"], true);
}

#[test]
fn exports_are_deterministic() {
    assert_eq!(
        rearrange_demo_js(3, 32).unwrap(),
        rearrange_demo_js(3, 32).unwrap()
    );
    assert_eq!(
        ground_state_profile_js(0.7, 3.0, 0.1, 512).unwrap(),
        ground_state_profile_js(0.7, 3.0, 0.1, 512).unwrap()
    );
}
