use kthull_wasm::{nilpotency, normal_form, tiling_classes};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn three_points_have_four_classes() {
    let v = parse(tiling_classes("0,1,2"));
    assert_eq!(v["classes"], 4);
    assert_eq!(v["K0"], "Z^4");
    assert_eq!(v["K1"], "0");
}

#[test]
fn bad_points_report_an_error() {
    assert!(parse(tiling_classes("0,x")).get("error").is_some());
}

#[test]
fn bs_normal_form() {
    let v = parse(normal_form(2, 3, "b^3a"));
    assert_eq!(v["normal_form"], "ab^2");
}

#[test]
fn chain_powers() {
    for n in 1..=3u32 {
        let v = parse(nilpotency(n));
        assert_eq!(v["minimal_power"], n as u64);
        assert_eq!(v["chain_length"], n as u64);
    }
}
