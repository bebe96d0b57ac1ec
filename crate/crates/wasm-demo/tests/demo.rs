use cavity_wasm_demo::{distribution_json, lambda_bars_json, ramp_json};

const P3: &str = "p edge 3 2\ne 1 2\ne 2 3\n";

#[test]
fn bars_have_one_entry_per_weight() {
    let v = lambda_bars_json("mis", P3, Some(2)).unwrap();
    assert_eq!(v["atoms"], 5);
    assert_eq!(v["lambda"].as_array().unwrap().len(), 5);
    assert!(lambda_bars_json("mis", P3, None).is_err());
}

#[test]
fn distribution_sums_to_one() {
    let v = distribution_json("matching", "p edge 2 1\ne 1 2\n", Some(1), "smoothstep", 100.0, 2000).unwrap();
    let total: f64 = v["probabilities"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(v["labels"].as_array().unwrap().len(), 8);
}

#[test]
fn ramp_endpoints() {
    let v = ramp_json("linear", 11).unwrap();
    let s = v["s"].as_array().unwrap();
    assert_eq!(s.len(), 11);
    assert_eq!(s[0].as_f64(), Some(0.0));
    assert_eq!(s[10].as_f64(), Some(1.0));
    assert!(ramp_json("zigzag", 11).is_err());
}
