use std::collections::BTreeSet;

use levyfac::harness::{self, CheckConfig, Context, Method};
use levyfac::report::{reports_csv, IdentityReport, Verdict};
use serde_json::Value;

fn schema() -> Value {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn keys(v: &Value) -> BTreeSet<String> {
    v.as_object().unwrap().keys().cloned().collect()
}

fn strings(v: &Value) -> BTreeSet<String> {
    v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
}

/// Structural check against the shipped schema: object keys, required
/// keys, enums and numeric bounds.
fn conforms(doc: &Value, schema: &Value, root: &Value) {
    if let Some(r) = schema.get("$ref") {
        let name = r.as_str().unwrap().trim_start_matches("#/$defs/");
        return conforms(doc, &root["$defs"][name], root);
    }
    if let Some(alts) = schema.get("oneOf") {
        if doc.is_null() {
            return;
        }
        return conforms(doc, &alts[1], root);
    }
    if let Some(e) = schema.get("enum") {
        assert!(e.as_array().unwrap().contains(doc), "{doc} not in {e}");
    }
    if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
        assert!(doc.as_f64().unwrap() >= min, "{doc} < {min}");
    }
    if let Some(max) = schema.get("maximum").and_then(Value::as_f64) {
        assert!(doc.as_f64().unwrap() <= max, "{doc} > {max}");
    }
    if let Some(props) = schema.get("properties") {
        let got = keys(doc);
        assert_eq!(got, keys(props), "object keys");
        assert_eq!(got, strings(&schema["required"]));
        for (k, sub) in props.as_object().unwrap() {
            conforms(&doc[k], sub, root);
        }
    }
    if let Some(items) = schema.get("items") {
        for d in doc.as_array().unwrap() {
            conforms(d, items, root);
        }
    }
    if let Some(extra) = schema.get("additionalProperties").filter(|v| v.is_object()) {
        for d in doc.as_object().unwrap().values() {
            conforms(d, extra, root);
        }
    }
}

fn quick(identity: &str) -> CheckConfig {
    let mut c = CheckConfig::new(identity);
    c.n = 1000;
    c.seed = 11;
    c
}

fn sample_reports() -> Vec<IdentityReport> {
    let ctx = Context::serial();
    let mut out = Vec::new();
    let mut c = quick("pareto-gamma");
    c.rho = Some(0.35);
    out.push(harness::run(&c, &ctx).unwrap());
    let mut c = quick("main-theorem");
    c.rho = Some(0.3);
    c.method = Method::Oracle;
    c.gate = true;
    out.push(harness::run(&c, &ctx).unwrap());
    let mut c = quick("mellin-product");
    c.alpha = Some(0.6);
    c.rho = Some(0.3);
    out.push(harness::run(&c, &ctx).unwrap());
    let mut c = quick("self-reciprocal");
    c.method = Method::Direct;
    out.push(harness::run(&c, &ctx).unwrap());
    out
}

#[test]
fn reports_conform_to_the_schema_and_round_trip() {
    let s = schema();
    for r in sample_reports() {
        let json = r.to_canonical_json();
        assert!(json.ends_with("}\n"));
        let doc: Value = serde_json::from_str(&json).unwrap();
        conforms(&doc, &s, &s);
        let back = IdentityReport::from_json(&json).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_canonical_json(), json);
    }
}

#[test]
fn gate_and_controls_are_recorded() {
    let reports = sample_reports();
    let main = &reports[1];
    let gate = main.seed_gate.as_ref().unwrap();
    assert_eq!(gate.seeds.len(), 5);
    assert_eq!(gate.p_values.len(), 5);
    for r in &reports {
        assert!(!r.negative_controls.is_empty(), "{} has no control", r.identity_name);
        if r.verdict == Verdict::Pass {
            assert!(r.negative_controls.iter().all(|c| c.rejected));
        }
    }
}

#[test]
fn tampered_reports_are_rejected() {
    let r = &sample_reports()[0];
    let json = r.to_canonical_json();
    let extra = json.replacen("{\n", "{\n  \"extra\": 1,\n", 1);
    assert!(IdentityReport::from_json(&extra).is_err());
    let mut bad = r.clone();
    bad.p_value = 1.5;
    assert!(IdentityReport::from_json(&bad.to_canonical_json()).is_err());
    let mut bad = r.clone();
    bad.identity_name = "nope".into();
    assert!(IdentityReport::from_json(&bad.to_canonical_json()).is_err());
}

#[test]
fn csv_has_one_row_per_test() {
    let reports = sample_reports();
    let csv = reports_csv(&reports).unwrap();
    let mut rd = csv::Reader::from_reader(csv.as_bytes());
    assert_eq!(rd.headers().unwrap().len(), 6);
    let rows = rd.records().count();
    assert_eq!(rows, reports.iter().map(|r| r.tests.len()).sum::<usize>());
}
