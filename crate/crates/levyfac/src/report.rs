//! Identity reports, their canonical JSON form and the flat CSV summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// One goodness-of-fit test inside a check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KsRow {
    pub name: String,
    /// Reference law or sample the statistic compares against.
    pub reference: String,
    pub statistic: f64,
    pub p_value: f64,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MellinCheck {
    pub z: f64,
    pub mc_value: f64,
    pub closed_value: f64,
    pub standard_error: f64,
    pub sigma_distance: f64,
}

/// A deliberately wrong parameter that the check must reject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativeControl {
    pub description: String,
    pub statistic: f64,
    pub p_value: f64,
    pub threshold: f64,
    pub rejected: bool,
}

/// Median p-value over several seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedGate {
    pub seeds: Vec<u64>,
    pub p_values: Vec<f64>,
    pub median_p: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentityReport {
    pub identity_name: String,
    pub params: BTreeMap<String, f64>,
    pub sample_sizes: Vec<u64>,
    pub seeds: Vec<u64>,
    /// Statistic and p-value of the decisive test (the smallest p-value).
    pub ks_statistic: f64,
    pub p_value: f64,
    pub tests: Vec<KsRow>,
    pub mellin_checks: Vec<MellinCheck>,
    pub calibration_constant: Option<f64>,
    pub negative_controls: Vec<NegativeControl>,
    pub seed_gate: Option<SeedGate>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("report does not parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("report invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl IdentityReport {
    pub fn new(identity: &str) -> Self {
        IdentityReport {
            identity_name: identity.to_string(),
            params: BTreeMap::new(),
            sample_sizes: Vec::new(),
            seeds: Vec::new(),
            ks_statistic: 0.0,
            p_value: 1.0,
            tests: Vec::new(),
            mellin_checks: Vec::new(),
            calibration_constant: None,
            negative_controls: Vec::new(),
            seed_gate: None,
            verdict: Verdict::Inconclusive,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_string(), v);
        self
    }

    /// Sets the headline statistic from the row with the smallest p-value.
    pub fn summarize(&mut self) {
        if let Some(r) = self.tests.iter().min_by(|a, b| a.p_value.total_cmp(&b.p_value)) {
            self.ks_statistic = r.statistic;
            self.p_value = r.p_value;
        }
    }

    pub fn row(&self, name: &str) -> Option<&KsRow> {
        self.tests.iter().find(|r| r.name == name)
    }

    /// Canonical JSON: sorted keys, floats with 17 significant digits,
    /// two-space indentation and a trailing newline.
    pub fn to_canonical_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut out = String::new();
        write_value(&v, 0, &mut out);
        out.push('\n');
        out
    }

    pub fn from_json(s: &str) -> Result<Self, ReportError> {
        let r: IdentityReport = serde_json::from_str(s)?;
        r.validate()?;
        Ok(r)
    }

    /// Checks the invariants that the schema in `docs/report.schema.json`
    /// states.
    pub fn validate(&self) -> Result<(), ReportError> {
        let bad = |m: String| Err(ReportError::Invariant(m));
        if !crate::harness::IDENTITIES.contains(&self.identity_name.as_str()) {
            return bad(format!("unknown identity `{}`", self.identity_name));
        }
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if !unit(self.p_value) {
            return bad(format!("p_value {} outside [0, 1]", self.p_value));
        }
        for r in &self.tests {
            if !unit(r.p_value) || !(0.0..=1.0).contains(&r.statistic) {
                return bad(format!("test `{}` has statistic {} and p {}", r.name, r.statistic, r.p_value));
            }
        }
        for c in &self.negative_controls {
            if !unit(c.p_value) || c.rejected != (c.p_value < c.threshold) {
                return bad(format!("negative control `{}` is inconsistent", c.description));
            }
        }
        if let Some(g) = &self.seed_gate {
            if g.seeds.len() != g.p_values.len() || g.p_values.iter().any(|&p| !unit(p)) {
                return bad("seed gate is inconsistent".into());
            }
        }
        if self.verdict == Verdict::Pass && self.negative_controls.iter().any(|c| !c.rejected) {
            return bad("pass verdict with an unrejected negative control".into());
        }
        Ok(())
    }

    /// Rows `(identity, params, test, statistic, p, verdict)`.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut csv::Writer<W>) -> Result<(), ReportError> {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={}", fmt_f64(*v))).collect();
        let params = params.join(";");
        for r in &self.tests {
            w.write_record([
                self.identity_name.as_str(),
                &params,
                &r.name,
                &fmt_f64(r.statistic),
                &fmt_f64(r.p_value),
                self.verdict.as_str(),
            ])?;
        }
        Ok(())
    }

    /// One-line summary for terminals.
    pub fn summary_line(&self) -> String {
        let short = |v: f64| if v == 0.0 || (1e-3..1e4).contains(&v.abs()) { format!("{v}") } else { format!("{v:.3e}") };
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={}", short(*v))).collect();
        format!(
            "{} [{}] {} (D={:.4}, p={:.3e}, {} tests)",
            self.identity_name,
            params.join(","),
            self.verdict.as_str().to_uppercase(),
            self.ks_statistic,
            self.p_value,
            self.tests.len()
        )
    }
}

pub const CSV_HEADER: [&str; 6] = ["identity", "params", "test", "statistic", "p_value", "verdict"];

/// CSV with a header row for a set of reports.
pub fn reports_csv(reports: &[IdentityReport]) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in reports {
        r.write_csv(&mut w)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Invariant(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// 17 significant digits in scientific notation; `null` for non-finite
/// values is handled by the caller.
pub fn fmt_f64(v: f64) -> String {
    if v == 0.0 {
        return "0.0000000000000000e0".to_string();
    }
    format!("{v:.16e}")
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else {
                let f = n.as_f64().expect("finite number");
                out.push_str(&fmt_f64(f));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, indent + 1, out);
                if k + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            // serde_json's map is a BTreeMap here, so keys come out sorted.
            out.push_str("{\n");
            for (k, (key, x)) in m.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push_str(": ");
                write_value(x, indent + 1, out);
                if k + 1 < m.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}
