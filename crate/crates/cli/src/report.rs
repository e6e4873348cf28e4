//! Report assembly and rendering. JSON output is canonical: keys sorted,
//! every float printed with 17 significant digits, so identical runs give
//! identical bytes.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

use hcm_core::cmcheck::CmReport;
use hcm_core::hyper::HcmReport;
use hcm_core::scenarios::{KScanReport, KScanSeries, StepDetail};
use hcm_core::{Outcome, Params, ScenarioConfig, ScenarioResult, Verdict};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
}

/// What the exit code is computed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictSummary {
    pub cm_verdict: Option<Verdict>,
    pub outcome: Option<Outcome>,
    pub summary: String,
    pub numeric_failure: bool,
}

impl VerdictSummary {
    /// 0 consistent, 1 violated, 2 inconclusive, 4 numeric failure.
    pub fn exit_code(&self) -> i32 {
        if self.numeric_failure {
            return 4;
        }
        match self.cm_verdict {
            None | Some(Verdict::ConsistentCM) => 0,
            Some(Verdict::ViolatedCM) => 1,
            Some(Verdict::Inconclusive) => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CmCheck {
    pub target: String,
    pub params: Params,
    pub u: Vec<f64>,
    pub report: CmReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogListing {
    pub scenarios: Vec<String>,
    pub densities: Vec<String>,
    pub wforms: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    CheckCm(CmCheck),
    CheckHcm1d(HcmReport),
    Scenario(Box<ScenarioResult>),
    Thm3Scan(KScanReport),
    List(CatalogListing),
    Error { message: String },
}

pub struct Report {
    pub command: String,
    pub config: Option<ScenarioConfig>,
    pub payload: Payload,
    pub verdict: VerdictSummary,
    pub wall_seconds: Option<f64>,
}

impl Report {
    pub fn to_value(&self) -> Result<Value, CliError> {
        let mut m = Map::new();
        m.insert("schema_version".into(), Value::from(SCHEMA_VERSION));
        m.insert(
            "tool".into(),
            serde_json::json!({"name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION")}),
        );
        m.insert("command".into(), Value::String(self.command.clone()));
        m.insert(
            "config".into(),
            match &self.config {
                Some(c) => enc(c)?,
                None => Value::Null,
            },
        );
        m.insert("result".into(), enc(&self.payload)?);
        let mut verdict = enc(&self.verdict)?;
        if let Value::Object(v) = &mut verdict {
            v.insert("exit_code".into(), Value::from(self.verdict.exit_code()));
        }
        m.insert("verdict".into(), verdict);
        if let Some(t) = self.wall_seconds {
            m.insert("timing".into(), serde_json::json!({ "wall_seconds": t }));
        }
        Ok(Value::Object(m))
    }

    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => Ok(canonical_json(&self.to_value()?)),
            Format::Csv => self.csv(),
            Format::Md => Ok(self.markdown()),
        }
    }

    fn csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Usage(format!("csv output failed: {e}"));
        w.write_record(CSV_HEADER).map_err(io)?;
        let mut rows = Vec::new();
        match &self.payload {
            Payload::CheckCm(c) => cm_rows(&mut rows, &c.target, None, &c.report),
            Payload::CheckHcm1d(h) => hcm_rows(&mut rows, &h.label, h),
            Payload::Scenario(r) => {
                for s in &r.steps {
                    match &s.detail {
                        StepDetail::Cm(c) => cm_rows(&mut rows, &s.name, None, c),
                        StepDetail::Hcm(h) => hcm_rows(&mut rows, &s.name, h),
                        StepDetail::KScan(k) => scan_rows(&mut rows, k),
                        StepDetail::Dual(d) => rows.push(vec![
                            "dual".into(),
                            s.name.clone(),
                            String::new(),
                            points(&d.w),
                            String::new(),
                            num(d.k),
                            String::new(),
                            num(d.repr4.value),
                            num(d.direct.value),
                            num(d.relative_difference),
                            if s.passed { "pass" } else { "fail" }.into(),
                        ]),
                        _ => {}
                    }
                }
            }
            Payload::Thm3Scan(k) => scan_rows(&mut rows, k),
            Payload::List(l) => {
                for (kind, names) in [
                    ("scenario", &l.scenarios),
                    ("density", &l.densities),
                    ("wform", &l.wforms),
                ] {
                    for n in names {
                        let mut row = vec![String::new(); CSV_HEADER.len()];
                        row[0] = kind.into();
                        row[1] = n.clone();
                        rows.push(row);
                    }
                }
            }
            Payload::Error { message } => {
                let mut row = vec![String::new(); CSV_HEADER.len()];
                row[0] = "error".into();
                row[1] = message.clone();
                rows.push(row);
            }
        }
        for r in rows {
            w.write_record(&r).map_err(io)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Usage(format!("csv output failed: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::Usage(e.to_string()))
    }

    fn markdown(&self) -> String {
        let mut s = String::new();
        let v = &self.verdict;
        let _ = writeln!(s, "# hcm-lab {}\n", self.command);
        let _ = writeln!(s, "- summary: {}", v.summary);
        if let Some(o) = v.outcome {
            let _ = writeln!(s, "- outcome: {o:?}");
        }
        if let Some(c) = v.cm_verdict {
            let _ = writeln!(s, "- CM verdict: {c}");
        }
        let _ = writeln!(s, "- numeric failure: {}", v.numeric_failure);
        let _ = writeln!(s, "- exit code: {}", v.exit_code());
        if let Some(t) = self.wall_seconds {
            let _ = writeln!(s, "- wall time: {t:.3} s");
        }
        s.push('\n');
        match &self.payload {
            Payload::CheckCm(c) => md_cm(&mut s, &c.target, &c.report),
            Payload::CheckHcm1d(h) => md_hcm(&mut s, h),
            Payload::Scenario(r) => {
                let _ = writeln!(s, "| step | passed | verdict |\n|---|---|---|");
                for st in &r.steps {
                    let verdict = st.verdict.map_or("-".to_string(), |v| v.to_string());
                    let _ = writeln!(s, "| {} | {} | {} |", st.name, st.passed, verdict);
                }
                for st in &r.steps {
                    match &st.detail {
                        StepDetail::KScan(k) => md_scan(&mut s, k),
                        StepDetail::Error { message } => {
                            let _ = writeln!(s, "\n{}: {message}", st.name);
                        }
                        _ => {}
                    }
                }
                if !r.notes.is_empty() {
                    s.push_str("\nNotes:\n\n");
                    for n in &r.notes {
                        let _ = writeln!(s, "- {n}");
                    }
                }
            }
            Payload::Thm3Scan(k) => md_scan(&mut s, k),
            Payload::List(l) => {
                let _ = writeln!(s, "scenarios: {}\n", l.scenarios.join(", "));
                let _ = writeln!(s, "densities: {}\n", l.densities.join(", "));
                let _ = writeln!(s, "w-forms: {}", l.wforms.join(", "));
            }
            Payload::Error { message } => {
                let _ = writeln!(s, "error: {message}");
            }
        }
        s
    }
}

fn enc<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Usage(format!("serialization failed: {e}")))
}

const CSV_HEADER: [&str; 11] = [
    "table",
    "step",
    "u",
    "point",
    "alpha",
    "k",
    "w",
    "value",
    "error",
    "tolerance",
    "status",
];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn points(p: &[f64]) -> String {
    p.iter().map(|x| num(*x)).collect::<Vec<_>>().join(";")
}

fn cm_rows(rows: &mut Vec<Vec<String>>, step: &str, u: Option<f64>, r: &CmReport) {
    for rec in &r.records {
        if rec.point.is_empty() {
            continue;
        }
        let status = if rec.signed_value < -rec.tolerance {
            "violated"
        } else {
            "ok"
        };
        rows.push(vec![
            "cm".into(),
            step.into(),
            u.map(num).unwrap_or_default(),
            points(&rec.point),
            rec.alpha.to_string(),
            String::new(),
            String::new(),
            num(rec.signed_value),
            String::new(),
            num(rec.tolerance),
            status.into(),
        ]);
    }
}

fn hcm_rows(rows: &mut Vec<Vec<String>>, step: &str, h: &HcmReport) {
    for pu in &h.per_u {
        cm_rows(rows, step, Some(pu.u), &pu.report);
    }
}

fn scan_rows(rows: &mut Vec<Vec<String>>, k: &KScanReport) {
    for (name, series) in [("fixed", &k.fixed), ("coupled", &k.coupled)] {
        for e in &series.entries {
            rows.push(vec![
                "k_scan".into(),
                name.into(),
                String::new(),
                String::new(),
                String::new(),
                num(e.k),
                num(e.w),
                num(e.value),
                num(e.error_estimate),
                num(e.log_scale),
                format!("{:?}", e.class).to_lowercase(),
            ]);
        }
    }
}

fn md_cm(s: &mut String, target: &str, r: &CmReport) {
    let _ = writeln!(
        s,
        "{target}: {} (min signed value {:.6e}, tolerance {:.3e}, {} checks, max order {})",
        r.verdict, r.min_signed_value, r.tolerance_used, r.checks, r.max_order
    );
    if let Some(w) = &r.witness {
        let _ = writeln!(
            s,
            "\nwitness: point {:?}, alpha {}, step {:?}, signed value {:.6e}",
            w.point, w.alpha, w.step, w.signed_value
        );
    }
}

fn md_hcm(s: &mut String, h: &HcmReport) {
    let _ = writeln!(
        s,
        "{}: {}\n\n| u | verdict | min signed value |\n|---|---|---|",
        h.label, h.verdict
    );
    for pu in &h.per_u {
        let _ = writeln!(
            s,
            "| {} | {} | {:.6e} |",
            pu.u, pu.report.verdict, pu.report.min_signed_value
        );
    }
}

fn md_series(s: &mut String, name: &str, series: &KScanSeries) {
    let _ = writeln!(s, "\n{name} points:\n\n| k | w | J13 (scaled) | error | log scale | class |\n|---|---|---|---|---|---|");
    for e in &series.entries {
        let _ = writeln!(
            s,
            "| {} | {:.4e} | {:.10e} | {:.2e} | {:.6} | {:?} |",
            e.k, e.w, e.value, e.error_estimate, e.log_scale, e.class
        );
    }
    match series.sign_change {
        Some(b) => {
            let _ = writeln!(s, "\nfirst sign change: k in ({:?}, {}]", b.k_low, b.k_high);
        }
        None => {
            let _ = writeln!(s, "\nno sign change");
        }
    }
}

fn md_scan(s: &mut String, k: &KScanReport) {
    let _ = writeln!(
        s,
        "\nk-scan of J13, w_eps = {}, kappa1 = {:?}",
        k.w_eps, k.kappa1
    );
    md_series(s, "fixed", &k.fixed);
    md_series(s, "coupled", &k.coupled);
}

/// Pretty JSON with sorted keys and `{:.16e}` floats.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&num(n.as_f64().expect("float")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(out, indent + 1);
                write_value(out, x, indent + 1);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(out, indent + 1);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(out, &m[*k], indent + 1);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            pad(out, indent);
            out.push('}');
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_form() {
        let v = json!({"b": 1.5, "a": [1, 2.0], "c": {"z": null, "y": "s"}});
        let s = canonical_json(&v);
        assert_eq!(
            s,
            "{\n  \"a\": [\n    1,\n    2.0000000000000000e0\n  ],\n  \"b\": 1.5000000000000000e0,\n  \"c\": {\n    \"y\": \"s\",\n    \"z\": null\n  }\n}\n"
        );
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"], json!(1.5));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5e-7] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn exit_codes() {
        let mut v = VerdictSummary {
            cm_verdict: Some(Verdict::ViolatedCM),
            outcome: Some(Outcome::Pass),
            summary: String::new(),
            numeric_failure: false,
        };
        assert_eq!(v.exit_code(), 1);
        v.cm_verdict = Some(Verdict::Inconclusive);
        assert_eq!(v.exit_code(), 2);
        v.numeric_failure = true;
        assert_eq!(v.exit_code(), 4);
        v.numeric_failure = false;
        v.cm_verdict = None;
        assert_eq!(v.exit_code(), 0);
    }
}
