//! Verdict reports in two renderings: aligned text for humans and a JSON
//! document for machines.  Both are byte-deterministic for fixed inputs —
//! no timestamps, no hash-ordered maps, floats printed in shortest
//! round-trip form.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum ReportValue {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
    List(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct Report {
    command: String,
    entries: Vec<(String, ReportValue)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: ReportValue) {
        self.entries.push((key.to_string(), value));
    }

    pub fn bool(&mut self, key: &str, v: bool) {
        self.push(key, ReportValue::Bool(v));
    }

    pub fn int(&mut self, key: &str, v: i64) {
        self.push(key, ReportValue::Int(v));
    }

    pub fn float(&mut self, key: &str, v: f64) {
        self.push(key, ReportValue::Float(v));
    }

    pub fn text(&mut self, key: &str, v: impl Into<String>) {
        self.push(key, ReportValue::Text(v.into()));
    }

    pub fn list(&mut self, key: &str, v: Vec<String>) {
        self.push(key, ReportValue::List(v));
    }

    pub fn get(&self, key: &str) -> Option<&ReportValue> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    pub fn to_text(&self) -> String {
        let width = self
            .entries
            .iter()
            .map(|(k, _)| k.len())
            .chain(std::iter::once("command".len()))
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        let _ = writeln!(out, "{:width$}  {}", "command", self.command);
        for (k, v) in &self.entries {
            match v {
                ReportValue::Bool(b) => {
                    let _ = writeln!(out, "{k:width$}  {b}");
                }
                ReportValue::Int(i) => {
                    let _ = writeln!(out, "{k:width$}  {i}");
                }
                ReportValue::Float(f) => {
                    let _ = writeln!(out, "{k:width$}  {f}");
                }
                ReportValue::Text(s) => {
                    let _ = writeln!(out, "{k:width$}  {s}");
                }
                ReportValue::List(items) => {
                    let _ = writeln!(out, "{k:width$}  [{}]", items.len());
                    for it in items {
                        let _ = writeln!(out, "{:width$}  - {it}", "");
                    }
                }
            }
        }
        out
    }

    /// JSON object with `command` first, then entries in insertion order.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        let _ = write!(out, "  \"command\": {}", json_str(&self.command));
        for (k, v) in &self.entries {
            out.push_str(",\n");
            let _ = write!(out, "  {}: ", json_str(k));
            match v {
                ReportValue::Bool(b) => {
                    let _ = write!(out, "{b}");
                }
                ReportValue::Int(i) => {
                    let _ = write!(out, "{i}");
                }
                ReportValue::Float(f) => out.push_str(&json_num(*f)),
                ReportValue::Text(s) => out.push_str(&json_str(s)),
                ReportValue::List(items) => {
                    out.push('[');
                    for (i, it) in items.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        out.push_str(&json_str(it));
                    }
                    out.push(']');
                }
            }
        }
        out.push_str("\n}\n");
        out
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization is infallible")
}

fn json_num(f: f64) -> String {
    if f.is_finite() {
        serde_json::to_string(&f).expect("finite float serialization is infallible")
    } else {
        // JSON has no Inf/NaN; encode as a string so the report stays valid
        json_str(&f.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("check-quotient");
        r.bool("overall", false);
        r.int("rank", 2);
        r.float("residual", 0.5e-7);
        r.text("witness", "[g_1, g_2] = (0, 0, 1)");
        r.list("conditions", vec!["involutive: pass".into(), "curvature: fail".into()]);
        r
    }

    #[test]
    fn text_rendering_is_aligned_and_stable() {
        let t = sample().to_text();
        let expected = [
            "command     check-quotient",
            "overall     false",
            "rank        2",
            "residual    0.00000005",
            "witness     [g_1, g_2] = (0, 0, 1)",
            "conditions  [2]",
            "            - involutive: pass",
            "            - curvature: fail",
            "",
        ]
        .join("\n");
        assert_eq!(t, expected);
    }

    #[test]
    fn json_rendering_parses_and_keeps_order() {
        let j = sample().to_json();
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        assert_eq!(v["command"], "check-quotient");
        assert_eq!(v["rank"], 2);
        assert_eq!(v["conditions"][1], "curvature: fail");
        // key order is literal in the string
        let ci = j.find("\"overall\"").unwrap();
        let ri = j.find("\"rank\"").unwrap();
        assert!(ci < ri);
        // repeated rendering is byte-identical
        assert_eq!(j, sample().to_json());
    }
}
