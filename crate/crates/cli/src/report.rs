//! Report assembly: a JSON document plus aligned text tables.

use std::fmt::Write as _;

use k3fm::Rational;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::ConfigDocument;

/// Bumped whenever a field of the JSON report changes meaning or shape.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(title: impl Into<String>, header: impl IntoIterator<Item = S>) -> Self {
        Self {
            title: title.into(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    /// Two-column table.
    pub fn key_value(title: impl Into<String>) -> Self {
        Self::new(title, ["quantity", "value"])
    }

    pub fn row<S: Into<String>>(&mut self, cells: impl IntoIterator<Item = S>) -> &mut Self {
        self.rows.push(cells.into_iter().map(Into::into).collect());
        self
    }

    pub fn render(&self) -> String {
        let cols = self.header.len();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate().take(cols) {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| -> String {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let _ = writeln!(out, "{}", line(&self.header));
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        let _ = writeln!(out, "{}", rule.join("  "));
        if self.rows.is_empty() {
            let _ = writeln!(out, "(empty)");
        }
        for row in &self.rows {
            let _ = writeln!(out, "{}", line(row));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub config: ConfigDocument,
    pub results: Map<String, Value>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str, config: ConfigDocument) -> Self {
        Self {
            command: command.to_string(),
            config,
            results: Map::new(),
            verdicts: Vec::new(),
            warnings: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    pub fn verdict(&mut self, v: Verdict) {
        self.verdicts.push(v);
    }

    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": serde_json::to_value(&self.config).expect("config serializes"),
            "results": Value::Object(self.results.clone()),
            "verdicts": self.verdicts,
            "warnings": self.warnings,
            "pass": self.pass(),
        })
    }

    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "k3fm {}", self.command);
        for table in &self.tables {
            out.push('\n');
            out.push_str(&table.render());
        }
        if !self.warnings.is_empty() {
            out.push('\n');
            for w in &self.warnings {
                let _ = writeln!(out, "warning: {w}");
            }
        }
        if !self.verdicts.is_empty() {
            let mut t = Table::new("verdicts", ["check", "result", "detail"]);
            for v in &self.verdicts {
                t.row([
                    v.name.clone(),
                    if v.pass { "PASS" } else { "FAIL" }.to_string(),
                    v.detail.clone(),
                ]);
            }
            out.push('\n');
            out.push_str(&t.render());
        }
        let _ = writeln!(out, "\noverall: {}", if self.pass() { "PASS" } else { "FAIL" });
        out
    }
}

pub fn rational(x: &Rational) -> Value {
    Value::String(x.to_string())
}

/// Values keyed by basis name.
pub fn named(names: &[String], values: &[Rational]) -> Value {
    let map: Map<String, Value> = names
        .iter()
        .zip(values)
        .map(|(n, v)| (n.clone(), rational(v)))
        .collect();
    Value::Object(map)
}

/// `3H − l + 1/2 f`, or `0`.
pub fn linear_combination(names: &[String], values: &[Rational]) -> String {
    let mut out = String::new();
    for (name, v) in names.iter().zip(values) {
        if *v == k3fm::rational::zero() {
            continue;
        }
        let negative = *v < k3fm::rational::zero();
        let magnitude = k3fm::rational::abs(v);
        let coeff = if magnitude == k3fm::rational::one() {
            String::new()
        } else if magnitude.is_integer() {
            magnitude.to_string()
        } else {
            format!("({magnitude})")
        };
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        out.push_str(&coeff);
        out.push_str(name);
    }
    if out.is_empty() {
        "0".to_string()
    } else {
        out
    }
}

/// A curve class shown by its intersection numbers: `(·H = 6, ·l = 3)`.
pub fn pairings(names: &[String], values: &[Rational]) -> String {
    let parts: Vec<String> = names.iter().zip(values).map(|(n, v)| format!("·{n} = {v}")).collect();
    format!("({})", parts.join(", "))
}
