//! Deterministic report artifacts.
//!
//! `report.json` must be byte-identical across runs of the same scenario,
//! so floats are always written with 17 significant digits, object keys
//! are sorted (BTreeMap), and arrays keep insertion order. CSV numbers use
//! the same format for loss-free downstream parsing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// JSON value tree with deterministic serialization.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
    Array(Vec<Json>),
    Object(BTreeMap<String, Json>),
}

impl Json {
    pub fn object() -> Json {
        Json::Object(BTreeMap::new())
    }

    pub fn set(&mut self, key: &str, value: Json) {
        if let Json::Object(map) = self {
            map.insert(key.to_string(), value);
        } else {
            panic!("set() on a non-object Json value");
        }
    }

    pub fn from_float_opt(v: Option<f64>) -> Json {
        match v {
            Some(x) => Json::Float(x),
            None => Json::Null,
        }
    }
}

/// 17 significant digits; round-trips every f64.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        return "null".to_string();
    }
    if v.is_infinite() {
        return "null".to_string();
    }
    format!("{v:.16e}")
}

fn escape(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_value(v: &Json, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Json::Null => out.push_str("null"),
        Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Json::Int(i) => {
            let _ = write!(out, "{i}");
        }
        Json::Float(f) => out.push_str(&format_float(*f)),
        Json::Str(s) => escape(s, out),
        Json::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&pad);
                out.push_str("  ");
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&pad);
            out.push(']');
        }
        Json::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&pad);
                out.push_str("  ");
                escape(k, out);
                out.push_str(": ");
                write_value(item, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&pad);
            out.push('}');
        }
    }
}

pub fn to_string(v: &Json) -> String {
    let mut out = String::new();
    write_value(v, 0, &mut out);
    out.push('\n');
    out
}

pub fn write_json_file(path: &Path, v: &Json) -> io::Result<()> {
    fs::write(path, to_string(v))
}

/// A CSV table with a mandatory header; numbers in round-trip precision.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "ragged CSV row");
        self.rows.push(cells);
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        fs::write(path, out)
    }
}

pub fn csv_num(v: f64) -> String {
    format_float(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_17_significant_digits() {
        assert_eq!(format_float(1.0), "1.0000000000000000e0");
        assert_eq!(format_float(-0.25), "-2.5000000000000000e-1");
    }

    #[test]
    fn floats_round_trip() {
        for v in [std::f64::consts::PI, 1.0 / 3.0, 6.02e23, -1.6e-19] {
            let s = format_float(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits());
        }
    }

    #[test]
    fn keys_are_sorted() {
        let mut obj = Json::object();
        obj.set("zeta", Json::Int(1));
        obj.set("alpha", Json::Bool(true));
        let s = to_string(&obj);
        assert!(s.find("alpha").unwrap() < s.find("zeta").unwrap());
    }

    #[test]
    fn serialization_is_stable() {
        let mut obj = Json::object();
        obj.set("values", Json::Array(vec![Json::Float(0.1), Json::Null]));
        assert_eq!(to_string(&obj), to_string(&obj.clone()));
    }
}
