use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::report::{AnalysisReport, ChannelReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Text,
}

/// `%.12e` with a signed, at least two-digit exponent; `-0` prints as `0`.
pub fn format_float(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn is_scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

/// Arrays of scalars, and arrays of such arrays (matrix rows), stay on one line.
fn is_inline(v: &Value) -> bool {
    match v {
        Value::Array(items) => items
            .iter()
            .all(|x| is_scalar(x) || matches!(x, Value::Array(inner) if inner.iter().all(is_scalar))),
        _ => true,
    }
}

fn write_scalar(out: &mut String, v: &Value) {
    match v {
        Value::Number(n) => match (n.as_u64(), n.as_i64(), n.as_f64()) {
            (Some(u), _, _) if !n.is_f64() => out.push_str(&u.to_string()),
            (_, Some(i), _) if !n.is_f64() => out.push_str(&i.to_string()),
            (_, _, Some(f)) => out.push_str(&format_float(f)),
            _ => out.push_str("null"),
        },
        other => out.push_str(&other.to_string()),
    }
}

fn write_inline(out: &mut String, v: &Value) {
    match v {
        Value::Array(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_inline(out, x);
            }
            out.push(']');
        }
        other => write_scalar(out, other),
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        Value::Array(items) if !items.is_empty() && !is_inline(v) => {
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(_) => out.push_str("{}"),
        other => write_inline(out, other),
    }
}

/// Indented JSON in field order with every float written by [`format_float`].
pub fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let value = serde_json::to_value(value).expect("report serialization is infallible");
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    out.into_bytes()
}

fn flag(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "-",
    }
}

fn row(c: &ChannelReport) -> [String; 10] {
    let class = c.classification.as_ref();
    let dec = c.decomposition.as_ref();
    [
        c.label.clone(),
        c.dim.to_string(),
        flag(c.validation.as_ref().map(|v| v.is_unital)).into(),
        dec.map_or("-".into(), |d| d.dim_p.to_string()),
        dec.map_or("-".into(), |d| d.dim_n.to_string()),
        c.spectrum.as_ref().map_or("-".into(), |s| format!("{:.4}", s.spectral_gap)),
        flag(class.map(|k| k.peripherally_automorphic.peripherally_automorphic)).into(),
        flag(class.map(|k| k.stationarity.stationary)).into(),
        flag(class.map(|k| k.irreducible)).into(),
        flag(class.map(|k| k.automorphism.is_automorphism)).into(),
    ]
}

/// A fixed-width summary table, followed by warnings and errors.
pub fn to_text(report: &AnalysisReport) -> Vec<u8> {
    let header = ["channel", "d", "unital", "dim P", "dim N", "gap", "PA", "stationary", "irreducible", "automorphism"]
        .map(String::from);
    let rows: Vec<[String; 10]> = report.channels.iter().map(row).collect();
    let widths: Vec<usize> = (0..10)
        .map(|i| rows.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for r in std::iter::once(&header).chain(&rows) {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    for c in &report.channels {
        for w in &c.warnings {
            let _ = writeln!(out, "warning [{}]: {w}", c.label);
        }
        for e in &c.errors {
            let _ = writeln!(out, "error [{}] {}: {}", c.label, e.command, e.message);
        }
    }
    out.into_bytes()
}

pub fn emit(report: &AnalysisReport, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_json(report),
        Format::Text => to_text(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(format_float(1.0), "1.000000000000e+00");
        assert_eq!(format_float(-0.0), "0.000000000000e+00");
        assert_eq!(format_float(2.5e-17), "2.500000000000e-17");
        assert_eq!(format_float(-123456.0), "-1.234560000000e+05");
        assert_eq!(format_float(1e100), "1.000000000000e+100");
    }

    #[test]
    fn floats_inside_json() {
        let bytes = to_json(&serde_json::json!({"a": [0.5, -0.0], "b": 3}));
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text, "{\n  \"a\": [5.000000000000e-01, 0.000000000000e+00],\n  \"b\": 3\n}\n");
        let bytes = to_json(&serde_json::json!({"m": [[[1.0, 0.0]], [[0.0, -2.0]]], "l": [{"k": 1}]}));
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(
            text,
            "{\n  \"m\": [\n    [[1.000000000000e+00, 0.000000000000e+00]],\n    \
             [[0.000000000000e+00, -2.000000000000e+00]]\n  ],\n  \"l\": [\n    {\n      \"k\": 1\n    }\n  ]\n}\n"
        );
    }
}
