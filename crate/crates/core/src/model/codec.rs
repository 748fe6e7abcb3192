//! Canonical `atlas.json` encoding.
//!
//! Object keys are sorted, non-integer numbers are written with exactly six
//! decimals, output is UTF-8 with two-space indentation and LF line endings,
//! terminated by a single newline. Equal datasets therefore encode to equal
//! bytes.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use super::types::{AtlasDataset, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("malformed atlas file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    UnsupportedSchema(u64),
    #[error("missing schema_version")]
    MissingSchema,
    #[error("coordinate out of range for {use_id} in {map}: ({x}, {y})")]
    CoordinateOutOfRange { use_id: String, map: &'static str, x: f64, y: f64 },
}

/// Writes any serializable value in canonical form.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> Result<String, serde_json::Error> {
    let value = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else {
                let f = n.as_f64().unwrap_or(0.0);
                let s = format!("{f:.6}");
                // -0.000000 and 0.000000 must encode identically
                if s.trim_start_matches('-').bytes().all(|b| b == b'0' || b == b'.') {
                    out.push_str("0.000000");
                } else {
                    out.push_str(&s);
                }
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).unwrap()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                write_value(out, item, depth + 1);
            }
            newline(out, depth);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                newline(out, depth + 1);
                out.push_str(&serde_json::to_string(key).unwrap());
                out.push_str(": ");
                write_value(out, &map[key], depth + 1);
            }
            newline(out, depth);
            out.push('}');
        }
    }
}

fn newline(out: &mut String, depth: usize) {
    out.push('\n');
    for _ in 0..depth {
        out.push_str("  ");
    }
}

pub fn serialize_atlas(dataset: &AtlasDataset) -> Vec<u8> {
    to_canonical_string(dataset)
        .expect("atlas types always serialize")
        .into_bytes()
}

/// Parses an atlas file, rejecting unknown schema versions and coordinates
/// outside `[0, 1]`. Structural invariants beyond that are left to
/// [`validate_dataset`](super::validate_dataset).
pub fn parse_atlas(bytes: &[u8]) -> Result<AtlasDataset, CodecError> {
    let raw: Value = serde_json::from_slice(bytes)?;
    match raw.get("schema_version").and_then(Value::as_u64) {
        None => return Err(CodecError::MissingSchema),
        Some(v) if v != u64::from(SCHEMA_VERSION) => return Err(CodecError::UnsupportedSchema(v)),
        Some(_) => {}
    }
    let dataset: AtlasDataset = serde_json::from_value(raw)?;
    for (map, coords) in [("coords", &dataset.coords), ("split_coords", &dataset.split_coords)] {
        for (use_id, c) in coords {
            if !c.in_unit_square() {
                return Err(CodecError::CoordinateOutOfRange { use_id: use_id.clone(), map, x: c.x, y: c.y });
            }
        }
    }
    Ok(dataset)
}
