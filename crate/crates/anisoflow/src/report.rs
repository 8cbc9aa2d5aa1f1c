//! Deterministic report writers.
//!
//! JSON output is rendered by a fixed-format printer: every floating-point
//! number is printed as `{:.16e}` (17 significant digits, round-trip exact for
//! f64) and object keys are emitted in sorted order, so identical inputs
//! produce byte-identical reports on every platform.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::solver::IterRecord;

fn fmt_number(n: &serde_json::Number, out: &mut String) {
    if let Some(i) = n.as_i64() {
        out.push_str(&i.to_string());
    } else if let Some(u) = n.as_u64() {
        out.push_str(&u.to_string());
    } else {
        let f = n.as_f64().expect("numeric JSON value");
        if f.is_finite() {
            out.push_str(&format!("{f:.16e}"));
        } else {
            // JSON has no infinities; encode as string-compatible null
            out.push_str("null");
        }
    }
}

fn fmt_value(v: &serde_json::Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    let pad_in = "  ".repeat(indent + 1);
    match v {
        serde_json::Value::Null => out.push_str("null"),
        serde_json::Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        serde_json::Value::Number(n) => fmt_number(n, out),
        serde_json::Value::String(s) => {
            out.push_str(&serde_json::Value::String(s.clone()).to_string())
        }
        serde_json::Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                out.push_str(&pad_in);
                fmt_value(item, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&pad);
            out.push(']');
        }
        serde_json::Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, val)) in map.iter().enumerate() {
                out.push_str(if i == 0 { "\n" } else { ",\n" });
                out.push_str(&pad_in);
                out.push_str(&serde_json::Value::String(k.clone()).to_string());
                out.push_str(": ");
                fmt_value(val, indent + 1, out);
            }
            out.push('\n');
            out.push_str(&pad);
            out.push('}');
        }
    }
}

/// Render any serializable value as deterministic JSON text.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)
        .map_err(|e| crate::error::Error::FieldFormat(format!("serialization failed: {e}")))?;
    let mut out = String::new();
    fmt_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}

/// Write a JSON report to `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = to_json_string(value)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

/// Write the per-iteration CSV log.
pub fn write_iteration_csv(path: &Path, records: &[IterRecord]) -> Result<()> {
    let mut out = String::from("iteration,r_mass,r_mom,energy_defect,min_rho,relax,homotopy\n");
    for r in records {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.iteration, r.r_mass, r.r_mom, r.energy_defect, r.min_rho, r.relax, r.homotopy
        ));
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())?;
    Ok(())
}
