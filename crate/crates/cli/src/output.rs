use std::fmt::Write as _;

use serde_json::Value;

use crate::commands::Report;
use crate::config::Format;

pub fn render(report: &Report) -> String {
    match report.config.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => csv(report),
    }
}

fn cell(v: &Value) -> String {
    let raw = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if raw.contains([',', '"', '\n']) {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

/// `# key=value` config lines, then either the report's table followed by
/// `# key=value` summary lines, or a `key,value` table of the result.
fn csv(report: &Report) -> String {
    let mut out = String::new();
    if let Value::Object(cfg) = serde_json::to_value(&report.config).expect("config serializes") {
        for (k, v) in cfg {
            let raw = match v {
                Value::String(s) => s,
                other => other.to_string(),
            };
            let _ = writeln!(out, "# {k}={raw}");
        }
    }
    let Value::Object(result) = &report.result else {
        let _ = writeln!(out, "value\n{}", cell(&report.result));
        return out;
    };
    match report.table {
        Some(spec) => {
            out.push_str(&spec.columns.join(","));
            out.push('\n');
            if let Some(Value::Array(rows)) = result.get(spec.key) {
                for row in rows {
                    let cells: Vec<String> = spec.columns.iter().map(|c| cell(row.get(*c).unwrap_or(&Value::Null))).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            for (k, v) in result.iter().filter(|(k, _)| *k != spec.key) {
                let _ = writeln!(out, "# {k}={}", cell(v));
            }
        }
        None => {
            out.push_str("key,value\n");
            for (k, v) in result {
                let _ = writeln!(out, "{k},{}", cell(v));
            }
        }
    }
    out
}
