use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::commands::Outcome;
use crate::config::RunConfig;

pub fn to_json(cfg: &RunConfig, outcome: &Outcome, wall_time: Option<f64>) -> String {
    let mut doc = Map::new();
    doc.insert("config".into(), serde_json::to_value(cfg).expect("config serializes"));
    doc.insert("result".into(), Value::Object(outcome.result.clone()));
    if let Some(fit) = &outcome.fit {
        doc.insert("fit".into(), fit.clone());
    }
    if !outcome.errors.is_empty() {
        doc.insert("errors".into(), Value::Array(outcome.errors.clone()));
    }
    let mut meta = Map::new();
    meta.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    if let Some(t) = wall_time {
        meta.insert("wall_time_s".into(), json!(t));
    }
    doc.insert("metadata".into(), Value::Object(meta));
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("output serializes");
    s.push('\n');
    s
}

/// Tables become a header plus one row per entry; other results become
/// `key,value` rows with nested keys joined by dots. Fit and errors follow as
/// `#` comment lines.
pub fn to_csv(outcome: &Outcome) -> String {
    let mut s = String::new();
    if let Some(table) = &outcome.table {
        let _ = writeln!(s, "{}", table.columns.join(","));
        for row in &table.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
    } else {
        let _ = writeln!(s, "key,value");
        let mut flat = Vec::new();
        flatten("", &Value::Object(outcome.result.clone()), &mut flat);
        for (k, v) in flat {
            let _ = writeln!(s, "{k},{v}");
        }
    }
    if let Some(fit) = &outcome.fit {
        let mut flat = Vec::new();
        flatten("", fit, &mut flat);
        let parts: Vec<String> = flat.into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "# fit {}", parts.join(" "));
    }
    for e in &outcome.errors {
        let mut flat = Vec::new();
        flatten("", e, &mut flat);
        let parts: Vec<String> = flat.into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(s, "# error {}", parts.join(" "));
    }
    s
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if !n.is_i64() && !n.is_u64() => format!("{f:?}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
            items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out))
        }
        Value::Array(items) => {
            let cells: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), format!("\"{}\"", cells.join(";"))));
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commands::Table;

    #[test]
    fn csv_table_and_fit_lines() {
        let mut o = Outcome {
            table: Some(Table {
                columns: vec!["lambda", "value"],
                rows: vec![vec![0.001, 5.555555555555556e-15]],
            }),
            fit: Some(json!({"exponent": 4.0, "stderr": {"exponent": 1e-9}})),
            ..Outcome::default()
        };
        o.errors.push(json!({"lambda": 0.5, "message": "bad"}));
        let s = to_csv(&o);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "lambda,value");
        assert_eq!(lines[1], "0.001,5.555555555555556e-15");
        assert_eq!(lines[2], "# fit exponent=4.0 stderr.exponent=1e-9");
        assert_eq!(lines[3], "# error lambda=0.5 message=bad");
    }

    #[test]
    fn csv_key_value_flattening() {
        let mut o = Outcome::default();
        o.result.insert("e_n".into(), json!(0.001));
        o.result.insert("nus".into(), json!([0.5, 0.25]));
        o.result.insert("sub".into(), json!({"x": 2}));
        let s = to_csv(&o);
        assert_eq!(s, "key,value\ne_n,0.001\nnus,\"0.5;0.25\"\nsub.x,2\n");
    }
}
