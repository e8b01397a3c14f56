use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::{QdtError, Result};

pub const DEFAULT_DIGITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Table,
}

impl std::str::FromStr for Format {
    type Err = QdtError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "table" => Ok(Format::Table),
            other => Err(QdtError::InvalidArgument(format!(
                "unknown format `{other}` (expected json, csv or table)"
            ))),
        }
    }
}

/// `x` rounded to `digits` significant digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn round_tree(v: &mut Value, digits: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().unwrap_or(0.0), digits);
            *v = Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_tree(x, digits)),
        Value::Object(map) => map.values_mut().for_each(|x| round_tree(x, digits)),
        _ => {}
    }
}

struct Row {
    section: String,
    key: String,
    field: String,
    value: String,
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |name: &str| {
        if prefix.is_empty() {
            name.to_string()
        } else {
            format!("{prefix}.{name}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, out);
            }
        }
        other => out.push((
            if prefix.is_empty() { "value".to_string() } else { prefix.to_string() },
            scalar(other),
        )),
    }
}

fn row_key(index: usize, map: &Map<String, Value>) -> String {
    let mut parts: Vec<String> = ["measure", "label", "identity", "witness", "event"]
        .iter()
        .filter_map(|k| map.get(*k).and_then(Value::as_str).map(str::to_string))
        .collect();
    if map.contains_key("event") {
        if let Some(kind) = map.get("kind").and_then(Value::as_str) {
            parts.push(kind.to_string());
        }
    }
    if parts.is_empty() {
        index.to_string()
    } else {
        parts.join("/")
    }
}

fn rows(tree: &Value) -> Vec<Row> {
    let mut out = Vec::new();
    let Value::Object(top) = tree else {
        let mut fields = Vec::new();
        flatten("", tree, &mut fields);
        return fields
            .into_iter()
            .map(|(field, value)| Row {
                section: String::new(),
                key: String::new(),
                field,
                value,
            })
            .collect();
    };
    for (section, v) in top {
        let mut push = |key: String, fields: Vec<(String, String)>| {
            for (field, value) in fields {
                out.push(Row {
                    section: section.clone(),
                    key: key.clone(),
                    field,
                    value,
                });
            }
        };
        match v {
            Value::Array(items) if items.iter().all(Value::is_object) && !items.is_empty() => {
                for (i, item) in items.iter().enumerate() {
                    let mut fields = Vec::new();
                    flatten("", item, &mut fields);
                    let key = item.as_object().map_or_else(|| i.to_string(), |m| row_key(i, m));
                    push(key, fields);
                }
            }
            other => {
                let mut fields = Vec::new();
                flatten("", other, &mut fields);
                push(String::new(), fields);
            }
        }
    }
    out
}

fn render_csv(rows: &[Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| QdtError::InvalidArgument(format!("csv output failed: {e}"));
    w.write_record(["section", "key", "field", "value"]).map_err(io)?;
    for r in rows {
        w.write_record([&r.section, &r.key, &r.field, &r.value]).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| QdtError::InvalidArgument(format!("csv output failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv input was UTF-8"))
}

fn render_table(rows: &[Row]) -> String {
    let header = ["section", "key", "field", "value"];
    let mut widths = header.map(str::len);
    for r in rows {
        for (w, cell) in widths.iter_mut().zip([&r.section, &r.key, &r.field, &r.value]) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: [&str; 4]| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i == 3 {
                s.push_str(cell);
            } else {
                s.push_str(cell);
                s.extend(std::iter::repeat_n(' ', w - cell.chars().count() + 2));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header);
    out.push_str(&(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ") + "\n"));
    let mut last_section = "";
    for r in rows {
        let section = if r.section == last_section { "" } else { r.section.as_str() };
        last_section = &r.section;
        out.push_str(&line([section, &r.key, &r.field, &r.value]));
    }
    out
}

/// Renders any report with numbers rounded to `digits` significant digits.
/// JSON and CSV output carry identical numeric values.
pub fn render<T: Serialize>(report: &T, format: Format, digits: usize) -> Result<String> {
    let mut tree = serde_json::to_value(report)
        .map_err(|e| QdtError::InvalidArgument(format!("report serialization failed: {e}")))?;
    round_tree(&mut tree, digits);
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&tree).expect("values always serialize") + "\n"),
        Format::Csv => render_csv(&rows(&tree)),
        Format::Table => Ok(render_table(&rows(&tree))),
    }
}
