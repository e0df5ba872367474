//! Rendering of command results.

use serde::Serialize;
use serde_json::Value;

/// A result ready to print: the JSON form and the text form.
pub struct Output {
    pub json: Value,
    pub text: String,
}

impl Output {
    /// Text is a `key: value` line per top-level field.
    pub fn from_value(value: impl Serialize) -> Self {
        let json = serde_json::to_value(value).expect("results serialize");
        let text = key_values(&json);
        Output { json, text }
    }

    pub fn with_text(value: impl Serialize, text: String) -> Self {
        let json = serde_json::to_value(value).expect("results serialize");
        Output { json, text }
    }

    pub fn json_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("json value serializes");
        s.push('\n');
        s
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn key_values(v: &Value) -> String {
    match v {
        Value::Object(map) => map.iter().map(|(k, v)| format!("{k}: {}\n", scalar(v))).collect(),
        other => format!("{}\n", scalar(other)),
    }
}

/// CSV text from a header and rows of already formatted cells.
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
