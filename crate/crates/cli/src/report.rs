use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Machine-readable result of one invocation. Maps are ordered, so the JSON
/// output is a pure function of the contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub values: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub arithmetic_mode: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(command: &str, arithmetic_mode: impl ToString) -> Self {
        Report {
            command: command.to_string(),
            params: BTreeMap::new(),
            values: BTreeMap::new(),
            seed: None,
            arithmetic_mode: arithmetic_mode.to_string(),
            notes: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.params.insert(key.to_string(), to_value(value));
        self
    }

    pub fn value(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.values.insert(key.to_string(), to_value(value));
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.notes.push(note.into());
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialise");
        s.push('\n');
        s
    }

    /// `key,value` rows of the flattened values, sorted by key.
    pub fn to_csv(&self) -> String {
        let mut rows = Vec::new();
        for (k, v) in &self.values {
            flatten(k, v, &mut rows);
        }
        let mut out = String::from("key,value\n");
        for (k, v) in rows {
            out.push_str(&format!("{k},{v}\n"));
        }
        out
    }
}

fn to_value(value: impl Serialize) -> Value {
    // Non-finite floats have no JSON form; report them as strings.
    match serde_json::to_value(&value) {
        Ok(v) => v,
        Err(_) => Value::String("non-finite".into()),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, inner) in map {
                flatten(&format!("{prefix}.{k}"), inner, out);
            }
        }
        Value::Array(items) => {
            for (i, inner) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), inner, out);
            }
        }
        Value::String(s) if s.contains(',') || s.contains('"') => {
            out.push((prefix.to_string(), format!("\"{}\"", s.replace('"', "\"\""))))
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

/// A finite float, or its string form when JSON cannot hold it.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(x.to_string())
    }
}
