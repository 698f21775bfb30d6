//! Machine-readable diagnostics: one JSON object per line on stderr.

use std::io::Write;

use serde_json::{Map, Value};

pub fn emit(level: &str, event: &str, fields: Value) {
    let mut obj = Map::new();
    obj.insert("level".into(), level.into());
    obj.insert("event".into(), event.into());
    if let Value::Object(extra) = fields {
        obj.extend(extra);
    }
    let line = Value::Object(obj).to_string();
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

pub fn error(event: &str, fields: Value) {
    emit("error", event, fields)
}

pub fn info(event: &str, fields: Value) {
    emit("info", event, fields)
}
