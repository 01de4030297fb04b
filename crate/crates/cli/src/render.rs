//! Plain-text rendering of the JSON report model.

use serde_json::Value;

pub fn human(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|x| !x.is_array() && !x.is_object()) => {
            let parts: Vec<String> = items.iter().filter_map(scalar).collect();
            Some(format!("[{}]", parts.join(", ")))
        }
        Value::Object(map) if is_rational(map) => {
            let (num, den) = (map["num"].as_str().unwrap_or("?"), map["den"].as_str().unwrap_or("?"));
            Some(if num.len() + den.len() > 24 {
                format!("{}", map["approx"])
            } else {
                format!("{} ({num}/{den})", map["approx"])
            })
        }
        Value::Object(map) if map.len() == 2 && map.contains_key("p") && map.contains_key("q") => {
            Some(format!("{}/{}", map["p"], map["q"]))
        }
        _ => None,
    }
}

fn is_rational(map: &serde_json::Map<String, Value>) -> bool {
    map.len() == 3 && map.contains_key("num") && map.contains_key("den") && map.contains_key("approx")
}

fn write_value(out: &mut String, value: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (key, v) in map {
                match scalar(v) {
                    Some(s) => out.push_str(&format!("{pad}{key}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{key}:\n"));
                        write_value(out, v, indent + 1);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (k, item) in items.iter().enumerate() {
                match scalar(item) {
                    Some(s) => out.push_str(&format!("{pad}{s}\n")),
                    None => {
                        out.push_str(&format!("{pad}[{k}]\n"));
                        write_value(out, item, indent + 1);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

/// `key=value` pairs of a flat object on one line.
pub fn flat(value: &Value) -> String {
    match value {
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| format!("{k}={}", scalar(v).unwrap_or_else(|| v.to_string())))
            .collect::<Vec<_>>()
            .join(" "),
        other => scalar(other).unwrap_or_default(),
    }
}
