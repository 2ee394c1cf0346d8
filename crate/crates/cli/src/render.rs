//! Aligned text rendering of a JSON report. Text output is produced from the
//! same value as JSON output, so the two carry the same data.

use serde_json::Value;

pub fn text(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("(none)".into()),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(a.iter().map(|x| scalar(x).unwrap_or_default()).collect::<Vec<_>>().join(", "))
        }
        Value::Object(m) if m.is_empty() => Some("(none)".into()),
        _ => None,
    }
}

fn push_line(out: &mut String, indent: usize, s: &str) {
    let pad = " ".repeat(indent);
    for (i, line) in s.lines().enumerate() {
        out.push_str(&pad);
        if i > 0 {
            out.push_str("  ");
        }
        out.push_str(line);
        out.push('\n');
    }
    if s.is_empty() {
        out.push_str(&pad);
        out.push('\n');
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    match v {
        Value::Object(m) => {
            let width = m.iter().filter(|(_, x)| scalar(x).is_some()).map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, x) in m {
                match scalar(x) {
                    Some(s) => push_line(out, indent, &format!("{k:<width$}  {s}")),
                    None => {
                        push_line(out, indent, &format!("{k}:"));
                        write_value(out, x, indent + 2);
                    }
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                match scalar(x) {
                    Some(s) => push_line(out, indent, &format!("- {s}")),
                    None => {
                        let mut inner = String::new();
                        write_value(&mut inner, x, 0);
                        let mut lines = inner.lines();
                        if let Some(first) = lines.next() {
                            push_line(out, indent, &format!("- {first}"));
                        }
                        for l in lines {
                            push_line(out, indent + 2, l);
                        }
                    }
                }
            }
        }
        _ => push_line(out, indent, &scalar(v).unwrap_or_default()),
    }
}
