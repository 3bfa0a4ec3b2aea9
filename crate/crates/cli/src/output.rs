//! Output-format plumbing shared by the subcommands.

use clap::ValueEnum;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Json,
    Csv,
}

/// Render a serializable report as pretty JSON.
pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// Flatten a serializable report into `key,value` CSV rows. Nested objects
/// flatten with dotted keys; arrays index with `[i]`.
pub fn to_flat_csv<T: serde::Serialize>(value: &T) -> String {
    let json = serde_json::to_value(value).expect("reports serialize");
    let mut rows = vec![("key".to_string(), "value".to_string())];
    flatten("", &json, &mut rows);
    rows.iter()
        .map(|(k, v)| format!("{k},{v}"))
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

fn flatten(prefix: &str, value: &serde_json::Value, out: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        serde_json::Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn scalar(value: &serde_json::Value) -> String {
    match value {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// Lowercase hex of minimal width for an `n_bits`-wide point.
pub fn hex_point(value: u64, n_bits: u32) -> String {
    format!("{value:0width$x}", width = (n_bits as usize).div_ceil(4))
}
