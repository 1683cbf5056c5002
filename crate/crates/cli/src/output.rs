use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::args::Format;
use crate::commands::Outcome;
use crate::CliError;

/// Rows for CSV output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

#[derive(Serialize)]
struct Document<'a> {
    command: &'a str,
    passed: bool,
    diagnostics: &'a [String],
    report: &'a Value,
}

pub fn emit(command: &str, outcome: &Outcome, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        Format::Json => {
            let doc = Document {
                command,
                passed: outcome.passed,
                diagnostics: &outcome.diagnostics,
                report: &outcome.report,
            };
            let mut s = serde_json::to_string_pretty(&doc).map_err(impurity_cft::Error::from)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let table = match &outcome.table {
                Some(t) => t.clone(),
                None => flatten(&outcome.report),
            };
            to_csv(&table)?
        }
    };
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_csv(table: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record(&table.header).map_err(err)?;
    for row in &table.rows {
        w.write_record(row).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// `key,value` rows with dotted paths.
pub fn flatten(v: &Value) -> Table {
    fn walk(prefix: &str, v: &Value, t: &mut Table) {
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(&key(k), x, t)),
            Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| walk(&key(&i.to_string()), x, t)),
            Value::String(s) => t.push(vec![prefix.to_string(), s.clone()]),
            Value::Null => t.push(vec![prefix.to_string(), String::new()]),
            other => t.push(vec![prefix.to_string(), other.to_string()]),
        }
    }
    let mut t = Table::new(&["key", "value"]);
    walk("", v, &mut t);
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flatten_uses_dotted_paths() {
        let t = flatten(&json!({"a": {"b": [1, "x"]}, "c": true}));
        assert_eq!(t.rows, vec![vec!["a.b.0", "1"], vec!["a.b.1", "x"], vec!["c", "true"]]);
        let csv = to_csv(&t).unwrap();
        assert!(csv.starts_with("key,value\n"));
    }
}
