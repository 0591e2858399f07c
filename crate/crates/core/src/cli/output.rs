//! Tabular results and their CSV / JSON rendering.
//!
//! JSON output carries the same columns and rows as the CSV file plus a
//! metadata block (tool version, SHA-256 of the resolved configuration,
//! physical constants) and an optional task summary.

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::config::{Format, RunConfig};
use crate::constants;

/// Rows of numbers under named columns. Missing values (points where the
/// model had no solution) are `None`: an empty CSV field or JSON `null`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
    /// Task-level results that do not fit the row layout (JSON only).
    pub summary: Map<String, Value>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Table {
            columns,
            rows: Vec::new(),
            summary: Map::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Values of one column, by name.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let j = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// `x` rounded to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("formatted float parses")
}

/// Hex SHA-256 of the canonical configuration text.
pub fn config_hash(config: &RunConfig) -> String {
    let digest = Sha256::digest(config.render().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn metadata(config: &RunConfig) -> Value {
    let consts: Map<String, Value> = constants::table()
        .into_iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "task": config.task.name(),
        "config_sha256": config_hash(config),
        "config": config,
        "constants": consts,
    })
}

fn csv_text(table: &Table, precision: usize) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns).expect("in-memory write");
    for row in &table.rows {
        let fields = row.iter().map(|v| match v {
            Some(x) => round_sig(*x, precision).to_string(),
            None => String::new(),
        });
        w.write_record(fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

fn json_text(table: &Table, config: &RunConfig) -> String {
    let precision = config.output.precision;
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| {
                    let value = match v {
                        Some(x) if x.is_finite() => json!(round_sig(*x, precision)),
                        _ => Value::Null,
                    };
                    (c.to_string(), value)
                })
                .collect();
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "metadata": metadata(config),
        "columns": table.columns,
        "rows": rows,
        "summary": table.summary,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON serialization");
    s.push('\n');
    s
}

/// Render `table` in the configured format.
pub fn render(table: &Table, config: &RunConfig, format: Format) -> String {
    match format {
        Format::Csv => csv_text(table, config.output.precision),
        Format::Json => json_text(table, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::validate;

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(round_sig(1.23456789, 3), 1.23);
        assert_eq!(round_sig(-9.87e-12, 2), -9.9e-12);
        assert_eq!(round_sig(0.0, 5), 0.0);
    }

    #[test]
    fn csv_round_trip_and_missing_values() {
        let config = validate("task = dispersion\n[output]\nprecision = 6\n").unwrap();
        let mut t = Table::new(vec!["a", "b"]);
        t.push(vec![Some(1.0 / 3.0), None]);
        t.push(vec![Some(2.5e9), Some(-7.0)]);
        let text = render(&t, &config, Format::Csv);
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
        assert_eq!(&rows[0][1], "");
        let x: f64 = rows[0][0].parse().unwrap();
        assert!((x - 1.0 / 3.0).abs() < 1e-6);
        assert_eq!(rows[1][0].parse::<f64>().unwrap(), 2.5e9);
    }

    #[test]
    fn json_has_metadata_and_stable_hash() {
        let config = validate("task = dispersion\n").unwrap();
        let mut t = Table::new(vec!["x"]);
        t.push(vec![Some(1.0)]);
        let v: Value = serde_json::from_str(&render(&t, &config, Format::Json)).unwrap();
        assert_eq!(v["metadata"]["config_sha256"].as_str().unwrap().len(), 64);
        assert_eq!(v["rows"][0]["x"], json!(1.0));
        let again = validate("task = dispersion # same run, different text\n\n").unwrap();
        assert_eq!(config_hash(&config), config_hash(&again));
    }
}
