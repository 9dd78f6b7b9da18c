//! Tabular output: CSV with provenance comments, or JSON.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Count(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Float(v) => fmt_sig(*v),

            Value::Count(v) => v.to_string(),
            Value::Bool(v) => v.to_string(),
            Value::Text(v) => v.clone(),
            Value::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::Float(v) => serde_json::json!(v),
            Value::Count(v) => serde_json::json!(v),
            Value::Bool(v) => serde_json::json!(v),
            Value::Text(v) => serde_json::json!(v),
            Value::Empty => serde_json::Value::Null,
        }
    }
}

/// Renders a float with 12 significant digits, plainly where readable and in
/// scientific notation for extreme magnitudes. Trailing zeros are trimmed;
/// the value round-trips through `f64::from_str` at full serialized
/// precision.
pub fn fmt_sig(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let encoded = format!("{:.*e}", 11, value);
    let (mantissa, exponent) = encoded.split_once('e').expect("scientific form");
    let exponent: i32 = exponent.parse().expect("numeric exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    if !(-4..12).contains(&exponent) {
        let trimmed = digits.trim_end_matches('0');
        let head = &trimmed[..1];
        let tail = &trimmed[1..];
        let sign = if negative { "-" } else { "" };
        return if tail.is_empty() {
            format!("{sign}{head}e{exponent}")
        } else {
            format!("{sign}{head}.{tail}e{exponent}")
        };
    }
    let point = exponent + 1;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        for _ in 0..-point {
            out.push('0');
        }
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        for _ in 0..(point as usize - digits.len()) {
            out.push('0');
        }
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    if out.contains('.') {
        out = out.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// One output dataset: provenance lines, a header, and rows.
#[derive(Debug)]
pub struct Table {
    pub provenance: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(provenance: Vec<String>, columns: &[&str]) -> Self {
        Self {
            provenance,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for line in &self.provenance {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::csv).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let object: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(column, value)| (column.clone(), value.json()))
                    .collect();
                serde_json::Value::Object(object)
            })
            .collect();
        let document = serde_json::json!({
            "provenance": self.provenance,
            "columns": self.columns,
            "rows": rows,
        });
        let mut text = serde_json::to_string_pretty(&document).expect("serializable");
        text.push('\n');
        text
    }

    /// Writes to the path, or to stdout when no path is given.
    pub fn write(&self, out: Option<&Path>, format: Format) -> io::Result<()> {
        let rendered = self.render(format);
        match out {
            Some(path) => fs::write(path, rendered),
            None => io::stdout().write_all(rendered.as_bytes()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.18), "0.18");
        assert_eq!(fmt_sig(7.6716), "7.6716");
        assert_eq!(fmt_sig(-9.0), "-9");
        assert_eq!(fmt_sig(1e-6), "1e-6");
        assert_eq!(fmt_sig(25.9433962264), "25.9433962264");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(123456789012345.0), "1.23456789012e14");
        let round_trip: f64 = fmt_sig(8.790048).parse().unwrap();
        assert_eq!(round_trip, 8.790048);
    }

    #[test]
    fn csv_includes_provenance_and_header() {
        let mut table = Table::new(vec!["tool x".into()], &["a", "b"]);
        table.push(vec![Value::Float(0.5), Value::Text("DF".into())]);
        let text = table.render(Format::Csv);
        assert_eq!(text, "# tool x\na,b\n0.5,DF\n");
    }

    #[test]
    fn json_round_trips() {
        let mut table = Table::new(vec![], &["a"]);
        table.push(vec![Value::Bool(true)]);
        let parsed: serde_json::Value = serde_json::from_str(&table.render(Format::Json)).unwrap();
        assert_eq!(parsed["rows"][0]["a"], serde_json::json!(true));
    }
}
