//! Table emitters. Rows keep config order; cells are JSON values so both
//! formats render numbers identically.

use std::io::Write;

use clap::ValueEnum;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A column, optionally omitted from CSV output (nested objects).
#[derive(Clone, Copy, Debug)]
pub struct Column {
    pub name: &'static str,
    pub csv: bool,
}

pub const fn col(name: &'static str) -> Column {
    Column { name, csv: true }
}

pub const fn json_only(name: &'static str) -> Column {
    Column { name, csv: false }
}

#[derive(Clone, Debug)]
pub struct Table {
    columns: Vec<Column>,
    rows: Vec<Vec<Value>>,
}

impl Table {
    /// Every table starts with the config hash and mode columns.
    pub fn new(columns: &[Column]) -> Self {
        let mut all = vec![col("config_hash"), col("mode")];
        all.extend_from_slice(columns);
        Table { columns: all, rows: Vec::new() }
    }

    pub fn push(&mut self, hash: &str, mode: &str, cells: Vec<Value>) {
        assert_eq!(cells.len() + 2, self.columns.len(), "row width must match the header");
        let mut row = vec![Value::from(hash), Value::from(mode)];
        row.extend(cells);
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<(), CliError> {
        let keep: Vec<usize> = (0..self.columns.len()).filter(|&i| self.columns[i].csv).collect();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(keep.iter().map(|&i| self.columns[i].name))?;
        for row in &self.rows {
            w.write_record(keep.iter().map(|&i| render(&row[i])))?;
        }
        w.flush()?;
        Ok(())
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<(), CliError> {
        for row in &self.rows {
            let obj: Map<String, Value> = self
                .columns
                .iter()
                .zip(row)
                .map(|(c, v)| (c.name.to_string(), v.clone()))
                .collect();
            serde_json::to_writer(&mut *out, &obj).map_err(|e| CliError::Io(e.to_string()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn render(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Table {
        let mut t = Table::new(&[col("d"), col("note"), json_only("extra")]);
        t.push("abc", "float", vec![json!(2), json!("a,b"), json!({"x": 1})]);
        t.push("abc", "float", vec![json!(3), Value::Null, json!(null)]);
        t
    }

    #[test]
    fn csv_quotes_and_drops_nested_columns() {
        let mut buf = Vec::new();
        sample().write(Format::Csv, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "config_hash,mode,d,note\nabc,float,2,\"a,b\"\nabc,float,3,\n");
    }

    #[test]
    fn json_lines_keep_column_order() {
        let mut buf = Vec::new();
        sample().write(Format::Json, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        assert_eq!(first, r#"{"config_hash":"abc","mode":"float","d":2,"note":"a,b","extra":{"x":1}}"#);
        assert_eq!(text.lines().count(), 2);
    }
}
