//! Tables rendered as text, JSON or CSV from one set of cells, so the
//! formats always carry the same numbers.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde_json::{json, Map, Number, Value};

/// Version tag of the JSON layout.
pub const SCHEMA: &str = "repcount-output/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Decimal digits of an integer of any size.
    Int(String),
    Float(f64),
    Text(String),
    Bool(bool),
    Null,
}

impl Cell {
    pub fn int(v: impl ToString) -> Cell {
        Cell::Int(v.to_string())
    }

    pub fn opt_float(v: Option<f64>) -> Cell {
        v.map_or(Cell::Null, Cell::Float)
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(s) => {
                if let Ok(v) = s.parse::<i64>() {
                    Value::from(v)
                } else if let Ok(v) = s.parse::<u64>() {
                    Value::from(v)
                } else {
                    Value::String(s.clone())
                }
            }
            Cell::Float(v) => Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Null => Value::Null,
        }
    }

    /// The CSV spelling; floats use the same shortest round-trip form as
    /// JSON and missing values are empty.
    fn plain(&self) -> String {
        match self {
            Cell::Int(s) | Cell::Text(s) => s.clone(),
            Cell::Float(v) if v.is_finite() => serde_json::to_string(v).expect("finite float"),
            Cell::Float(_) | Cell::Null => String::new(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Null => "-".into(),
            Cell::Float(v) if !v.is_finite() => v.to_string(),
            other => other.plain(),
        }
    }
}

/// Named columns plus rows; complex numbers are stored as `name_re`,
/// `name_im` column pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Replaces the generic text rendering when set.
    pub text: Option<String>,
}

pub struct RowBuilder(Vec<(String, Cell)>);

impl RowBuilder {
    pub fn new() -> RowBuilder {
        RowBuilder(Vec::new())
    }

    pub fn cell(mut self, name: impl Into<String>, c: Cell) -> RowBuilder {
        self.0.push((name.into(), c));
        self
    }

    pub fn float(self, name: impl Into<String>, v: f64) -> RowBuilder {
        self.cell(name, Cell::Float(v))
    }

    pub fn int(self, name: impl Into<String>, v: impl ToString) -> RowBuilder {
        self.cell(name, Cell::int(v))
    }

    pub fn text(self, name: impl Into<String>, v: impl Into<String>) -> RowBuilder {
        self.cell(name, Cell::Text(v.into()))
    }

    pub fn bool(self, name: impl Into<String>, v: bool) -> RowBuilder {
        self.cell(name, Cell::Bool(v))
    }

    pub fn complex(self, name: &str, re: f64, im: f64) -> RowBuilder {
        self.float(format!("{name}_re"), re).float(format!("{name}_im"), im)
    }
}

impl Table {
    pub fn new(command: &str) -> Table {
        Table { command: command.into(), columns: Vec::new(), rows: Vec::new(), text: None }
    }

    /// Appends a row; the first row fixes the columns.
    pub fn push(&mut self, row: RowBuilder) {
        let (names, cells): (Vec<String>, Vec<Cell>) = row.0.into_iter().unzip();
        if self.rows.is_empty() && self.columns.is_empty() {
            self.columns = names;
        } else {
            assert_eq!(self.columns, names, "row columns differ from the table header");
        }
        self.rows.push(cells);
    }

    pub fn with_text(mut self, text: String) -> Table {
        self.text = Some(text);
        self
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut obj = Map::new();
                for (name, c) in self.columns.iter().zip(r) {
                    obj.insert(name.clone(), c.json());
                }
                Value::Object(obj)
            })
            .collect();
        json!({ "schema": SCHEMA, "command": self.command, "columns": self.columns, "rows": rows })
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::plain))?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn to_text(&self) -> String {
        if let Some(t) = &self.text {
            return t.clone();
        }
        let mut out = String::new();
        if self.rows.len() == 1 {
            let width = self.columns.iter().map(|c| c.chars().count()).max().unwrap_or(0);
            for (name, c) in self.columns.iter().zip(&self.rows[0]) {
                let _ = writeln!(out, "{name:<width$}  {}", c.text());
            }
            return out;
        }
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::text).collect()).collect();
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|k| {
                cells
                    .iter()
                    .map(|r| r[k].chars().count())
                    .chain([self.columns[k].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |items: Vec<&str>| {
            let parts: Vec<String> = items.iter().zip(&widths).map(|(s, w)| format!("{s:>w$}")).collect();
            parts.join("  ").trim_end().to_string()
        };
        let _ = writeln!(out, "{}", line(self.columns.iter().map(String::as_str).collect()));
        for r in &cells {
            let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
        }
        out
    }

    pub fn render(&self, format: Format) -> Result<String> {
        Ok(match format {
            Format::Text => self.to_text(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.to_json())?;
                s.push('\n');
                s
            }
            Format::Csv => self.to_csv()?,
        })
    }
}

/// Writes `content` to `path` atomically: a temporary file in the same
/// directory is renamed over the target.
pub fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path.file_name().context("output path has no file name")?.to_string_lossy();
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.subsec_nanos());
    let tmp = dir.join(format!(".{name}.{}.{nanos}.tmp", std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(content)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo");
        t.push(RowBuilder::new().int("n", 4).float("x", 0.1).complex("z", 1.5, -2.0).cell("y", Cell::Null));
        t.push(RowBuilder::new().int("n", "123456789012345678901234567890").float("x", 1e-7).complex("z", 0.0, 0.0).bool("y", true));
        t
    }

    #[test]
    #[should_panic]
    fn mismatched_rows_panic() {
        let mut t = Table::new("demo");
        t.push(RowBuilder::new().int("a", 1));
        t.push(RowBuilder::new().int("b", 1));
    }

    #[test]
    fn csv_and_json_carry_the_same_numbers() {
        let t = sample();
        let csv = t.to_csv().unwrap();
        let json = t.to_json();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "n,x,z_re,z_im,y");
        let rows = json["rows"].as_array().unwrap();
        for (line, row) in lines.zip(rows) {
            let fields: Vec<&str> = line.split(',').collect();
            for (k, name) in t.columns.iter().enumerate() {
                let v = &row[name];
                let expect = match v {
                    Value::Null => String::new(),
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                assert_eq!(fields[k], expect, "column {name}");
            }
        }
    }

    #[test]
    fn text_single_row_is_key_value() {
        let mut t = Table::new("one");
        t.push(RowBuilder::new().int("count", 24).text("digest", "ab"));
        assert_eq!(t.to_text(), "count   24\ndigest  ab\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
