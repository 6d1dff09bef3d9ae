//! Typed output tables with CSV and JSON emission at 12 significant digits.

use clap::ValueEnum;
use serde_json::{Map, Number, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Number,
    Integer,
    Bool,
    Text,
    /// Structured value; compact JSON inside a CSV cell.
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Integer(i64),
    Bool(bool),
    Text(String),
    Json(Value),
}

impl Cell {
    fn kind(&self) -> Kind {
        match self {
            Cell::Number(_) => Kind::Number,
            Cell::Integer(_) => Kind::Integer,
            Cell::Bool(_) => Kind::Bool,
            Cell::Text(_) => Kind::Text,
            Cell::Json(_) => Kind::Json,
        }
    }

    fn to_field(&self) -> String {
        match self {
            Cell::Number(x) => format_number(*x),
            Cell::Integer(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Json(v) => round_json(v).to_string(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Number(x) => number_value(*x),
            Cell::Integer(i) => Value::from(*i),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Json(v) => round_json(v),
        }
    }

    fn parse(field: &str, kind: Kind) -> Result<Cell, CliError> {
        let bad = || CliError::Parse(format!("cannot read '{field}' as {kind:?}"));
        Ok(match kind {
            Kind::Number => Cell::Number(field.parse().map_err(|_| bad())?),
            Kind::Integer => Cell::Integer(field.parse().map_err(|_| bad())?),
            Kind::Bool => Cell::Bool(field.parse().map_err(|_| bad())?),
            Kind::Text => Cell::Text(field.to_string()),
            Kind::Json => Cell::Json(serde_json::from_str(field).map_err(|_| bad())?),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: Kind,
}

impl Column {
    pub fn new(name: &str, kind: Kind) -> Self {
        Self {
            name: name.to_string(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    columns: Vec<Column>,
    rows: Vec<Vec<Cell>>,
}

impl OutputTable {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    /// All columns numeric.
    pub fn numeric(names: &[&str]) -> Self {
        Self::new(names.iter().map(|n| Column::new(n, Kind::Number)).collect())
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn header(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<(), CliError> {
        if row.len() != self.columns.len() {
            return Err(CliError::Parse(format!(
                "row has {} cells, table has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        if let Some((c, _)) = self.columns.iter().zip(&row).find(|(c, v)| c.kind != v.kind()) {
            return Err(CliError::Parse(format!("column {} expects {:?}", c.name, c.kind)));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn push_numbers(&mut self, values: &[f64]) -> Result<(), CliError> {
        self.push(values.iter().map(|&v| Cell::Number(v)).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| w.write_record(rec).expect("in-memory write");
        write(&mut w, self.header().into_iter().map(String::from).collect());
        for row in &self.rows {
            write(&mut w, row.iter().map(Cell::to_field).collect());
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }

    /// `{"metadata": …, "rows": [{column: value}, …]}`.
    pub fn to_json(&self, metadata: &Value) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (c, v) in self.columns.iter().zip(row) {
                    m.insert(c.name.clone(), v.to_json());
                }
                Value::Object(m)
            })
            .collect();
        let doc = serde_json::json!({"metadata": metadata, "rows": rows});
        let mut s = serde_json::to_string_pretty(&doc).expect("JSON serialization");
        s.push('\n');
        s
    }

    pub fn emit(&self, format: Format, metadata: &Value) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(metadata),
        }
    }

    /// Read CSV written by [`OutputTable::to_csv`] back under a known schema.
    pub fn from_csv(text: &str, columns: Vec<Column>) -> Result<Self, CliError> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| CliError::Parse(e.to_string()))?.clone();
        let names: Vec<&str> = header.iter().collect();
        let expected: Vec<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        if names != expected {
            return Err(CliError::Parse(format!("header {names:?} does not match {expected:?}")));
        }
        let mut table = Self::new(columns);
        for rec in r.records() {
            let rec = rec.map_err(|e| CliError::Parse(e.to_string()))?;
            let row = rec
                .iter()
                .zip(&table.columns)
                .map(|(f, c)| Cell::parse(f, c.kind))
                .collect::<Result<Vec<_>, _>>()?;
            table.push(row)?;
        }
        Ok(table)
    }
}

/// Shortest decimal form of `x` rounded to 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        trim_zeros(format!("{:.*}", (11 - exp).max(0) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// `x` rounded to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    format_number(x).parse().unwrap_or(x)
}

fn number_value(x: f64) -> Value {
    match Number::from_f64(round_sig(x)) {
        Some(n) => Value::Number(n),
        None => Value::String(format_number(x)),
    }
}

/// Round every floating-point number inside `v`.
pub fn round_json(v: &Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => number_value(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(a) => Value::Array(a.iter().map(round_json).collect()),
        Value::Object(m) => Value::Object(m.iter().map(|(k, v)| (k.clone(), round_json(v))).collect()),
        other => other.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.5), "0.5");
        assert_eq!(format_number(1e-8), "1e-8");
        assert_eq!(format_number(6.907755278982137), "6.90775527898");
        assert_eq!(format_number(-1234.5), "-1234.5");
        assert_eq!(format_number(1.0 / 3.0 * 1e20), "3.33333333333e19");
        assert_eq!(format_number(f64::NEG_INFINITY), "-inf");
        assert_eq!(format_number(3.0), "3");
    }

    #[test]
    fn empty_table_is_header_only() {
        let t = OutputTable::numeric(&["eps", "q", "trace"]);
        assert_eq!(t.to_csv(), "eps,q,trace\n");
    }

    #[test]
    fn one_row_round_trip() {
        let mut t = OutputTable::new(vec![
            Column::new("name", Kind::Text),
            Column::new("x", Kind::Number),
            Column::new("n", Kind::Integer),
            Column::new("ok", Kind::Bool),
            Column::new("extra", Kind::Json),
        ]);
        t.push(vec![
            Cell::Text("a, \"quoted\" name".into()),
            Cell::Number(-2.5e-7),
            Cell::Integer(42),
            Cell::Bool(true),
            Cell::Json(serde_json::json!({"k": [1, 0.25]})),
        ])
        .unwrap();
        let back = OutputTable::from_csv(&t.to_csv(), t.columns().to_vec()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rows_must_match_columns() {
        let mut t = OutputTable::numeric(&["a", "b"]);
        assert!(t.push_numbers(&[1.0]).is_err());
        assert!(t.push(vec![Cell::Number(1.0), Cell::Bool(false)]).is_err());
    }

    #[test]
    fn json_rounds_numbers() {
        let mut t = OutputTable::numeric(&["x"]);
        t.push_numbers(&[1.234_567_890_123_45]).unwrap();
        let doc: Value = serde_json::from_str(&t.to_json(&Value::Null)).unwrap();
        assert_eq!(doc["rows"][0]["x"].as_f64(), Some(1.234_567_890_12));
    }

    proptest! {
        #[test]
        fn emitted_numbers_are_stable(x in prop::num::f64::NORMAL) {
            let s = format_number(x);
            let y: f64 = s.parse().unwrap();
            prop_assert_eq!(format_number(y), s);
            prop_assert!(((y - x) / x).abs() <= 5e-12);
        }
    }
}
