use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::args::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x)
                .map(Value::Number)
                .unwrap_or_else(|| Value::String(num(*x))),
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

/// Seventeen significant digits: enough to recover every `f64` exactly.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn num_list(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(",")
}

/// One result table plus the metadata needed to reproduce it.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub command: &'static str,
    /// Resolved inputs; these, and only these, enter the config hash.
    pub params: Vec<(&'static str, String)>,
    /// Derived quantities shared by all rows.
    pub info: Vec<(&'static str, Cell)>,
    pub warnings: Vec<String>,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(command: &'static str, columns: &[&'static str]) -> Self {
        Table {
            command,
            columns: columns.to_vec(),
            ..Default::default()
        }
    }

    pub fn param(&mut self, key: &'static str, value: impl Into<String>) {
        self.params.push((key, value.into()));
    }

    pub fn info(&mut self, key: &'static str, value: impl Into<Cell>) {
        self.info.push((key, value.into()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.command.as_bytes());
        h.update(b"\n");
        for (k, v) in &self.params {
            h.update(format!("{k}={v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.csv(),
            Format::Json => self.json(),
        }
    }

    fn csv(&self) -> String {
        let mut s = format!("# magstep {} {}\n", magstep::VERSION, self.command);
        s += &format!("# config_sha256 = {}\n", self.config_hash());
        for (k, v) in &self.params {
            s += &format!("# {k} = {v}\n");
        }
        for (k, v) in &self.info {
            s += &format!("# {k} = {}\n", v.text());
        }
        for w in &self.warnings {
            s += &format!("# WARNING: {w}\n");
        }
        s += &self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s += &row.iter().map(Cell::text).collect::<Vec<_>>().join(",");
            s.push('\n');
        }
        s
    }

    fn json(&self) -> String {
        let params: Map<String, Value> = self
            .params
            .iter()
            .map(|(k, v)| (k.to_string(), json!(v)))
            .collect();
        let info: Map<String, Value> = self
            .info
            .iter()
            .map(|(k, v)| (k.to_string(), v.json()))
            .collect();
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = json!({
            "toolkit": "magstep",
            "version": magstep::VERSION,
            "command": self.command,
            "config_sha256": self.config_hash(),
            "params": params,
            "info": info,
            "warnings": self.warnings,
            "columns": self.columns,
            "rows": rows,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("table serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new("demo", &["x", "n", "ok"]);
        t.param("a", num(-0.5));
        t.info("beta", 0.1 + 0.2);
        t.push(vec![Cell::Num(1.0 / 3.0), Cell::Int(4), Cell::Bool(true)]);
        t
    }

    #[test]
    fn printed_numbers_round_trip() {
        for x in [
            1.0 / 3.0,
            -0.664312923064,
            1e-300,
            5e-324,
            f64::MAX,
            0.1 + 0.2,
        ] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let s = sample().render(Format::Csv);
        let lines: Vec<&str> = s.lines().collect();
        assert!(lines[0].starts_with("# magstep "));
        assert!(lines[1].starts_with("# config_sha256 = "));
        assert_eq!(lines[4], "x,n,ok");
        assert_eq!(lines[5], "3.3333333333333331e-1,4,true");
    }

    #[test]
    fn json_carries_the_same_numbers() {
        let v: Value = serde_json::from_str(&sample().render(Format::Json)).unwrap();
        assert_eq!(v["rows"][0][0].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(v["info"]["beta"].as_f64().unwrap(), 0.1 + 0.2);
        assert_eq!(v["config_sha256"], json!(sample().config_hash()));
    }

    #[test]
    fn hash_tracks_params_only() {
        let a = sample();
        let mut b = sample();
        b.info("extra", 1.0);
        assert_eq!(a.config_hash(), b.config_hash());
        b.param("delta", num(0.01));
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.config_hash().len(), 64);
    }
}
