//! Tables and how they are written: CSV with `#` provenance lines, or JSON.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};

pub const TOOL: &str = "relaysec";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// `v` with 9 significant digits, plain decimal for moderate magnitudes and
/// exponent form otherwise. Independent of locale.
pub fn format_sig9(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // exponent after rounding to 9 digits
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn csv_field(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format_sig9(*v),
        Cell::Int(v) => v.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_value(c: &Cell) -> Value {
    match c {
        Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
        Cell::Int(v) => json!(v),
        Cell::Bool(b) => json!(b),
        Cell::Text(s) => json!(s),
        Cell::Empty => Value::Null,
    }
}

/// Identifies a run: who wrote the output and from what.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        let digest = Sha256::digest(config_json(cfg).as_bytes());
        Self {
            command: command.to_string(),
            seed: cfg.seed,
            config_sha256: format!("{digest:x}"),
        }
    }
}

pub fn config_json(cfg: &RunConfig) -> String {
    serde_json::to_string(cfg).expect("config serialises")
}

pub fn write_csv<W: Write>(w: &mut W, table: &Table, prov: &Provenance) -> io::Result<()> {
    writeln!(w, "# {TOOL} {VERSION}")?;
    writeln!(w, "# command: {}", prov.command)?;
    writeln!(w, "# seed: {}", prov.seed)?;
    writeln!(w, "# config_sha256: {}", prov.config_sha256)?;
    writeln!(w, "{}", table.columns.join(","))?;
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(csv_field).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn write_json<W: Write>(w: &mut W, table: &Table, prov: &Provenance) -> io::Result<()> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table.columns.iter().cloned().zip(row.iter().map(json_value)).collect();
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": prov.command,
        "seed": prov.seed,
        "config_sha256": prov.config_sha256,
        "rows": rows,
    });
    serde_json::to_writer_pretty(&mut *w, &doc)?;
    writeln!(w)
}

/// Where the resolved config is echoed for a run.
pub fn sidecar_path(output: Option<&Path>, command: &str) -> PathBuf {
    match output {
        Some(p) => {
            let mut s = p.as_os_str().to_owned();
            s.push(".config.json");
            PathBuf::from(s)
        }
        None => PathBuf::from(format!("{TOOL}-{command}.config.json")),
    }
}

/// Writes the table to the configured destination and the resolved config
/// next to it.
pub fn emit(table: &Table, cfg: &RunConfig, command: &str) -> io::Result<()> {
    let prov = Provenance::new(command, cfg);
    let mut buf = Vec::new();
    match cfg.format {
        Format::Csv => write_csv(&mut buf, table, &prov)?,
        Format::Json => write_json(&mut buf, table, &prov)?,
    }
    match &cfg.output {
        Some(path) => std::fs::write(path, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    let sidecar = json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "config_sha256": prov.config_sha256,
        "config": serde_json::to_value(cfg).expect("config serialises"),
    });
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises");
    std::fs::write(sidecar_path(cfg.output.as_deref(), command), text + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.0), "1");
        assert_eq!(format_sig9(0.1 + 0.2), "0.3");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(-2.0 / 3.0), "-0.666666667");
        assert_eq!(format_sig9(123456789.4), "123456789");
        assert_eq!(format_sig9(1234567894.0), "1.23456789e9");
        assert_eq!(format_sig9(0.0129652527735421), "0.0129652528");
        assert_eq!(format_sig9(4.08e-23), "4.08e-23");
        assert_eq!(format_sig9(9.999999999e-6), "0.00001");
        assert_eq!(format_sig9(9.999999999e-7), "1e-6");
        assert_eq!(format_sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_has_provenance_then_header() {
        let mut t = Table::new(&["name", "x", "flag"]);
        t.push(vec!["a,b".into(), 0.5.into(), true.into()]);
        let prov = Provenance {
            command: "eval".into(),
            seed: 7,
            config_sha256: "ff".into(),
        };
        let mut out = Vec::new();
        write_csv(&mut out, &t, &prov).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[..4].iter().all(|l| l.starts_with('#')));
        assert_eq!(lines[2], "# seed: 7");
        assert_eq!(lines[4], "name,x,flag");
        assert_eq!(lines[5], "\"a,b\",0.5,true");
    }

    #[test]
    fn sidecar_sits_next_to_output() {
        assert_eq!(sidecar_path(Some(Path::new("out/run.csv")), "sweep"), PathBuf::from("out/run.csv.config.json"));
        assert_eq!(sidecar_path(None, "eval"), PathBuf::from("relaysec-eval.config.json"));
    }
}
