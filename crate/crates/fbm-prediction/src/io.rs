//! CSV in and out.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use csv::{ReaderBuilder, Terminator, WriterBuilder};
use fbm_prediction_core::ObservedPath;

use crate::error::{CliError, Result};

/// 17 significant digits, `.` decimal separator, no grouping.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// An in-memory CSV document: a mandatory header and LF-terminated rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|&x| fmt_num(x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = WriterBuilder::new()
            .terminator(Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("write to memory");
        for r in &self.rows {
            w.write_record(r).expect("write to memory");
        }
        w.into_inner().expect("flush to memory")
    }
}

pub fn read_path_file(path: &Path) -> Result<ObservedPath> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| CliError::io(path, e))?;
    parse_path_csv(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses a `time,value` file. Errors carry the 1-based line number.
pub fn parse_path_csv(text: &str) -> Result<ObservedPath> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = rdr
        .headers()
        .map_err(|e| CliError::Input(format!("line 1: {e}")))?
        .clone();
    if header.iter().collect::<Vec<_>>() != ["time", "value"] {
        return Err(CliError::Input(format!(
            "line 1: expected header `time,value`, found `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            CliError::Input(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize, name: &str| -> Result<f64> {
            let raw = &rec[i];
            let x: f64 = raw
                .parse()
                .map_err(|_| CliError::Input(format!("line {line}: {name} `{raw}` is not a number")))?;
            if !x.is_finite() {
                return Err(CliError::Input(format!("line {line}: {name} is not finite")));
            }
            Ok(x)
        };
        let (t, v) = (field(0, "time")?, field(1, "value")?);
        if times.is_empty() && (t != 0.0 || v != 0.0) {
            return Err(CliError::Input(format!(
                "line {line}: path must start with time 0 and value 0"
            )));
        }
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(CliError::Input(format!(
                    "line {line}: times must be strictly increasing ({t} after {prev})"
                )));
            }
        }
        times.push(t);
        values.push(v);
    }
    if times.len() < 2 {
        return Err(CliError::Input("path needs at least two rows after the header".into()));
    }
    Ok(ObservedPath::new(times, values)?)
}

pub fn write_output(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn std::io::Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::io(p, e)),
        None => stdout
            .write_all(bytes)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, -2.5e-300, 123456.789, 0.0] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            assert!(!s.contains(','));
        }
        assert_eq!(fmt_num(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn table_uses_lf() {
        let mut t = Table::new(&["t", "mean"]);
        t.push_nums(&[1.0, 2.0]);
        let s = String::from_utf8(t.to_bytes()).unwrap();
        assert_eq!(s, "t,mean\n1.0000000000000000e0,2.0000000000000000e0\n");
    }

    #[test]
    fn parses_valid_path() {
        let p = parse_path_csv("time,value\n0,0\n0.5,0.2\n1,-0.1\n").unwrap();
        assert_eq!(p.u(), 1.0);
        assert_eq!(p.last_value(), -0.1);
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("t,v\n0,0\n1,1\n", "line 1"),
            ("time,value\n0,0\n0.5,abc\n", "line 3"),
            ("time,value\n0,0\n0.5,1\n0.5,2\n", "line 4"),
            ("time,value\n0.1,0\n0.5,1\n", "line 2"),
            ("time,value\n0,0\n0.5,1,3\n", "line 3"),
        ];
        for (text, want) in cases {
            let msg = parse_path_csv(text).unwrap_err().to_string();
            assert!(msg.contains(want), "{text:?}: {msg}");
        }
        assert!(parse_path_csv("time,value\n0,0\n").is_err());
    }
}
