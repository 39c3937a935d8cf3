//! CSV tables with an optional `#` provenance line.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

/// `printf("%.{precision}g", x)`.
pub fn format_g(x: f64, precision: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = precision.max(1);
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_g(*x, 12),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub provenance: Option<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.to_string(),
            provenance: None,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header of {}", self.name);
        self.rows.push(row);
    }

    pub fn write_to(&self, out: impl Write) -> Result<()> {
        let mut out = out;
        if let Some(p) = &self.provenance {
            writeln!(out, "# {p}")?;
        }
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
        self.write_to(f).with_context(|| format!("writing {}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (0.1, "0.1"),
            (123456.789, "123456.789"),
            (1.0 / 3.0, "0.333333333333"),
            (2.0 / 3.0 * 1e-5, "6.66666666667e-06"),
            (1e12, "1e+12"),
            (999999999999.0, "999999999999"),
            (9999999999999.0, "1e+13"),
            (-5.05, "-5.05"),
            (1e-4, "0.0001"),
            (1.5e100, "1.5e+100"),
        ];
        for (x, want) in cases {
            assert_eq!(format_g(x, 12), want, "{x}");
        }
        assert_eq!(format_g(f64::INFINITY, 12), "inf");
        assert_eq!(format_g(f64::NAN, 12), "nan");
    }

    #[test]
    fn values_round_trip_to_twelve_digits() {
        for x in [std::f64::consts::PI, 1e-300, 6.02214076e23, -2.5e-7] {
            let back: f64 = format_g(x, 12).parse().unwrap();
            assert!((back - x).abs() <= 5e-12 * x.abs());
        }
    }

    #[test]
    fn provenance_line_and_rows() {
        let mut t = Table::new("t", &["a", "b"]);
        t.provenance = Some("made here".into());
        t.push(vec![1.0.into(), "x".into()]);
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "# made here\na,b\n1,x\n");
    }
}
