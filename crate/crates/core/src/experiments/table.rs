//! CSV form of sweep results.

use std::path::Path;

use super::{RowMetrics, Strategy, SweepRow};
use crate::error::{Error, Result};

pub const COLUMNS: [&str; 10] = [
    "sweep_value",
    "strategy",
    "K",
    "se_bits",
    "erank",
    "elements_list",
    "powers_list",
    "sca_iters",
    "wall_ms",
    "error",
];

/// Plain decimal notation rounded to 12 significant digits, with trailing
/// zeros dropped.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.11e}", x.abs());
    let (mantissa, exponent) = sci
        .split_once('e')
        .expect("scientific notation has an exponent");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if x < 0.0 {
        out.push('-');
    }
    if exponent >= 11 {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', (exponent - 11) as usize));
        return out;
    }
    let body = if exponent >= 0 {
        let split = exponent as usize + 1;
        format!("{}.{}", &digits[..split], &digits[split..])
    } else {
        format!("0.{}{}", "0".repeat((-exponent - 1) as usize), digits)
    };
    let body = body.trim_end_matches('0').trim_end_matches('.');
    out.push_str(body);
    out
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(";")
}

/// Renders `rows` with a header line.
pub fn render_csv(rows: &[SweepRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::domain("cannot write an empty result table"));
    }
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    writer.write_record(COLUMNS).map_err(io)?;
    for row in rows {
        let wall = row.wall_ms.map(format_real).unwrap_or_default();
        let record: [String; 10] = match &row.outcome {
            Ok(m) => [
                format_real(row.sweep_value),
                row.strategy.to_string(),
                row.k.to_string(),
                format_real(m.se_bits),
                format_real(m.erank),
                join(&m.elements, |e| e.to_string()),
                join(&m.powers, |&p| format_real(p)),
                m.sca_iters.to_string(),
                wall,
                String::new(),
            ],
            Err(message) => [
                format_real(row.sweep_value),
                row.strategy.to_string(),
                row.k.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                wall,
                message.clone(),
            ],
        };
        writer.write_record(&record).map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV built from UTF-8 strings"))
}

pub fn emit_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(rows)?)?;
    Ok(())
}

fn cell<T: std::str::FromStr>(field: &str, text: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::parse(field, format!("cannot read `{text}`")))
}

fn list<T: std::str::FromStr>(field: &str, text: &str) -> Result<Vec<T>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(';').map(|t| cell(field, t)).collect()
}

/// Reads a table written by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse("header", e.to_string()))?;
    if header.iter().ne(COLUMNS.iter().copied()) {
        return Err(Error::parse("header", "columns do not match"));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::parse("row", e.to_string()))?;
        let get = |i: usize| record.get(i).unwrap_or("");
        let outcome = if get(9).is_empty() {
            Ok(RowMetrics {
                se_bits: cell(COLUMNS[3], get(3))?,
                erank: cell(COLUMNS[4], get(4))?,
                elements: list(COLUMNS[5], get(5))?,
                powers: list(COLUMNS[6], get(6))?,
                sca_iters: cell(COLUMNS[7], get(7))?,
            })
        } else {
            Err(get(9).to_string())
        };
        rows.push(SweepRow {
            sweep_value: cell(COLUMNS[0], get(0))?,
            strategy: get(1).parse::<Strategy>()?,
            k: cell(COLUMNS[2], get(2))?,
            outcome,
            wall_ms: if get(8).is_empty() {
                None
            } else {
                Some(cell(COLUMNS[8], get(8))?)
            },
        });
    }
    Ok(rows)
}
