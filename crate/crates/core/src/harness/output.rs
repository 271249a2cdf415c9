use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// A record with a fixed CSV schema.
pub trait CsvRow {
    fn header() -> &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

/// Formats with six significant digits, `%g` style: fixed notation for
/// exponents in `-4..6`, scientific otherwise, trailing zeros removed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<R: CsvRow, W: Write>(rows: &[R], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{}", R::header().join(","))?;
    for row in rows {
        writeln!(w, "{}", row.fields().join(","))?;
    }
    w.flush()
}

/// Writes `rows` under their header to `path` (UTF-8, `\n` line endings).
pub fn emit_csv<R: CsvRow>(rows: &[R], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}
