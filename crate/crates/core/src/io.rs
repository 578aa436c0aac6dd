//! CSV formatting shared by every exporter.

use std::io::Write;

use crate::error::Result;

/// Formats a float with 17 significant digits, locale independent.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

/// Writes a header row and then one row per record.
pub fn write_csv<W: Write>(mut w: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}
