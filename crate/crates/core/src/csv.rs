use std::io::Write;

use crate::error::Result;

/// Scientific notation with 16 significant digits.
pub(crate) fn sci(x: f64) -> String {
    format!("{x:.15e}")
}

pub(crate) fn write_path<W: Write>(mut w: W, rows: impl Iterator<Item = (f64, f64)>) -> Result<()> {
    writeln!(w, "t,X")?;
    for (t, x) in rows {
        writeln!(w, "{},{}", sci(t), sci(x))?;
    }
    w.flush()?;
    Ok(())
}
