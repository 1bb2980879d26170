//! CSV emission: `#`-prefixed manifest lines, a header row, then data rows.
//! Floats carry 17 significant digits so round-tripping them is lossless.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::manifest::RunManifest;

/// 17 significant digits (1 leading + 16 after the point).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one CSV document to `path`, or to stdout when `path` is `None`.
pub fn write_csv(
    path: Option<&Path>,
    manifest: &RunManifest,
    columns: &[&str],
    rows: &[Vec<String>],
) -> io::Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            write_csv_to(&mut w, manifest, columns, rows)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_csv_to(&mut w, manifest, columns, rows)
        }
    }
}

fn write_csv_to(
    w: &mut impl Write,
    manifest: &RunManifest,
    columns: &[&str],
    rows: &[Vec<String>],
) -> io::Result<()> {
    for line in manifest.comment_lines() {
        writeln!(w, "{line}")?;
    }
    writeln!(w, "{}", columns.join(","))?;
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_f64(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(fmt_f64(0.0), "0.0000000000000000e0");
    }
}
