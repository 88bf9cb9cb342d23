use std::io::Write;

use super::FeatureMatrix;
use crate::error::Result;

/// Writes a feature matrix as CSV: a `# kind=... config=...` comment line,
/// a header built from the legend, then one line per row.
pub fn write_feature_csv<W: Write>(out: &mut W, matrix: &FeatureMatrix, config_hash: &str) -> Result<()> {
    writeln!(out, "# kind={} config={}", matrix.kind, config_hash)?;
    let header: Vec<String> = matrix.legend.iter().map(|c| c.header()).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in matrix.values.rows() {
        let cells: Vec<String> = row.iter().map(|v| format_value(*v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn format_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}
