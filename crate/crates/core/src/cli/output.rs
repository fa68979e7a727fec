//! CSV and JSON writers. Every file starts with the resolved configuration.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;

/// Writes `# config: {json}`, a header row and `{:.16e}` rows.
pub fn write_csv(path: &Path, provenance: &str, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    writeln!(buf, "# config: {provenance}")?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(csv_error)?;
        for r in rows {
            w.write_record(r.iter().map(|v| format!("{v:.16e}"))).map_err(csv_error)?;
        }
        w.flush()?;
    }
    fs::write(path, buf)?;
    Ok(())
}

fn csv_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e.to_string())
}

#[derive(Serialize)]
struct WithConfig<'a, T: Serialize> {
    config: &'a serde_json::Value,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON object `{"config": …, …body}`.
pub fn write_json<T: Serialize>(path: &Path, provenance: &str, body: &T) -> Result<()> {
    let config: serde_json::Value = serde_json::from_str(provenance)?;
    let text = serde_json::to_string_pretty(&WithConfig { config: &config, body })?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Column names `x1..xN, y1..yN, t` (or `x, y, t` on ℍ¹).
pub fn coordinate_header(n: usize) -> Vec<String> {
    if n == 1 {
        return vec!["x".into(), "y".into(), "t".into()];
    }
    let mut h: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    h.extend((1..=n).map(|i| format!("y{i}")));
    h.push("t".into());
    h
}
