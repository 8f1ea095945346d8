//! JSON and CSV emission.

use std::io::{ErrorKind, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use rough_sio::harness::Report;

pub trait Emit {
    /// Pretty JSON to `path`, or to stdout.
    fn emit(&self, path: Option<&Path>) -> Result<()>;
}

impl<T: Serialize> Emit for T {
    fn emit(&self, path: Option<&Path>) -> Result<()> {
        match path {
            Some(p) => rough_sio::io::write_json(p, self)?,
            None => {
                let text = serde_json::to_string_pretty(self)?;
                match writeln!(std::io::stdout().lock(), "{text}") {
                    // a closed pipe (`| head`) is not an error
                    Err(e) if e.kind() != ErrorKind::BrokenPipe => return Err(e.into()),
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

pub fn write_csv<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>, header: &[&str]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("{}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// checks.csv has one row per check; values.csv one row per reported number.
pub fn report_csv(dir: &Path, report: &Report) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("{}", dir.display()))?;
    let rows = report.checks.iter().map(|c| {
        (c.id.as_str(), format!("{:?}", c.kind), c.passed, c.tolerance, c.bound.unwrap_or(f64::NAN), c.anchor.as_str())
    });
    write_csv(&dir.join("checks.csv"), rows, &["id", "kind", "passed", "tolerance", "bound", "anchor"])?;
    let rows = report
        .checks
        .iter()
        .flat_map(|c| c.values.iter().map(move |(k, v)| (c.id.as_str(), k.as_str(), *v)));
    write_csv(&dir.join("values.csv"), rows, &["id", "name", "value"])
}
