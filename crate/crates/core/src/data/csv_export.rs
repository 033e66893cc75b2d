use std::io::Write;

use super::LocalDataset;
use crate::error::{Error, Result};

/// Writes partitioned data as CSV with header `f1..fd,label,location`.
pub fn write_csv<W: Write>(mut out: W, locations: &[LocalDataset]) -> Result<()> {
    let dim = locations.iter().find_map(LocalDataset::dim).unwrap_or(0);
    let io = |e| Error::io("<csv>", e);
    let header: Vec<String> = (1..=dim).map(|j| format!("f{j}")).collect();
    writeln!(out, "{},label,location", header.join(",")).map_err(io)?;
    for loc in locations {
        for s in &loc.samples {
            let row: Vec<String> = s.features.iter().map(|v| v.to_string()).collect();
            writeln!(out, "{},{},{}", row.join(","), s.label, loc.location_id).map_err(io)?;
        }
    }
    Ok(())
}
