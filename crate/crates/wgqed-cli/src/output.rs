//! result.csv, summary.json and grid.bin.

use std::io::Write;
use std::path::Path;

use serde_json::{Value, json};

use crate::config::Config;
use crate::scenarios::Outcome;
use crate::CliError;

/// Rounds to 12 significant digits and prints the shortest decimal that
/// reads back to the rounded value.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let r: f64 = format!("{x:.11e}").parse().expect("round trip");
    if r == 0.0 {
        return "0".into();
    }
    let a = r.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

pub fn csv_bytes(out: &Outcome) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Io(format!("csv: {e}"));
    w.write_record(&out.header).map_err(err)?;
    for row in &out.rows {
        w.write_record(row.iter().map(|v| format_float(*v))).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Io(format!("csv: {e}")))
}

pub fn summary(config: &Config, out: &Outcome) -> Value {
    json!({
        "scenario": config.scenario.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "results": out.scalars,
        "config": config,
    })
}

/// Little-endian: magic `WGQD`, u32 version 1, u64 rows, u64 cols, then
/// rows·cols (re, im) f64 pairs in row-major order.
pub fn grid_bytes(rows: usize, cols: usize, values: &[wgqed::C64]) -> Vec<u8> {
    let mut b = Vec::with_capacity(24 + 16 * values.len());
    b.extend_from_slice(b"WGQD");
    b.extend_from_slice(&1u32.to_le_bytes());
    b.extend_from_slice(&(rows as u64).to_le_bytes());
    b.extend_from_slice(&(cols as u64).to_le_bytes());
    for v in values {
        b.extend_from_slice(&v.re.to_le_bytes());
        b.extend_from_slice(&v.im.to_le_bytes());
    }
    b
}

pub fn write_all(dir: &Path, config: &Config, out: &Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let p = dir.join("result.csv");
    std::fs::write(&p, csv_bytes(out)?).map_err(io(&p))?;
    let p = dir.join("summary.json");
    let mut f = std::fs::File::create(&p).map_err(io(&p))?;
    serde_json::to_writer_pretty(&mut f, &summary(config, out)).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    f.write_all(b"\n").map_err(io(&p))?;
    if let Some((r, c, v)) = &out.grid {
        let p = dir.join("grid.bin");
        std::fs::write(&p, grid_bytes(*r, *c, v)).map_err(io(&p))?;
    }
    Ok(())
}
