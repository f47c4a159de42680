//! File writers. CSV uses `,` separators, `.` decimals and LF line endings;
//! floats are printed in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use goodwin_core::simulation::Trajectory;
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    #[default]
    Both,
}

impl Format {
    pub fn json(self) -> bool {
        self != Self::Csv
    }

    pub fn csv(self) -> bool {
        self != Self::Json
    }
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))
}

pub fn trajectory_header(n: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for var in 1..=3 {
        h.extend((1..=n).map(|i| format!("x{var}_{i}")));
    }
    h
}

/// One row per sample: time followed by the stacked state.
pub fn write_trajectory<W: Write>(traj: &Trajectory, w: W) -> Result<(), CliError> {
    let mut out = csv_writer(w);
    out.write_record(trajectory_header(traj.n()))?;
    let mut fields = Vec::with_capacity(1 + 3 * traj.n());
    for k in 0..traj.len() {
        fields.clear();
        fields.push(traj.time(k).to_string());
        fields.extend(traj.row(k).iter().map(f64::to_string));
        out.write_record(&fields)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_trajectory_file(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    let f = fs::File::create(path)?;
    write_trajectory(traj, std::io::BufWriter::new(f))
}

/// Serializes `rows` with their field names as the header. An empty slice
/// still produces the header given by `header`.
pub fn write_rows<T: Serialize>(rows: &[T], header: &[&str], path: &Path) -> Result<(), CliError> {
    let mut out = csv_writer(fs::File::create(path)?);
    if rows.is_empty() {
        out.write_record(header)?;
    }
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("serialization: {e}")))?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}
