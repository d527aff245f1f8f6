//! CSV and JSON artifacts. Floats use the shortest round-trip representation
//! and every file is written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Result, SpeError};
use crate::scheme::{State, Trajectory};

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        ryu::Buffer::new().format_finite(v).to_string()
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| SpeError::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// `t,x,u,P` rows for one state.
pub fn snapshot_csv(state: &State) -> String {
    let grid = state.u.grid();
    let t = fmt_f64(state.t);
    let mut out = String::from("t,x,u,P\n");
    for (i, (u, p)) in state.u.values().iter().zip(state.p.values()).enumerate() {
        let _ = writeln!(out, "{t},{},{},{}", fmt_f64(grid.x(i)), fmt_f64(*u), fmt_f64(*p));
    }
    out
}

/// `t,g,dudx0` rows, one per accepted step plus the initial sample.
pub fn boundary_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,g,dudx0\n");
    for s in &traj.boundary_series {
        let _ = writeln!(out, "{},{},{}", fmt_f64(s.t), fmt_f64(s.g), fmt_f64(s.dudx0));
    }
    out
}

/// Writes `snapshot_NNNN.csv` for every stored snapshot and `boundary.csv`.
pub fn write_trajectory(traj: &Trajectory, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for (k, s) in traj.snapshots.iter().enumerate() {
        let p = dir.join(format!("snapshot_{k:04}.csv"));
        write_atomic(&p, snapshot_csv(s).as_bytes())?;
        paths.push(p);
    }
    let p = dir.join("boundary.csv");
    write_atomic(&p, boundary_csv(traj).as_bytes())?;
    paths.push(p);
    Ok(paths)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value).as_bytes())
}

/// Reads a two-column CSV with a header line.
pub fn read_samples(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (k, line) in text.lines().enumerate().skip(1) {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let mut num = || -> Result<f64> {
            cols.next()
                .and_then(|c| c.parse::<f64>().ok())
                .ok_or_else(|| SpeError::Parse(format!("{}:{}: expected two numeric columns", path.display(), k + 1)))
        };
        a.push(num()?);
        b.push(num()?);
    }
    Ok((a, b))
}
