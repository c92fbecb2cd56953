//! Text file formats read and written by the commands.
//!
//! * Envelope files: CSV with one nonnegative real per line and an optional
//!   header line.
//! * Complex grids: CSV with columns `ix,iy,iz,ifreq,re,im` next to a JSON
//!   header that carries the shape, spacing and frequency axis.
//! * Directional scans: JSON, the serde form of [`DirectionalScan`].

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twdp::measurement::{Direction, DirectionalScan, GridShape, SpatialGrid};

use crate::error::{CliError, CliResult, Context};

/// Writes through a temporary file in the target directory, then renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| CliError::parse(path, e.line() as u64, e.to_string()))
}

fn csv_reader(path: &Path) -> CliResult<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        kind => CliError::parse(path, line, format!("{kind:?}")),
    }
}

fn parse_field(path: &Path, line: u64, field: &str) -> CliResult<f64> {
    field
        .parse::<f64>()
        .map_err(|_| CliError::parse(path, line, format!("not a number: {field:?}")))
}

/// Reads an envelope file. A first line that does not parse as a number is
/// taken as the header.
pub fn read_envelopes(path: &Path) -> CliResult<Vec<f64>> {
    let mut reader = csv_reader(path)?;
    let mut values = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 1 {
            return Err(CliError::parse(path, line, format!("expected one value, found {}", record.len())));
        }
        let v = match record[0].parse::<f64>() {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(_) => return Err(CliError::parse(path, line, format!("not a number: {:?}", &record[0]))),
        };
        if !(v.is_finite() && v >= 0.0) {
            return Err(CliError::parse(path, line, format!("envelope must be finite and nonnegative, got {v}")));
        }
        values.push(v);
    }
    Ok(values)
}

pub fn write_envelopes(path: &Path, values: &[f64]) -> CliResult<()> {
    let mut out = String::with_capacity(values.len() * 20 + 16);
    out.push_str("envelope\n");
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    write_atomic(path, out.as_bytes())
}

/// JSON companion of a grid CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub shape: GridShape,
    /// Lattice spacing in wavelengths.
    pub spacing: f64,
    /// Frequencies in Hz.
    pub freq_axis: Vec<f64>,
    #[serde(default)]
    pub direction: Option<Direction>,
}

/// `grid.csv` → `grid.json`.
pub fn default_header_path(grid_csv: &Path) -> PathBuf {
    grid_csv.with_extension("json")
}

pub fn read_grid(csv_path: &Path, header_path: &Path) -> CliResult<SpatialGrid> {
    let header: GridHeader = read_json(header_path)?;
    let GridShape { nx, ny, nz } = header.shape;
    let nf = header.freq_axis.len();
    let total = nx
        .checked_mul(ny)
        .and_then(|v| v.checked_mul(nz))
        .and_then(|v| v.checked_mul(nf))
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Input(format!("{}: empty or oversized grid shape", header_path.display())))?;
    let mut h = vec![Complex64::new(0.0, 0.0); total];
    let mut seen = vec![false; total];
    let mut reader = csv_reader(csv_path)?;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(csv_path, e))?;
        let line = record.position().map(|p| p.line()).unwrap_or(i as u64 + 1);
        if i == 0 && record.get(0) == Some("ix") {
            continue;
        }
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 6 {
            return Err(CliError::parse(csv_path, line, format!("expected 6 columns, found {}", record.len())));
        }
        let mut idx = [0usize; 4];
        for (k, slot) in idx.iter_mut().enumerate() {
            *slot = record[k]
                .parse()
                .map_err(|_| CliError::parse(csv_path, line, format!("bad index {:?}", &record[k])))?;
        }
        let [ix, iy, iz, f] = idx;
        if ix >= nx || iy >= ny || iz >= nz || f >= nf {
            return Err(CliError::parse(csv_path, line, "index outside the header shape"));
        }
        let at = ((f * nz + iz) * ny + iy) * nx + ix;
        if seen[at] {
            return Err(CliError::parse(csv_path, line, "duplicate grid point"));
        }
        seen[at] = true;
        h[at] = Complex64::new(parse_field(csv_path, line, &record[4])?, parse_field(csv_path, line, &record[5])?);
    }
    let missing = seen.iter().filter(|s| !**s).count();
    if missing > 0 {
        return Err(CliError::Input(format!("{}: {missing} grid points missing", csv_path.display())));
    }
    SpatialGrid::new(header.shape, header.spacing, header.freq_axis, header.direction, h).context(csv_path.display())
}

pub fn write_grid(csv_path: &Path, header_path: &Path, grid: &SpatialGrid) -> CliResult<()> {
    let shape = grid.shape();
    let mut out = String::from("ix,iy,iz,ifreq,re,im\n");
    for f in 0..grid.nfreq() {
        for (ix, iy, iz) in shape.iter() {
            let c = grid.get(ix, iy, iz, f);
            out.push_str(&format!("{ix},{iy},{iz},{f},{},{}\n", c.re, c.im));
        }
    }
    write_atomic(csv_path, out.as_bytes())?;
    let header = GridHeader {
        shape,
        spacing: grid.spacing(),
        freq_axis: grid.freq_axis().to_vec(),
        direction: grid.direction(),
    };
    write_json(header_path, &header)
}

pub fn read_scan(path: &Path) -> CliResult<DirectionalScan> {
    read_json(path)
}

/// Keeps the input's file stem and swaps in `suffix`, inside `dir` when given.
pub fn output_path(input: &Path, dir: Option<&Path>, suffix: &str) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let dir = dir
        .map(Path::to_path_buf)
        .or_else(|| input.parent().map(Path::to_path_buf))
        .unwrap_or_default();
    dir.join(format!("{stem}{suffix}"))
}
