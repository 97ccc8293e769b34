//! On-disk scan format: a headerless CSV amplitude matrix plus a JSON
//! metadata sidecar, with a bit-exact round trip.
//!
//! Numbers are written with Rust's shortest round-trip `f64` formatting,
//! so write → read reproduces every bit. Files are written to a temporary
//! sibling and renamed into place, so readers never observe a torn file.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{GprError, Result};
use crate::model::{Bscan, Channel, Frame, SurveyGrid};

/// Version stamp of the scan file format and of every CLI report.
pub const FORMAT_VERSION: u32 = 1;

/// JSON sidecar describing one CSV scan file. Unknown keys are rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanMeta {
    pub format_version: u32,
    pub dt_ns: f64,
    pub dx_m: f64,
    pub n_samples: usize,
    pub n_traces: usize,
    pub epsilon_r: f64,
    pub channel: Channel,
    pub frame: Frame,
}

impl ScanMeta {
    pub fn from_bscan(b: &Bscan) -> Self {
        ScanMeta {
            format_version: FORMAT_VERSION,
            dt_ns: b.grid.dt_ns,
            dx_m: b.grid.dx_m,
            n_samples: b.grid.n_samples,
            n_traces: b.grid.n_traces,
            epsilon_r: b.grid.epsilon_r,
            channel: b.channel,
            frame: b.frame,
        }
    }

    pub fn grid(&self) -> Result<SurveyGrid> {
        SurveyGrid::new(self.dt_ns, self.dx_m, self.n_samples, self.n_traces, self.epsilon_r)
    }
}

/// The `stem.csv` + `stem.json` pair naming one stored scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanFilePair {
    pub data_path: PathBuf,
    pub meta_path: PathBuf,
}

impl ScanFilePair {
    pub fn from_stem(stem: impl AsRef<Path>) -> Self {
        let stem = stem.as_ref();
        ScanFilePair {
            data_path: stem.with_extension("csv"),
            meta_path: stem.with_extension("json"),
        }
    }
}

/// Write `bytes` to `path` atomically: temp sibling, then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| GprError::Config(format!("not a file path: {}", path.display())))?;
    let mut tmp = dir.join(file_name);
    tmp.as_mut_os_string().push(".tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Hex SHA-256 digest of a file's bytes.
pub fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Serialize the amplitude matrix as headerless CSV, one row per time
/// sample, one column per trace, `\n` line endings.
pub fn scan_to_csv(b: &Bscan) -> String {
    let mut out = String::new();
    for i in 0..b.data.nrows() {
        for j in 0..b.data.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{}", b.data[(i, j)]));
        }
        out.push('\n');
    }
    out
}

/// Write one scan as its CSV + JSON pair.
pub fn write_scan(b: &Bscan, pair: &ScanFilePair) -> Result<()> {
    let meta = ScanMeta::from_bscan(b);
    let mut meta_json = serde_json::to_string_pretty(&meta)?;
    meta_json.push('\n');
    atomic_write(&pair.data_path, scan_to_csv(b).as_bytes())?;
    atomic_write(&pair.meta_path, meta_json.as_bytes())?;
    Ok(())
}

fn parse_cell(text: &str, path: &Path, row: usize, col: usize) -> Result<f64> {
    let location = || format!("{}, row {}, column {}", path.display(), row + 1, col + 1);
    let v: f64 = text.trim().parse().map_err(|_| GprError::Parse {
        location: location(),
        message: format!("not a number: {text:?}"),
    })?;
    if !v.is_finite() {
        return Err(GprError::Parse {
            location: location(),
            message: format!("non-finite value {text:?}"),
        });
    }
    Ok(v)
}

/// Read a scan pair back; inverse of [`write_scan`] bit for bit.
pub fn read_scan(pair: &ScanFilePair) -> Result<Bscan> {
    let meta_text = fs::read_to_string(&pair.meta_path)?;
    let meta: ScanMeta = serde_json::from_str(&meta_text).map_err(|e| GprError::Parse {
        location: pair.meta_path.display().to_string(),
        message: e.to_string(),
    })?;
    if meta.format_version != FORMAT_VERSION {
        return Err(GprError::Parse {
            location: pair.meta_path.display().to_string(),
            message: format!(
                "unsupported format_version {} (expected {})",
                meta.format_version, FORMAT_VERSION
            ),
        });
    }
    let grid = meta.grid()?;

    let csv_text = fs::read_to_string(&pair.data_path)?;
    let path = pair.data_path.as_path();
    let mut data = DMatrix::zeros(grid.n_samples, grid.n_traces);
    let mut n_rows = 0;
    for (i, line) in csv_text.lines().enumerate() {
        if i >= grid.n_samples {
            return Err(GprError::Parse {
                location: format!("{}, row {}", path.display(), i + 1),
                message: format!("more rows than the declared {} samples", grid.n_samples),
            });
        }
        let mut n_cols = 0;
        for (j, cell) in line.split(',').enumerate() {
            if j >= grid.n_traces {
                return Err(GprError::Parse {
                    location: format!("{}, row {}", path.display(), i + 1),
                    message: format!("more columns than the declared {} traces", grid.n_traces),
                });
            }
            data[(i, j)] = parse_cell(cell, path, i, j)?;
            n_cols += 1;
        }
        if n_cols != grid.n_traces {
            return Err(GprError::Parse {
                location: format!("{}, row {}", path.display(), i + 1),
                message: format!("{} columns, expected {}", n_cols, grid.n_traces),
            });
        }
        n_rows += 1;
    }
    if n_rows != grid.n_samples {
        return Err(GprError::Parse {
            location: path.display().to_string(),
            message: format!("{} rows, expected {}", n_rows, grid.n_samples),
        });
    }
    Bscan::new(grid, meta.channel, meta.frame, data)
}
