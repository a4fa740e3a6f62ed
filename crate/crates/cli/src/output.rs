//! Artifact paths, file emission, and the machine-readable error shape.

use serde::Serialize;
use sgdl_core::dynamics::RunRecord;
use sgdl_core::report::{run_record_series, svg_line_chart};
use std::path::{Path, PathBuf};

/// Every failure leaving the binary carries where it happened and a stable
/// kind tag, serialized as one JSON object on stderr.
#[derive(Debug, Serialize)]
pub struct CliError {
    pub module: String,
    pub operation: String,
    pub kind: String,
    pub detail: String,
}

impl CliError {
    pub fn new(module: &str, operation: &str, kind: &str, detail: impl Into<String>) -> Self {
        CliError {
            module: module.into(),
            operation: operation.into(),
            kind: kind.into(),
            detail: detail.into(),
        }
    }

    pub fn from_core(module: &str, operation: &str, err: sgdl_core::error::Error) -> Self {
        CliError::new(module, operation, err.kind(), err.to_string())
    }

    pub fn io(operation: &str, path: &Path, err: std::io::Error) -> Self {
        CliError::new(
            "output",
            operation,
            "io",
            format!("{}: {err}", path.display()),
        )
    }
}

/// Output directory: SGDL_OUT_DIR when set, the working directory
/// otherwise.  Relative artifact paths resolve against it.
pub fn out_dir() -> PathBuf {
    std::env::var_os("SGDL_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

pub fn resolve(path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        out_dir().join(path)
    }
}

pub fn write_text(operation: &str, path: &Path, content: &str) -> Result<PathBuf, CliError> {
    let full = resolve(path);
    if let Some(parent) = full.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(operation, &full, e))?;
        }
    }
    std::fs::write(&full, content).map_err(|e| CliError::io(operation, &full, e))?;
    Ok(full)
}

pub fn write_json<T: Serialize>(
    operation: &str,
    path: &Path,
    value: &T,
) -> Result<PathBuf, CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::new("output", operation, "serialize", e.to_string()))?;
    write_text(operation, path, &(text + "\n"))
}

/// Derive the per-series chart path from a base path: `runs/b.svg` becomes
/// `runs/b_norm.svg` and so on.
pub fn series_path(base: &Path, series: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "chart".into());
    let ext = base
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "svg".into());
    base.with_file_name(format!("{stem}_{series}.{ext}"))
}

/// One chart per diagnostic series, all against time.
pub fn write_record_charts(
    operation: &str,
    base: &Path,
    record: &RunRecord,
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for (name, ys) in run_record_series(record) {
        let svg = svg_line_chart(name, "t", name, &record.times, ys)
            .map_err(|e| CliError::from_core("report", operation, e))?;
        written.push(write_text(operation, &series_path(base, name), &svg)?);
    }
    Ok(written)
}
