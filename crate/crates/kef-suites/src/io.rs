//! Report persistence: `results/<suite>/<timestamp>.json` plus a flat CSV,
//! and a machine-readable summary index (suite -> pass/fail, max residual).
//! All files are written atomically (write-temp-then-rename) so concurrent
//! suite runs never expose half-written reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Result, SuiteReport};

pub fn utc_timestamp() -> String {
    chrono::Utc::now().format("%Y%m%dT%H%M%S%.3fZ").to_string()
}

/// Atomic write: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("report"),
        std::process::id()
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IndexEntry {
    pub pass: bool,
    pub max_residual: f64,
    pub report: String,
}

pub struct WrittenPaths {
    pub json: PathBuf,
    pub csv: PathBuf,
    pub index: PathBuf,
}

/// Flat CSV: one row per recorded number, schema `case,kind,key,value`.
pub fn report_csv(report: &SuiteReport) -> String {
    let mut out = String::from("case,kind,key,value\n");
    for c in &report.cases {
        for (map, kind) in [
            (&c.inputs, "input"),
            (&c.values, "value"),
            (&c.residuals, "residual"),
            (&c.margins, "margin"),
        ] {
            for (k, v) in map {
                out.push_str(&format!("{},{kind},{k},{v:e}\n", c.name));
            }
        }
        out.push_str(&format!("{},status,pass,{}\n", c.name, u8::from(c.pass)));
    }
    out
}

/// Write the report under `out_dir` and update `out_dir/index.json`.
pub fn write_report(report: &SuiteReport, out_dir: &Path) -> Result<WrittenPaths> {
    let suite_dir = out_dir.join(report.config.suite.name());
    let stem = report.meta.timestamp.replace([':', '.'], "-");
    let json = suite_dir.join(format!("{stem}.json"));
    let csv = suite_dir.join(format!("{stem}.csv"));
    write_atomic(&json, &serde_json::to_vec_pretty(report)?)?;
    write_atomic(&csv, report_csv(report).as_bytes())?;

    let index = out_dir.join("index.json");
    let mut entries: BTreeMap<String, IndexEntry> = match fs::read(&index) {
        Ok(bytes) => serde_json::from_slice(&bytes).unwrap_or_default(),
        Err(_) => BTreeMap::new(),
    };
    entries.insert(
        report.config.suite.name().to_string(),
        IndexEntry {
            pass: report.pass,
            max_residual: report.summary.max_residual,
            report: json.to_string_lossy().into_owned(),
        },
    );
    write_atomic(&index, &serde_json::to_vec_pretty(&entries)?)?;
    Ok(WrittenPaths { json, csv, index })
}

pub fn read_report(path: &Path) -> Result<SuiteReport> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// Write the report if the config names an output directory.
pub fn maybe_write(report: &SuiteReport) -> Result<Option<WrittenPaths>> {
    match &report.config.output_dir {
        Some(dir) => Ok(Some(write_report(report, Path::new(dir))?)),
        None => Ok(None),
    }
}
