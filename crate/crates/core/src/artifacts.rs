//! On-disk artifact formats and atomic file I/O.
//!
//! Every number is serialized with Rust's shortest round-trip decimal
//! representation, so re-running a stage with the same inputs produces
//! byte-identical files. Writes go through a temp file plus rename so
//! concurrent stages never observe partial artifacts.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineRecord;
use crate::engine::{FeedbackOrder, Schedule};
use crate::error::{Error, Result};
use crate::experiment::{PowerLawFit, ScanResult, TransferCell, TransferRecord};
use crate::graph::Graph;

pub const SCAN_CSV_HEADER: &str = "graph_id,dt,final_ratio,final_energy";
pub const PAIRS_CSV_HEADER: &str = "n_train,n_target,train_graph_id,target_graph_id,ratio";
pub const MATRIX_CSV_HEADER: &str = "n_train,n_target,mean_ratio,std_ratio,pair_count";
pub const COMPARISON_CSV_HEADER: &str = "n_train,n_target,transfer_mean_ratio,native_mean_ratio";
pub const FIT_TABLE_CSV_HEADER: &str = "n,mean_dt,fitted_dt";

/// Write `contents` to `path` atomically (temp file in the same directory,
/// then rename).
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// File naming
// ---------------------------------------------------------------------------

pub fn graph_file_name(n: usize, index: usize) -> String {
    format!("g_n{n}_i{index}.json")
}

pub fn baseline_file_name(n: usize, index: usize) -> String {
    format!("b_n{n}_i{index}.json")
}

pub fn scan_csv_file_name(n: usize, index: usize) -> String {
    format!("scan_n{n}_i{index}.csv")
}

pub fn schedule_file_name(n: usize, index: usize) -> String {
    format!("sched_n{n}_i{index}.json")
}

/// Parse `(n, index)` back out of a `g_n{n}_i{index}` style stem.
pub fn parse_instance_stem(stem: &str) -> Option<(usize, usize)> {
    let rest = stem.split_once("_n")?.1;
    let (n, idx) = rest.split_once("_i")?;
    Some((n.parse().ok()?, idx.parse().ok()?))
}

/// Sort paths by (n, index) when the stems carry them, then by name; plain
/// lexicographic order would put `i10` before `i2`.
pub fn sort_instance_paths(paths: &mut [PathBuf]) {
    paths.sort_by_key(|p| {
        let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let key = parse_instance_stem(stem).unwrap_or((usize::MAX, usize::MAX));
        (key, stem.to_string())
    });
}

/// All regular files in `dir` whose name matches `prefix` and `extension`,
/// in deterministic order.
pub fn list_files(dir: &Path, prefix: &str, extension: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        let name = match path.file_name().and_then(|s| s.to_str()) {
            Some(name) => name,
            None => continue,
        };
        if name.starts_with(prefix) && name.ends_with(extension) {
            out.push(path);
        }
    }
    sort_instance_paths(&mut out);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Graphs, baselines, schedules
// ---------------------------------------------------------------------------

pub fn write_graph(path: &Path, g: &Graph) -> Result<()> {
    write_atomic(path, &g.to_json())
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    Graph::from_json(&read_to_string(path)?)
        .map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))
}

pub fn write_baseline(path: &Path, b: &BaselineRecord) -> Result<()> {
    write_atomic(path, &b.to_json())
}

pub fn load_baseline(path: &Path) -> Result<BaselineRecord> {
    BaselineRecord::from_json(&read_to_string(path)?)
        .map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))
}

pub fn write_schedule(path: &Path, s: &Schedule) -> Result<()> {
    write_atomic(path, &s.to_json())
}

pub fn load_schedule(path: &Path) -> Result<Schedule> {
    Schedule::from_json(&read_to_string(path)?)
        .map_err(|e| Error::MalformedInput(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Scan CSV
// ---------------------------------------------------------------------------

pub fn scan_csv(result: &ScanResult) -> String {
    let mut out = String::new();
    out.push_str(SCAN_CSV_HEADER);
    out.push('\n');
    for p in &result.curve {
        writeln!(
            out,
            "{},{},{},{}",
            result.graph_id, p.dt, p.final_ratio, p.final_energy
        )
        .expect("string write");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanCsvRow {
    pub graph_id: String,
    pub dt: f64,
    pub final_ratio: f64,
    pub final_energy: f64,
}

pub fn parse_scan_csv(text: &str) -> Result<Vec<ScanCsvRow>> {
    let mut rows = Vec::new();
    for (line_no, line) in expect_header(text, SCAN_CSV_HEADER)? {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::MalformedInput(format!(
                "scan CSV line {line_no}: expected 4 fields, got {}",
                fields.len()
            )));
        }
        rows.push(ScanCsvRow {
            graph_id: fields[0].to_string(),
            dt: parse_f64(fields[1], line_no)?,
            final_ratio: parse_f64(fields[2], line_no)?,
            final_energy: parse_f64(fields[3], line_no)?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Transfer CSVs
// ---------------------------------------------------------------------------

pub fn transfer_pairs_csv(records: &[TransferRecord]) -> String {
    let mut out = String::new();
    out.push_str(PAIRS_CSV_HEADER);
    out.push('\n');
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.n_train, r.n_target, r.train_graph_id, r.target_graph_id, r.ratio
        )
        .expect("string write");
    }
    out
}

pub fn parse_transfer_pairs_csv(text: &str) -> Result<Vec<TransferRecord>> {
    let mut rows = Vec::new();
    for (line_no, line) in expect_header(text, PAIRS_CSV_HEADER)? {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::MalformedInput(format!(
                "transfer CSV line {line_no}: expected 5 fields, got {}",
                fields.len()
            )));
        }
        rows.push(TransferRecord {
            n_train: parse_usize(fields[0], line_no)?,
            n_target: parse_usize(fields[1], line_no)?,
            train_graph_id: fields[2].to_string(),
            target_graph_id: fields[3].to_string(),
            ratio: parse_f64(fields[4], line_no)?,
        });
    }
    Ok(rows)
}

pub fn transfer_matrix_csv(cells: &[TransferCell]) -> String {
    let mut out = String::new();
    out.push_str("# std_ratio: population standard deviation\n");
    out.push_str(MATRIX_CSV_HEADER);
    out.push('\n');
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{}",
            c.n_train, c.n_target, c.mean_ratio, c.std_ratio, c.pair_count
        )
        .expect("string write");
    }
    out
}

pub fn parse_transfer_matrix_csv(text: &str) -> Result<Vec<TransferCell>> {
    let mut rows = Vec::new();
    for (line_no, line) in expect_header(text, MATRIX_CSV_HEADER)? {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::MalformedInput(format!(
                "matrix CSV line {line_no}: expected 5 fields, got {}",
                fields.len()
            )));
        }
        rows.push(TransferCell {
            n_train: parse_usize(fields[0], line_no)?,
            n_target: parse_usize(fields[1], line_no)?,
            mean_ratio: parse_f64(fields[2], line_no)?,
            std_ratio: parse_f64(fields[3], line_no)?,
            pair_count: parse_usize(fields[4], line_no)?,
        });
    }
    Ok(rows)
}

/// One row of the native-versus-transfer comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub n_train: usize,
    pub n_target: usize,
    pub transfer_mean_ratio: f64,
    pub native_mean_ratio: f64,
}

pub fn comparison_csv(rows: &[ComparisonRow]) -> String {
    let mut out = String::new();
    out.push_str(COMPARISON_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.n_train, r.n_target, r.transfer_mean_ratio, r.native_mean_ratio
        )
        .expect("string write");
    }
    out
}

pub fn parse_comparison_csv(text: &str) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for (line_no, line) in expect_header(text, COMPARISON_CSV_HEADER)? {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::MalformedInput(format!(
                "comparison CSV line {line_no}: expected 4 fields, got {}",
                fields.len()
            )));
        }
        rows.push(ComparisonRow {
            n_train: parse_usize(fields[0], line_no)?,
            n_target: parse_usize(fields[1], line_no)?,
            transfer_mean_ratio: parse_f64(fields[2], line_no)?,
            native_mean_ratio: parse_f64(fields[3], line_no)?,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Scan summary + fit JSON
// ---------------------------------------------------------------------------

/// Per-size aggregate of a scan stage. Standard deviations are population
/// standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub n: usize,
    pub instances: usize,
    pub mean_best_dt: f64,
    pub std_best_dt: f64,
    pub mean_best_ratio: f64,
    pub std_best_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub version: u32,
    pub order: FeedbackOrder,
    pub layers: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_step: f64,
    /// Which standard deviation the std_* fields carry.
    pub std_kind: String,
    pub sizes: Vec<SizeSummary>,
}

pub fn write_scan_summary(path: &Path, summary: &ScanSummary) -> Result<()> {
    write_atomic(
        path,
        &serde_json::to_string_pretty(summary).expect("summary serialization"),
    )
}

pub fn load_scan_summary(path: &Path) -> Result<ScanSummary> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| {
        Error::MalformedInput(format!(
            "{} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn write_fit(path: &Path, fit: &PowerLawFit) -> Result<()> {
    write_atomic(
        path,
        &serde_json::to_string_pretty(fit).expect("fit serialization"),
    )
}

pub fn load_fit(path: &Path) -> Result<PowerLawFit> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| {
        Error::MalformedInput(format!(
            "{} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

/// Fig-1-style table: per size, the measured mean optimal dt and the fitted
/// power-law prediction.
pub fn fit_table_csv(summary: &ScanSummary, fit: &PowerLawFit) -> String {
    let mut out = String::new();
    out.push_str(FIT_TABLE_CSV_HEADER);
    out.push('\n');
    for s in &summary.sizes {
        writeln!(out, "{},{},{}", s.n, s.mean_best_dt, fit.predict(s.n)).expect("string write");
    }
    out
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub config: serde_json::Value,
    /// Paths relative to the manifest's directory.
    pub artifacts: Vec<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: u32,
    pub tool_version: String,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn new() -> Self {
        RunManifest {
            version: 1,
            tool_version: crate::VERSION.to_string(),
            stages: Vec::new(),
        }
    }
}

impl Default for RunManifest {
    fn default() -> Self {
        Self::new()
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Append a stage record to `dir/manifest.json`, creating it if needed.
pub fn append_manifest_stage(dir: &Path, record: StageRecord) -> Result<PathBuf> {
    let path = dir.join(MANIFEST_FILE);
    let mut manifest = if path.exists() {
        load_manifest(&path)?
    } else {
        RunManifest::new()
    };
    manifest.stages.push(record);
    write_atomic(
        &path,
        &serde_json::to_string_pretty(&manifest).expect("manifest serialization"),
    )?;
    Ok(path)
}

pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| {
        Error::MalformedInput(format!(
            "{} at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// Re-parse every recognized artifact under `dir` (recursively). Returns the
/// number of files validated; fails on the first artifact that does not
/// round-trip its schema, and on manifest entries whose files are missing.
pub fn validate_artifacts(dir: &Path) -> Result<usize> {
    let mut validated = 0usize;
    let mut stack = vec![dir.to_path_buf()];
    let mut files = Vec::new();
    while let Some(d) = stack.pop() {
        let entries = fs::read_dir(&d).map_err(|e| Error::io(&d, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&d, e))?;
            let path = entry.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                files.push(path);
            }
        }
    }
    files.sort();
    for path in files {
        let name = path
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let recognized = if name.starts_with("g_") && name.ends_with(".json") {
            load_graph(&path)?;
            true
        } else if name.starts_with("b_") && name.ends_with(".json") {
            load_baseline(&path)?;
            true
        } else if name.starts_with("sched_") && name.ends_with(".json") {
            load_schedule(&path)?;
            true
        } else if name.starts_with("scan_") && name.ends_with(".csv") {
            parse_scan_csv(&read_to_string(&path)?)?;
            true
        } else if name == "scan_summary.json" {
            load_scan_summary(&path)?;
            true
        } else if name == "fit.json" {
            load_fit(&path)?;
            true
        } else if name.contains("pairs") && name.ends_with(".csv") {
            parse_transfer_pairs_csv(&read_to_string(&path)?)?;
            true
        } else if name.contains("matrix") && name.ends_with(".csv") {
            parse_transfer_matrix_csv(&read_to_string(&path)?)?;
            true
        } else if name.contains("comparison") && name.ends_with(".csv") {
            parse_comparison_csv(&read_to_string(&path)?)?;
            true
        } else if name.contains("dt_table") || name.contains("dt_scaling") {
            parse_fit_table_csv(&read_to_string(&path)?)?;
            true
        } else if name == MANIFEST_FILE {
            let manifest = load_manifest(&path)?;
            let base = path.parent().unwrap_or(dir);
            for stage in &manifest.stages {
                for artifact in &stage.artifacts {
                    let target = base.join(artifact);
                    if !target.exists() {
                        return Err(Error::MalformedInput(format!(
                            "{}: stage {} references missing artifact {}",
                            path.display(),
                            stage.stage,
                            artifact
                        )));
                    }
                }
            }
            true
        } else {
            false
        };
        if recognized {
            validated += 1;
        }
    }
    Ok(validated)
}

pub fn parse_fit_table_csv(text: &str) -> Result<Vec<(usize, f64, f64)>> {
    let mut rows = Vec::new();
    for (line_no, line) in expect_header(text, FIT_TABLE_CSV_HEADER)? {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::MalformedInput(format!(
                "fit table line {line_no}: expected 3 fields, got {}",
                fields.len()
            )));
        }
        rows.push((
            parse_usize(fields[0], line_no)?,
            parse_f64(fields[1], line_no)?,
            parse_f64(fields[2], line_no)?,
        ));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

/// Check the header line (skipping leading `#` comments) and yield the data
/// lines with their 1-based line numbers.
fn expect_header<'a>(
    text: &'a str,
    header: &str,
) -> Result<impl Iterator<Item = (usize, &'a str)>> {
    let mut lines = text.lines().enumerate().peekable();
    while let Some((_, line)) = lines.peek() {
        if line.starts_with('#') {
            lines.next();
        } else {
            break;
        }
    }
    match lines.next() {
        Some((_, line)) if line == header => {}
        Some((no, line)) => {
            return Err(Error::MalformedInput(format!(
                "line {}: expected header {header:?}, got {line:?}",
                no + 1
            )))
        }
        None => return Err(Error::MalformedInput("empty CSV".into())),
    }
    Ok(lines
        .filter(|(_, line)| !line.is_empty())
        .map(|(no, line)| (no + 1, line)))
}

fn parse_f64(field: &str, line_no: usize) -> Result<f64> {
    field.parse::<f64>().map_err(|_| {
        Error::MalformedInput(format!("line {line_no}: {field:?} is not a number"))
    })
}

fn parse_usize(field: &str, line_no: usize) -> Result<usize> {
    field.parse::<usize>().map_err(|_| {
        Error::MalformedInput(format!("line {line_no}: {field:?} is not an integer"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::ScanPoint;

    #[test]
    fn instance_stems_parse_and_sort() {
        assert_eq!(parse_instance_stem("g_n6_i0"), Some((6, 0)));
        assert_eq!(parse_instance_stem("sched_n12_i19"), Some((12, 19)));
        assert_eq!(parse_instance_stem("fit"), None);

        let mut paths: Vec<PathBuf> = ["g_n10_i2.json", "g_n6_i10.json", "g_n6_i2.json"]
            .iter()
            .map(PathBuf::from)
            .collect();
        sort_instance_paths(&mut paths);
        let names: Vec<&str> = paths
            .iter()
            .map(|p| p.file_name().unwrap().to_str().unwrap())
            .collect();
        assert_eq!(names, ["g_n6_i2.json", "g_n6_i10.json", "g_n10_i2.json"]);
    }

    #[test]
    fn scan_csv_round_trip() {
        let result = ScanResult {
            graph_id: "abc123".into(),
            best_dt: 0.2,
            best_ratio: 0.9,
            best_schedule: Schedule {
                dt: 0.2,
                betas: vec![0.0],
                order: FeedbackOrder::Second,
                train_graph_id: "abc123".into(),
                n_train: 6,
                safeguard_events: 0,
            },
            curve: vec![
                ScanPoint {
                    dt: 0.1,
                    final_ratio: 0.8,
                    final_energy: -3.2,
                },
                ScanPoint {
                    dt: 0.2,
                    final_ratio: 0.9,
                    final_energy: -3.6,
                },
            ],
            stop_reason: crate::experiment::StopReason::GridExhausted,
        };
        let text = scan_csv(&result);
        let rows = parse_scan_csv(&text).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].graph_id, "abc123");
        assert_eq!(rows[1].dt, 0.2);
        assert_eq!(rows[1].final_energy, -3.6);
    }

    #[test]
    fn matrix_csv_keeps_comment_header() {
        let cells = vec![TransferCell {
            n_train: 6,
            n_target: 8,
            mean_ratio: 0.875,
            std_ratio: 0.0125,
            pair_count: 100,
        }];
        let text = transfer_matrix_csv(&cells);
        assert!(text.starts_with("# std_ratio: population"));
        let parsed = parse_transfer_matrix_csv(&text).unwrap();
        assert_eq!(parsed, cells);
    }

    #[test]
    fn csv_header_mismatch_is_rejected() {
        let err = parse_scan_csv("nope\n1,2,3,4\n").unwrap_err();
        assert!(matches!(err, Error::MalformedInput(_)));
    }

    #[test]
    fn atomic_write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("x.txt");
        write_atomic(&path, "hello").unwrap();
        assert_eq!(read_to_string(&path).unwrap(), "hello");
        // Overwrite goes through the same path.
        write_atomic(&path, "world").unwrap();
        assert_eq!(read_to_string(&path).unwrap(), "world");
    }

    #[test]
    fn manifest_appends_stages() {
        let dir = tempfile::tempdir().unwrap();
        append_manifest_stage(
            dir.path(),
            StageRecord {
                stage: "generate".into(),
                config: serde_json::json!({"sizes": [6]}),
                artifacts: vec![],
                seconds: 0.5,
            },
        )
        .unwrap();
        append_manifest_stage(
            dir.path(),
            StageRecord {
                stage: "baseline".into(),
                config: serde_json::json!({}),
                artifacts: vec![],
                seconds: 0.1,
            },
        )
        .unwrap();
        let manifest = load_manifest(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(manifest.stages.len(), 2);
        assert_eq!(manifest.stages[0].stage, "generate");
        assert_eq!(manifest.tool_version, crate::VERSION);
    }

    #[test]
    fn validation_flags_missing_manifest_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        append_manifest_stage(
            dir.path(),
            StageRecord {
                stage: "generate".into(),
                config: serde_json::json!({}),
                artifacts: vec!["g_n6_i0.json".into()],
                seconds: 0.0,
            },
        )
        .unwrap();
        assert!(validate_artifacts(dir.path()).is_err());
    }
}
