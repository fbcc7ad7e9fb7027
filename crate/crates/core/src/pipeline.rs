//! Stage orchestration: each stage reads files produced by the previous one
//! and writes its own artifacts plus a manifest record. Stages are what the
//! CLI subcommands call; [`run_full_pipeline`] chains them under one root
//! with a conventional layout.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use crate::artifacts::{self, ComparisonRow, ScanSummary, SizeSummary, StageRecord};
use crate::baseline::{anneal_max_cut, AnnealParams, BaselineRecord};
use crate::cost::{build_cost_diagonal_with_limit, CostDiagonal};
use crate::engine::{SafeguardParams, Schedule};
use crate::error::{Error, Result};
use crate::experiment::{
    aggregate_matrix, cross_evaluate, fit_power_law, mean_std_population, native_evaluator,
    scan_dt, ExperimentConfig, PowerLawFit, ScanResult,
};
use crate::graph::{generate_regular_with, GeneratorOptions, Graph, DEFAULT_QUBIT_LIMIT};
use crate::seed::{derive_seed, SeedPurpose};

/// Conventional directory layout under one run root.
#[derive(Debug, Clone)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        RunLayout { root: root.into() }
    }

    pub fn graphs_dir(&self) -> PathBuf {
        self.root.join("graphs")
    }

    pub fn baselines_dir(&self) -> PathBuf {
        self.root.join("baselines")
    }

    pub fn scan_dir(&self) -> PathBuf {
        self.root.join("scan")
    }

    pub fn schedules_dir(&self) -> PathBuf {
        self.root.join("schedules")
    }

    pub fn transfer_dir(&self) -> PathBuf {
        self.root.join("transfer")
    }

    pub fn fit_dir(&self) -> PathBuf {
        self.root.join("fit")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.root.join("report")
    }

    pub fn scan_summary(&self) -> PathBuf {
        self.scan_dir().join("scan_summary.json")
    }

    pub fn transfer_matrix(&self) -> PathBuf {
        self.transfer_dir().join("transfer_matrix.csv")
    }

    pub fn transfer_pairs(&self) -> PathBuf {
        self.transfer_dir().join("transfer_pairs.csv")
    }

    pub fn transfer_comparison(&self) -> PathBuf {
        self.transfer_dir().join("transfer_comparison.csv")
    }

    pub fn fit_json(&self) -> PathBuf {
        self.fit_dir().join("fit.json")
    }

    pub fn fit_table(&self) -> PathBuf {
        self.fit_dir().join("fit_dt_table.csv")
    }
}

/// Run a closure inside a rayon pool of `jobs` threads (global pool if None).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("rayon pool")
            .install(f),
        None => f(),
    }
}

fn rel_names(dir: &Path, paths: &[PathBuf]) -> Vec<String> {
    paths
        .iter()
        .map(|p| {
            p.strip_prefix(dir)
                .unwrap_or(p)
                .to_string_lossy()
                .into_owned()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

/// Generate the graph ensemble: `instances_per_size` graphs per size, with
/// per-instance seeds derived from the master seed. Writes
/// `g_n{n}_i{index}.json` files plus a manifest record.
pub fn generate_stage(
    cfg: &ExperimentConfig,
    allow_disconnected: bool,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let started = Instant::now();
    let opts = GeneratorOptions {
        require_connected: !allow_disconnected,
        ..GeneratorOptions::default()
    };
    let mut paths = Vec::new();
    for &n in &cfg.sizes {
        for index in 0..cfg.instances_per_size {
            let seed = derive_seed(
                cfg.master_seed,
                n as u64,
                index as u64,
                SeedPurpose::GraphGeneration,
            );
            let g = generate_regular_with(n, cfg.degree, seed, &opts)?;
            let path = out_dir.join(artifacts::graph_file_name(n, index));
            artifacts::write_graph(&path, &g)?;
            paths.push(path);
        }
    }
    artifacts::append_manifest_stage(
        out_dir,
        StageRecord {
            stage: "generate".into(),
            config: json!({
                "sizes": cfg.sizes,
                "instances_per_size": cfg.instances_per_size,
                "degree": cfg.degree,
                "master_seed": cfg.master_seed.to_string(),
                "allow_disconnected": allow_disconnected,
            }),
            artifacts: rel_names(out_dir, &paths),
            seconds: started.elapsed().as_secs_f64(),
        },
    )?;
    Ok(paths)
}

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineStageMethod {
    Exhaustive,
    Annealing,
}

/// Solve every graph exactly (or by annealing on request); one baseline file
/// per graph file, named `b_n{n}_i{index}.json`.
pub fn baseline_stage(
    graph_files: &[PathBuf],
    method: BaselineStageMethod,
    seed: u64,
    qubit_limit: usize,
    out_dir: &Path,
    jobs: Option<usize>,
) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let records: Vec<(PathBuf, BaselineRecord)> = with_jobs(jobs, || {
        graph_files
            .par_iter()
            .enumerate()
            .map(|(i, path)| {
                let g = artifacts::load_graph(path)?;
                let record = match method {
                    BaselineStageMethod::Exhaustive => {
                        crate::baseline::brute_force_max_cut_with_limit(&g, qubit_limit)?
                    }
                    BaselineStageMethod::Annealing => {
                        let instance_seed = derive_seed(
                            seed,
                            g.node_count() as u64,
                            i as u64,
                            SeedPurpose::Annealing,
                        );
                        anneal_max_cut(&g, &AnnealParams::default(), instance_seed)?
                    }
                };
                let name = baseline_name_for(path)?;
                Ok((out_dir.join(name), record))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut paths = Vec::with_capacity(records.len());
    for (path, record) in &records {
        artifacts::write_baseline(path, record)?;
        paths.push(path.clone());
    }
    artifacts::append_manifest_stage(
        out_dir,
        StageRecord {
            stage: "baseline".into(),
            config: json!({
                "method": match method {
                    BaselineStageMethod::Exhaustive => "exhaustive",
                    BaselineStageMethod::Annealing => "annealing",
                },
                "seed": seed.to_string(),
                "graphs": graph_files.len(),
            }),
            artifacts: rel_names(out_dir, &paths),
            seconds: started.elapsed().as_secs_f64(),
        },
    )?;
    Ok(paths)
}

fn baseline_name_for(graph_path: &Path) -> Result<String> {
    let stem = graph_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::MalformedInput(format!("{}: bad file name", graph_path.display())))?;
    let (n, index) = artifacts::parse_instance_stem(stem).ok_or_else(|| {
        Error::MalformedInput(format!(
            "{}: expected a g_n<size>_i<index>.json name",
            graph_path.display()
        ))
    })?;
    Ok(artifacts::baseline_file_name(n, index))
}

/// Load a (graph, baseline) pair, cross-checking the graph id.
pub fn load_instance(graph_path: &Path, baseline_dir: &Path) -> Result<(Graph, BaselineRecord)> {
    let g = artifacts::load_graph(graph_path)?;
    let baseline_path = baseline_dir.join(baseline_name_for(graph_path)?);
    let b = artifacts::load_baseline(&baseline_path)?;
    if b.graph_id != g.id() {
        return Err(Error::MalformedInput(format!(
            "{}: baseline is for graph {} but {} has id {}",
            baseline_path.display(),
            b.graph_id,
            graph_path.display(),
            g.id()
        )));
    }
    Ok((g, b))
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

pub struct ScanStageOutput {
    pub csv_paths: Vec<PathBuf>,
    pub schedule_paths: Vec<PathBuf>,
    pub summary_path: PathBuf,
    pub summary: ScanSummary,
    pub results: Vec<ScanResult>,
}

/// Scan the time-step grid for every instance; per-graph curve CSV and best
/// schedule, plus a per-size summary of the optimal time step.
pub fn scan_stage(
    graph_files: &[PathBuf],
    baselines_dir: &Path,
    cfg: &ExperimentConfig,
    qubit_limit: usize,
    out_dir: &Path,
    schedules_dir: &Path,
    jobs: Option<usize>,
) -> Result<ScanStageOutput> {
    cfg.validate()?;
    let started = Instant::now();
    let safeguards = SafeguardParams::default();

    let scans: Vec<(usize, usize, ScanResult)> = with_jobs(jobs, || {
        graph_files
            .par_iter()
            .map(|path| {
                let (g, b) = load_instance(path, baselines_dir)?;
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
                let (n, index) = artifacts::parse_instance_stem(stem)
                    .ok_or_else(|| Error::MalformedInput(format!("{stem}: bad stem")))?;
                let d = build_cost_diagonal_with_limit(&g, qubit_limit)?;
                let result = scan_dt(
                    &d,
                    &b,
                    cfg,
                    native_evaluator(&d, &b, cfg.layers, cfg.order, safeguards),
                )?;
                Ok((n, index, result))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut csv_paths = Vec::new();
    let mut schedule_paths = Vec::new();
    for (n, index, result) in &scans {
        let csv_path = out_dir.join(artifacts::scan_csv_file_name(*n, *index));
        artifacts::write_atomic(&csv_path, &artifacts::scan_csv(result))?;
        csv_paths.push(csv_path);
        let sched_path = schedules_dir.join(artifacts::schedule_file_name(*n, *index));
        artifacts::write_schedule(&sched_path, &result.best_schedule)?;
        schedule_paths.push(sched_path);
    }

    // Per-size aggregation, sizes ascending.
    let mut sizes: Vec<usize> = scans.iter().map(|(n, _, _)| *n).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut size_summaries = Vec::new();
    for n in sizes {
        let dts: Vec<f64> = scans
            .iter()
            .filter(|(sn, _, _)| *sn == n)
            .map(|(_, _, r)| r.best_dt)
            .collect();
        let ratios: Vec<f64> = scans
            .iter()
            .filter(|(sn, _, _)| *sn == n)
            .map(|(_, _, r)| r.best_ratio)
            .collect();
        let (mean_dt, std_dt) = mean_std_population(&dts);
        let (mean_ratio, std_ratio) = mean_std_population(&ratios);
        size_summaries.push(SizeSummary {
            n,
            instances: dts.len(),
            mean_best_dt: mean_dt,
            std_best_dt: std_dt,
            mean_best_ratio: mean_ratio,
            std_best_ratio: std_ratio,
        });
    }
    let summary = ScanSummary {
        version: 1,
        order: cfg.order,
        layers: cfg.layers,
        dt_min: cfg.dt_min,
        dt_max: cfg.dt_max,
        dt_step: cfg.dt_step,
        std_kind: "population".into(),
        sizes: size_summaries,
    };
    let summary_path = out_dir.join("scan_summary.json");
    artifacts::write_scan_summary(&summary_path, &summary)?;

    let mut all_artifacts = csv_paths.clone();
    all_artifacts.push(summary_path.clone());
    artifacts::append_manifest_stage(
        out_dir,
        StageRecord {
            stage: "scan".into(),
            config: json!({
                "layers": cfg.layers,
                "order": u8::from(cfg.order),
                "dt_min": cfg.dt_min,
                "dt_max": cfg.dt_max,
                "dt_step": cfg.dt_step,
                "graphs": graph_files.len(),
            }),
            artifacts: rel_names(out_dir, &all_artifacts),
            seconds: started.elapsed().as_secs_f64(),
        },
    )?;

    Ok(ScanStageOutput {
        csv_paths,
        schedule_paths,
        summary_path,
        summary,
        results: scans.into_iter().map(|(_, _, r)| r).collect(),
    })
}

// ---------------------------------------------------------------------------
// transfer
// ---------------------------------------------------------------------------

pub struct TransferStageOutput {
    pub pairs_path: PathBuf,
    pub matrix_path: PathBuf,
    pub comparison_path: PathBuf,
    pub skipped_pairs: usize,
}

/// Replay every schedule on every target with `n_train <= n_target`;
/// emits the raw pair table, the aggregated matrix, and the
/// native-versus-transfer comparison joined from the scan summary.
pub fn transfer_stage(
    schedule_files: &[PathBuf],
    target_graph_files: &[PathBuf],
    baselines_dir: &Path,
    scan_summary_path: &Path,
    qubit_limit: usize,
    out_dir: &Path,
    jobs: Option<usize>,
) -> Result<TransferStageOutput> {
    let started = Instant::now();
    let summary = artifacts::load_scan_summary(scan_summary_path)?;

    let schedules: Vec<Schedule> = schedule_files
        .iter()
        .map(|p| artifacts::load_schedule(p))
        .collect::<Result<Vec<_>>>()?;
    let targets: Vec<(CostDiagonal, BaselineRecord)> = target_graph_files
        .iter()
        .map(|p| {
            let (g, b) = load_instance(p, baselines_dir)?;
            Ok((build_cost_diagonal_with_limit(&g, qubit_limit)?, b))
        })
        .collect::<Result<Vec<_>>>()?;

    // Schedule-major pair list, restricted to n_train <= n_target.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut skipped = 0usize;
    for (si, s) in schedules.iter().enumerate() {
        for (ti, (d, _)) in targets.iter().enumerate() {
            if s.n_train <= d.n() {
                pairs.push((si, ti));
            } else {
                skipped += 1;
            }
        }
    }

    let records = with_jobs(jobs, || {
        pairs
            .par_iter()
            .map(|&(si, ti)| {
                let s = &schedules[si];
                let (d, b) = &targets[ti];
                let records = cross_evaluate(std::slice::from_ref(s), std::slice::from_ref(&(d.clone(), b.clone())))?;
                Ok(records.into_iter().next().expect("one pair, one record"))
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let pairs_path = out_dir.join("transfer_pairs.csv");
    artifacts::write_atomic(&pairs_path, &artifacts::transfer_pairs_csv(&records))?;

    let cells = aggregate_matrix(&records)?;
    let matrix_path = out_dir.join("transfer_matrix.csv");
    artifacts::write_atomic(&matrix_path, &artifacts::transfer_matrix_csv(&cells))?;

    // Fig-3 style join: transferred mean per (n_train, n_target) against the
    // native mean best ratio at the target size.
    let mut comparison = Vec::new();
    for cell in &cells {
        if let Some(native) = summary.sizes.iter().find(|s| s.n == cell.n_target) {
            comparison.push(ComparisonRow {
                n_train: cell.n_train,
                n_target: cell.n_target,
                transfer_mean_ratio: cell.mean_ratio,
                native_mean_ratio: native.mean_best_ratio,
            });
        }
    }
    let comparison_path = out_dir.join("transfer_comparison.csv");
    artifacts::write_atomic(&comparison_path, &artifacts::comparison_csv(&comparison))?;

    artifacts::append_manifest_stage(
        out_dir,
        StageRecord {
            stage: "transfer".into(),
            config: json!({
                "schedules": schedule_files.len(),
                "targets": target_graph_files.len(),
                "skipped_pairs": skipped,
            }),
            artifacts: rel_names(
                out_dir,
                &[pairs_path.clone(), matrix_path.clone(), comparison_path.clone()],
            ),
            seconds: started.elapsed().as_secs_f64(),
        },
    )?;

    Ok(TransferStageOutput {
        pairs_path,
        matrix_path,
        comparison_path,
        skipped_pairs: skipped,
    })
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

pub struct FitStageOutput {
    pub fit_path: PathBuf,
    pub table_path: PathBuf,
    pub fit: PowerLawFit,
}

/// Power-law fit of mean optimal dt against size, plus the Fig-1 data table.
pub fn fit_stage(scan_summary_path: &Path, out_dir: &Path) -> Result<FitStageOutput> {
    let started = Instant::now();
    let summary = artifacts::load_scan_summary(scan_summary_path)?;
    let points: Vec<(usize, f64)> = summary
        .sizes
        .iter()
        .map(|s| (s.n, s.mean_best_dt))
        .collect();
    let fit = fit_power_law(&points)?;

    let fit_path = out_dir.join("fit.json");
    artifacts::write_fit(&fit_path, &fit)?;
    let table_path = out_dir.join("fit_dt_table.csv");
    artifacts::write_atomic(&table_path, &artifacts::fit_table_csv(&summary, &fit))?;

    artifacts::append_manifest_stage(
        out_dir,
        StageRecord {
            stage: "fit".into(),
            config: json!({"sizes": points.len()}),
            artifacts: rel_names(out_dir, &[fit_path.clone(), table_path.clone()]),
            seconds: started.elapsed().as_secs_f64(),
        },
    )?;

    Ok(FitStageOutput {
        fit_path,
        table_path,
        fit,
    })
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

/// Bundle the three figure datasets into one directory:
/// dt scaling (Fig 1), the transfer matrix (Fig 2), and the
/// native-versus-transfer comparison (Fig 3).
pub fn report_stage(layout: &RunLayout, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let copies = [
        (layout.fit_table(), out_dir.join("fig1_dt_scaling.csv")),
        (
            layout.transfer_matrix(),
            out_dir.join("fig2_transfer_matrix.csv"),
        ),
        (
            layout.transfer_comparison(),
            out_dir.join("fig3_native_vs_transfer.csv"),
        ),
        (layout.fit_json(), out_dir.join("fit.json")),
    ];
    let mut produced = Vec::new();
    for (src, dst) in copies {
        let contents = artifacts::read_to_string(&src)?;
        artifacts::write_atomic(&dst, &contents)?;
        produced.push(dst);
    }
    artifacts::append_manifest_stage(
        out_dir,
        StageRecord {
            stage: "report".into(),
            config: json!({"run": layout.root.display().to_string()}),
            artifacts: rel_names(out_dir, &produced),
            seconds: started.elapsed().as_secs_f64(),
        },
    )?;
    Ok(produced)
}

// ---------------------------------------------------------------------------
// full pipeline
// ---------------------------------------------------------------------------

pub struct PipelineOutput {
    pub layout: RunLayout,
    pub summary: ScanSummary,
    pub fit: PowerLawFit,
}

/// Generate -> baseline (exhaustive) -> scan -> transfer -> fit under one
/// root with the conventional layout. Deterministic for a fixed config.
pub fn run_full_pipeline(
    cfg: &ExperimentConfig,
    root: &Path,
    jobs: Option<usize>,
) -> Result<PipelineOutput> {
    let layout = RunLayout::new(root);
    let graphs = generate_stage(cfg, false, &layout.graphs_dir())?;
    baseline_stage(
        &graphs,
        BaselineStageMethod::Exhaustive,
        cfg.master_seed,
        DEFAULT_QUBIT_LIMIT,
        &layout.baselines_dir(),
        jobs,
    )?;
    let scan = scan_stage(
        &graphs,
        &layout.baselines_dir(),
        cfg,
        DEFAULT_QUBIT_LIMIT,
        &layout.scan_dir(),
        &layout.schedules_dir(),
        jobs,
    )?;

    // Training schedules come from the configured train sizes only.
    let mut train_schedules = Vec::new();
    for path in &scan.schedule_paths {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        if let Some((n, _)) = artifacts::parse_instance_stem(stem) {
            if cfg.train_sizes.contains(&n) {
                train_schedules.push(path.clone());
            }
        }
    }
    transfer_stage(
        &train_schedules,
        &graphs,
        &layout.baselines_dir(),
        &scan.summary_path,
        DEFAULT_QUBIT_LIMIT,
        &layout.transfer_dir(),
        jobs,
    )?;
    let fit = fit_stage(&scan.summary_path, &layout.fit_dir())?;

    Ok(PipelineOutput {
        layout,
        summary: scan.summary,
        fit: fit.fit,
    })
}
