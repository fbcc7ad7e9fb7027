//! The experiment protocol: time-step scans with early stopping, cross-size
//! schedule transfer, transfer-matrix aggregation, and power-law fitting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineRecord;
use crate::cost::CostDiagonal;
use crate::engine::{
    approximation_ratio, replay_schedule, run_feedback, FeedbackOrder, SafeguardParams, Schedule,
};
use crate::error::{Error, Result};

/// Early-stop rule for the ascending time-step scan: once the best ratio so
/// far has reached `ratio_floor`, terminate after `window` consecutive grid
/// points below `max(ratio_floor, best_so_far - drop)`.
///
/// The rule stays disarmed while the best ratio is still below the floor, so
/// it cannot fire during the slow climb toward the optimum at small dt; it
/// only ends the scan after the optimum region has been passed and ratios
/// have collapsed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarlyStopParams {
    pub window: usize,
    pub ratio_floor: f64,
    pub drop: f64,
}

impl Default for EarlyStopParams {
    fn default() -> Self {
        EarlyStopParams {
            window: 5,
            ratio_floor: 0.5,
            drop: 0.2,
        }
    }
}

/// Full protocol configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub train_sizes: Vec<usize>,
    pub instances_per_size: usize,
    pub degree: usize,
    pub layers: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub dt_step: f64,
    pub order: FeedbackOrder,
    pub master_seed: u64,
    pub early_stop: EarlyStopParams,
}

impl ExperimentConfig {
    /// Workstation-friendly defaults; the full-scale protocol is available
    /// through [`ExperimentConfig::paper_scale`].
    pub fn desk_default(master_seed: u64) -> Self {
        ExperimentConfig {
            sizes: vec![6, 8, 10, 12, 14, 16],
            train_sizes: vec![6, 8, 10, 12, 14, 16],
            instances_per_size: 10,
            degree: 3,
            layers: 16,
            dt_min: 0.1,
            dt_max: 1.0,
            dt_step: 0.005,
            order: FeedbackOrder::Second,
            master_seed,
            early_stop: EarlyStopParams::default(),
        }
    }

    /// The full-scale protocol: 20 instances per size, sizes 6..=24, training
    /// sizes 6..=18, grid resolution 0.001. Compute-heavy.
    pub fn paper_scale(master_seed: u64) -> Self {
        ExperimentConfig {
            sizes: (6..=24).step_by(2).collect(),
            train_sizes: (6..=18).step_by(2).collect(),
            instances_per_size: 20,
            degree: 3,
            layers: 16,
            dt_min: 0.1,
            dt_max: 1.0,
            dt_step: 0.001,
            order: FeedbackOrder::Second,
            master_seed,
            early_stop: EarlyStopParams::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidParameters("no sizes configured".into()));
        }
        if !self.train_sizes.iter().all(|s| self.sizes.contains(s)) {
            return Err(Error::InvalidParameters(
                "train_sizes must be a subset of sizes".into(),
            ));
        }
        if self.instances_per_size < 1 {
            return Err(Error::InvalidParameters(
                "instances_per_size must be >= 1".into(),
            ));
        }
        if self.layers < 1 {
            return Err(Error::InvalidParameters("layers must be >= 1".into()));
        }
        if !(self.dt_min > 0.0) || self.dt_min > self.dt_max || !(self.dt_step > 0.0) {
            return Err(Error::InvalidParameters(format!(
                "bad dt grid: min {} max {} step {}",
                self.dt_min, self.dt_max, self.dt_step
            )));
        }
        Ok(())
    }

    /// The ascending evaluation grid. Points are generated by index so the
    /// grid is identical across runs regardless of accumulation order.
    pub fn dt_grid(&self) -> Vec<f64> {
        dt_grid(self.dt_min, self.dt_max, self.dt_step)
    }
}

pub fn dt_grid(dt_min: f64, dt_max: f64, dt_step: f64) -> Vec<f64> {
    let mut grid = Vec::new();
    if !(dt_min > 0.0) || !(dt_step > 0.0) {
        return grid;
    }
    // Absorb float error so dt_max itself stays on the grid.
    let slack = dt_step * 1e-9;
    let mut k = 0u64;
    loop {
        let dt = dt_min + (k as f64) * dt_step;
        if dt > dt_max + slack {
            break;
        }
        grid.push(dt);
        k += 1;
    }
    grid
}

/// Why a scan stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    GridExhausted,
    Diverged,
    Plateau,
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub dt: f64,
    pub final_ratio: f64,
    pub final_energy: f64,
}

/// What an evaluator returns for one time step.
#[derive(Debug, Clone)]
pub struct ScanSample {
    pub final_ratio: f64,
    pub final_energy: f64,
    pub schedule: Schedule,
}

/// Result of scanning one graph's time-step grid.
#[derive(Debug, Clone)]
pub struct ScanResult {
    pub graph_id: String,
    pub best_dt: f64,
    pub best_ratio: f64,
    pub best_schedule: Schedule,
    pub curve: Vec<ScanPoint>,
    pub stop_reason: StopReason,
}

/// Scan the time-step grid in ascending order, keeping the argmax of the
/// final-layer approximation ratio with a smallest-dt tie-break.
///
/// The evaluator is injected so the stop and tie rules are testable on
/// synthetic ratio curves; [`native_evaluator`] supplies the real one. A run
/// that aborts with a diverged state ends the scan (`StopReason::Diverged`)
/// once at least one grid point has been evaluated; other errors propagate.
pub fn scan_dt(
    d: &CostDiagonal,
    baseline: &BaselineRecord,
    cfg: &ExperimentConfig,
    mut evaluator: impl FnMut(f64) -> Result<ScanSample>,
) -> Result<ScanResult> {
    check_baseline(d, baseline)?;
    let grid = cfg.dt_grid();
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }

    let mut curve: Vec<ScanPoint> = Vec::new();
    let mut best: Option<(f64, f64, Schedule)> = None; // (dt, ratio, schedule)
    let mut armed = false;
    let mut bad_streak = 0usize;
    let mut stop_reason = StopReason::GridExhausted;

    for &dt in &grid {
        let sample = match evaluator(dt) {
            Ok(sample) => sample,
            Err(Error::DivergedState { .. }) if !curve.is_empty() => {
                stop_reason = StopReason::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        curve.push(ScanPoint {
            dt,
            final_ratio: sample.final_ratio,
            final_energy: sample.final_energy,
        });

        let improved = match &best {
            None => true,
            Some((_, best_ratio, _)) => sample.final_ratio > *best_ratio,
        };
        if improved {
            best = Some((dt, sample.final_ratio, sample.schedule));
        }

        let best_ratio = best.as_ref().map(|(_, r, _)| *r).unwrap_or(f64::NEG_INFINITY);
        if best_ratio >= cfg.early_stop.ratio_floor {
            armed = true;
        }
        let threshold = cfg.early_stop.ratio_floor.max(best_ratio - cfg.early_stop.drop);
        if armed && sample.final_ratio < threshold {
            bad_streak += 1;
            if bad_streak >= cfg.early_stop.window {
                stop_reason = StopReason::Plateau;
                break;
            }
        } else {
            bad_streak = 0;
        }
    }

    let (best_dt, best_ratio, best_schedule) = best.ok_or(Error::EmptyGrid)?;
    Ok(ScanResult {
        graph_id: baseline.graph_id.clone(),
        best_dt,
        best_ratio,
        best_schedule,
        curve,
        stop_reason,
    })
}

/// The real evaluator: a feedback run on `d` scored against `baseline`.
pub fn native_evaluator<'a>(
    d: &'a CostDiagonal,
    baseline: &'a BaselineRecord,
    layers: usize,
    order: FeedbackOrder,
    safeguards: SafeguardParams,
) -> impl FnMut(f64) -> Result<ScanSample> + 'a {
    move |dt| {
        let (schedule, trajectory) =
            run_feedback(d, dt, layers, order, &safeguards, &baseline.graph_id)?;
        let final_energy = trajectory.final_energy();
        let final_ratio = approximation_ratio(final_energy, baseline.ground_energy as f64)?;
        Ok(ScanSample {
            final_ratio,
            final_energy,
            schedule,
        })
    }
}

fn check_baseline(d: &CostDiagonal, baseline: &BaselineRecord) -> Result<()> {
    if d.min_energy() as i64 != baseline.ground_energy
        || baseline.witness.len() != d.n()
    {
        return Err(Error::BaselineMismatch {
            graph_id: baseline.graph_id.clone(),
            ground_energy: baseline.ground_energy,
            table_min: d.min_energy() as i64,
        });
    }
    Ok(())
}

/// One replayed (schedule, target) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferRecord {
    pub n_train: usize,
    pub n_target: usize,
    pub train_graph_id: String,
    pub target_graph_id: String,
    pub ratio: f64,
}

/// Replay every schedule against every target, schedule-major, recording the
/// final-layer approximation ratio. Callers filter size pairs; a pair with
/// `n_train > n_target` is rejected.
pub fn cross_evaluate(
    schedules: &[Schedule],
    targets: &[(CostDiagonal, BaselineRecord)],
) -> Result<Vec<TransferRecord>> {
    for (d, b) in targets {
        check_baseline(d, b)?;
    }
    for s in schedules {
        for (d, _) in targets {
            if s.n_train > d.n() {
                return Err(Error::InvalidParameters(format!(
                    "schedule trained at n = {} cannot target n = {}",
                    s.n_train,
                    d.n()
                )));
            }
        }
    }

    let mut records = Vec::with_capacity(schedules.len() * targets.len());
    for s in schedules {
        for (d, b) in targets {
            let trajectory = replay_schedule(d, s)?;
            let ratio = approximation_ratio(trajectory.final_energy(), b.ground_energy as f64)?;
            records.push(TransferRecord {
                n_train: s.n_train,
                n_target: d.n(),
                train_graph_id: s.train_graph_id.clone(),
                target_graph_id: b.graph_id.clone(),
                ratio,
            });
        }
    }
    Ok(records)
}

/// Aggregated transfer statistics for one (n_train, n_target) size pair.
/// `std_ratio` is the population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferCell {
    pub n_train: usize,
    pub n_target: usize,
    pub mean_ratio: f64,
    pub std_ratio: f64,
    pub pair_count: usize,
}

/// Group records by size pair; cells come out sorted by (n_train, n_target).
pub fn aggregate_matrix(records: &[TransferRecord]) -> Result<Vec<TransferCell>> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cells: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.n_train, r.n_target))
            .or_default()
            .push(r.ratio);
    }
    Ok(cells
        .into_iter()
        .map(|((n_train, n_target), ratios)| {
            let (mean, std) = mean_std_population(&ratios);
            TransferCell {
                n_train,
                n_target,
                mean_ratio: mean,
                std_ratio: std,
                pair_count: ratios.len(),
            }
        })
        .collect())
}

pub fn mean_std_population(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `dt ~= coefficient * n^exponent`, fitted by log-log least squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub r_squared: f64,
}

impl PowerLawFit {
    pub fn predict(&self, n: usize) -> f64 {
        self.coefficient * (n as f64).powf(self.exponent)
    }
}

/// Ordinary least squares on (ln n, ln dt). Requires at least two points with
/// distinct n and strictly positive dt.
pub fn fit_power_law(points: &[(usize, f64)]) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    if let Some((n, dt)) = points.iter().find(|(_, dt)| !(*dt > 0.0)) {
        return Err(Error::DegenerateInput(format!(
            "dt must be positive, got {dt} at n = {n}"
        )));
    }
    let first_n = points[0].0;
    if points.iter().all(|(n, _)| *n == first_n) {
        return Err(Error::DegenerateInput(
            "need at least 2 distinct n values".into(),
        ));
    }

    let xs: Vec<f64> = points.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, dt)| dt.ln()).collect();
    let x_mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let y_mean = ys.iter().sum::<f64>() / ys.len() as f64;

    let sxx: f64 = xs.iter().map(|x| (x - x_mean) * (x - x_mean)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - x_mean) * (y - y_mean))
        .sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;

    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean) * (y - y_mean)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };

    Ok(PowerLawFit {
        coefficient: intercept.exp(),
        exponent: slope,
        r_squared,
    })
}
