//! The feedback loop: build a layered schedule by measuring commutator
//! expectations on the evolving state, and replay stored schedules against
//! arbitrary target Hamiltonians.

use serde::{Deserialize, Serialize};

use crate::baseline::BaselineRecord;
use crate::cost::CostDiagonal;
use crate::error::{Error, Result};
use crate::state::{
    apply_cost_phase, apply_mixer, expect_cost, feedback_expectations_in, FeedbackExpectations,
    FeedbackWorkspace, StateVector,
};

/// Allowed drift of the statevector norm before a run aborts. Catches kernel
/// bugs, not physics; unitary layers preserve the norm to rounding.
const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Which feedback law drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum FeedbackOrder {
    First,
    Second,
}

impl From<FeedbackOrder> for u8 {
    fn from(order: FeedbackOrder) -> u8 {
        match order {
            FeedbackOrder::First => 1,
            FeedbackOrder::Second => 2,
        }
    }
}

impl TryFrom<u8> for FeedbackOrder {
    type Error = String;
    fn try_from(value: u8) -> std::result::Result<Self, String> {
        match value {
            1 => Ok(FeedbackOrder::First),
            2 => Ok(FeedbackOrder::Second),
            other => Err(format!("feedback order must be 1 or 2, got {other}")),
        }
    }
}

impl std::fmt::Display for FeedbackOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

/// Safeguards for the second-order feedback rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafeguardParams {
    /// Below this |<B>| the second-order rule is singular; fall back to the
    /// first-order value. The uniform initial state hits this exactly.
    pub epsilon_b: f64,
    /// Clamp |beta| to this bound.
    pub beta_max: f64,
}

impl Default for SafeguardParams {
    fn default() -> Self {
        SafeguardParams {
            epsilon_b: 1e-9,
            beta_max: 10.0,
        }
    }
}

/// Which safeguards fired while computing one beta.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SafeguardReport {
    pub fallback: bool,
    pub clamped: bool,
}

impl SafeguardReport {
    pub fn events(&self) -> u32 {
        self.fallback as u32 + self.clamped as u32
    }
}

/// Evaluate the feedback law on one set of expectations.
///
/// First order: `beta = -<A>`. Second order:
/// `beta = -(<A> + dt <C>) / (2 dt <B>)`, falling back to the first-order
/// value when `|<B>|` is below `epsilon_b`, then clamping to
/// `[-beta_max, beta_max]`.
pub fn compute_beta(
    e: &FeedbackExpectations,
    dt: f64,
    order: FeedbackOrder,
    safeguards: &SafeguardParams,
) -> Result<(f64, SafeguardReport)> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "dt must be positive and finite, got {dt}"
        )));
    }
    if !(e.a_val.is_finite() && e.b_val.is_finite() && e.c_val.is_finite()) {
        return Err(Error::NonFiniteResult(format!(
            "expectations a={} b={} c={}",
            e.a_val, e.b_val, e.c_val
        )));
    }

    let mut report = SafeguardReport::default();
    let mut beta = match order {
        FeedbackOrder::First => -e.a_val,
        FeedbackOrder::Second => {
            if e.b_val.abs() < safeguards.epsilon_b {
                report.fallback = true;
                -e.a_val
            } else {
                -(e.a_val + dt * e.c_val) / (2.0 * dt * e.b_val)
            }
        }
    };
    if beta.abs() > safeguards.beta_max {
        report.clamped = true;
        beta = beta.signum() * safeguards.beta_max;
    }
    Ok((beta, report))
}

/// The transferable artifact: a time step plus the ordered feedback
/// parameters it generated, with training provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub dt: f64,
    pub betas: Vec<f64>,
    pub order: FeedbackOrder,
    pub train_graph_id: String,
    pub n_train: usize,
    pub safeguard_events: u32,
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    version: u32,
    dt: f64,
    order: FeedbackOrder,
    layers: usize,
    betas: Vec<f64>,
    train_graph_id: String,
    n_train: usize,
    safeguard_events: u32,
}

impl Schedule {
    pub fn layers(&self) -> usize {
        self.betas.len()
    }

    pub fn to_json(&self) -> String {
        let file = ScheduleFile {
            version: 1,
            dt: self.dt,
            order: self.order,
            layers: self.betas.len(),
            betas: self.betas.clone(),
            train_graph_id: self.train_graph_id.clone(),
            n_train: self.n_train,
            safeguard_events: self.safeguard_events,
        };
        serde_json::to_string_pretty(&file).expect("schedule serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScheduleFile = serde_json::from_str(text).map_err(|e| {
            Error::MalformedInput(format!(
                "schedule JSON at line {}, column {}: {e}",
                e.line(),
                e.column()
            ))
        })?;
        if file.version != 1 {
            return Err(Error::MalformedInput(format!(
                "unsupported schedule file version {}",
                file.version
            )));
        }
        if file.betas.len() != file.layers {
            return Err(Error::MalformedInput(format!(
                "schedule declares {} layers but carries {} betas",
                file.layers,
                file.betas.len()
            )));
        }
        if !(file.dt > 0.0) || file.betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::MalformedInput(
                "schedule requires dt > 0 and finite betas".into(),
            ));
        }
        Ok(Schedule {
            dt: file.dt,
            betas: file.betas,
            order: file.order,
            train_graph_id: file.train_graph_id,
            n_train: file.n_train,
            safeguard_events: file.safeguard_events,
        })
    }
}

/// Per-layer record of `<H_C>`: the initial value plus one entry per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub energies: Vec<f64>,
    pub final_ratio: Option<f64>,
}

impl Trajectory {
    pub fn layers(&self) -> usize {
        self.energies.len() - 1
    }

    pub fn initial_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn final_energy(&self) -> f64 {
        *self.energies.last().expect("trajectory is never empty")
    }

    /// Fill `final_ratio` from a baseline's exact ground energy.
    pub fn attach_baseline(&mut self, baseline: &BaselineRecord) -> Result<f64> {
        let ratio = approximation_ratio(self.final_energy(), baseline.ground_energy as f64)?;
        self.final_ratio = Some(ratio);
        Ok(ratio)
    }
}

/// Final energy divided by the exact ground energy; 1 means optimal.
pub fn approximation_ratio(energy: f64, ground_energy: f64) -> Result<f64> {
    if !(ground_energy < 0.0) {
        return Err(Error::ZeroOrPositiveGroundEnergy(ground_energy));
    }
    Ok(energy / ground_energy)
}

/// Run the feedback loop from the uniform state.
///
/// For each layer k = 1..=layers: evaluate the expectations on the current
/// state, compute beta_k, apply the cost phase for `dt`, then the mixer with
/// angle `dt * beta_k`, and record `<H_C>`. Deterministic for fixed inputs.
pub fn run_feedback(
    d: &CostDiagonal,
    dt: f64,
    layers: usize,
    order: FeedbackOrder,
    safeguards: &SafeguardParams,
    train_graph_id: &str,
) -> Result<(Schedule, Trajectory)> {
    if dt <= 0.0 || !dt.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "dt must be positive and finite, got {dt}"
        )));
    }
    let mut psi = StateVector::uniform(d.n())?;
    let mut ws = FeedbackWorkspace::new(d.n());

    let mut betas = Vec::with_capacity(layers);
    let mut energies = Vec::with_capacity(layers + 1);
    let mut safeguard_events = 0u32;
    energies.push(expect_cost(&psi, d)?);

    for _ in 0..layers {
        let e = feedback_expectations_in(&psi, d, &mut ws)?;
        let (beta, report) = compute_beta(&e, dt, order, safeguards)?;
        safeguard_events += report.events();
        apply_layer(&mut psi, d, dt, beta)?;
        betas.push(beta);
        energies.push(expect_cost(&psi, d)?);
    }

    let schedule = Schedule {
        dt,
        betas,
        order,
        train_graph_id: train_graph_id.to_string(),
        n_train: d.n(),
        safeguard_events,
    };
    let trajectory = Trajectory {
        energies,
        final_ratio: None,
    };
    Ok((schedule, trajectory))
}

/// Replay a stored schedule against a target Hamiltonian: the identical
/// unitary sequence, with no expectation evaluation beyond the trajectory
/// record. Replaying on the training diagonal reproduces the native
/// trajectory exactly.
pub fn replay_schedule(d_target: &CostDiagonal, s: &Schedule) -> Result<Trajectory> {
    let mut psi = StateVector::uniform(d_target.n())?;
    let mut energies = Vec::with_capacity(s.betas.len() + 1);
    energies.push(expect_cost(&psi, d_target)?);
    for &beta in &s.betas {
        apply_layer(&mut psi, d_target, s.dt, beta)?;
        energies.push(expect_cost(&psi, d_target)?);
    }
    Ok(Trajectory {
        energies,
        final_ratio: None,
    })
}

/// One layer of Eq.-(2)-style evolution plus the divergence guard.
fn apply_layer(psi: &mut StateVector, d: &CostDiagonal, dt: f64, beta: f64) -> Result<()> {
    apply_cost_phase(psi, d, dt)?;
    apply_mixer(psi, dt * beta)?;
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_DRIFT_LIMIT {
        return Err(Error::DivergedState { norm });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::brute_force_max_cut;
    use crate::cost::build_cost_diagonal;
    use crate::graph::{generate_regular, Graph};

    fn k4_diag() -> CostDiagonal {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        build_cost_diagonal(&g).unwrap()
    }

    #[test]
    fn first_order_beta_is_minus_a() {
        let e = FeedbackExpectations {
            a_val: 1.0,
            b_val: 123.0,
            c_val: -7.0,
            cost: 0.0,
        };
        let (beta, report) =
            compute_beta(&e, 0.3, FeedbackOrder::First, &SafeguardParams::default()).unwrap();
        assert_eq!(beta, -1.0);
        assert_eq!(report.events(), 0);
    }

    #[test]
    fn second_order_fallback_fires_on_tiny_b() {
        let e = FeedbackExpectations {
            a_val: 0.0,
            b_val: 0.0,
            c_val: 5.0,
            cost: 0.0,
        };
        let (beta, report) =
            compute_beta(&e, 0.2, FeedbackOrder::Second, &SafeguardParams::default()).unwrap();
        assert_eq!(beta, 0.0);
        assert!(report.fallback);
        assert!(!report.clamped);
    }

    #[test]
    fn second_order_direct_arithmetic() {
        let e = FeedbackExpectations {
            a_val: 0.5,
            b_val: -1.0,
            c_val: 0.2,
            cost: 0.0,
        };
        let (beta, report) =
            compute_beta(&e, 0.1, FeedbackOrder::Second, &SafeguardParams::default()).unwrap();
        assert!((beta - 2.6).abs() < 1e-12, "beta = {beta}");
        assert_eq!(report.events(), 0);
    }

    #[test]
    fn beta_clamp_counts_as_safeguard() {
        let e = FeedbackExpectations {
            a_val: 100.0,
            b_val: 1.0,
            c_val: 0.0,
            cost: 0.0,
        };
        let sg = SafeguardParams::default();
        let (beta, report) = compute_beta(&e, 0.001, FeedbackOrder::Second, &sg).unwrap();
        assert_eq!(beta.abs(), sg.beta_max);
        assert!(report.clamped);
    }

    #[test]
    fn non_finite_expectations_are_rejected() {
        let e = FeedbackExpectations {
            a_val: f64::NAN,
            b_val: 0.0,
            c_val: 0.0,
            cost: 0.0,
        };
        assert!(matches!(
            compute_beta(&e, 0.1, FeedbackOrder::First, &SafeguardParams::default()),
            Err(Error::NonFiniteResult(_))
        ));
    }

    #[test]
    fn zero_layers_gives_initial_energy_only() {
        let d = k4_diag();
        let (s, t) = run_feedback(
            &d,
            0.2,
            0,
            FeedbackOrder::Second,
            &SafeguardParams::default(),
            "k4",
        )
        .unwrap();
        assert!(s.betas.is_empty());
        assert_eq!(t.energies.len(), 1);
        assert!((t.energies[0] - (-3.0)).abs() < 1e-12);
    }

    #[test]
    fn second_order_beta1_is_zero_from_uniform_state() {
        let d = k4_diag();
        let (s, _) = run_feedback(
            &d,
            0.2,
            4,
            FeedbackOrder::Second,
            &SafeguardParams::default(),
            "k4",
        )
        .unwrap();
        assert_eq!(s.betas[0], 0.0);
        assert!(s.safeguard_events >= 1);
        assert!(s.betas.iter().all(|b| b.is_finite()));
    }

    #[test]
    fn first_order_descent_is_monotone_at_small_dt() {
        for seed in 0..5u64 {
            let g = generate_regular(8, 3, seed).unwrap();
            let d = build_cost_diagonal(&g).unwrap();
            let (_, t) = run_feedback(
                &d,
                0.01,
                16,
                FeedbackOrder::First,
                &SafeguardParams::default(),
                g.id(),
            )
            .unwrap();
            for w in t.energies.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-9,
                    "seed {seed}: energy rose from {} to {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn replay_on_training_diagonal_is_bitwise_identical() {
        let d = k4_diag();
        let (s, native) = run_feedback(
            &d,
            0.2,
            16,
            FeedbackOrder::Second,
            &SafeguardParams::default(),
            "k4",
        )
        .unwrap();
        let replay = replay_schedule(&d, &s).unwrap();
        assert_eq!(native.energies, replay.energies);
    }

    #[test]
    fn zero_beta_schedule_keeps_energy_at_minus_half_edges() {
        let g = generate_regular(6, 3, 9).unwrap();
        let d = build_cost_diagonal(&g).unwrap();
        let s = Schedule {
            dt: 0.4,
            betas: vec![0.0; 16],
            order: FeedbackOrder::Second,
            train_graph_id: g.id().to_string(),
            n_train: 6,
            safeguard_events: 0,
        };
        let t = replay_schedule(&d, &s).unwrap();
        let expected = -(g.edge_count() as f64) / 2.0;
        assert!((t.final_energy() - expected).abs() < 1e-12);
        assert!((t.initial_energy() - expected).abs() < 1e-12);
    }

    #[test]
    fn ratio_arithmetic_and_bounds() {
        assert_eq!(approximation_ratio(-4.0, -4.0).unwrap(), 1.0);
        assert_eq!(approximation_ratio(-3.0, -6.0).unwrap(), 0.5);
        assert_eq!(approximation_ratio(0.0, -9.0).unwrap(), 0.0);
        assert!(matches!(
            approximation_ratio(-1.0, 0.0),
            Err(Error::ZeroOrPositiveGroundEnergy(_))
        ));
    }

    #[test]
    fn trajectory_ratio_from_baseline() {
        let g = generate_regular(8, 3, 2).unwrap();
        let d = build_cost_diagonal(&g).unwrap();
        let baseline = brute_force_max_cut(&g).unwrap();
        let (_, mut t) = run_feedback(
            &d,
            0.2,
            16,
            FeedbackOrder::Second,
            &SafeguardParams::default(),
            g.id(),
        )
        .unwrap();
        let ratio = t.attach_baseline(&baseline).unwrap();
        assert!(ratio > 0.0 && ratio <= 1.0, "ratio = {ratio}");
        assert_eq!(t.final_ratio, Some(ratio));
        // Initial ratio is (|E|/2) / max_cut exactly.
        let init =
            approximation_ratio(t.initial_energy(), baseline.ground_energy as f64).unwrap();
        assert!(
            (init - g.edge_count() as f64 / 2.0 / baseline.max_cut as f64).abs() < 1e-12
        );
    }

    #[test]
    fn schedule_json_round_trip_is_lossless() {
        let d = k4_diag();
        let (s, _) = run_feedback(
            &d,
            0.217,
            16,
            FeedbackOrder::Second,
            &SafeguardParams::default(),
            "k4",
        )
        .unwrap();
        let parsed = Schedule::from_json(&s.to_json()).unwrap();
        assert_eq!(parsed, s);
        // Bit-exact betas after the decimal round trip.
        for (a, b) in parsed.betas.iter().zip(&s.betas) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn schedule_json_rejects_bad_layer_count() {
        let doc = r#"{"version":1,"dt":0.2,"order":2,"layers":3,"betas":[0.0],"train_graph_id":"x","n_train":4,"safeguard_events":0}"#;
        assert!(matches!(
            Schedule::from_json(doc),
            Err(Error::MalformedInput(_))
        ));
    }

    #[test]
    fn schedule_json_rejects_bad_order() {
        let doc = r#"{"version":1,"dt":0.2,"order":3,"layers":1,"betas":[0.0],"train_graph_id":"x","n_train":4,"safeguard_events":0}"#;
        assert!(Schedule::from_json(doc).is_err());
    }
}
