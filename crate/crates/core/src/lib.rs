//! Feedback-based quantum optimization for Max-Cut on regular graphs.
//!
//! A dense statevector simulator specialized for diagonal cost Hamiltonians,
//! first- and second-order feedback loops that build layered schedules
//! without a classical optimizer, and an experiment harness for time-step
//! scans, cross-size schedule transfer, and power-law fits of the optimal
//! time step.

pub mod artifacts;
pub mod baseline;
pub mod cost;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod pipeline;
pub mod seed;
pub mod state;

pub use baseline::{
    anneal_max_cut, brute_force_max_cut, AnnealParams, BaselineMethod, BaselineRecord,
};
pub use cost::{build_cost_diagonal, build_cost_diagonal_with_limit, CostDiagonal};
pub use engine::{
    approximation_ratio, compute_beta, replay_schedule, run_feedback, FeedbackOrder,
    SafeguardParams, SafeguardReport, Schedule, Trajectory,
};
pub use error::{Error, Result};
pub use experiment::{
    aggregate_matrix, cross_evaluate, dt_grid, fit_power_law, native_evaluator, scan_dt,
    EarlyStopParams, ExperimentConfig, PowerLawFit, ScanPoint, ScanResult, ScanSample,
    StopReason, TransferCell, TransferRecord,
};
pub use graph::{
    cut_value, generate_regular, generate_regular_with, CutAssignment, GeneratorOptions, Graph,
    DEFAULT_QUBIT_LIMIT,
};
pub use state::{
    apply_cost_phase, apply_mixer, expect_cost, feedback_expectations,
    feedback_expectations_in, uniform_state, FeedbackExpectations, FeedbackWorkspace,
    StateVector,
};

/// Version string stamped into run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
