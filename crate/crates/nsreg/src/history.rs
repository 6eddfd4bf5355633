//! Per-iteration records and final solve results shared by all solvers.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

/// Outcome classification of one outer iteration, driven by the ratio of
/// actual to predicted decrease.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepFlag {
    VerySuccessful,
    Successful,
    Unsuccessful,
}

/// Detail recorded for iterations that computed a trial step. The final
/// stationarity record (criticality already below tolerance) omits it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    /// `‖s_k‖` in the trust-region norm (Euclidean for the regularization
    /// solvers, which have no ball).
    pub step_norm: f64,
    /// Cap the step had to respect: `min(Δ_k, β‖s_{k,1}‖)`; `+inf`-free —
    /// stored as `f64::MAX` when no cap applies.
    pub step_cap: f64,
    /// Criticality measure ξ at this iterate (its square root is the
    /// `criticality` column).
    pub xi: f64,
    /// `m_k(0) − m_k(s_k)`: predicted decrease used in the ratio denominator.
    pub model_decrease: f64,
    /// `(f+h)(x_k) − (f+h)(x_k + s_k)`; `None` when the trial objective was
    /// infinite (cardinality-infeasible trial point).
    pub actual_decrease: Option<f64>,
    /// Radius (or regularization parameter σ) chosen for the next iteration.
    pub radius_next: f64,
    /// Inner-solver iterations spent on this step (0 for single-prox steps).
    pub inner_iterations: usize,
}

/// One outer iteration of any solver.
///
/// `radius_or_sigma` holds the trust-region radius Δ_k or the regularization
/// parameter σ_k depending on the solver. Counters are cumulative oracle
/// tallies at the end of the iteration. `rho` is `None` on the terminal
/// stationarity record and when the ratio had an infinite trial objective
/// (JSON has no encoding for non-finite floats).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub objective: f64,
    /// √ξ — the practical first-order error measure.
    pub criticality: f64,
    /// ν⁻¹√ξ — the scaled variant, logged for diagnostics.
    pub criticality_scaled: f64,
    pub radius_or_sigma: f64,
    pub rho: Option<f64>,
    /// `None` on the terminal stationarity record (no step was classified).
    pub status_flag: Option<StepFlag>,
    pub f_evals: u64,
    pub grad_evals: u64,
    pub prox_evals: u64,
    pub step: Option<StepDiagnostics>,
}

/// Why the solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    /// √ξ fell below the configured tolerance.
    FirstOrderOptimal,
    MaxIterations,
    /// The model failed to decrease at a point that is not stationary —
    /// indicates a defective proximal operator or model, not a normal outcome.
    Stalled,
}

/// Final iterate, status, full history, and oracle tallies.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x_final: DVector<f64>,
    pub status: SolveStatus,
    pub history: Vec<IterationRecord>,
    pub final_objective: f64,
    pub final_criticality: f64,
    pub iterations: usize,
    pub f_evals: u64,
    pub grad_evals: u64,
    pub prox_evals: u64,
}
