//! Proximal-gradient machinery for the trust-region subproblem
//!
//! ```text
//! min_s  m(s) = f(x) + gᵀs + ½sᵀBs + h(x + s)   subject to ‖s‖ ≤ Δ
//! ```
//!
//! with step-size rules keyed to a bound on ‖B‖, the stationarity residual
//! `v_{j+1} = (B − ν⁻¹I)(s_{j+1} − s_j)` used for stopping, the worst-case
//! iteration bound, and the criticality measure ξ built from the first
//! proximal-gradient step.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::problem::{BallNorm, Regularizer};
use crate::prox::ProxQuery;
use crate::qn::QuasiNewtonOperator;

/// One trust-region subproblem instance. `b = None` means `B = 0` (linear
/// model). All vectors are borrowed from the outer solver's state.
#[derive(Clone, Copy)]
pub struct SubproblemSpec<'a> {
    /// Gradient of the smooth term at the outer iterate.
    pub g: &'a DVector<f64>,
    /// Quasi-Newton Hessian approximation; `None` for the zero operator.
    pub b: Option<&'a QuasiNewtonOperator>,
    /// Smooth value at the outer iterate (constant term of the model).
    pub fx: f64,
    /// Outer iterate; the regularizer acts on `x + s`.
    pub x: &'a DVector<f64>,
    pub reg: &'a Regularizer,
    /// Trust radius (may be `+inf`).
    pub delta: f64,
    pub ball: BallNorm,
    /// Proximal-gradient step length ν > 0.
    pub nu: f64,
    /// Descent-certificate parameter θ ∈ (0, 1).
    pub theta: f64,
}

impl<'a> SubproblemSpec<'a> {
    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::contract("subproblem requires delta > 0"));
        }
        if !(self.nu > 0.0) {
            return Err(Error::contract("subproblem requires nu > 0"));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::contract("subproblem requires theta in (0, 1)"));
        }
        Error::check_dim(self.x.len(), self.g.len())
    }

    fn apply_b(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        match self.b {
            Some(op) => op.apply(v),
            None => Ok(DVector::zeros(v.len())),
        }
    }

    /// Model value `fx + gᵀs + ½sᵀ(Bs) + h(x + s)` given a precomputed `Bs`.
    fn model_value(&self, s: &DVector<f64>, bs: &DVector<f64>) -> f64 {
        self.fx + self.g.dot(s) + 0.5 * s.dot(bs) + self.reg.value(&(self.x + s))
    }
}

/// Diagnostics from one subproblem solve.
#[derive(Debug, Clone, Copy)]
pub struct InnerStats {
    /// Proximal-gradient steps taken.
    pub iterations: u64,
    /// `‖(B − ν⁻¹I)(s_{j+1} − s_j)‖₂` at the last step (∞ if no step ran).
    pub final_residual: f64,
    /// `m(0) − m(s_final)`; nonnegative for every entry point used here.
    pub model_decrease: f64,
    /// Proximal evaluations consumed.
    pub prox_evals: u64,
    /// Whether the residual test was met before the iteration cap.
    pub converged: bool,
    /// Worst slack in `m(s_j) − m(s_{j+1}) ≥ ½θν⁻¹‖s_{j+1} − s_j‖²` over
    /// all steps (∞ if no step ran); nonnegative when ν ≤ (1 − θ)/‖B‖.
    pub worst_decrease_margin: f64,
    /// Worst slack in the stronger form `≥ ½θν⁻²‖s_{j+1} − s_j‖²`, valid
    /// when ν lies between the roots of ‖B‖ν² − ν + θ = 0.
    pub worst_gradient_margin: f64,
}

/// Largest step length with the `½θν⁻¹‖Δs‖²` descent certificate:
/// `(1 − θ)/B_norm`, or a default of 1.0 when `B = 0` (any ν > 0 works
/// then).
pub fn pg_step_size(b_norm: f64, theta: f64) -> f64 {
    assert!(theta > 0.0 && theta < 1.0, "theta must lie in (0, 1)");
    assert!(b_norm >= 0.0);
    if b_norm > 0.0 {
        (1.0 - theta) / b_norm
    } else {
        1.0
    }
}

/// Step-length interval carrying the stronger `½θ‖G_ν‖²` certificate: the
/// two roots of `B_norm·ν² − ν + θ = 0`, which are real and positive for
/// `0 < θ < 1/(4·B_norm)`.
pub fn pg_step_size_range(b_norm: f64, theta: f64) -> Result<(f64, f64)> {
    if !(b_norm > 0.0) {
        return Err(Error::contract("step-size interval requires B_norm > 0"));
    }
    if !(theta > 0.0 && theta < 1.0 / (4.0 * b_norm)) {
        return Err(Error::contract(
            "step-size interval requires 0 < theta < 1/(4·B_norm)",
        ));
    }
    let disc = (1.0 - 4.0 * theta * b_norm).sqrt();
    Ok(((1.0 - disc) / (2.0 * b_norm), (1.0 + disc) / (2.0 * b_norm)))
}

/// One proximal-gradient step on the subproblem: forms `∇φ(s_j) = g + Bs_j`
/// and returns the constrained shifted prox at `q = s_j − ν∇φ(s_j)`.
pub fn pg_step(spec: &SubproblemSpec, s_j: &DVector<f64>) -> Result<DVector<f64>> {
    spec.validate()?;
    Error::check_dim(spec.x.len(), s_j.len())?;
    let grad_phi = spec.g + spec.apply_b(s_j)?;
    let q = s_j - grad_phi * spec.nu;
    spec.reg.prox(&ProxQuery {
        x: spec.x,
        q: &q,
        nu: spec.nu,
        delta: spec.delta,
        ball: spec.ball,
    })
}

/// Runs proximal-gradient iterations from `s = 0` until the stationarity
/// residual `‖v_{j+1}‖₂` drops to `tol` or `max_iter` steps have run.
///
/// Every iterate stays inside the ball (the prox enforces it), the model
/// value is monotonically decreasing in the valid step-size regimes, and
/// the reported `model_decrease` is measured from `s = 0`, so the result
/// always certifies at least the first step's decrease.
pub fn pg_subsolve(
    spec: &SubproblemSpec,
    tol: f64,
    max_iter: u64,
) -> Result<(DVector<f64>, InnerStats)> {
    let zero = DVector::zeros(spec.x.len());
    pg_subsolve_from(spec, &zero, tol, max_iter)
}

/// [`pg_subsolve`] warm-started from `s_init` (which must be feasible with
/// `h(x + s_init)` finite). `model_decrease` is still measured from `s = 0`.
pub fn pg_subsolve_from(
    spec: &SubproblemSpec,
    s_init: &DVector<f64>,
    tol: f64,
    max_iter: u64,
) -> Result<(DVector<f64>, InnerStats)> {
    spec.validate()?;
    Error::check_dim(spec.x.len(), s_init.len())?;
    let prox_before = spec.reg.prox_evals();
    let m0 = spec.fx + spec.reg.value(spec.x);

    let mut s = s_init.clone();
    let mut bs = spec.apply_b(&s)?;
    let mut m_curr = spec.model_value(&s, &bs);
    let nu_inv = 1.0 / spec.nu;

    let mut stats = InnerStats {
        iterations: 0,
        final_residual: f64::INFINITY,
        model_decrease: 0.0,
        prox_evals: 0,
        converged: false,
        worst_decrease_margin: f64::INFINITY,
        worst_gradient_margin: f64::INFINITY,
    };

    for _ in 0..max_iter {
        let grad_phi = spec.g + &bs;
        let q = &s - &grad_phi * spec.nu;
        let s_next = spec.reg.prox(&ProxQuery {
            x: spec.x,
            q: &q,
            nu: spec.nu,
            delta: spec.delta,
            ball: spec.ball,
        })?;
        stats.iterations += 1;

        let ds = &s_next - &s;
        let bs_next = spec.apply_b(&s_next)?;
        let v = (&bs_next - &bs) - &ds * nu_inv;
        stats.final_residual = v.norm();

        let m_next = spec.model_value(&s_next, &bs_next);
        let decrease = m_curr - m_next;
        let ds_sq = ds.norm_squared();
        let m43 = decrease - 0.5 * spec.theta * nu_inv * ds_sq;
        let m44 = decrease - 0.5 * spec.theta * nu_inv * nu_inv * ds_sq;
        stats.worst_decrease_margin = stats.worst_decrease_margin.min(m43);
        stats.worst_gradient_margin = stats.worst_gradient_margin.min(m44);

        s = s_next;
        bs = bs_next;
        m_curr = m_next;

        if stats.final_residual <= tol {
            stats.converged = true;
            break;
        }
    }

    stats.model_decrease = m0 - m_curr;
    stats.prox_evals = spec.reg.prox_evals() - prox_before;
    Ok((s, stats))
}

/// Worst-case iteration count for reaching residual `eps`:
/// `⌈(2/(ε²θ))·(ν⁻¹ − λ_min(B))·gap⌉`, where `gap` is an upper bound on
/// `m(s₀) − inf m`. Diagnostic only; saturates instead of overflowing.
pub fn predicted_iteration_bound(
    eps: f64,
    theta: f64,
    nu: f64,
    lambda_min_b: f64,
    gap: f64,
) -> u64 {
    assert!(eps > 0.0);
    assert!(gap >= 0.0);
    let raw = 2.0 / (eps * eps * theta) * (1.0 / nu - lambda_min_b) * gap;
    raw.ceil() as u64
}

/// Criticality measure ξ(Δ; x, ν) and the first proximal-gradient step that
/// realizes it.
///
/// `s₁` is the constrained shifted prox at `q = −νg` (one step from `s = 0`
/// on the separable model with curvature ν⁻¹I), and
///
/// ```text
/// ξ = h(x) + ½ν‖g‖² − ½ν⁻¹‖s₁ + νg‖² − h(x + s₁) ≥ 0,
/// ```
///
/// the decrease that step achieves on that model. Values in `[−1e-12, 0)`
/// are round-off and clamp to zero; `√ξ` is the solver stopping quantity.
pub fn criticality_measure(
    x: &DVector<f64>,
    fx: f64,
    g: &DVector<f64>,
    nu: f64,
    delta: f64,
    ball: BallNorm,
    reg: &Regularizer,
) -> Result<(f64, DVector<f64>)> {
    let _ = fx; // the model's constant term cancels in ξ
    Error::check_dim(x.len(), g.len())?;
    if !(nu > 0.0) {
        return Err(Error::contract("criticality measure requires nu > 0"));
    }
    let q = -g * nu;
    let s1 = reg.prox(&ProxQuery {
        x,
        q: &q,
        nu,
        delta,
        ball,
    })?;
    let hx = reg.value(x);
    debug_assert!(hx.is_finite(), "criticality measure needs h(x) finite");
    let shifted = &s1 + g * nu;
    let xi = hx + 0.5 * nu * g.norm_squared()
        - 0.5 / nu * shifted.norm_squared()
        - reg.value(&(x + &s1));
    debug_assert!(
        xi >= -1e-12,
        "criticality measure significantly negative: {xi}"
    );
    Ok((xi.max(0.0), s1))
}
