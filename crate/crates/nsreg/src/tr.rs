//! Trust-region driver for `min f(x) + h(x)`.
//!
//! Each iteration builds the quadratic-plus-regularizer model
//!
//! ```text
//! m_k(s) = f(x_k) + g_kᵀs + ½sᵀB_k s + h(x_k + s),   ‖s‖ ≤ Δ_k,
//! ```
//!
//! measures criticality through the first proximal-gradient step `s_{k,1}`
//! (which also caps the effective radius at `β‖s_{k,1}‖`), refines the step
//! by continued proximal-gradient or adaptive-regularization iterations on
//! the model, and accepts or rejects on the classic actual-vs-predicted
//! decrease ratio. The quasi-Newton operator is updated on accepted steps
//! only, so rejected iterations change nothing but the radius.

use crate::error::{Error, Result};
use crate::history::{
    IterationRecord, SolveResult, SolveStatus, StepDiagnostics, StepFlag,
};
use crate::inner::{criticality_measure, pg_step_size, pg_subsolve_from, SubproblemSpec};
use crate::problem::{BallNorm, RegularizedProblem};
use crate::qn::QuasiNewtonOperator;
use crate::r2::r2_subsolve;

/// Which method refines the step on the model after the criticality step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsolver {
    /// Fixed-step proximal gradient, warm-started from `s_{k,1}`.
    Pg,
    /// Adaptive quadratic regularization on the model, seeded so its first
    /// candidate coincides with `s_{k,1}`.
    R2,
}

#[derive(Debug, Clone, Copy)]
pub struct TrParams {
    /// Acceptance threshold (0 < η₁ ≤ η₂ < 1).
    pub eta1: f64,
    pub eta2: f64,
    /// Radius factors: 0 < γ₁ ≤ γ₂ < 1 < γ₃ ≤ γ₄. Shrink uses γ₂Δ, growth
    /// uses γ₃Δ; γ₁ and γ₄ bound the allowed intervals.
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub gamma4: f64,
    /// Couples the step length to the radius: ν_k = 1/(L_k + Δ_k⁻¹/α).
    pub alpha: f64,
    /// Effective-radius factor: the refined step may not exceed β‖s_{k,1}‖.
    pub beta: f64,
    pub delta0: f64,
    /// Stop when √ξ(Δ_k; x_k, ν_k) ≤ eps.
    pub eps: f64,
    pub max_iter: u64,
    pub inner_max_iter: u64,
    pub ball: BallNorm,
    pub subsolver: Subsolver,
    /// Descent parameter θ ∈ (0,1) for the inner proximal-gradient steps.
    pub theta: f64,
}

impl Default for TrParams {
    fn default() -> Self {
        Self {
            eta1: 0.25,
            eta2: 0.75,
            gamma1: 0.25,
            gamma2: 0.5,
            gamma3: 1.5,
            gamma4: 2.0,
            alpha: 1.0,
            beta: 2.0,
            delta0: 1.0,
            eps: 1e-3,
            max_iter: 1000,
            inner_max_iter: 5000,
            ball: BallNorm::Linf,
            subsolver: Subsolver::Pg,
            theta: 0.9,
        }
    }
}

impl TrParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.eta1 && self.eta1 <= self.eta2 && self.eta2 < 1.0) {
            return Err(Error::contract("requires 0 < eta1 <= eta2 < 1"));
        }
        if !(0.0 < self.gamma1
            && self.gamma1 <= self.gamma2
            && self.gamma2 < 1.0
            && 1.0 < self.gamma3
            && self.gamma3 <= self.gamma4)
        {
            return Err(Error::contract(
                "requires 0 < gamma1 <= gamma2 < 1 < gamma3 <= gamma4",
            ));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::contract("requires alpha > 0"));
        }
        if !(self.beta >= 1.0) {
            return Err(Error::contract("requires beta >= 1"));
        }
        if !(self.delta0 > 0.0) {
            return Err(Error::contract("requires delta0 > 0"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::contract("requires eps > 0"));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::contract("requires theta in (0, 1)"));
        }
        Ok(())
    }
}

/// Step length coupling curvature and radius: exactly `1/(L + Δ⁻¹/α)`, so
/// small radii damp the proximal step and `ν·(L + α⁻¹Δ⁻¹) = 1` always.
pub fn step_length(l: f64, alpha: f64, delta: f64) -> f64 {
    assert!(l >= 0.0 && alpha > 0.0 && delta > 0.0);
    1.0 / (l + 1.0 / (alpha * delta))
}

/// Ratio classification and next radius: ρ ≥ η₂ grows the radius to γ₃Δ,
/// ρ ∈ [η₁, η₂) keeps it, ρ < η₁ shrinks it to γ₂Δ.
pub fn classify_and_update_radius(rho: f64, delta: f64, p: &TrParams) -> (StepFlag, f64) {
    if rho >= p.eta2 {
        (StepFlag::VerySuccessful, p.gamma3 * delta)
    } else if rho >= p.eta1 {
        (StepFlag::Successful, delta)
    } else {
        (StepFlag::Unsuccessful, p.gamma2 * delta)
    }
}

pub fn tr_solve(
    problem: &RegularizedProblem,
    mut qn: QuasiNewtonOperator,
    params: &TrParams,
) -> Result<SolveResult> {
    params.validate()?;
    Error::check_dim(problem.dim(), qn.dim())?;

    let mut x = problem.x0.clone();
    let mut fx = problem.smooth.eval_f(&x)?;
    let mut hx = problem.reg.value(&x);
    if !fx.is_finite() || !hx.is_finite() {
        return Err(Error::contract("objective must be finite at the start"));
    }
    let mut gx = problem.smooth.eval_grad(&x)?;
    let mut delta = params.delta0;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    let mut final_crit = f64::INFINITY;

    for k in 0..params.max_iter {
        let l_k = qn.norm_bound();
        let nu_k = step_length(l_k, params.alpha, delta);
        let (xi, s1) = criticality_measure(
            &x, fx, &gx, nu_k, delta, params.ball, &problem.reg,
        )?;
        let crit = xi.sqrt();
        final_crit = crit;
        let obj = fx + hx;

        if crit <= params.eps {
            status = SolveStatus::FirstOrderOptimal;
            history.push(IterationRecord {
                k: k as usize,
                objective: obj,
                criticality: crit,
                criticality_scaled: crit / nu_k,
                radius_or_sigma: delta,
                rho: None,
                status_flag: None,
                f_evals: problem.smooth.f_evals(),
                grad_evals: problem.smooth.grad_evals(),
                prox_evals: problem.reg.prox_evals(),
                step: None,
            });
            break;
        }

        // Effective radius: the refined step may wander, but not beyond a
        // fixed multiple of the criticality step.
        let s1_norm = params.ball.norm(&s1);
        let delta_eff = delta.min(params.beta * s1_norm);
        if !(delta_eff > 0.0) {
            return Err(Error::contract(
                "criticality step vanished at a non-stationary point",
            ));
        }

        // Inner tolerance from the criticality of the shifted point, the
        // inexact-Newton pattern: tighten as stationarity approaches. If
        // the shifted point is not evaluable (infinite f), fall back to
        // the current point's measure.
        let x_shift = &x + &s1;
        let f_shift = problem.smooth.eval_f(&x_shift)?;
        let xi_hat = if f_shift.is_finite() {
            let g_shift = problem.smooth.eval_grad(&x_shift)?;
            let (v, _) = criticality_measure(
                &x_shift, f_shift, &g_shift, nu_k, delta, params.ball, &problem.reg,
            )?;
            v
        } else {
            xi
        };
        let tol_inner = (0.01f64.min(xi_hat.sqrt()) * xi_hat).max(1e-15);

        let spec = SubproblemSpec {
            g: &gx,
            b: Some(&qn),
            fx,
            x: &x,
            reg: &problem.reg,
            delta: delta_eff,
            ball: params.ball,
            nu: nu_k,
            theta: params.theta,
        };
        let (s, istats) = match params.subsolver {
            Subsolver::Pg => {
                let nu_inner = pg_step_size(l_k, params.theta);
                let spec = SubproblemSpec {
                    nu: nu_inner,
                    ..spec
                };
                pg_subsolve_from(&spec, &s1, tol_inner, params.inner_max_iter)?
            }
            Subsolver::R2 => {
                r2_subsolve(&spec, 1.0 / nu_k, tol_inner, params.inner_max_iter)?
            }
        };
        let den = istats.model_decrease;

        if den <= 0.0 {
            history.push(IterationRecord {
                k: k as usize,
                objective: obj,
                criticality: crit,
                criticality_scaled: crit / nu_k,
                radius_or_sigma: delta,
                rho: None,
                status_flag: None,
                f_evals: problem.smooth.f_evals(),
                grad_evals: problem.smooth.grad_evals(),
                prox_evals: problem.reg.prox_evals(),
                step: Some(StepDiagnostics {
                    step_norm: params.ball.norm(&s),
                    step_cap: delta_eff,
                    xi,
                    model_decrease: den,
                    actual_decrease: None,
                    radius_next: delta,
                    inner_iterations: istats.iterations as usize,
                }),
            });
            status = SolveStatus::Stalled;
            break;
        }

        let x_trial = &x + &s;
        let f_trial = problem.smooth.eval_f(&x_trial)?;
        let h_trial = problem.reg.value(&x_trial);
        let trial_obj = f_trial + h_trial;
        let rho = if trial_obj.is_finite() {
            (obj - trial_obj) / den
        } else {
            f64::NEG_INFINITY
        };
        let (flag, delta_next) = classify_and_update_radius(rho, delta, params);

        if rho >= params.eta1 {
            let g_new = problem.smooth.eval_grad(&x_trial)?;
            let y = &g_new - &gx;
            qn.update(&s, &y)?;
            x = x_trial;
            fx = f_trial;
            hx = h_trial;
            gx = g_new;
        }

        history.push(IterationRecord {
            k: k as usize,
            objective: obj,
            criticality: crit,
            criticality_scaled: crit / nu_k,
            radius_or_sigma: delta,
            rho: rho.is_finite().then_some(rho),
            status_flag: Some(flag),
            f_evals: problem.smooth.f_evals(),
            grad_evals: problem.smooth.grad_evals(),
            prox_evals: problem.reg.prox_evals(),
            step: Some(StepDiagnostics {
                step_norm: params.ball.norm(&s),
                step_cap: delta_eff,
                xi,
                model_decrease: den,
                actual_decrease: trial_obj.is_finite().then(|| obj - trial_obj),
                radius_next: delta_next,
                inner_iterations: istats.iterations as usize,
            }),
        });
        delta = delta_next;
    }

    if status == SolveStatus::MaxIterations {
        let l = qn.norm_bound();
        let nu = step_length(l, params.alpha, delta);
        let (xi, _) =
            criticality_measure(&x, fx, &gx, nu, delta, params.ball, &problem.reg)?;
        final_crit = xi.sqrt();
    }

    Ok(SolveResult {
        x_final: x,
        status,
        final_objective: fx + hx,
        final_criticality: final_crit,
        iterations: history.len(),
        f_evals: problem.smooth.f_evals(),
        grad_evals: problem.smooth.grad_evals(),
        prox_evals: problem.reg.prox_evals(),
        history,
    })
}
