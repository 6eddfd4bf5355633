//! Quadratic-regularization solver: an adaptive-step proximal-gradient
//! method. The model at σ is linear-plus-prox,
//!
//! ```text
//! m(s; x, σ) = f(x) + ∇f(x)ᵀs + h(x + s) + ½σ‖s‖²,
//! ```
//!
//! whose exact minimizer is one shifted prox evaluation with step 1/σ. The
//! decrease `ξ(σ; x) = f(x) + h(x) − m(s; x, σ)` doubles as the criticality
//! measure (stop when `√ξ ≤ ε`), σ shrinks on successful steps and grows on
//! rejections, and no step-size sweep is ever needed.
//!
//! The same loop, applied to a trust-region quadratic model with the ball
//! folded into the prox, serves as the trust-region inner solver.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::history::{
    IterationRecord, SolveResult, SolveStatus, StepDiagnostics, StepFlag,
};
use crate::inner::{InnerStats, SubproblemSpec};
use crate::problem::{BallNorm, RegularizedProblem, Regularizer};
use crate::prox::ProxQuery;

#[derive(Debug, Clone, Copy)]
pub struct R2Params {
    /// Acceptance threshold (0 < η₁ ≤ η₂ < 1).
    pub eta1: f64,
    /// Very-successful threshold.
    pub eta2: f64,
    /// σ growth factor on rejection (1 < γ₁ ≤ γ₂).
    pub gamma1: f64,
    /// Upper end of the rejection interval [γ₁σ, γ₂σ]; kept for the
    /// ordering invariant, the update itself uses the lower end γ₁σ.
    pub gamma2: f64,
    /// σ shrink factor on very successful steps (0 < γ₃ ≤ 1).
    pub gamma3: f64,
    /// Initial regularization parameter.
    pub sigma0: f64,
    /// Stop when √ξ(σ_k; x_k) ≤ eps.
    pub eps: f64,
    pub max_iter: u64,
}

impl Default for R2Params {
    fn default() -> Self {
        Self {
            eta1: 0.25,
            eta2: 0.75,
            gamma1: 2.0,
            gamma2: 5.0,
            gamma3: 0.5,
            sigma0: 1.0,
            eps: 1e-3,
            max_iter: 10_000,
        }
    }
}

impl R2Params {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.eta1 && self.eta1 <= self.eta2 && self.eta2 < 1.0) {
            return Err(Error::contract("requires 0 < eta1 <= eta2 < 1"));
        }
        if !(0.0 < self.gamma3
            && self.gamma3 <= 1.0
            && 1.0 < self.gamma1
            && self.gamma1 <= self.gamma2)
        {
            return Err(Error::contract("requires 0 < gamma3 <= 1 < gamma1 <= gamma2"));
        }
        if !(self.sigma0 > 0.0) {
            return Err(Error::contract("requires sigma0 > 0"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::contract("requires eps > 0"));
        }
        Ok(())
    }
}

/// Exact minimizer of the σ-regularized model: the shifted prox of `reg` at
/// `q = −g/σ` with step `ν = 1/σ` and no ball constraint.
pub fn r2_step(
    x: &DVector<f64>,
    fx: f64,
    g: &DVector<f64>,
    sigma: f64,
    reg: &Regularizer,
) -> Result<DVector<f64>> {
    let _ = fx; // constant term of the model; the minimizer ignores it
    if !(sigma > 0.0) {
        return Err(Error::contract("regularized step requires sigma > 0"));
    }
    let nu = 1.0 / sigma;
    let q = -g * nu;
    reg.prox(&ProxQuery {
        x,
        q: &q,
        nu,
        delta: f64::INFINITY,
        ball: BallNorm::Linf,
    })
}

/// σ update: shrink to γ₃σ when ρ ≥ η₂, hold for η₁ ≤ ρ < η₂, grow to γ₁σ
/// below η₁ (deterministic lower ends of the allowed intervals).
pub fn update_sigma(rho: f64, sigma: f64, p: &R2Params) -> (StepFlag, f64) {
    if rho >= p.eta2 {
        (StepFlag::VerySuccessful, p.gamma3 * sigma)
    } else if rho >= p.eta1 {
        (StepFlag::Successful, sigma)
    } else {
        (StepFlag::Unsuccessful, p.gamma1 * sigma)
    }
}

/// Everything the σ-model decrease identities give for one candidate step.
struct StepMeasures {
    /// Linear-model decrease `h(x) − gᵀs − h(x+s)`; the ρ denominator.
    lin_dec: f64,
    /// `ξ(σ; x) = lin_dec − ½σ‖s‖²`, clamped at 0 for round-off.
    xi: f64,
    h_trial: f64,
}

fn measures(
    g: &DVector<f64>,
    hx: f64,
    s: &DVector<f64>,
    sigma: f64,
    h_trial: f64,
) -> StepMeasures {
    let lin_dec = hx - g.dot(s) - h_trial;
    let xi = lin_dec - 0.5 * sigma * s.norm_squared();
    // For convex h the stronger identities ξ ≥ ½σ‖s‖² and lin_dec ≥ σ‖s‖²
    // also hold; they can fail for the ℓ0 kinds, so only nonnegativity is
    // checked here.
    debug_assert!(
        xi >= -1e-8 * (1.0 + hx.abs()),
        "sigma-model decrease went negative: xi = {xi}"
    );
    StepMeasures {
        lin_dec,
        xi: xi.max(0.0),
        h_trial,
    }
}

pub fn r2_solve(problem: &RegularizedProblem, params: &R2Params) -> Result<SolveResult> {
    params.validate()?;
    let mut x = problem.x0.clone();
    let mut fx = problem.smooth.eval_f(&x)?;
    let mut hx = problem.reg.value(&x);
    if !fx.is_finite() || !hx.is_finite() {
        return Err(Error::contract("objective must be finite at the start"));
    }
    let mut gx = problem.smooth.eval_grad(&x)?;
    let mut sigma = params.sigma0;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    let mut final_crit = f64::INFINITY;

    for k in 0..params.max_iter {
        let s = r2_step(&x, fx, &gx, sigma, &problem.reg)?;
        let h_trial = problem.reg.value(&(&x + &s));
        let m = measures(&gx, hx, &s, sigma, h_trial);
        let crit = m.xi.sqrt();
        final_crit = crit;

        if crit <= params.eps {
            status = SolveStatus::FirstOrderOptimal;
            history.push(IterationRecord {
                k: k as usize,
                objective: fx + hx,
                criticality: crit,
                criticality_scaled: sigma * crit,
                radius_or_sigma: sigma,
                rho: None,
                status_flag: None,
                f_evals: problem.smooth.f_evals(),
                grad_evals: problem.smooth.grad_evals(),
                prox_evals: problem.reg.prox_evals(),
                step: None,
            });
            break;
        }

        let x_trial = &x + &s;
        let f_trial = problem.smooth.eval_f(&x_trial)?;
        let trial_obj = f_trial + m.h_trial;
        let rho = if trial_obj.is_finite() {
            (fx + hx - trial_obj) / m.lin_dec
        } else {
            f64::NEG_INFINITY
        };
        let (flag, sigma_next) = update_sigma(rho, sigma, params);
        let accepted = rho >= params.eta1;

        history.push(IterationRecord {
            k: k as usize,
            objective: fx + hx,
            criticality: crit,
            criticality_scaled: sigma * crit,
            radius_or_sigma: sigma,
            rho: rho.is_finite().then_some(rho),
            status_flag: Some(flag),
            f_evals: problem.smooth.f_evals(),
            grad_evals: problem.smooth.grad_evals(),
            prox_evals: problem.reg.prox_evals(),
            step: Some(StepDiagnostics {
                step_norm: s.norm(),
                step_cap: f64::MAX,
                xi: m.xi,
                model_decrease: m.lin_dec,
                actual_decrease: trial_obj
                    .is_finite()
                    .then(|| fx + hx - trial_obj),
                radius_next: sigma_next,
                inner_iterations: 0,
            }),
        });

        if accepted {
            gx = problem.smooth.eval_grad(&x_trial)?;
            x = x_trial;
            fx = f_trial;
            hx = m.h_trial;
        }
        sigma = sigma_next;
    }

    if status == SolveStatus::MaxIterations {
        // Refresh the criticality at the final iterate so the reported
        // value describes x, not the last attempted configuration.
        let s = r2_step(&x, fx, &gx, sigma, &problem.reg)?;
        let h_trial = problem.reg.value(&(&x + &s));
        final_crit = measures(&gx, hx, &s, sigma, h_trial).xi.sqrt();
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

/// Trust-region inner solver: the same adaptive-σ loop run on the quadratic
/// model `φ(s) = fx + gᵀs + ½sᵀBs` with the trust-region ball folded into
/// the prox. Starting σ is the caller's choice — seeding it with the outer
/// ν⁻¹ makes the first candidate coincide with the criticality step, so the
/// whole solve keeps `m(0) − m(s) ≥ ξ`. Movement only happens on accepted
/// steps, so the quadratic-model value is monotonically non-increasing.
pub(crate) fn r2_subsolve(
    spec: &SubproblemSpec,
    sigma0: f64,
    tol: f64,
    max_iter: u64,
) -> Result<(DVector<f64>, InnerStats)> {
    let defaults = R2Params::default();
    let prox_before = spec.reg.prox_evals();
    let m0 = spec.fx + spec.reg.value(spec.x);

    let mut s = DVector::zeros(spec.x.len());
    let mut bs = DVector::zeros(spec.x.len());
    let mut psi = spec.reg.value(spec.x);
    let mut sigma = sigma0;
    let mut stats = InnerStats {
        iterations: 0,
        final_residual: f64::INFINITY,
        model_decrease: 0.0,
        prox_evals: 0,
        converged: false,
        worst_decrease_margin: f64::INFINITY,
        worst_gradient_margin: f64::INFINITY,
    };
    let mut m_curr = spec.fx + psi;
    let mut accepted_any = false;

    for _ in 0..max_iter {
        let grad_phi = spec.g + &bs;
        let nu = 1.0 / sigma;
        let q = &s - &grad_phi * nu;
        let cand = spec.reg.prox(&ProxQuery {
            x: spec.x,
            q: &q,
            nu,
            delta: spec.delta,
            ball: spec.ball,
        })?;
        stats.iterations += 1;
        let d = &cand - &s;
        let psi_cand = spec.reg.value(&(spec.x + &cand));
        let lin_dec = -grad_phi.dot(&d) + psi - psi_cand;
        let xi = (lin_dec - 0.5 * sigma * d.norm_squared()).max(0.0);
        stats.final_residual = xi.sqrt();
        // Only stop once some step has been accepted: the tolerance is an
        // estimate and may already hold at s = 0, but the outer loop needs
        // a step realizing at least the criticality decrease.
        if accepted_any && stats.final_residual <= tol {
            stats.converged = true;
            break;
        }

        let bs_cand = match spec.b {
            Some(op) => op.apply(&cand)?,
            None => DVector::zeros(cand.len()),
        };
        let m_cand = spec.fx + spec.g.dot(&cand) + 0.5 * cand.dot(&bs_cand) + psi_cand;
        let rho = (m_curr - m_cand) / lin_dec;
        let (_, sigma_next) = update_sigma(rho, sigma, &defaults);
        if rho >= defaults.eta1 {
            s = cand;
            bs = bs_cand;
            psi = psi_cand;
            m_curr = m_cand;
            accepted_any = true;
        }
        sigma = sigma_next;
    }

    stats.model_decrease = m0 - m_curr;
    stats.prox_evals = spec.reg.prox_evals() - prox_before;
    Ok((s, stats))
}
