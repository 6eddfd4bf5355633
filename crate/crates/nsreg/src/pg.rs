//! Fixed-step proximal-gradient baseline: one shifted prox per iteration at
//! a constant step length, no curvature model, no acceptance test. Serves
//! as the weakest comparator for the adaptive solvers; with a step length
//! from a valid Lipschitz bound it descends monotonically, but the method
//! itself never checks.

use crate::error::{Error, Result};
use crate::history::{IterationRecord, SolveResult, SolveStatus, StepDiagnostics, StepFlag};
use crate::inner::criticality_measure;
use crate::problem::{BallNorm, RegularizedProblem};

#[derive(Debug, Clone, Copy)]
pub struct PgParams {
    /// Constant step length ν > 0 (pick `(1 − θ)/L` for a Lipschitz bound L).
    pub nu: f64,
    /// Stop when √ξ ≤ eps, with ξ the fixed-ν criticality measure.
    pub eps: f64,
    pub max_iter: u64,
}

impl Default for PgParams {
    fn default() -> Self {
        Self {
            nu: 0.1,
            eps: 1e-3,
            max_iter: 100_000,
        }
    }
}

impl PgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::contract("requires nu > 0"));
        }
        if !(self.eps > 0.0) {
            return Err(Error::contract("requires eps > 0"));
        }
        Ok(())
    }
}

pub fn pg_solve(problem: &RegularizedProblem, params: &PgParams) -> Result<SolveResult> {
    params.validate()?;
    let nu = params.nu;
    let sigma_like = 1.0 / nu;

    let mut x = problem.x0.clone();
    let mut fx = problem.smooth.eval_f(&x)?;
    let mut hx = problem.reg.value(&x);
    if !fx.is_finite() || !hx.is_finite() {
        return Err(Error::contract("objective must be finite at the start"));
    }
    let mut gx = problem.smooth.eval_grad(&x)?;
    let mut history: Vec<IterationRecord> = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    let mut final_crit = f64::INFINITY;

    for k in 0..params.max_iter {
        let (xi, s) = criticality_measure(
            &x,
            fx,
            &gx,
            nu,
            f64::INFINITY,
            BallNorm::Linf,
            &problem.reg,
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
                criticality_scaled: crit / nu,
                radius_or_sigma: sigma_like,
                rho: None,
                status_flag: None,
                f_evals: problem.smooth.f_evals(),
                grad_evals: problem.smooth.grad_evals(),
                prox_evals: problem.reg.prox_evals(),
                step: None,
            });
            break;
        }

        let x_new = &x + &s;
        let f_new = problem.smooth.eval_f(&x_new)?;
        let h_new = problem.reg.value(&x_new);
        let g_new = problem.smooth.eval_grad(&x_new)?;
        let new_obj = f_new + h_new;

        history.push(IterationRecord {
            k: k as usize,
            objective: obj,
            criticality: crit,
            criticality_scaled: crit / nu,
            radius_or_sigma: sigma_like,
            rho: None,
            status_flag: Some(StepFlag::Successful),
            f_evals: problem.smooth.f_evals(),
            grad_evals: problem.smooth.grad_evals(),
            prox_evals: problem.reg.prox_evals(),
            step: Some(StepDiagnostics {
                step_norm: s.norm(),
                step_cap: f64::MAX,
                xi,
                model_decrease: xi,
                actual_decrease: new_obj.is_finite().then(|| obj - new_obj),
                radius_next: sigma_like,
                inner_iterations: 0,
            }),
        });

        x = x_new;
        fx = f_new;
        hx = h_new;
        gx = g_new;
    }

    if status == SolveStatus::MaxIterations {
        let (xi, _) = criticality_measure(
            &x,
            fx,
            &gx,
            nu,
            f64::INFINITY,
            BallNorm::Linf,
            &problem.reg,
        )?;
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
