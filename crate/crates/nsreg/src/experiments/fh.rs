//! Neuron-model ODE inversion benchmark: recover the 5 parameters of the
//! FitzHugh–Nagumo system
//!
//! ```text
//! V' = (V − V³/3 − W + x₁)/x₂,    W' = x₂(x₃V − x₄W + x₅)
//! ```
//!
//! from noisy samples of both states. With x₁ = x₄ = x₅ = 0 the system is
//! the Van der Pol oscillator, which is the ground truth here — so a sparse
//! solve should zero exactly those three parameters.
//!
//! Integration is classical fixed-step RK4. Gradients come from forward
//! sensitivities integrated with the same stages, which makes them the
//! exact derivative of the discrete trajectory (not an approximation of the
//! continuous one), so finite-difference checks converge sharply.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::rng::SplitMix64;
use crate::problem::{RegularizedProblem, Regularizer, SmoothOracle};

const DIM: usize = 5;
/// State blow-up guard; beyond this the cubic term overflows within a step.
const STATE_CAP: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct OdeInstance {
    pub t0: f64,
    pub t1: f64,
    /// Observation spacing.
    pub dt_obs: f64,
    /// Integration substep (must divide `dt_obs`).
    pub dt_int: f64,
    pub v0: f64,
    pub w0: f64,
    /// Observations: all V samples, then all W samples (t0 included).
    pub b: DVector<f64>,
    pub x_true: DVector<f64>,
    pub seed: u64,
}

impl OdeInstance {
    pub fn n_obs(&self) -> usize {
        ((self.t1 - self.t0) / self.dt_obs).round() as usize
    }

    /// Samples per state: observation intervals plus the initial time.
    pub fn samples(&self) -> usize {
        self.n_obs() + 1
    }

    fn steps_per_obs(&self) -> Result<usize> {
        let ratio = self.dt_obs / self.dt_int;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
            return Err(Error::contract(
                "integration substep must divide the observation spacing",
            ));
        }
        Ok(ratio.round() as usize)
    }
}

/// Right-hand side; the relaxation parameter x₂ scales both equations and
/// must be nonzero.
pub fn fh_rhs(v: f64, w: f64, x: &DVector<f64>) -> Result<(f64, f64)> {
    Error::check_dim(DIM, x.len())?;
    if x[1] == 0.0 {
        return Err(Error::contract("relaxation parameter x2 must be nonzero"));
    }
    Ok(rhs_unchecked(v, w, x))
}

/// Van der Pol right-hand side: the x₁ = x₄ = x₅ = 0 reduction.
pub fn vdp_rhs(v: f64, w: f64, x: &DVector<f64>) -> Result<(f64, f64)> {
    Error::check_dim(DIM, x.len())?;
    if x[1] == 0.0 {
        return Err(Error::contract("relaxation parameter x2 must be nonzero"));
    }
    Ok((
        (v - v * v * v / 3.0 - w) / x[1],
        x[1] * (x[2] * v),
    ))
}

fn rhs_unchecked(v: f64, w: f64, x: &DVector<f64>) -> (f64, f64) {
    (
        (v - v * v * v / 3.0 - w + x[0]) / x[1],
        x[1] * (x[2] * v - x[3] * w + x[4]),
    )
}

/// Integrates the trajectory and samples both states on the observation
/// grid: returns the length-`2·samples` vector (V block, then W block).
pub fn fh_simulate(x: &DVector<f64>, inst: &OdeInstance) -> Result<DVector<f64>> {
    Error::check_dim(DIM, x.len())?;
    if x[1] == 0.0 {
        return Err(Error::contract("relaxation parameter x2 must be nonzero"));
    }
    let steps = inst.steps_per_obs()?;
    let n_obs = inst.n_obs();
    let dt = inst.dt_int;
    let (mut v, mut w) = (inst.v0, inst.w0);
    let mut vs = Vec::with_capacity(n_obs + 1);
    let mut ws = Vec::with_capacity(n_obs + 1);
    vs.push(v);
    ws.push(w);
    for obs in 0..n_obs {
        for sub in 0..steps {
            let (k1v, k1w) = rhs_unchecked(v, w, x);
            let (k2v, k2w) = rhs_unchecked(v + 0.5 * dt * k1v, w + 0.5 * dt * k1w, x);
            let (k3v, k3w) = rhs_unchecked(v + 0.5 * dt * k2v, w + 0.5 * dt * k2w, x);
            let (k4v, k4w) = rhs_unchecked(v + dt * k3v, w + dt * k3w, x);
            v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            w += dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
            if !v.is_finite() || !w.is_finite() || v.abs() > STATE_CAP || w.abs() > STATE_CAP
            {
                return Err(Error::Integration(format!(
                    "state diverged at t = {:.4}",
                    inst.t0 + (obs * steps + sub + 1) as f64 * dt
                )));
            }
        }
        vs.push(v);
        ws.push(w);
    }
    vs.extend_from_slice(&ws);
    Ok(DVector::from_vec(vs))
}

/// Augmented state: (V, W) plus ∂V/∂x and ∂W/∂x.
type Aug = [f64; 2 + 2 * DIM];

fn aug_rhs(s: &Aug, x: &DVector<f64>) -> Aug {
    let (v, w) = (s[0], s[1]);
    let (dv, dw) = rhs_unchecked(v, w, x);
    // State Jacobian of the right-hand side.
    let a11 = (1.0 - v * v) / x[1];
    let a12 = -1.0 / x[1];
    let a21 = x[1] * x[2];
    let a22 = -x[1] * x[3];
    // Parameter Jacobian rows.
    let jv = [
        1.0 / x[1],
        -(v - v * v * v / 3.0 - w + x[0]) / (x[1] * x[1]),
        0.0,
        0.0,
        0.0,
    ];
    let jw = [0.0, x[2] * v - x[3] * w + x[4], x[1] * v, -x[1] * w, x[1]];
    let mut out = [0.0; 2 + 2 * DIM];
    out[0] = dv;
    out[1] = dw;
    for i in 0..DIM {
        let (sv, sw) = (s[2 + i], s[2 + DIM + i]);
        out[2 + i] = a11 * sv + a12 * sw + jv[i];
        out[2 + DIM + i] = a21 * sv + a22 * sw + jw[i];
    }
    out
}

/// Trajectory plus its exact parameter Jacobian (rows ordered like the
/// trajectory vector), from forward sensitivities sharing the RK4 stages.
pub fn fh_simulate_with_sensitivity(
    x: &DVector<f64>,
    inst: &OdeInstance,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    Error::check_dim(DIM, x.len())?;
    if x[1] == 0.0 {
        return Err(Error::contract("relaxation parameter x2 must be nonzero"));
    }
    let steps = inst.steps_per_obs()?;
    let n_obs = inst.n_obs();
    let samples = n_obs + 1;
    let dt = inst.dt_int;

    let mut s: Aug = [0.0; 2 + 2 * DIM];
    s[0] = inst.v0;
    s[1] = inst.w0;

    let mut traj = DVector::zeros(2 * samples);
    let mut jac = DMatrix::zeros(2 * samples, DIM);
    let record = |s: &Aug, idx: usize, traj: &mut DVector<f64>, jac: &mut DMatrix<f64>| {
        traj[idx] = s[0];
        traj[samples + idx] = s[1];
        for i in 0..DIM {
            jac[(idx, i)] = s[2 + i];
            jac[(samples + idx, i)] = s[2 + DIM + i];
        }
    };
    record(&s, 0, &mut traj, &mut jac);

    for obs in 0..n_obs {
        for sub in 0..steps {
            let k1 = aug_rhs(&s, x);
            let k2 = aug_rhs(&aug_axpy(&s, 0.5 * dt, &k1), x);
            let k3 = aug_rhs(&aug_axpy(&s, 0.5 * dt, &k2), x);
            let k4 = aug_rhs(&aug_axpy(&s, dt, &k3), x);
            for i in 0..s.len() {
                s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if !s.iter().all(|c| c.is_finite())
                || s[0].abs() > STATE_CAP
                || s[1].abs() > STATE_CAP
            {
                return Err(Error::Integration(format!(
                    "state or sensitivity diverged at t = {:.4}",
                    inst.t0 + (obs * steps + sub + 1) as f64 * dt
                )));
            }
        }
        record(&s, obs + 1, &mut traj, &mut jac);
    }
    Ok((traj, jac))
}

fn aug_axpy(s: &Aug, a: f64, d: &Aug) -> Aug {
    let mut out = *s;
    for i in 0..out.len() {
        out[i] += a * d[i];
    }
    out
}

/// Misfit oracle `½‖F(x) − b‖²`. Integration failures surface as an
/// infinite objective so solvers reject the trial point; the gradient
/// closure returns zero there (it is never consulted at infinite-objective
/// points by the solvers in this crate).
pub fn fh_oracle(inst: &OdeInstance) -> SmoothOracle {
    let inst_f = inst.clone();
    let inst_g = inst.clone();
    SmoothOracle::new(
        DIM,
        move |x| match fh_simulate(x, &inst_f) {
            Ok(f) => (f - &inst_f.b).norm_squared() * 0.5,
            Err(_) => f64::INFINITY,
        },
        move |x| match fh_simulate_with_sensitivity(x, &inst_g) {
            Ok((f, jac)) => jac.transpose() * (f - &inst_g.b),
            Err(_) => DVector::zeros(DIM),
        },
    )
}

/// Standard instance: Van der Pol ground truth `(0, 0.2, 1, 0, 0)` observed
/// from `(V, W) = (2, 0)` over 20 s at 0.2 s spacing, with additive
/// Gaussian noise of the given standard deviation on every sample.
pub fn gen_fh(seed: u64, noise_std: f64) -> Result<OdeInstance> {
    let x_true = DVector::from_vec(vec![0.0, 0.2, 1.0, 0.0, 0.0]);
    let mut inst = OdeInstance {
        t0: 0.0,
        t1: 20.0,
        dt_obs: 0.2,
        dt_int: 0.01,
        v0: 2.0,
        w0: 0.0,
        b: DVector::zeros(0),
        x_true,
        seed,
    };
    let clean = fh_simulate(&inst.x_true, &inst)?;
    let mut rng = SplitMix64::new(seed);
    inst.b = clean.map(|c| c + noise_std * rng.next_normal());
    Ok(inst)
}

/// Full problem from a constant starting vector (the all-0.5 point unless
/// overridden); zero is outside the domain because x₂ = 0 is singular.
pub fn fh_problem(inst: &OdeInstance, reg: Regularizer) -> Result<RegularizedProblem> {
    let x0 = DVector::from_element(DIM, 0.5);
    RegularizedProblem::new(fh_oracle(inst), reg, x0)
}

/// Serialization mirror with explicit grid description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdeInstanceDoc {
    pub t0: f64,
    pub t1: f64,
    pub dt_obs: f64,
    pub dt_int: f64,
    pub v0: f64,
    pub w0: f64,
    pub seed: u64,
    pub b: Vec<f64>,
    pub x_true: Vec<f64>,
}

impl From<&OdeInstance> for OdeInstanceDoc {
    fn from(inst: &OdeInstance) -> Self {
        Self {
            t0: inst.t0,
            t1: inst.t1,
            dt_obs: inst.dt_obs,
            dt_int: inst.dt_int,
            v0: inst.v0,
            w0: inst.w0,
            seed: inst.seed,
            b: inst.b.iter().copied().collect(),
            x_true: inst.x_true.iter().copied().collect(),
        }
    }
}

impl TryFrom<OdeInstanceDoc> for OdeInstance {
    type Error = Error;

    fn try_from(doc: OdeInstanceDoc) -> Result<Self> {
        Error::check_dim(DIM, doc.x_true.len())?;
        let inst = OdeInstance {
            t0: doc.t0,
            t1: doc.t1,
            dt_obs: doc.dt_obs,
            dt_int: doc.dt_int,
            v0: doc.v0,
            w0: doc.w0,
            b: DVector::from_vec(doc.b),
            x_true: DVector::from_vec(doc.x_true),
            seed: doc.seed,
        };
        Error::check_dim(2 * inst.samples(), inst.b.len())?;
        Ok(inst)
    }
}
