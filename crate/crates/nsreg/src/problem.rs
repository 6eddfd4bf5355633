//! Problem definition: a smooth term `f` given by value/gradient oracles and a
//! nonsmooth regularizer `h`, minimized jointly as `f(x) + h(x)`.
//!
//! Evaluation counters live on the oracles themselves ([`Cell`]-based, so a
//! problem instance is single-threaded by construction; independent instances
//! can be used concurrently).

use std::cell::Cell;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

type ValueFn = dyn Fn(&DVector<f64>) -> f64;
type GradFn = dyn Fn(&DVector<f64>) -> DVector<f64>;

/// Value/gradient access to the smooth term `f`, with exact call counters.
///
/// The closures must be deterministic: repeated evaluation at the same point
/// returns the same result.
pub struct SmoothOracle {
    dim: usize,
    f: Box<ValueFn>,
    grad: Box<GradFn>,
    f_evals: Cell<u64>,
    grad_evals: Cell<u64>,
}

impl SmoothOracle {
    pub fn new(
        dim: usize,
        f: impl Fn(&DVector<f64>) -> f64 + 'static,
        grad: impl Fn(&DVector<f64>) -> DVector<f64> + 'static,
    ) -> Self {
        SmoothOracle {
            dim,
            f: Box::new(f),
            grad: Box::new(grad),
            f_evals: Cell::new(0),
            grad_evals: Cell::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `f(x)`. Counts one function evaluation. `+inf` is a legal value and
    /// signals a point outside the oracle's finite range (e.g. an ODE
    /// blow-up); solvers reject such trial points.
    pub fn eval_f(&self, x: &DVector<f64>) -> Result<f64> {
        Error::check_dim(self.dim, x.len())?;
        self.f_evals.set(self.f_evals.get() + 1);
        Ok((self.f)(x))
    }

    /// `∇f(x)`. Counts one gradient evaluation.
    pub fn eval_grad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        Error::check_dim(self.dim, x.len())?;
        self.grad_evals.set(self.grad_evals.get() + 1);
        Ok((self.grad)(x))
    }

    pub fn f_evals(&self) -> u64 {
        self.f_evals.get()
    }

    pub fn grad_evals(&self) -> u64 {
        self.grad_evals.get()
    }
}

impl std::fmt::Debug for SmoothOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothOracle")
            .field("dim", &self.dim)
            .field("f_evals", &self.f_evals.get())
            .field("grad_evals", &self.grad_evals.get())
            .finish()
    }
}

/// Which regularizer family `h` belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegKind {
    /// `h(x) = λ‖x‖₁`
    L1,
    /// `h(x) = λ‖x‖₀` (count of nonzero entries, weighted)
    L0,
    /// `h(x) = indicator of {card(x) ≤ k}`: 0 when at most `k` entries are
    /// nonzero, `+inf` otherwise.
    L0Ball,
}

/// The nonsmooth term `h`, with its proximal-evaluation counter.
///
/// `lambda` is the weight for [`RegKind::L1`]/[`RegKind::L0`] (ignored by
/// `L0Ball`); `k` is the cardinality bound for [`RegKind::L0Ball`] (ignored
/// otherwise).
#[derive(Debug)]
pub struct Regularizer {
    pub kind: RegKind,
    pub lambda: f64,
    pub k: usize,
    prox_evals: Cell<u64>,
}

impl Regularizer {
    pub fn l1(lambda: f64) -> Self {
        assert!(lambda >= 0.0, "negative regularization weight");
        Regularizer { kind: RegKind::L1, lambda, k: 0, prox_evals: Cell::new(0) }
    }

    pub fn l0(lambda: f64) -> Self {
        assert!(lambda >= 0.0, "negative regularization weight");
        Regularizer { kind: RegKind::L0, lambda, k: 0, prox_evals: Cell::new(0) }
    }

    pub fn l0_ball(k: usize) -> Self {
        Regularizer { kind: RegKind::L0Ball, lambda: 0.0, k, prox_evals: Cell::new(0) }
    }

    /// `h(x)`. Always ≥ 0; `+inf` exactly when the `L0Ball` cardinality bound
    /// is exceeded.
    pub fn value(&self, x: &DVector<f64>) -> f64 {
        match self.kind {
            RegKind::L1 => self.lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
            RegKind::L0 => self.lambda * x.iter().filter(|v| **v != 0.0).count() as f64,
            RegKind::L0Ball => {
                let card = x.iter().filter(|v| **v != 0.0).count();
                if card <= self.k {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub fn prox_evals(&self) -> u64 {
        self.prox_evals.get()
    }

    pub(crate) fn count_prox(&self) {
        self.prox_evals.set(self.prox_evals.get() + 1);
    }
}

/// Norm defining the trust region `{s : ‖s‖ ≤ Δ}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BallNorm {
    L2,
    Linf,
}

impl BallNorm {
    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        match self {
            BallNorm::L2 => v.norm(),
            BallNorm::Linf => v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())),
        }
    }
}

/// The full instance: minimize `f(x) + h(x)` starting from `x0`.
///
/// `h(x0)` must be finite (a cardinality-infeasible start has no objective
/// value to improve on).
pub struct RegularizedProblem {
    pub smooth: SmoothOracle,
    pub reg: Regularizer,
    pub x0: DVector<f64>,
}

impl RegularizedProblem {
    pub fn new(smooth: SmoothOracle, reg: Regularizer, x0: DVector<f64>) -> Result<Self> {
        Error::check_dim(smooth.dim(), x0.len())?;
        if !reg.value(&x0).is_finite() {
            return Err(Error::contract("h(x0) must be finite"));
        }
        Ok(RegularizedProblem { smooth, reg, x0 })
    }

    pub fn dim(&self) -> usize {
        self.smooth.dim()
    }

    /// `f(x) + h(x)`; counts one `f` evaluation. `+inf` is legal (infeasible
    /// cardinality or oracle blow-up).
    pub fn objective(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.smooth.eval_f(x)? + self.reg.value(x))
    }

    /// `∇f(x)`; counts one gradient evaluation.
    pub fn grad(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.smooth.eval_grad(x)
    }
}

impl std::fmt::Debug for RegularizedProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RegularizedProblem")
            .field("smooth", &self.smooth)
            .field("reg", &self.reg)
            .finish()
    }
}
