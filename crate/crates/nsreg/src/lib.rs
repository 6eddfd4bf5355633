//! Solvers for regularized problems `min f(x) + h(x)` where `f` is smooth
//! (possibly nonconvex) and `h` is nonsmooth, nonconvex, and cheap to
//! proximate — sparsity penalties (ℓ1, ℓ0) and cardinality constraints.
//!
//! The toolbox:
//!
//! * a trust-region method whose subproblems are solved by proximal-gradient
//!   iterations on a limited-memory quasi-Newton model ([`tr::tr_solve`]),
//! * a quadratic-regularization method — proximal gradient with an adaptive
//!   step — usable standalone or as the trust-region subsolver
//!   ([`r2::r2_solve`]),
//! * a fixed-step proximal-gradient baseline ([`pg::pg_solve`]),
//! * shifted, trust-region-constrained proximal operators for all the
//!   regularizers ([`prox`]), and
//! * reproducible benchmark generators: sparse recovery and
//!   FitzHugh–Nagumo ODE inversion ([`experiments`]).
//!
//! Stationarity is measured by ξ, the decrease a single proximal-gradient
//! step achieves on the local model; `√ξ ≤ ε` is the uniform stopping rule.

pub mod error;
pub mod experiments;
pub mod history;
pub mod inner;
pub mod pg;
pub mod problem;
pub mod prox;
pub mod qn;
pub mod r2;
pub mod tr;

pub use error::{Error, Result};
pub use history::{IterationRecord, SolveResult, SolveStatus, StepDiagnostics, StepFlag};
pub use problem::{BallNorm, RegKind, RegularizedProblem, Regularizer, SmoothOracle};
pub use qn::{QnKind, QuasiNewtonOperator};
