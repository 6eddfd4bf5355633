//! Proximal operators for the regularizers, both free-standing and in the
//! shifted, trust-region-constrained form the solvers need:
//!
//! ```text
//! argmin_s  ½ν⁻¹‖s − q‖² + h(x + s)   subject to ‖s‖ ≤ Δ
//! ```
//!
//! The shift `x` is the current iterate (the model regularizes `h(x + s)` as
//! a function of the step `s`), `q` is the query point `s_j − ν∇φ(s_j)` of a
//! proximal-gradient iteration, and the ball may be the sup-norm box (all
//! regularizers) or the Euclidean ball (ℓ1 only, via a scalar dual root
//! solve). `Δ = +inf` turns every operator into its unconstrained form.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::problem::{BallNorm, RegKind, Regularizer};

/// Arguments shared by the shifted/constrained proximal operators.
#[derive(Debug, Clone, Copy)]
pub struct ProxQuery<'a> {
    /// Current iterate; the regularizer is evaluated at `x + s`.
    pub x: &'a DVector<f64>,
    /// Query point of the quadratic term `½ν⁻¹‖s − q‖²`.
    pub q: &'a DVector<f64>,
    /// Step length ν > 0.
    pub nu: f64,
    /// Trust radius Δ > 0; `+inf` removes the constraint.
    pub delta: f64,
    /// Norm defining the trust region.
    pub ball: BallNorm,
}

impl<'a> ProxQuery<'a> {
    fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0) {
            return Err(Error::contract("prox query requires nu > 0"));
        }
        if !(self.delta > 0.0) {
            return Err(Error::contract("prox query requires delta > 0"));
        }
        Error::check_dim(self.x.len(), self.q.len())
    }
}

/// Soft threshold: componentwise `sign(qᵢ)·max(|qᵢ| − t, 0)`, the proximal
/// map of `t‖·‖₁` (so `t = νλ`).
pub fn prox_l1(q: &DVector<f64>, t: f64) -> DVector<f64> {
    assert!(t >= 0.0, "soft threshold requires t >= 0");
    q.map(|qi| qi.signum() * (qi.abs() - t).max(0.0))
}

/// Hard threshold: componentwise keep `qᵢ` if `qᵢ² > 2·tl`, else zero
/// (`tl = νλ`). The tie `qᵢ² = 2·tl` resolves to zero — both choices are
/// global minimizers there; zeroing is the deterministic, sparser pick.
pub fn prox_l0(q: &DVector<f64>, tl: f64) -> DVector<f64> {
    assert!(tl >= 0.0, "hard threshold requires tl >= 0");
    q.map(|qi| if qi * qi > 2.0 * tl { qi } else { 0.0 })
}

fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// Shifted, box-constrained proximal operator for any of the regularizer
/// kinds: minimizes `½ν⁻¹‖s − q‖² + h(x + s)` over `‖s‖∞ ≤ Δ`. The problem
/// decouples per coordinate:
///
/// * ℓ1 — nested projections `proj_[−Δ,Δ](proj_[qᵢ−νλ, qᵢ+νλ](−xᵢ))`; the
///   inner projection is the unconstrained shifted soft threshold and the
///   outer clamp is exact because the coordinate objective is convex.
/// * ℓ0 — evaluate the candidates `−xᵢ` (zero the coordinate, if inside the
///   box), `qᵢ` clamped to the box, `−Δ`, `+Δ`, and keep the lowest
///   objective. Ties prefer them in that order, so zeroing wins ties.
/// * cardinality ball — delegates to [`prox_l0ball_shifted_box`].
///
/// `Δ = +inf` reduces to the base operators. Counts one proximal evaluation
/// on `reg`.
pub fn prox_shifted_box(reg: &Regularizer, query: &ProxQuery) -> Result<DVector<f64>> {
    query.validate()?;
    if query.ball == BallNorm::L2 && query.delta.is_finite() {
        return Err(Error::contract(
            "box prox operator requires the sup-norm ball (or an infinite radius)",
        ));
    }
    reg.count_prox();
    let (x, q, nu, delta) = (query.x, query.q, query.nu, query.delta);
    match reg.kind {
        RegKind::L1 => {
            let t = nu * reg.lambda;
            Ok(DVector::from_fn(q.len(), |i, _| {
                clamp(clamp(-x[i], q[i] - t, q[i] + t), -delta, delta)
            }))
        }
        RegKind::L0 => {
            let tl = nu * reg.lambda;
            Ok(DVector::from_fn(q.len(), |i, _| {
                // Coordinate objective, in units of ½(s−q)²: the indicator
                // contributes νλ whenever x + s stays nonzero.
                let cost = |s: f64| {
                    let keep = if x[i] + s != 0.0 { tl } else { 0.0 };
                    0.5 * (s - q[i]) * (s - q[i]) + keep
                };
                let mut candidates = Vec::with_capacity(4);
                if x[i].abs() <= delta {
                    candidates.push(-x[i]);
                }
                candidates.push(clamp(q[i], -delta, delta));
                if delta.is_finite() {
                    candidates.push(-delta);
                    candidates.push(delta);
                }
                let mut best = candidates[0];
                let mut best_cost = cost(best);
                for &c in &candidates[1..] {
                    let cc = cost(c);
                    if cc < best_cost {
                        best = c;
                        best_cost = cc;
                    }
                }
                best
            }))
        }
        RegKind::L0Ball => prox_l0ball_shifted_box_impl(reg.k, query),
    }
}

/// Shifted, box-constrained projection onto the cardinality ball:
/// minimizes `½‖s − q‖²` subject to `card(x + s) ≤ k` and `‖s‖∞ ≤ Δ`.
///
/// Given the set of zeroed coordinates the objective decouples, so the exact
/// solution selects which `n − k` coordinates to zero by cost difference:
/// `cᵢ = ½(clip(qᵢ) − qᵢ)²` to leave coordinate `i` free (its best step is
/// the box-clamped `qᵢ`) versus `zᵢ = ½(−xᵢ − qᵢ)²` to force `xᵢ + sᵢ = 0`,
/// which requires `|xᵢ| ≤ Δ`. Zeroing the `n − k` coordinates of smallest
/// `zᵢ − cᵢ` (ties to the lowest index) is optimal; fewer than `n − k`
/// zeroable coordinates means the subproblem is infeasible.
pub fn prox_l0ball_shifted_box(k: usize, query: &ProxQuery) -> Result<DVector<f64>> {
    query.validate()?;
    if query.ball == BallNorm::L2 && query.delta.is_finite() {
        return Err(Error::contract(
            "cardinality-ball prox operator requires the sup-norm ball (or an infinite radius)",
        ));
    }
    prox_l0ball_shifted_box_impl(k, query)
}

fn prox_l0ball_shifted_box_impl(k: usize, query: &ProxQuery) -> Result<DVector<f64>> {
    let (x, q, delta) = (query.x, query.q, query.delta);
    let n = q.len();
    let mut s = DVector::from_fn(n, |i, _| clamp(q[i], -delta, delta));
    if k >= n {
        return Ok(s);
    }
    let must_zero = n - k;
    // (zᵢ − cᵢ, i), only for coordinates that can be zeroed at all.
    let mut diffs: Vec<(f64, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        if x[i].abs() <= delta {
            let free = 0.5 * (s[i] - q[i]) * (s[i] - q[i]);
            let zero = 0.5 * (-x[i] - q[i]) * (-x[i] - q[i]);
            diffs.push((zero - free, i));
        }
    }
    if diffs.len() < must_zero {
        return Err(Error::ProxInfeasible(format!(
            "cardinality bound {} needs {} zeroed coordinates but only {} fit the box (delta = {})",
            k,
            must_zero,
            diffs.len(),
            delta,
        )));
    }
    // Stable by construction: sort on the cost difference, then index.
    diffs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    for &(_, i) in diffs.iter().take(must_zero) {
        s[i] = -x[i];
    }
    Ok(s)
}

/// Shifted ℓ1 proximal operator inside the Euclidean ball: minimizes
/// `½ν⁻¹‖s − q‖² + λ‖x + s‖₁` over `‖s‖₂ ≤ Δ`.
///
/// The unconstrained solution is the componentwise projection
/// `y⁰ = proj_[q−νλ, q+νλ](−x)`; when it is interior it is returned as-is.
/// Otherwise the constraint is active and strong duality reduces the problem
/// to the scalar equation `η = ‖proj_[q−νλ, q+νλ](−(η/Δ)x)‖₂` for `η ≥ Δ`,
/// solved by bracketed bisection; the step is the projection at the root,
/// rescaled back to the Δ-sphere.
pub fn prox_l1_shifted_l2ball(query: &ProxQuery, lambda: f64) -> Result<DVector<f64>> {
    prox_l1_shifted_l2ball_detailed(query, lambda).map(|(s, _)| s)
}

/// Same as [`prox_l1_shifted_l2ball`], additionally returning the dual root
/// η when the boundary branch ran (`None` for interior solutions) so callers
/// can audit the root residual.
pub fn prox_l1_shifted_l2ball_detailed(
    query: &ProxQuery,
    lambda: f64,
) -> Result<(DVector<f64>, Option<f64>)> {
    query.validate()?;
    if lambda < 0.0 {
        return Err(Error::contract("negative regularization weight"));
    }
    let (x, q, nu, delta) = (query.x, query.q, query.nu, query.delta);
    let t = nu * lambda;
    let project = |scale: f64| -> DVector<f64> {
        DVector::from_fn(q.len(), |i, _| clamp(-scale * x[i], q[i] - t, q[i] + t))
    };
    let y0 = project(1.0);
    if !delta.is_finite() || y0.norm() < delta {
        return Ok((y0, None));
    }

    // Boundary branch (entered at ‖y⁰‖ = Δ too: η = Δ is then an exact root).
    let residual = |eta: f64| eta - project(eta / delta).norm();
    let mut lo = delta;
    if residual(lo) >= 0.0 {
        return Ok((y0, Some(lo)));
    }
    // ‖proj(·)‖₂ ≤ ‖q‖₂ + νλ√n, so the residual is positive beyond that;
    // double from a generous first guess until the sign flips.
    let n = q.len() as f64;
    let mut hi = (2.0 * delta).max(q.norm() + t * n.sqrt() + x.norm());
    let mut doublings = 0;
    while residual(hi) <= 0.0 {
        doublings += 1;
        if doublings > 60 {
            return Err(Error::RootBracket(format!(
                "no sign change up to eta = {hi:e} after 60 doublings"
            )));
        }
        hi *= 2.0;
    }
    let mut root = 0.5 * (lo + hi);
    for _ in 0..200 {
        root = 0.5 * (lo + hi);
        let r = residual(root);
        if r.abs() <= 1e-12 {
            break;
        }
        if r < 0.0 {
            lo = root;
        } else {
            hi = root;
        }
        if hi - lo <= 1e-14 {
            root = 0.5 * (lo + hi);
            break;
        }
    }
    let y = project(root / delta);
    let s = y * (delta / root);
    Ok((s, Some(root)))
}

impl Regularizer {
    /// Shifted, trust-region-constrained proximal step for this regularizer:
    /// minimizes `½ν⁻¹‖s − q‖² + h(x + s)` over `‖s‖ ≤ Δ` in the query's
    /// ball norm. Routes to the box operators (sup-norm or unconstrained) or
    /// the Euclidean-ball ℓ1 operator; the ℓ0 kinds have no Euclidean-ball
    /// form. Counts one proximal evaluation.
    pub fn prox(&self, query: &ProxQuery) -> Result<DVector<f64>> {
        if query.ball == BallNorm::L2 && query.delta.is_finite() {
            match self.kind {
                RegKind::L1 => {
                    query.validate()?;
                    self.count_prox();
                    prox_l1_shifted_l2ball(query, self.lambda)
                }
                RegKind::L0 | RegKind::L0Ball => Err(Error::contract(
                    "Euclidean-ball trust region is only available with the l1 regularizer",
                )),
            }
        } else {
            prox_shifted_box(self, query)
        }
    }
}
