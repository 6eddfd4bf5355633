//! Shared helpers for the integration tests: deterministic random data,
//! brute-force proximal oracles, and small problem builders.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use nsreg::experiments::rng::SplitMix64;
use nsreg::problem::{BallNorm, Regularizer, SmoothOracle};

pub fn uniform(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.next_f64()
}

pub fn uniform_vec(rng: &mut SplitMix64, n: usize, lo: f64, hi: f64) -> DVector<f64> {
    DVector::from_fn(n, |_, _| uniform(rng, lo, hi))
}

pub fn normal_vec(rng: &mut SplitMix64, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.next_normal())
}

/// The constrained prox objective `½ν⁻¹‖s − q‖² + h(x + s)`, with `+inf`
/// outside the ball (up to the feasibility slack every operator is allowed).
pub fn prox_objective(
    s: &DVector<f64>,
    x: &DVector<f64>,
    q: &DVector<f64>,
    nu: f64,
    reg: &Regularizer,
    delta: f64,
    ball: BallNorm,
) -> f64 {
    if ball.norm(s) > delta + 1e-12 {
        return f64::INFINITY;
    }
    0.5 / nu * (s - q).norm_squared() + reg.value(&(x + s))
}

/// Best prox objective over a tensor grid on `[−Δ, Δ]^d` (dimension ≤ 3)
/// plus, per axis, the box-clamped query point and the exact zeroing point
/// `−xᵢ` (so the discontinuous ℓ0 costs get a fair shot). Infeasible grid
/// points (Euclidean ball) are skipped by the objective itself.
pub fn grid_best_objective(
    x: &DVector<f64>,
    q: &DVector<f64>,
    nu: f64,
    reg: &Regularizer,
    delta: f64,
    ball: BallNorm,
    points_per_axis: usize,
) -> f64 {
    let n = x.len();
    assert!(n >= 1 && n <= 3, "grid oracle supports dimensions 1..=3");
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut pts = Vec::with_capacity(points_per_axis + 2);
        for j in 0..points_per_axis {
            let t = j as f64 / (points_per_axis - 1) as f64;
            pts.push(-delta + 2.0 * delta * t);
        }
        pts.push(q[i].clamp(-delta, delta));
        if x[i].abs() <= delta {
            pts.push(-x[i]);
        }
        axes.push(pts);
    }

    let mut best = f64::INFINITY;
    let mut s = DVector::zeros(n);
    let mut idx = vec![0usize; n];
    loop {
        for i in 0..n {
            s[i] = axes[i][idx[i]];
        }
        best = best.min(prox_objective(&s, x, q, nu, reg, delta, ball));
        // Odometer over the per-axis candidate lists.
        let mut carry = 0;
        loop {
            idx[carry] += 1;
            if idx[carry] < axes[carry].len() {
                break;
            }
            idx[carry] = 0;
            carry += 1;
            if carry == n {
                return best;
            }
        }
    }
}

/// Exact minimum of `½‖s − q‖²` subject to `card(x + s) ≤ k`, `‖s‖∞ ≤ Δ`,
/// by enumerating every support set (dimension ≤ 12). Coordinates outside
/// the support are pinned to `sᵢ = −xᵢ` (infeasible when `|xᵢ| > Δ`); inside
/// it the best feasible value is the box-clamped query. Returns the
/// objective in the prox scaling `½ν⁻¹‖s − q‖²` (the ℓ0-ball `h` is 0 on
/// feasible points); `None` when every support is infeasible.
pub fn l0ball_enum_best(
    x: &DVector<f64>,
    q: &DVector<f64>,
    nu: f64,
    k: usize,
    delta: f64,
) -> Option<f64> {
    let n = x.len();
    assert!(n <= 12, "enumeration oracle supports dimensions <= 12");
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize > k {
            continue;
        }
        let mut cost = 0.0;
        let mut feasible = true;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                let si = q[i].clamp(-delta, delta);
                cost += 0.5 * (si - q[i]) * (si - q[i]);
            } else if x[i].abs() <= delta {
                let si = -x[i];
                cost += 0.5 * (si - q[i]) * (si - q[i]);
            } else {
                feasible = false;
                break;
            }
        }
        if feasible {
            best = best.min(cost / nu);
        }
    }
    best.is_finite().then_some(best)
}

/// `f(x) = ½(x − c)ᵀQ(x − c)` with gradient `Q(x − c)`.
pub fn quadratic_oracle(q: DMatrix<f64>, c: DVector<f64>) -> SmoothOracle {
    let n = c.len();
    assert_eq!(q.nrows(), n);
    let (qf, cf) = (q.clone(), c.clone());
    SmoothOracle::new(
        n,
        move |x: &DVector<f64>| {
            let d = x - &cf;
            0.5 * d.dot(&(&qf * &d))
        },
        move |x: &DVector<f64>| &q * (x - &c),
    )
}

/// Symmetric matrix with prescribed eigenvalues: `Q diag(eigs) Qᵀ` for a
/// random orthogonal `Q` drawn from the QR factorization of a Gaussian.
pub fn symmetric_with_spectrum(rng: &mut SplitMix64, eigs: &[f64]) -> DMatrix<f64> {
    let n = eigs.len();
    let g = DMatrix::from_fn(n, n, |_, _| rng.next_normal());
    let q = g.qr().q();
    let d = DMatrix::from_diagonal(&DVector::from_row_slice(eigs));
    &q * d * q.transpose()
}

/// Indices with `|xᵢ| > threshold`.
pub fn support(x: &DVector<f64>, threshold: f64) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i].abs() > threshold).collect()
}

pub fn cardinality(x: &DVector<f64>) -> usize {
    x.iter().filter(|v| **v != 0.0).count()
}

/// Central finite differences of `f` with step `h`.
pub fn central_diff_grad(
    f: impl Fn(&DVector<f64>) -> f64,
    x: &DVector<f64>,
    h: f64,
) -> DVector<f64> {
    DVector::from_fn(x.len(), |i, _| {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        (f(&xp) - f(&xm)) / (2.0 * h)
    })
}
