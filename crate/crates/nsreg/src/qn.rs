//! Limited-memory quasi-Newton operators in "B form": the Hessian
//! approximation is applied directly (`v ↦ Bv`), which is what the quadratic
//! model `φ(s) = f + gᵀs + ½sᵀBs` and the step-size rules consume. Inverse
//! forms are never needed here.
//!
//! Both kinds keep at most `memory` curvature pairs `(sᵢ, yᵢ)` and a scalar
//! base `B₀ = γI`. The per-pair cache vectors (`uᵢ = B_{i−1}sᵢ` for BFGS,
//! `rᵢ = yᵢ − B_{i−1}sᵢ` for SR1) are rebuilt from scratch whenever the pair
//! set or γ changes — O(memory²·dim), negligible at memory 5.

use std::collections::VecDeque;

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Guard threshold for accepting a curvature pair, relative to the norms of
/// the vectors involved.
const GUARD: f64 = 1e-8;
/// Looser threshold used when re-validating retained pairs after an eviction
/// or γ change; only degenerate denominators are dropped.
const REBUILD_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnKind {
    Lbfgs,
    Lsr1,
}

#[derive(Debug, Clone)]
enum PairCache {
    /// BFGS: `u = B_{i−1}s`, with denominators `sᵀu` and `yᵀs`.
    Bfgs { u: DVector<f64>, su: f64, ys: f64 },
    /// SR1: `r = y − B_{i−1}s`, with denominator `rᵀs`.
    Sr1 { r: DVector<f64>, rs: f64 },
}

#[derive(Debug, Clone)]
pub struct QuasiNewtonOperator {
    kind: QnKind,
    dim: usize,
    memory: usize,
    gamma: f64,
    b_max: f64,
    pairs: VecDeque<(DVector<f64>, DVector<f64>)>,
    cache: Vec<PairCache>,
}

impl QuasiNewtonOperator {
    /// Operator starting from the identity (`γ = 1`) with the default
    /// memory of 5 pairs and norm cap 1e4.
    pub fn new(kind: QnKind, dim: usize) -> Self {
        Self::with_memory(kind, dim, 5)
    }

    pub fn with_memory(kind: QnKind, dim: usize, memory: usize) -> Self {
        assert!(memory > 0, "quasi-Newton memory must be positive");
        Self {
            kind,
            dim,
            memory,
            gamma: 1.0,
            b_max: 1e4,
            pairs: VecDeque::with_capacity(memory + 1),
            cache: Vec::with_capacity(memory),
        }
    }

    /// Override the spectral-norm cap at which the operator resets to γI.
    pub fn with_cap(mut self, b_max: f64) -> Self {
        assert!(b_max > 0.0);
        self.b_max = b_max;
        self
    }

    pub fn kind(&self) -> QnKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pairs_len(&self) -> usize {
        self.pairs.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `Bv` via the cached low-rank terms on top of `γv`; O(memory·dim).
    pub fn apply(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        Error::check_dim(self.dim, v.len())?;
        Ok(self.apply_cached(v, self.cache.len()))
    }

    /// Applies `B` built from `γI` and the first `depth` cached pairs.
    fn apply_cached(&self, v: &DVector<f64>, depth: usize) -> DVector<f64> {
        let mut out = v * self.gamma;
        for (i, entry) in self.cache[..depth].iter().enumerate() {
            match entry {
                PairCache::Bfgs { u, su, ys } => {
                    let (_, y) = &self.pairs[i];
                    out += y * (y.dot(v) / ys) - u * (u.dot(v) / su);
                }
                PairCache::Sr1 { r, rs } => {
                    out += r * (r.dot(v) / rs);
                }
            }
        }
        out
    }

    /// Offers a curvature pair. Returns whether it was kept, applying the
    /// standard guards: BFGS needs `sᵀy ≥ 1e-8·‖s‖‖y‖` (keeps B positive
    /// definite), SR1 needs `|sᵀ(y − Bs)| ≥ 1e-8·‖s‖‖y − Bs‖` (nonzero
    /// rank-1 denominator, measured against the operator before the
    /// update). On acceptance the oldest pair beyond the memory limit is
    /// evicted and, for BFGS, γ becomes `sᵀy/yᵀy` of the new pair.
    pub fn update(&mut self, s: &DVector<f64>, y: &DVector<f64>) -> Result<bool> {
        Error::check_dim(self.dim, s.len())?;
        Error::check_dim(self.dim, y.len())?;
        let sn = s.norm();
        if sn == 0.0 {
            return Ok(false);
        }
        match self.kind {
            QnKind::Lbfgs => {
                let sy = s.dot(y);
                if sy < GUARD * sn * y.norm() || sy <= 0.0 {
                    return Ok(false);
                }
                self.gamma = sy / y.dot(y);
            }
            QnKind::Lsr1 => {
                let r = y - self.apply(s)?;
                let rn = r.norm();
                // r = 0 means the secant equation already holds; the
                // rank-one correction would be 0/0, so skip the pair.
                if rn == 0.0 || s.dot(&r).abs() < GUARD * sn * rn {
                    return Ok(false);
                }
            }
        }
        self.pairs.push_back((s.clone(), y.clone()));
        while self.pairs.len() > self.memory {
            self.pairs.pop_front();
        }
        self.rebuild();
        Ok(true)
    }

    /// Recomputes the per-pair cache from the oldest retained pair forward.
    /// A retained pair whose denominator has degenerated (because the
    /// operator underneath it changed through eviction or a new γ) is
    /// dropped rather than kept with an exploding coefficient.
    fn rebuild(&mut self) {
        self.cache.clear();
        let mut kept = 0usize;
        let mut i = 0usize;
        while i < self.pairs.len() {
            let (s, y) = &self.pairs[i];
            let entry = match self.kind {
                QnKind::Lbfgs => {
                    let u = self.apply_cached(s, kept);
                    let su = s.dot(&u);
                    let ys = y.dot(s);
                    if !(su > 0.0) || ys < REBUILD_GUARD * s.norm() * y.norm() {
                        None
                    } else {
                        Some(PairCache::Bfgs { u, su, ys })
                    }
                }
                QnKind::Lsr1 => {
                    let r = y - self.apply_cached(s, kept);
                    let rs = r.dot(s);
                    if rs.abs() < REBUILD_GUARD * s.norm() * r.norm() || rs == 0.0 {
                        None
                    } else {
                        Some(PairCache::Sr1 { r, rs })
                    }
                }
            };
            match entry {
                Some(e) => {
                    self.cache.push(e);
                    kept += 1;
                    i += 1;
                }
                None => {
                    self.pairs.remove(i);
                }
            }
        }
        debug_assert_eq!(self.cache.len(), self.pairs.len());
    }

    /// Upper bound on the spectral norm `‖B‖₂`: 20 power-iteration steps
    /// from a fixed start vector, inflated by 1.1 to cover slow convergence.
    /// If the bound exceeds the cap the operator resets to `γI` (dropping
    /// all pairs), so the result is always ≤ max(1.1·γ, cap).
    pub fn norm_bound(&mut self) -> f64 {
        let bound = self.power_iteration_bound();
        if bound > self.b_max && !self.pairs.is_empty() {
            self.pairs.clear();
            self.cache.clear();
            return self.power_iteration_bound();
        }
        bound
    }

    fn power_iteration_bound(&self) -> f64 {
        let mut w = DVector::from_fn(self.dim, |i, _| 1.0 / (i as f64 + 1.0));
        w /= w.norm();
        let mut estimate = self.gamma;
        for _ in 0..20 {
            let z = self.apply_cached(&w, self.cache.len());
            let zn = z.norm();
            if zn <= f64::MIN_POSITIVE {
                estimate = 0.0;
                break;
            }
            estimate = zn;
            w = z / zn;
        }
        1.1 * estimate
    }
}
