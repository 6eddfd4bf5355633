//! Sparse-recovery benchmark: measurement matrix with orthonormal rows
//! (transpose of a thin-QR Q factor of a Gaussian matrix), a ±1 spike
//! signal, and noisy observations. The smooth part of the objective is the
//! least-squares misfit `½‖Ax − b‖²`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::rng::SplitMix64;
use crate::problem::{RegularizedProblem, Regularizer, SmoothOracle};

#[derive(Debug, Clone)]
pub struct BpdnInstance {
    /// m×n with orthonormal rows.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Ground truth with exactly `k` entries of ±1.
    pub x_true: DVector<f64>,
    pub seed: u64,
}

/// Deterministic generator. The draw order is fixed: Gaussian entries of
/// the n×m pre-factor matrix row by row, then the spike indices (rejecting
/// repeats), then the spike signs, then the m noise samples.
pub fn gen_bpdn(seed: u64, m: usize, n: usize, k: usize, noise_std: f64) -> BpdnInstance {
    assert!(k <= n && m <= n, "requires k <= n and m <= n");
    let mut rng = SplitMix64::new(seed);

    let mut g = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            g[(i, j)] = rng.next_normal();
        }
    }
    // Thin QR of the n×m Gaussian matrix; the transposed Q factor has
    // orthonormal rows.
    let q = g.qr().q();
    let a = q.transpose();

    let mut x_true = DVector::zeros(n);
    let mut support = Vec::with_capacity(k);
    while support.len() < k {
        let idx = (rng.next_u64() % n as u64) as usize;
        if !support.contains(&idx) {
            support.push(idx);
        }
    }
    for &idx in &support {
        x_true[idx] = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
    }

    let mut b = &a * &x_true;
    for j in 0..m {
        b[j] += noise_std * rng.next_normal();
    }

    BpdnInstance {
        a,
        b,
        x_true,
        seed,
    }
}

/// Regularization weight `scale·‖Aᵀb‖∞`.
pub fn bpdn_lambda(a: &DMatrix<f64>, b: &DVector<f64>, scale: f64) -> f64 {
    scale * (a.transpose() * b).amax()
}

/// Least-squares oracle `½‖Ax − b‖²` with gradient `Aᵀ(Ax − b)`.
pub fn bpdn_oracle(inst: &BpdnInstance) -> SmoothOracle {
    let (a_f, b_f) = (inst.a.clone(), inst.b.clone());
    let (a_g, b_g) = (inst.a.clone(), inst.b.clone());
    SmoothOracle::new(
        inst.a.ncols(),
        move |x| (&a_f * x - &b_f).norm_squared() * 0.5,
        move |x| a_g.transpose() * (&a_g * x - &b_g),
    )
}

/// Full problem with the zero starting point.
pub fn bpdn_problem(inst: &BpdnInstance, reg: Regularizer) -> Result<RegularizedProblem> {
    let x0 = DVector::zeros(inst.a.ncols());
    RegularizedProblem::new(bpdn_oracle(inst), reg, x0)
}

/// Serialization mirror: matrix stored row-major with explicit dimensions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BpdnInstanceDoc {
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub a_row_major: Vec<f64>,
    pub b: Vec<f64>,
    pub x_true: Vec<f64>,
}

impl From<&BpdnInstance> for BpdnInstanceDoc {
    fn from(inst: &BpdnInstance) -> Self {
        let (m, n) = (inst.a.nrows(), inst.a.ncols());
        let mut a_row_major = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                a_row_major.push(inst.a[(i, j)]);
            }
        }
        Self {
            m,
            n,
            seed: inst.seed,
            a_row_major,
            b: inst.b.iter().copied().collect(),
            x_true: inst.x_true.iter().copied().collect(),
        }
    }
}

impl TryFrom<BpdnInstanceDoc> for BpdnInstance {
    type Error = Error;

    fn try_from(doc: BpdnInstanceDoc) -> Result<Self> {
        if doc.a_row_major.len() != doc.m * doc.n {
            return Err(Error::contract("matrix payload does not match dims"));
        }
        Error::check_dim(doc.m, doc.b.len())?;
        Error::check_dim(doc.n, doc.x_true.len())?;
        let a = DMatrix::from_row_slice(doc.m, doc.n, &doc.a_row_major);
        Ok(Self {
            a,
            b: DVector::from_vec(doc.b),
            x_true: DVector::from_vec(doc.x_true),
            seed: doc.seed,
        })
    }
}
