mod common;

use common::normal_vec;
use nalgebra::{DMatrix, DVector};
use nsreg::experiments::rng::SplitMix64;
use nsreg::qn::{QnKind, QuasiNewtonOperator};

fn unit(dim: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(dim);
    e[i] = 1.0;
    e
}

/// Assemble the dense matrix behind the operator, column by column.
fn dense(op: &QuasiNewtonOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut b = DMatrix::zeros(n, n);
    for j in 0..n {
        b.set_column(j, &op.apply(&unit(n, j)).unwrap());
    }
    b
}

/// Push `count` random curvature-positive pairs through the operator.
fn random_updates(op: &mut QuasiNewtonOperator, rng: &mut SplitMix64, count: usize) {
    let n = op.dim();
    let h = common::symmetric_with_spectrum(rng, &(1..=n).map(|i| i as f64).collect::<Vec<_>>());
    for _ in 0..count {
        let s = normal_vec(rng, n);
        let y = &h * &s;
        op.update(&s, &y).unwrap();
    }
}

#[test]
fn empty_operator_is_scaled_identity() {
    let op = QuasiNewtonOperator::new(QnKind::Lbfgs, 4);
    let v = DVector::from_row_slice(&[1.0, -2.0, 0.5, 3.0]);
    assert_eq!(op.apply(&v).unwrap(), v);
    assert_eq!(op.pairs_len(), 0);
}

#[test]
fn empty_operator_norm_bound_is_inflated_gamma() {
    let mut op = QuasiNewtonOperator::new(QnKind::Lbfgs, 3);
    assert!((op.norm_bound() - 1.1).abs() <= 1e-12);
}

#[test]
fn satisfied_secant_pair_keeps_the_identity() {
    // s = y = e₁ with B₀ = I: the curvature update is a no-op.
    let mut op = QuasiNewtonOperator::new(QnKind::Lbfgs, 3);
    let e1 = unit(3, 0);
    assert!(op.update(&e1, &e1).unwrap());
    let mut rng = SplitMix64::new(1);
    for _ in 0..5 {
        let v = normal_vec(&mut rng, 3);
        assert!((op.apply(&v).unwrap() - &v).norm() <= 1e-14);
    }
}

#[test]
fn bfgs_matches_its_dense_reconstruction() {
    let mut rng = SplitMix64::new(2);
    let mut op = QuasiNewtonOperator::new(QnKind::Lbfgs, 8);
    random_updates(&mut op, &mut rng, 5);
    assert_eq!(op.pairs_len(), 5);

    let b = dense(&op);
    for _ in 0..20 {
        let v = normal_vec(&mut rng, 8);
        let direct = op.apply(&v).unwrap();
        assert!(
            (&b * &v - &direct).norm() <= 1e-10 * direct.norm().max(1.0),
            "operator and dense reconstruction disagree"
        );
    }
}

#[test]
fn operators_are_symmetric() {
    let mut rng = SplitMix64::new(3);
    for kind in [QnKind::Lbfgs, QnKind::Lsr1] {
        let mut op = QuasiNewtonOperator::new(kind, 6);
        random_updates(&mut op, &mut rng, 8);
        for _ in 0..20 {
            let u = normal_vec(&mut rng, 6);
            let v = normal_vec(&mut rng, 6);
            let ubv = u.dot(&op.apply(&v).unwrap());
            let vbu = v.dot(&op.apply(&u).unwrap());
            assert!(
                (ubv - vbu).abs() <= 1e-10 * u.norm() * v.norm(),
                "{kind:?} asymmetry: {ubv} vs {vbu}"
            );
        }
    }
}

#[test]
fn bfgs_is_positive_definite() {
    let mut rng = SplitMix64::new(4);
    let mut op = QuasiNewtonOperator::new(QnKind::Lbfgs, 6);
    random_updates(&mut op, &mut rng, 10);
    for _ in 0..50 {
        let v = normal_vec(&mut rng, 6);
        assert!(v.dot(&op.apply(&v).unwrap()) > 0.0);
    }
}

#[test]
fn secant_equation_holds_for_the_latest_pair() {
    let mut rng = SplitMix64::new(5);
    for kind in [QnKind::Lbfgs, QnKind::Lsr1] {
        let mut op = QuasiNewtonOperator::new(kind, 5);
        random_updates(&mut op, &mut rng, 4);
        let s = normal_vec(&mut rng, 5);
        let h = common::symmetric_with_spectrum(&mut rng, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let y = &h * &s;
        assert!(op.update(&s, &y).unwrap());
        let bs = op.apply(&s).unwrap();
        assert!(
            (&bs - &y).norm() <= 1e-8 * y.norm().max(1.0),
            "{kind:?} secant violation: ‖Bs − y‖ = {}",
            (&bs - &y).norm()
        );
    }
}

#[test]
fn orthogonal_pair_is_rejected_by_bfgs() {
    let mut op = QuasiNewtonOperator::new(QnKind::Lbfgs, 3);
    assert!(!op.update(&unit(3, 0), &unit(3, 1)).unwrap());
    assert_eq!(op.pairs_len(), 0);
}

#[test]
fn satisfied_secant_is_rejected_by_sr1() {
    // B₀ = I and y = s means y − Bs = 0: nothing to correct.
    let mut op = QuasiNewtonOperator::new(QnKind::Lsr1, 3);
    let e1 = unit(3, 0);
    assert!(!op.update(&e1, &e1).unwrap());
    assert_eq!(op.pairs_len(), 0);
}

#[test]
fn sr1_reconstructs_a_quadratic_hessian() {
    let mut rng = SplitMix64::new(6);
    let h = common::symmetric_with_spectrum(&mut rng, &[1.0, 2.5, 4.0, 6.0]);
    let mut op = QuasiNewtonOperator::new(QnKind::Lsr1, 4);
    for i in 0..4 {
        let s = unit(4, i);
        let y = &h * &s;
        assert!(op.update(&s, &y).unwrap(), "update {i} unexpectedly rejected");
    }
    let b = dense(&op);
    assert!(
        (&b - &h).norm() <= 1e-6 * h.norm(),
        "four independent curvature pairs should reproduce the Hessian; error {}",
        (&b - &h).norm()
    );
}

#[test]
fn norm_bound_brackets_a_known_spectrum() {
    // One SR1 update turns I into diag(3, 1): s = e₁, y = 3e₁ gives
    // r = 2e₁ and the rank-one correction 2e₁e₁ᵀ.
    let mut op = QuasiNewtonOperator::new(QnKind::Lsr1, 2);
    assert!(op.update(&unit(2, 0), &(unit(2, 0) * 3.0)).unwrap());
    let b = dense(&op);
    assert!((b[(0, 0)] - 3.0).abs() <= 1e-14 && (b[(1, 1)] - 1.0).abs() <= 1e-14);

    let bound = op.norm_bound();
    assert!(
        (3.0 - 1e-6..=3.3 + 1e-9).contains(&bound),
        "norm bound {bound} outside [3, 3.3]"
    );
}

#[test]
fn norm_bound_dominates_observed_growth() {
    let mut rng = SplitMix64::new(7);
    for kind in [QnKind::Lbfgs, QnKind::Lsr1] {
        let mut op = QuasiNewtonOperator::new(kind, 6);
        random_updates(&mut op, &mut rng, 8);
        let bound = op.norm_bound();
        for _ in 0..50 {
            let v = normal_vec(&mut rng, 6);
            let ratio = op.apply(&v).unwrap().norm() / v.norm();
            assert!(
                bound + 1e-8 >= ratio,
                "{kind:?} bound {bound} below observed ratio {ratio}"
            );
        }
    }
}

#[test]
fn runaway_curvature_resets_the_operator() {
    let mut op = QuasiNewtonOperator::new(QnKind::Lsr1, 3).with_cap(10.0);
    // y = 100·s drives ‖B‖ well past the cap.
    let s = unit(3, 0);
    assert!(op.update(&s, &(&s * 100.0)).unwrap());
    let bound = op.norm_bound();
    assert_eq!(op.pairs_len(), 0, "reset should drop the stored pairs");
    assert!((bound - 1.1).abs() <= 1e-12, "post-reset bound {bound}");
}

#[test]
fn norm_bound_stays_under_the_guaranteed_cap() {
    let mut rng = SplitMix64::new(8);
    let mut op = QuasiNewtonOperator::new(QnKind::Lsr1, 4);
    for _ in 0..30 {
        let s = normal_vec(&mut rng, 4);
        let y = normal_vec(&mut rng, 4) * 50.0;
        op.update(&s, &y).unwrap();
        let bound = op.norm_bound();
        let cap = (1.1 * op.gamma()).max(1e4);
        assert!(bound <= cap, "bound {bound} exceeded the cap {cap}");
    }
}
