mod common;

use common::{normal_vec, quadratic_oracle, symmetric_with_spectrum};
use nalgebra::DVector;
use nsreg::experiments::rng::SplitMix64;
use nsreg::problem::{RegularizedProblem, Regularizer, SmoothOracle};
use nsreg::qn::{QnKind, QuasiNewtonOperator};
use nsreg::r2::{r2_solve, r2_step, update_sigma, R2Params};
use nsreg::tr::{tr_solve, TrParams};
use nsreg::{SolveStatus, StepFlag};

#[test]
fn params_orderings_are_enforced() {
    assert!(R2Params::default().validate().is_ok());
    assert!(R2Params { eta1: 0.0, ..Default::default() }.validate().is_err());
    assert!(R2Params { gamma1: 0.9, ..Default::default() }.validate().is_err());
    assert!(R2Params { gamma3: 1.5, ..Default::default() }.validate().is_err());
    assert!(R2Params { sigma0: -1.0, ..Default::default() }.validate().is_err());
}

#[test]
fn step_is_a_scaled_gradient_step_without_a_regularizer() {
    let x = DVector::from_row_slice(&[1.0, 2.0]);
    let g = DVector::from_row_slice(&[4.0, -6.0]);
    let s = r2_step(&x, 0.0, &g, 2.0, &Regularizer::l1(0.0)).unwrap();
    assert_eq!(s, DVector::from_row_slice(&[-2.0, 3.0]));
}

#[test]
fn step_vanishes_at_a_stationary_point() {
    // |gᵢ| ≤ λ at the origin: the soft threshold kills the whole query.
    let x = DVector::zeros(2);
    let g = DVector::from_row_slice(&[0.3, -0.1]);
    let s = r2_step(&x, 0.0, &g, 1.0, &Regularizer::l1(0.5)).unwrap();
    assert_eq!(s, DVector::zeros(2));
}

#[test]
fn step_soft_thresholds_the_scaled_gradient() {
    let x = DVector::zeros(1);
    let g = DVector::from_row_slice(&[2.0]);
    let s = r2_step(&x, 0.0, &g, 1.0, &Regularizer::l1(0.5)).unwrap();
    assert_eq!(s, DVector::from_row_slice(&[-1.5]));
}

#[test]
fn sigma_update_examples() {
    let p = R2Params::default();
    let (flag, sigma) = update_sigma(1.0, 2.0, &p);
    assert_eq!((flag, sigma), (StepFlag::VerySuccessful, 1.0));
    let (flag, sigma) = update_sigma(0.5, 2.0, &p);
    assert_eq!((flag, sigma), (StepFlag::Successful, 2.0));
    let (flag, sigma) = update_sigma(-1.0, 2.0, &p);
    assert_eq!((flag, sigma), (StepFlag::Unsuccessful, 4.0));
}

#[test]
fn smooth_scalar_quadratic_converges() {
    let oracle = SmoothOracle::new(
        1,
        |x| 0.5 * (x[0] - 1.0).powi(2),
        |x| DVector::from_row_slice(&[x[0] - 1.0]),
    );
    let problem =
        RegularizedProblem::new(oracle, Regularizer::l1(0.0), DVector::zeros(1)).unwrap();
    let params = R2Params { eps: 1e-6, ..Default::default() };
    let result = r2_solve(&problem, &params).unwrap();
    assert_eq!(result.status, SolveStatus::FirstOrderOptimal);
    assert!((result.x_final[0] - 1.0).abs() <= 1e-5);
}

#[test]
fn stiff_quadratic_rejects_the_first_step_and_grows_sigma() {
    // f = 50x² has curvature 100; the unit-σ step from x = 1 lands at −99
    // and is rejected, doubling σ while the iterate stays put.
    let oracle = SmoothOracle::new(
        1,
        |x| 50.0 * x[0] * x[0],
        |x| DVector::from_row_slice(&[100.0 * x[0]]),
    );
    let problem = RegularizedProblem::new(
        oracle,
        Regularizer::l1(0.0),
        DVector::from_row_slice(&[1.0]),
    )
    .unwrap();
    let result = r2_solve(&problem, &R2Params::default()).unwrap();
    assert_eq!(result.status, SolveStatus::FirstOrderOptimal);

    let first = &result.history[0];
    assert_eq!(first.status_flag, Some(StepFlag::Unsuccessful));
    assert_eq!(first.step.as_ref().unwrap().radius_next, 2.0);
    assert_eq!(result.history[1].radius_or_sigma, 2.0);
    assert_eq!(first.objective, result.history[1].objective);
}

#[test]
fn decrease_measure_shrinks_as_sigma_grows() {
    let mut rng = SplitMix64::new(11);
    for reg in [Regularizer::l1(0.4), Regularizer::l0(0.4)] {
        for _ in 0..20 {
            let x = normal_vec(&mut rng, 3);
            let g = normal_vec(&mut rng, 3);
            let xi_at = |sigma: f64| {
                let s = r2_step(&x, 0.0, &g, sigma, &reg).unwrap();
                let lin_dec = reg.value(&x) - g.dot(&s) - reg.value(&(&x + &s));
                (lin_dec - 0.5 * sigma * s.norm_squared()).max(0.0)
            };
            let mut prev = xi_at(0.25);
            for sigma in [0.5, 1.0, 2.0, 4.0] {
                let next = xi_at(sigma);
                assert!(
                    next <= prev + 1e-12,
                    "ξ must not grow with σ: ξ({sigma}) = {next} > {prev}"
                );
                prev = next;
            }
        }
    }
}

#[test]
fn agrees_with_the_trust_region_solver_on_a_convex_problem() {
    let mut rng = SplitMix64::new(5);
    let q = symmetric_with_spectrum(&mut rng, &[0.7, 2.5]);
    let c = DVector::from_row_slice(&[1.3, -0.4]);
    let reg = || Regularizer::l1(0.2);
    let x0 = DVector::zeros(2);

    let p1 = RegularizedProblem::new(quadratic_oracle(q.clone(), c.clone()), reg(), x0.clone())
        .unwrap();
    let r2 = r2_solve(&p1, &R2Params { eps: 1e-6, ..Default::default() }).unwrap();

    let p2 = RegularizedProblem::new(quadratic_oracle(q, c), reg(), x0).unwrap();
    let qn = QuasiNewtonOperator::new(QnKind::Lbfgs, 2);
    let tr = tr_solve(&p2, qn, &TrParams { eps: 1e-6, ..Default::default() }).unwrap();

    assert_eq!(r2.status, SolveStatus::FirstOrderOptimal);
    assert_eq!(tr.status, SolveStatus::FirstOrderOptimal);
    assert!(
        (&r2.x_final - &tr.x_final).norm() <= 1e-3,
        "solvers disagree: {} vs {}",
        r2.x_final,
        tr.x_final
    );
}

#[test]
fn history_certificates_on_a_convex_run() {
    let mut rng = SplitMix64::new(9);
    let q = symmetric_with_spectrum(&mut rng, &[0.5, 1.5, 3.0]);
    let c = normal_vec(&mut rng, 3);
    let problem = RegularizedProblem::new(
        quadratic_oracle(q, c),
        Regularizer::l1(0.3),
        DVector::zeros(3),
    )
    .unwrap();
    let params = R2Params::default();
    let result = r2_solve(&problem, &params).unwrap();
    assert_eq!(result.status, SolveStatus::FirstOrderOptimal);

    let mut prev_objective = f64::INFINITY;
    for rec in &result.history {
        assert!(rec.objective <= prev_objective + 1e-12);
        prev_objective = rec.objective;

        let sigma = rec.radius_or_sigma;
        let Some(step) = &rec.step else { continue };

        // Convex regularizer: the ρ denominator dominates σ‖s‖².
        assert!(
            step.model_decrease >= sigma * step.step_norm.powi(2) - 1e-10,
            "iteration {}: linear decrease {} below σ‖s‖² = {}",
            rec.k,
            step.model_decrease,
            sigma * step.step_norm.powi(2)
        );

        match rec.status_flag {
            Some(StepFlag::VerySuccessful) => {
                assert!(step.radius_next >= params.gamma3 * sigma - 1e-12);
                assert!(step.radius_next <= sigma + 1e-12);
            }
            Some(StepFlag::Successful) => {
                assert_eq!(step.radius_next, sigma);
            }
            Some(StepFlag::Unsuccessful) => {
                assert!(step.radius_next >= params.gamma1 * sigma - 1e-12);
                assert!(step.radius_next <= params.gamma2 * sigma + 1e-12);
            }
            None => {}
        }
        if matches!(
            rec.status_flag,
            Some(StepFlag::Successful) | Some(StepFlag::VerySuccessful)
        ) {
            let actual = step.actual_decrease.expect("accepted steps record the decrease");
            assert!(actual >= params.eta1 * step.model_decrease - 1e-10);
        }
    }
}
