use std::f64::consts::PI;

use proptest::prelude::*;
use rbhmr_core::cases;
use rbhmr_core::estimator::{delta_for, m_sweep, ErrorReport};
use rbhmr_core::problem::{Formulation, ReferenceModel};
use rbhmr_core::rb::ReductionSpace;
use rbhmr_core::{LiftingFunction, LiftingMode, Partition1D, ProblemData, ScalarField, TensorGrid};

fn modes(ty: &Partition1D, m: usize) -> ReductionSpace {
    // smooth, non-eigen shapes so that errors stay well above round-off
    let f: Vec<Vec<f64>> = (1..=m)
        .map(|k| {
            ty.nodes()
                .iter()
                .map(|&y| y * (1.0 - y) * (k as f64 * 2.3 * y).cos())
                .collect()
        })
        .collect();
    ReductionSpace::orthonormalized(ty, &f).unwrap()
}

fn sweep(pd: &ProblemData, lift: &LiftingFunction, mode: LiftingMode, m: usize) -> (Vec<ErrorReport>, f64) {
    let grid = TensorGrid::uniform(pd.omega_x, pd.omega_y, 40, 30).unwrap();
    let form = Formulation::new(pd, lift, mode, &grid).unwrap();
    let model = ReferenceModel::new(pd, &form, &grid).unwrap();
    let reference = model.solve().unwrap();
    let reports = m_sweep(&model, &reference, &modes(&grid.ty, m), m).unwrap();
    (reports, model.v_norm(&reference.interior()))
}

#[test]
fn estimator_equals_error_without_advection() {
    let case = cases::case1((0.0, 0.0));
    for mode in LiftingMode::ALL {
        let (reports, pv) = sweep(&case.pd, &case.lifting, mode, 8);
        for r in &reports {
            let e = r.err_v_rel * pv;
            assert!(
                (r.delta_m - e).abs() <= 1e-8 * e,
                "{mode:?} m = {}: {} vs {e}",
                r.m,
                r.delta_m
            );
        }
    }
}

#[test]
fn empty_approximation_estimates_the_solution_norm() {
    let case = cases::case1((0.0, 0.0));
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 30, 20).unwrap();
    let model = ReferenceModel::build(&case.pd, &case.lifting, LiftingMode::WeakLifting, &grid).unwrap();
    let p = model.solve().unwrap().interior();
    let d = delta_for(&model, &vec![0.0; grid.interior_count()]).unwrap();
    let pv = model.v_norm(&p);
    assert!((d - pv).abs() <= 1e-10 * pv);
}

#[test]
fn relative_errors_are_scale_invariant() {
    let case = cases::case1((0.0, 0.0));
    let s = 7.5;
    let scaled = ProblemData {
        source: case.pd.source.scaled(s),
        dirichlet: case.pd.dirichlet.scaled(s),
        ..case.pd.clone()
    };
    let (a, _) = sweep(&case.pd, &case.lifting, LiftingMode::WeakLifting, 5);
    let (b, _) = sweep(&scaled, &case.lifting.scaled(s), LiftingMode::WeakLifting, 5);
    for (x, y) in a.iter().zip(&b) {
        assert!((x.err_v_rel - y.err_v_rel).abs() <= 1e-10 * x.err_v_rel);
        assert!((x.err_l2_rel - y.err_l2_rel).abs() <= 1e-10 * x.err_l2_rel);
        assert!((y.delta_m - s * x.delta_m).abs() <= 1e-9 * y.delta_m);
    }
}

#[test]
fn l2_error_follows_pod_tail() {
    // POD of the sampled reference fibers: the L² error should decay with the
    // energy tail of the same snapshot set
    let pd = ProblemData::poisson(
        (0.0, 2.0),
        (0.0, 1.0),
        ScalarField::new(|x, y| 10.0 * (PI * x / 2.0).sin() * (-20.0 * (y - 0.3 - 0.2 * x).powi(2)).exp()),
        ScalarField::zero(),
    );
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 40, 40).unwrap();
    let model = ReferenceModel::build(&pd, &LiftingFunction::zero(), LiftingMode::WeakLifting, &grid).unwrap();
    let reference = model.solve().unwrap();
    let fibers: Vec<Vec<f64>> = (1..40)
        .map(|i| (0..=40).map(|j| reference.coeffs[grid.node_index(i, j)]).collect())
        .collect();
    let space = rbhmr_core::rb::pod(&grid.ty, &fibers, rbhmr_core::rb::PodTarget::Count(8)).unwrap();
    let reports = m_sweep(&model, &reference, &space, 8).unwrap();
    let pts: Vec<(f64, f64)> = reports.iter().map(|r| (r.e_pod.ln(), r.err_l2_rel.ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let corr = sxy / (sxx * syy).sqrt();
    assert!(corr > 0.95, "correlation {corr}");
    assert!(sxy / sxx > 0.5, "slope {}", sxy / sxx);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn estimator_bounds_error_with_advection(b1 in -100.0f64..100.0, b2 in -30.0f64..30.0) {
        let case = cases::case1((b1, b2));
        let (reports, pv) = sweep(&case.pd, &case.lifting, LiftingMode::WeakLifting, 4);
        for r in &reports {
            prop_assert!(r.err_v_rel * pv <= r.delta_m + 1e-8);
        }
    }
}
