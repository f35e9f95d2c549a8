use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rbhmr_core::cases;
use rbhmr_core::estimator::{self, max_abs_diff};
use rbhmr_core::problem::{assemble_mass, Formulation, ReferenceModel};
use rbhmr_core::rb::ReductionSpace;
use rbhmr_core::reduced::{assemble_reduced, local_reconstruction, riesz_lifting_reconstruction, solve_reduced};
use rbhmr_core::{Error, LiftingFunction, LiftingMode, Partition1D, ProblemData, ScalarField, TensorGrid};

fn skewed_problem() -> (ProblemData, LiftingFunction) {
    let case = cases::case1((0.0, 0.0));
    let pd = case
        .pd
        .clone()
        .with_diffusion(ScalarField::new(|x, y| 1.0 + 0.5 * x * y))
        .with_advection(ScalarField::constant(4.0), ScalarField::new(|x, _| 1.0 - x));
    (pd, case.lifting)
}

fn sine_modes(ty: &Partition1D, count: usize) -> ReductionSpace {
    let f: Vec<Vec<f64>> = (1..=count)
        .map(|k| ty.nodes().iter().map(|&y| (k as f64 * PI * y).sin()).collect())
        .collect();
    ReductionSpace::orthonormalized(ty, &f).unwrap()
}

#[test]
fn full_transverse_space_recovers_reference() {
    let (pd, lift) = skewed_problem();
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 16, 12).unwrap();
    let space = ReductionSpace::full(&grid.ty);
    assert_eq!(space.len(), 11);
    for mode in LiftingMode::ALL {
        let form = Formulation::new(&pd, &lift, mode, &grid).unwrap();
        let model = ReferenceModel::new(&pd, &form, &grid).unwrap();
        let reference = model.solve().unwrap();
        let sys = assemble_reduced(&pd, &form, &space, &grid.tx).unwrap();
        let red = solve_reduced(&sys, &space, &grid).unwrap();
        let d = max_abs_diff(&red.nodal_values(), &reference.coeffs);
        assert!(d < 1e-9, "{mode:?}: {d}");
    }
}

#[test]
fn residual_is_orthogonal_to_reduced_space() {
    let (pd, lift) = skewed_problem();
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 20, 24).unwrap();
    let form = Formulation::new(&pd, &lift, LiftingMode::WeakLifting, &grid).unwrap();
    let model = ReferenceModel::new(&pd, &form, &grid).unwrap();
    let space = sine_modes(&grid.ty, 4);
    let sys = assemble_reduced(&pd, &form, &space, &grid.tx).unwrap();
    let red = solve_reduced(&sys, &space, &grid).unwrap();
    let r = model.residual(&red.interior_values());
    let scale = model.system.rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for i in 1..20 {
        for phi in &space.modes {
            let s: f64 = (1..24).map(|j| r[grid.interior_index(i, j)] * phi[j]).sum();
            assert!(s.abs() <= 1e-8 * scale, "i = {i}: {s}");
        }
    }
}

#[test]
fn energy_error_decreases_with_nested_spaces() {
    let case = cases::case1((0.0, 0.0));
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 40, 40).unwrap();
    let form = Formulation::new(&case.pd, &case.lifting, LiftingMode::WeakLifting, &grid).unwrap();
    let model = ReferenceModel::new(&case.pd, &form, &grid).unwrap();
    let reference = model.solve().unwrap();
    let space = sine_modes(&grid.ty, 12);
    let reports = estimator::m_sweep(&model, &reference, &space, 12).unwrap();
    for w in reports.windows(2) {
        assert!(w[1].err_v_rel <= w[0].err_v_rel * (1.0 + 1e-12));
    }
}

// With one mode the reduced problem is `−p̄'' + (∫φ'²) p̄ = ∫ f φ` on (0, 1).
#[test]
fn single_mode_matches_one_dimensional_problem() {
    let (nx, ny) = (24, 30);
    let pd = ProblemData::poisson(
        (0.0, 1.0),
        (0.0, 1.0),
        ScalarField::new(|x, y| (1.0 + x) * (PI * y).sin()),
        ScalarField::zero(),
    );
    let grid = TensorGrid::uniform((0.0, 1.0), (0.0, 1.0), nx, ny).unwrap();
    let space = sine_modes(&grid.ty, 1);
    let form = Formulation::new(&pd, &LiftingFunction::zero(), LiftingMode::WeakLifting, &grid).unwrap();
    let red = solve_reduced(&assemble_reduced(&pd, &form, &space, &grid.tx).unwrap(), &space, &grid).unwrap();

    let phi = &space.modes[0];
    let hy = 1.0 / ny as f64;
    let kdd: f64 = (0..ny).map(|e| (phi[e + 1] - phi[e]).powi(2) / hy).sum();
    let g5 = [
        (-0.906_179_845_938_664, 0.236_926_885_056_189),
        (-0.538_469_310_105_683, 0.478_628_670_499_366),
        (0.0, 0.568_888_888_888_889),
        (0.538_469_310_105_683, 0.478_628_670_499_366),
        (0.906_179_845_938_664, 0.236_926_885_056_189),
    ];
    // ∫ sin(πy) φ(y) dy with φ piecewise linear
    let mut fy = 0.0;
    for e in 0..ny {
        for &(t, w) in &g5 {
            let s = 0.5 * (t + 1.0);
            let y = (e as f64 + s) * hy;
            fy += 0.5 * w * hy * (PI * y).sin() * (phi[e] * (1.0 - s) + phi[e + 1] * s);
        }
    }
    let hx = 1.0 / nx as f64;
    let n = nx - 1;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for i in 0..n {
        a[(i, i)] = 2.0 / hx + kdd * 4.0 * hx / 6.0;
        if i + 1 < n {
            a[(i, i + 1)] = -1.0 / hx + kdd * hx / 6.0;
            a[(i + 1, i)] = a[(i, i + 1)];
        }
        let xi = (i + 1) as f64 * hx;
        for side in [-1.0, 1.0] {
            for &(t, w) in &g5 {
                let s = 0.5 * (t + 1.0);
                let x = xi + side * s * hx;
                b[i] += 0.5 * w * hx * (1.0 + x) * (1.0 - s) * fy;
            }
        }
    }
    let oracle = a.lu().solve(&b).unwrap();
    let scale = oracle.amax();
    for i in 0..n {
        assert!((red.coeffs[0][i] - oracle[i]).abs() < 1e-6 * scale, "node {i}");
    }
}

#[test]
fn laplacian_eigenmodes_decouple() {
    let pd = ProblemData::poisson(
        (0.0, 2.0),
        (0.0, 1.0),
        ScalarField::new(|x, y| x * (1.0 - y) + (3.0 * y).cos()),
        ScalarField::zero(),
    );
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 20, 16).unwrap();
    let form = Formulation::new(&pd, &LiftingFunction::zero(), LiftingMode::WeakLifting, &grid).unwrap();
    let m = 4;
    let space = sine_modes(&grid.ty, m);
    let sys = assemble_reduced(&pd, &form, &space, &grid.tx).unwrap();
    let scale = sys.matrix.max_abs();
    for i in 0..19usize {
        for i2 in i.saturating_sub(1)..(i + 2).min(19) {
            for k in 0..m {
                for l in 0..m {
                    if k != l {
                        assert!(sys.matrix.get(i * m + k, i2 * m + l).abs() < 1e-12 * scale);
                    }
                }
            }
        }
    }
    let all = solve_reduced(&sys, &space, &grid).unwrap().nodal_values();
    let mut sum = vec![0.0; all.len()];
    for k in 0..m {
        let single = ReductionSpace::orthonormalized(&grid.ty, &[space.modes[k].clone()]).unwrap();
        let s = solve_reduced(
            &assemble_reduced(&pd, &form, &single, &grid.tx).unwrap(),
            &single,
            &grid,
        )
        .unwrap();
        for (a, b) in sum.iter_mut().zip(s.nodal_values()) {
            *a += b;
        }
    }
    assert!(max_abs_diff(&all, &sum) < 1e-12);
}

fn unit_problem() -> ProblemData {
    ProblemData::poisson((0.0, 2.0), (0.0, 1.0), ScalarField::zero(), ScalarField::zero())
}

fn y_only_lifting() -> LiftingFunction {
    LiftingFunction::new(
        ScalarField::new(|_, y| (PI * y).sin() + y),
        ScalarField::zero(),
        ScalarField::new(|_, y| PI * (PI * y).cos() + 1.0),
    )
}

#[test]
fn local_reconstruction_of_x_independent_lifting() {
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 80, 40).unwrap();
    let pd = unit_problem();
    let lift = y_only_lifting();
    let global = riesz_lifting_reconstruction(&pd, &lift, &grid).unwrap();
    let local = local_reconstruction(&pd, &lift, 1.0, 0.3, &grid).unwrap();
    let fiber: Vec<f64> = grid.ty.nodes().iter().map(|&y| global.eval(1.0, y)).collect();
    let norm = fiber.iter().map(|v| v * v).sum::<f64>().sqrt();
    let diff = fiber
        .iter()
        .zip(&local)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    assert!(diff <= 0.01 * norm, "{diff} vs {norm}");
    for j in [10, 20, 30] {
        let y = grid.ty.node(j);
        assert!((fiber[j] - PI * PI * (PI * y).sin()).abs() < 0.01 * PI * PI);
    }
}

#[test]
fn whole_domain_strip_equals_global_field() {
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 20, 16).unwrap();
    let case = cases::case1((0.0, 0.0));
    let global = riesz_lifting_reconstruction(&case.pd, &case.lifting, &grid).unwrap();
    for mu in [0.5, 1.05, 1.7] {
        let local = local_reconstruction(&case.pd, &case.lifting, mu, 2.5, &grid).unwrap();
        let fiber: Vec<f64> = grid.ty.nodes().iter().map(|&y| global.eval(mu, y)).collect();
        let scale = fiber.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(max_abs_diff(&fiber, &local) <= 1e-8 * scale);
    }
}

#[test]
fn reconstruction_edge_cases() {
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 20, 16).unwrap();
    let pd = unit_problem();
    let zero = local_reconstruction(&pd, &LiftingFunction::zero(), 1.0, 0.4, &grid).unwrap();
    assert!(zero.iter().all(|&v| v == 0.0));
    let err = local_reconstruction(&pd, &y_only_lifting(), 1.0, 0.05, &grid).unwrap_err();
    assert!(matches!(err, Error::DegenerateStrip { .. }));
    assert!(local_reconstruction(&pd, &y_only_lifting(), 2.5, 0.4, &grid).is_err());
}

#[test]
fn riesz_field_tests_like_band_laplacian() {
    let case = cases::case1((0.0, 0.0));
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 160, 80).unwrap();
    let r = riesz_lifting_reconstruction(&case.pd, &case.lifting, &grid).unwrap();
    let lap = case.lifting.laplacian.clone().unwrap();
    let w = |x: f64, y: f64| (0.5 * PI * x).sin() * (PI * y).sin();
    let wn = grid.sample(w);
    let mass = assemble_mass(&grid);
    let lhs = mass.bilinear(&grid.restrict_interior(&r.values), &grid.restrict_interior(&wn));
    let (hx, hy) = (grid.tx.spacing(), grid.ty.spacing());
    let g = 0.5 / 3f64.sqrt();
    let mut rhs = 0.0;
    for i in 0..160 {
        for j in 0..80 {
            for sx in [0.5 - g, 0.5 + g] {
                for sy in [0.5 - g, 0.5 + g] {
                    let (x, y) = (grid.tx.node(i) + sx * hx, grid.ty.node(j) + sy * hy);
                    let iw = wn[grid.node_index(i, j)] * (1.0 - sx) * (1.0 - sy)
                        + wn[grid.node_index(i + 1, j)] * sx * (1.0 - sy)
                        + wn[grid.node_index(i, j + 1)] * (1.0 - sx) * sy
                        + wn[grid.node_index(i + 1, j + 1)] * sx * sy;
                    rhs -= 0.25 * hx * hy * lap.eval(x, y) * iw;
                }
            }
        }
    }
    assert!((lhs - rhs).abs() <= 0.02 * rhs.abs(), "{lhs} vs {rhs}");
}
