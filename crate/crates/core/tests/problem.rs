use std::f64::consts::PI;

use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbhmr_core::cases;
use rbhmr_core::problem::{
    assemble_operator, assemble_reference_system, solve_reference, v_inner, FullSolution, ReferenceModel,
};
use rbhmr_core::{LiftingFunction, LiftingMode, ProblemData, ScalarField, TensorGrid};

// three-point Gauss rule on [0, 1]
const G3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

fn l2_distance(grid: &TensorGrid, u: impl Fn(f64, f64) -> f64, v: impl Fn(f64, f64) -> f64) -> (f64, f64) {
    let (hx, hy) = (grid.tx.spacing(), grid.ty.spacing());
    let (mut e, mut n) = (0.0, 0.0);
    for i in 0..grid.tx.elements() {
        for j in 0..grid.ty.elements() {
            for (sx, wx) in G3 {
                for (sy, wy) in G3 {
                    let x = grid.tx.node(i) + sx * hx;
                    let y = grid.ty.node(j) + sy * hy;
                    let w = wx * wy * hx * hy;
                    let (a, b) = (u(x, y), v(x, y));
                    e += w * (a - b) * (a - b);
                    n += w * b * b;
                }
            }
        }
    }
    (e.sqrt(), n.sqrt())
}

fn sine_problem() -> ProblemData {
    let f = ScalarField::new(|x, y| 1.25 * PI * PI * (PI * x / 2.0).sin() * (PI * y).sin());
    ProblemData::poisson((0.0, 2.0), (0.0, 1.0), f, ScalarField::zero())
}

fn sine_exact(x: f64, y: f64) -> f64 {
    (PI * x / 2.0).sin() * (PI * y).sin()
}

fn solve(pd: &ProblemData, lift: &LiftingFunction, grid: &TensorGrid, mode: LiftingMode) -> FullSolution {
    solve_reference(&assemble_reference_system(pd, lift, grid, mode).unwrap()).unwrap()
}

#[test]
fn manufactured_solution_converges_quadratically() {
    let pd = sine_problem();
    let lift = LiftingFunction::zero();
    let mut errs = Vec::new();
    let mut maxes = Vec::new();
    for (nx, ny) in [(40, 20), (80, 40)] {
        let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), nx, ny).unwrap();
        let sol = solve(&pd, &lift, &grid, LiftingMode::WeakLifting);
        errs.push(l2_distance(&grid, |x, y| sol.eval(x, y), sine_exact).0);
        let exact = grid.sample(sine_exact);
        maxes.push(
            sol.coeffs
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        );
    }
    let ratio = errs[0] / errs[1];
    assert!((3.6..=4.4).contains(&ratio), "ratio {ratio}");
    assert!(maxes[1] < maxes[0]);
}

#[test]
fn residual_of_direct_solve_is_small() {
    let case = cases::case1((100.0, 0.0));
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 40, 20).unwrap();
    let sys = assemble_reference_system(&case.pd, &case.lifting, &grid, LiftingMode::WeakLifting).unwrap();
    let sol = solve_reference(&sys).unwrap();
    let x = sol.interior();
    let ax = sys.matrix.mul_vec(&x);
    let r: f64 = ax
        .iter()
        .zip(&sys.rhs)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let b: f64 = sys.rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(r <= 1e-10 * b);
    for (i, &x) in grid.tx.nodes().iter().enumerate() {
        for (j, &y) in grid.ty.nodes().iter().enumerate() {
            if i == 0 || j == 0 || i == grid.tx.elements() || j == grid.ty.elements() {
                assert_eq!(sol.coeffs[grid.node_index(i, j)], 0.0, "({x},{y})");
            }
        }
    }
}

#[test]
fn case_one_reference_recovers_exact_solution() {
    let case = cases::case1((0.0, 0.0));
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 160, 80).unwrap();
    let sol = solve(&case.pd, &case.lifting, &grid, LiftingMode::WeakLifting);
    let exact = case.exact.clone().unwrap();
    let h = case.lifting.value.clone();
    let (e, n) = l2_distance(&grid, |x, y| sol.eval(x, y) + h.eval(x, y), |x, y| exact.eval(x, y));
    assert!(e / n < 1e-2, "relative error {}", e / n);
}

fn smooth_lifting() -> LiftingFunction {
    // h = e^x sin(πy) + y: trace data is nonzero on every side
    LiftingFunction::new(
        ScalarField::new(|x, y| x.exp() * (PI * y).sin() + y),
        ScalarField::new(|x, y| x.exp() * (PI * y).sin()),
        ScalarField::new(|x, y| PI * x.exp() * (PI * y).cos() + 1.0),
    )
    .with_laplacian(ScalarField::new(|x, y| (1.0 - PI * PI) * x.exp() * (PI * y).sin()))
}

#[test]
fn weak_and_strong_lifting_agree_to_second_order() {
    let lift = smooth_lifting();
    let f = ScalarField::new(|x, y| 1.0 + x * y);
    let pd = ProblemData::poisson((0.0, 2.0), (0.0, 1.0), f, lift.value.clone());
    let mut gaps = Vec::new();
    for (nx, ny) in [(20, 10), (40, 20)] {
        let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), nx, ny).unwrap();
        let weak = solve(&pd, &lift, &grid, LiftingMode::WeakLifting);
        let strong = solve(&pd, &lift, &grid, LiftingMode::DeltaH);
        gaps.push(l2_distance(&grid, |x, y| weak.eval(x, y), |x, y| strong.eval(x, y)).0);
    }
    assert!(gaps[0] / gaps[1] >= 3.0, "gaps {gaps:?}");
}

#[test]
fn modes_share_the_operator() {
    let case = cases::case1((0.0, 0.0));
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 12, 6).unwrap();
    let a = assemble_operator(&case.pd, &grid).unwrap();
    for mode in [
        LiftingMode::WeakLifting,
        LiftingMode::DeltaH,
        LiftingMode::PlainGd,
        LiftingMode::RieszRecon,
    ] {
        let sys = assemble_reference_system(&case.pd, &case.lifting, &grid, mode).unwrap();
        assert_eq!(sys.matrix, a);
    }
}

#[test]
fn h1_seminorm_of_interpolant() {
    // ∫|∇u|² for u = sin(πx/2) sin(πy) on (0,2)×(0,1) equals 5π²/8
    let pd = sine_problem();
    let exact = 5.0 * PI * PI / 8.0;
    let mut errs = Vec::new();
    for n in [20, 40] {
        let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 2 * n, n).unwrap();
        let u = grid.restrict_interior(&grid.sample(sine_exact));
        errs.push((v_inner(&grid, &pd, &u, &u).unwrap() - exact).abs());
    }
    assert!(errs[1] < errs[0] && errs[1] < 1e-2 * exact, "{errs:?}");
}

fn advective_problem(b1: f64, b2: f64) -> ProblemData {
    ProblemData::poisson((0.0, 2.0), (0.0, 1.0), ScalarField::constant(1.0), ScalarField::zero())
        .with_diffusion(ScalarField::new(|x, y| 1.0 + 0.5 * (x * y).sin()))
        .with_advection(ScalarField::constant(b1), ScalarField::constant(b2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coercivity_constant_is_one(seed in any::<u64>(), b1 in -100.0f64..100.0, b2 in -100.0f64..100.0) {
        let pd = advective_problem(b1, b2);
        let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 10, 6).unwrap();
        let a = assemble_operator(&pd, &grid).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..grid.interior_count()).map(|_| (rng.next_u32() as f64 / u32::MAX as f64) - 0.5).collect();
        let avv = a.bilinear(&v, &v);
        let vv = v_inner(&grid, &pd, &v, &v).unwrap();
        prop_assert!(vv > 0.0);
        prop_assert!((avv - vv).abs() <= 1e-10 * vv);
    }

    #[test]
    fn v_inner_is_symmetric_and_bilinear(seed in any::<u64>(), alpha in -5.0f64..5.0) {
        let pd = advective_problem(30.0, -10.0);
        let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 8, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || (0..grid.interior_count()).map(|_| rng.next_u32() as f64 / u32::MAX as f64).collect::<Vec<_>>();
        let (u, v) = (draw(), draw());
        let uv = v_inner(&grid, &pd, &u, &v).unwrap();
        let vu = v_inner(&grid, &pd, &v, &u).unwrap();
        let au: Vec<f64> = u.iter().map(|x| alpha * x).collect();
        prop_assert!((uv - vu).abs() <= 1e-12 * uv.abs().max(1.0));
        prop_assert!((v_inner(&grid, &pd, &au, &v).unwrap() - alpha * uv).abs() <= 1e-12 * uv.abs().max(1.0));
    }
}

#[test]
fn model_norms_match_free_functions() {
    let case = cases::case1((0.0, 0.0));
    let grid = TensorGrid::uniform((0.0, 2.0), (0.0, 1.0), 16, 8).unwrap();
    let model = ReferenceModel::build(&case.pd, &case.lifting, LiftingMode::WeakLifting, &grid).unwrap();
    let p = model.solve().unwrap().interior();
    let v2 = v_inner(&grid, &case.pd, &p, &p).unwrap();
    assert!((model.v_norm(&p) - v2.sqrt()).abs() <= 1e-12 * v2.sqrt());
    let r = model.residual(&p);
    assert!(r.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-9);
}
