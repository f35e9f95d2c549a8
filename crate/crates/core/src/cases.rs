//! Built-in test problems with a skewed concentration band.
//!
//! The band profile is `g(s) = 1` for `s < 0`, `0.1` for `s > 0.1` and
//! `0.55 + 0.45 cos(10π s)` in between, evaluated at `s = y + 0.4x − 0.8`.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::interface::Profile;
use crate::problem::{LiftingFunction, ProblemData, ScalarField};

/// Problem data, the lifting used by the solvers and, when known, the
/// exact solution `p̃` (lifting included).
#[derive(Debug, Clone)]
pub struct TestCase {
    pub id: u8,
    pub pd: ProblemData,
    pub lifting: LiftingFunction,
    pub exact: Option<ScalarField>,
    /// Trace of the lifting at the left end of `Ω_1D` as a function of `y`.
    pub profile: Profile,
}

pub fn band(s: f64) -> f64 {
    if s < 0.0 {
        1.0
    } else if s > 0.1 {
        0.1
    } else {
        0.55 + 0.45 * (10.0 * PI * s).cos()
    }
}

pub fn band_d1(s: f64) -> f64 {
    if (0.0..=0.1).contains(&s) {
        -4.5 * PI * (10.0 * PI * s).sin()
    } else {
        0.0
    }
}

pub fn band_d2(s: f64) -> f64 {
    if (0.0..=0.1).contains(&s) {
        -45.0 * PI * PI * (10.0 * PI * s).cos()
    } else {
        0.0
    }
}

fn band_arg(x: f64, y: f64) -> f64 {
    y + 0.4 * x - 0.8
}

/// The straight band lifting with analytic derivatives and Laplacian.
pub fn band_lifting() -> LiftingFunction {
    LiftingFunction::new(
        ScalarField::new(|x, y| band(band_arg(x, y))),
        ScalarField::new(|x, y| 0.4 * band_d1(band_arg(x, y))),
        ScalarField::new(|x, y| band_d1(band_arg(x, y))),
    )
    .with_laplacian(ScalarField::discontinuous(|x, y| 1.16 * band_d2(band_arg(x, y))))
}

pub fn band_profile() -> Profile {
    Profile::new(|t| band(t - 0.8), |t| band_d1(t - 0.8)).with_second(|t| band_d2(t - 0.8))
}

/// `p = 5y²(1−y)²(0.75−y) x(2−x) exp(sin 2πx)` with first and second
/// derivatives as `(p, p_x, p_y, p_xx, p_yy)`.
pub fn smooth_part(x: f64, y: f64) -> [f64; 5] {
    let yv = 3.75 * y * y - 12.5 * y.powi(3) + 13.75 * y.powi(4) - 5.0 * y.powi(5);
    let yd = 7.5 * y - 37.5 * y * y + 55.0 * y.powi(3) - 25.0 * y.powi(4);
    let ydd = 7.5 - 75.0 * y + 165.0 * y * y - 100.0 * y.powi(3);
    let u = x * (2.0 - x);
    let ud = 2.0 - 2.0 * x;
    let e = (2.0 * PI * x).sin().exp();
    let c = 2.0 * PI * (2.0 * PI * x).cos();
    let cd = -4.0 * PI * PI * (2.0 * PI * x).sin();
    let xv = u * e;
    let xd = ud * e + u * e * c;
    let xdd = -2.0 * e + 2.0 * ud * e * c + u * e * (c * c + cd);
    [xv * yv, xd * yv, xv * yd, xdd * yv, xv * ydd]
}

/// Poisson (optionally advective) problem on `(0,2)×(0,1)` with exact
/// solution `p + h` for the straight band `h`.
pub fn case1(b: (f64, f64)) -> TestCase {
    let (b1, b2) = b;
    let source = ScalarField::discontinuous(move |x, y| {
        let [_, px, py, pxx, pyy] = smooth_part(x, y);
        let s = band_arg(x, y);
        let (g1, g2) = (band_d1(s), band_d2(s));
        -(pxx + pyy) - 1.16 * g2 + b1 * (px + 0.4 * g1) + b2 * (py + g1)
    });
    let lifting = band_lifting();
    let pd = ProblemData::poisson((0.0, 2.0), (0.0, 1.0), source, lifting.value.clone())
        .with_advection(ScalarField::constant(b1), ScalarField::constant(b2));
    TestCase {
        id: 1,
        pd,
        lifting,
        exact: Some(ScalarField::new(|x, y| smooth_part(x, y)[0] + band(band_arg(x, y)))),
        profile: band_profile(),
    }
}

/// Piecewise constant part of the source of [`case2`].
pub fn box_source(x: f64, y: f64) -> f64 {
    let inside = |x0: f64, x1: f64, y0: f64, y1: f64| x >= x0 && x <= x1 && y >= y0 && y <= y1;
    if inside(0.15, 0.35, 0.05, 0.25) || inside(0.55, 0.75, 0.6, 0.8) {
        2.25
    } else if inside(0.95, 1.05, 0.15, 0.35)
        || inside(0.95, 1.05, 0.75, 0.95)
        || (inside(1.25, 1.45, 0.35, 0.55) && y < 0.55)
    {
        4.0
    } else if inside(1.25, 1.45, 0.55, 0.75) {
        2.0
    } else if inside(1.65, 1.85, 0.85, 1.05) {
        2.25
    } else {
        0.0
    }
}

/// Poisson problem on `(0,2)×(0,1.1)` with source `−Δh` plus six boxes.
pub fn case2() -> TestCase {
    let lifting = band_lifting();
    let source = ScalarField::discontinuous(|x, y| -1.16 * band_d2(band_arg(x, y)) + box_source(x, y));
    let pd = ProblemData::poisson((0.0, 2.0), (0.0, 1.1), source, lifting.value.clone());
    TestCase {
        id: 2,
        pd,
        lifting,
        exact: None,
        profile: band_profile(),
    }
}

const BEND: f64 = 5.0 * PI / 3.0;

/// Bump `j(x) = 0.1 sin²(5π/3 (x − 1))` on `[1, 1.6]` with `(j, j', j'')`.
pub fn bend(x: f64) -> [f64; 3] {
    if (1.0..=1.6).contains(&x) {
        let t = BEND * (x - 1.0);
        [
            0.1 * t.sin().powi(2),
            0.1 * BEND * (2.0 * t).sin(),
            0.2 * BEND * BEND * (2.0 * t).cos(),
        ]
    } else {
        [0.0; 3]
    }
}

fn curved_arg(x: f64, y: f64) -> f64 {
    band_arg(x, y) - bend(x)[0]
}

/// Poisson problem on `(0,2)×(0,1)` whose band bends on `[1, 1.6]`; the
/// solvers use the straight band as lifting.
pub fn case3() -> TestCase {
    let source = ScalarField::discontinuous(|x, y| {
        let [_, _, _, pxx, pyy] = smooth_part(x, y);
        let [_, jd, jdd] = bend(x);
        let s = curved_arg(x, y);
        let grad2 = (0.4 - jd) * (0.4 - jd) + 1.0;
        let lap_h = band_d2(s) * grad2 - band_d1(s) * jdd;
        -(pxx + pyy) - lap_h
    });
    let dirichlet = ScalarField::new(|x, y| band(curved_arg(x, y)));
    let pd = ProblemData::poisson((0.0, 2.0), (0.0, 1.0), source, dirichlet);
    TestCase {
        id: 3,
        pd,
        lifting: band_lifting(),
        exact: Some(ScalarField::new(|x, y| smooth_part(x, y)[0] + band(curved_arg(x, y)))),
        profile: band_profile(),
    }
}

/// Case by number; `b` only affects case 1.
pub fn by_id(id: u8, b: (f64, f64)) -> Option<TestCase> {
    match id {
        1 => Some(case1(b)),
        2 => Some(case2()),
        3 => Some(case3()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_part_derivatives_match_differences() {
        let d = 1e-5;
        for &(x, y) in &[(0.3, 0.2), (1.1, 0.7), (1.7, 0.45)] {
            let p = |x, y| smooth_part(x, y)[0];
            let [_, px, py, pxx, pyy] = smooth_part(x, y);
            assert!((px - (p(x + d, y) - p(x - d, y)) / (2.0 * d)).abs() < 1e-6);
            assert!((py - (p(x, y + d) - p(x, y - d)) / (2.0 * d)).abs() < 1e-6);
            let fxx = (p(x + d, y) - 2.0 * p(x, y) + p(x - d, y)) / (d * d);
            let fyy = (p(x, y + d) - 2.0 * p(x, y) + p(x, y - d)) / (d * d);
            assert!((pxx - fxx).abs() < 1e-3 * (1.0 + pxx.abs()));
            assert!((pyy - fyy).abs() < 1e-3 * (1.0 + pyy.abs()));
        }
    }

    #[test]
    fn liftings_match_boundary_data() {
        for case in [case1((0.0, 0.0)), case2(), case3()] {
            let (x0, x1) = case.pd.omega_x;
            let (y0, y1) = case.pd.omega_y;
            for k in 0..=50 {
                let t = k as f64 / 50.0;
                let (x, y) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
                for (px, py) in [(x, y0), (x, y1), (x0, y), (x1, y)] {
                    let g = case.pd.dirichlet.eval(px, py);
                    let h = case.lifting.value.eval(px, py);
                    assert!((g - h).abs() <= 1e-12, "case {} at ({px},{py})", case.id);
                }
            }
        }
    }

    #[test]
    fn bend_derivatives() {
        let d = 1e-6;
        for x in [1.1, 1.3, 1.55] {
            let [_, jd, jdd] = bend(x);
            assert!((jd - (bend(x + d)[0] - bend(x - d)[0]) / (2.0 * d)).abs() < 1e-7);
            assert!((jdd - (bend(x + d)[1] - bend(x - d)[1]) / (2.0 * d)).abs() < 1e-5);
        }
    }
}
