use stochar_core::estimate::{
    dynkin_residual, estimate_exit_moment, estimate_exp_moment, estimate_green, estimate_phi_functional,
    estimate_survival_curve, estimate_u_stoc, pde_residual_grid, Clock, McProblem, Phi,
};
use stochar_core::{DiffusionModel, Domain, MultiPoly, PolyMatrix, PolyVectorField, Sequential, SimConfig};

fn bm() -> DiffusionModel {
    DiffusionModel::polynomial(
        PolyVectorField::zero(1),
        PolyMatrix::constant(1, 1, &[1.0]).unwrap(),
        Domain::full(1),
    )
    .unwrap()
}

fn unit() -> Domain {
    Domain::boxed(vec![0.0], vec![1.0]).unwrap()
}

fn cfg(seed: u64) -> SimConfig {
    SimConfig::new(1e-3, 20.0, seed).unwrap()
}

fn x_poly() -> MultiPoly {
    MultiPoly::var(1, 0).unwrap()
}

#[test]
fn mean_exit_time_is_x_times_one_minus_x() {
    let (m, u, c) = (bm(), unit(), cfg(1));
    let p = McProblem::new(&Sequential, &m, &u, &c);
    for x in [0.2, 0.5] {
        let e = estimate_exit_moment(&p, &[x], 1, 20_000).unwrap();
        assert!(e.agrees_with(x * (1.0 - x), 3.0, 0.005), "{x}: {e:?}");
        assert_eq!(e.censored_fraction, 0.0);
    }
}

#[test]
fn harmonic_measure_is_linear() {
    let (m, u, c) = (bm(), unit(), cfg(2));
    let p = McProblem::new(&Sequential, &m, &u, &c);
    let zero = |_: &[f64]| 0.0;
    let right = |y: &[f64]| if y[0] >= 0.5 { 1.0 } else { 0.0 };
    for x in [0.2, 0.5, 0.8] {
        let e = estimate_u_stoc(&p, &zero, &right, &[x], 20_000).unwrap();
        assert!(e.agrees_with(x, 3.0, 0.0), "{x}: {e:?}");
    }
}

#[test]
fn laplace_transform_and_green_share_paths() {
    let (m, u, c) = (bm(), unit(), cfg(3));
    let p = McProblem::new(&Sequential, &m, &u, &c);
    let lt = estimate_exp_moment(&p, &[0.5], -2.0, Clock::Tau, 20_000).unwrap();
    assert!(lt.agrees_with(1.0 / 1.0f64.cosh(), 3.0, 0.0), "{lt:?}");
    let one = MultiPoly::constant(1, 1.0);
    let g = estimate_green(&p, 2.0, &one, &[0.5], 20_000, Some(1.0), None).unwrap();
    assert!((g.value.mean - (1.0 - lt.mean) / 2.0).abs() < 1e-12);
}

#[test]
fn resolvent_is_dominated_by_excessive_function() {
    let (m, u, c) = (bm(), unit(), cfg(4));
    let p = McProblem::new(&Sequential, &m, &u, &c);
    let beta = 1.5;
    for x in [0.1, 0.5, 0.9] {
        let g = estimate_green(&p, beta, &x_poly(), &[x], 5_000, Some(1.0), None).unwrap();
        assert!(beta * g.value.mean <= x + 3.0 * beta * g.value.stderr);
    }
}

#[test]
fn dynkin_residual_vanishes_for_low_degree_tests() {
    let m = bm();
    let k = Domain::boxed(vec![-1.0], vec![2.0]).unwrap();
    let phis = [MultiPoly::constant(1, 1.0), x_poly(), &x_poly() * &x_poly()];
    for phi in &phis {
        let r = dynkin_residual(&Sequential, &m, phi, &[0.5], 0.5, &k, 10_000, &cfg(5)).unwrap();
        assert!(r.mean.abs() <= 3.0 * r.stderr + 1e-12, "{phi}: {r:?}");
    }
}

#[test]
fn survival_curve_is_monotone() {
    let (m, u, c) = (bm(), unit(), cfg(6));
    let p = McProblem::new(&Sequential, &m, &u, &c);
    let times: Vec<f64> = (0..20).map(|i| i as f64 * 0.05).collect();
    let s = estimate_survival_curve(&p, &[0.3], &times, 5_000).unwrap();
    assert_eq!(s[0].mean, 1.0);
    assert!(s.windows(2).all(|w| w[1].mean <= w[0].mean));
}

#[test]
fn phi_functional_matches_its_survival_representation() {
    let (m, u, c) = (bm(), unit(), cfg(7));
    let p = McProblem::new(&Sequential, &m, &u, &c);
    let phi = Phi {
        value: &|t: f64| t * t,
        derivative: &|t: f64| 2.0 * t,
    };
    let r = estimate_phi_functional(&p, &[0.5], &phi, 10_000).unwrap();
    assert!(r.agrees, "{r:?}");
    // E τ² = (x − 2x³ + x⁴)/3, which is 5/48 at x = ½
    assert!(r.v1.agrees_with(5.0 / 48.0, 3.0, 0.003), "{:?}", r.v1);
}

#[test]
fn pde_residual_is_small_with_common_random_numbers() {
    let (m, u, c) = (bm(), unit(), cfg(8));
    let p = McProblem::new(&Sequential, &m, &u, &c);
    let one = MultiPoly::constant(1, 1.0);
    let zero = MultiPoly::zero(1);
    let grid: Vec<Vec<f64>> = (2..=8).map(|i| vec![i as f64 / 10.0]).collect();
    let r = pde_residual_grid(&p, &one, &zero, &grid, 0.05, 50_000).unwrap();
    for pt in &r.points {
        assert!(
            pt.residual.mean.abs() <= 4.0 * pt.residual.stderr + 0.05 * 0.05,
            "{pt:?}"
        );
        assert!(pt.u_hat.agrees_with(pt.x[0] * (1.0 - pt.x[0]), 4.0, 0.005));
    }
}
