use std::sync::Arc;

use polaron_core::pekar::{
    default_grid, gaussian, mass_constant, mass_identity_checks, solve_pekar_ball,
    solve_pekar_free, BallOptions, FieldCoupling, FreeDiscretization, FreeOptions,
};
use polaron_core::radial::{BallBasis, RadialGrid};

use polaron_suite::{gauss_legendre_8, gaussian_mixture_energy, three_gaussian_minimum};

#[test]
fn mixture_oracle_reduces_to_single_gaussian() {
    for a in [0.01, gaussian::OPTIMAL_EXPONENT, 0.3] {
        let e = gaussian_mixture_energy(&[a], &[1.0]);
        assert!((e - gaussian::energy(a)).abs() < 1e-14, "{a}: {e} vs {}", gaussian::energy(a));
        // Splitting one Gaussian into two equal halves changes nothing.
        let split = gaussian_mixture_energy(&[a, a], &[0.5, 0.5]);
        assert!((split - e).abs() < 1e-14);
    }
}

#[test]
fn free_minimum_below_three_gaussian_oracle() {
    let oracle = three_gaussian_minimum();
    assert!((oracle + 0.1085).abs() < 5e-4, "oracle {oracle}");
    assert!(oracle < gaussian::BEST_ENERGY);
    let sol = solve_pekar_free(&default_grid().unwrap(), None, &FreeOptions::default()).unwrap();
    // The grid minimizer is variational up to its discretization error.
    assert!(sol.energy <= oracle + 1e-7, "{} vs {oracle}", sol.energy);
    assert!(oracle - sol.energy < 1e-4, "{} vs {oracle}", sol.energy);
}

#[test]
fn free_solution_is_fourth_order_in_the_spacing() {
    let e = |n: usize| {
        let g = Arc::new(RadialGrid::uniform(n, 30.0).unwrap());
        solve_pekar_free(&g, None, &FreeOptions::default()).unwrap().energy
    };
    let (e1, e2, e3) = (e(750), e(1500), e(3000));
    let ratio = (e1 - e2) / (e2 - e3);
    assert!(ratio > 10.0 && ratio < 24.0, "ratio {ratio}");
}

#[test]
fn free_solution_identities() {
    let sol = solve_pekar_free(&default_grid().unwrap(), None, &FreeOptions::default()).unwrap();
    assert!(sol.virial_residual() < 1e-6, "virial {}", sol.virial_residual());
    assert!((sol.mu - 3.0 * sol.energy).abs() / sol.energy.abs() < 1e-5);
    assert!(sol.warnings.is_empty(), "{:?}", sol.warnings);
    let psi = &sol.psi.values;
    assert!(psi.iter().all(|&v| v >= 0.0), "minimizer has a sign change");
    // psi decays like exp(-sqrt(|mu|) r).
    let last = *psi.last().unwrap();
    assert!(last < 1e-6 * psi[0], "edge value {last}");
    let m = mass_constant(&sol).unwrap();
    assert!(m.relative_gap() < 1e-4, "{m:?}");
    let checks = mass_identity_checks(&sol).unwrap();
    assert!(checks.moment_residual < 1e-6, "{checks:?}");
    assert!(checks.el_fourier_residual < 1e-4, "{checks:?}");
    assert!(!checks.fourier_warning);
}

#[test]
fn analytic_gradient_matches_difference_quotient() {
    let grid = RadialGrid::uniform(400, 20.0).unwrap();
    let disc = FreeDiscretization::new(&grid).unwrap();
    let u: Vec<f64> = disc.radii().iter().map(|r| r * (-0.1 * r * r).exp() * (1.0 + 0.2 * r)).collect();
    let grad = disc.raw_gradient(&u);
    let scale = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
    for &i in &[0usize, 3, 40, 120, 250] {
        // E is a quartic polynomial in u_i, so a wide step keeps roundoff low.
        let h = 1e-4;
        let mut up = u.clone();
        up[i] += h;
        let mut dn = u.clone();
        dn[i] -= h;
        let fd = (disc.raw_energy(&up) - disc.raw_energy(&dn)) / (2.0 * h);
        assert!((fd - grad[i]).abs() < 1e-8 * scale, "{i}: {fd} vs {}", grad[i]);
    }
}

#[test]
fn ball_potential_agrees_with_shell_formula() {
    // Route one: the truncated field expansion. Route two: the radial Green's
    // function of the Dirichlet ball, u(r) = int_r^R Q(s) / s^2 ds with Q the
    // enclosed charge, evaluated by quadrature of psi^2.
    let basis = BallBasis::with_sector_size(1.0, 0, 80).unwrap();
    let opts = BallOptions {
        n_electron: Some(10),
        ..BallOptions::default()
    };
    let sol = solve_pekar_ball(&basis, &opts).unwrap();
    let data = sol.ball.as_ref().unwrap();
    let rho = |t: f64| data.psi_at(t).powi(2);
    let enclosed = |s: f64| gauss_legendre_8(|t| rho(t) * t * t, 0.0, s, 8);
    let shell = |r: f64| gauss_legendre_8(|s| enclosed(s) / (s * s), r, 1.0, 8);
    let v0 = data.potential_at(0.0).abs();
    for r in [0.0, 0.2, 0.45, 0.7, 0.9] {
        let direct = -2.0 * shell(r);
        let err = (data.potential_at(r) - direct).abs() / v0;
        assert!(err < 1e-4, "r = {r}: {} vs {direct}", data.potential_at(r));
    }
    // Unit charge inside the ball.
    assert!((4.0 * std::f64::consts::PI * enclosed(1.0) - 1.0).abs() < 1e-10);
}

#[test]
fn ball_energy_decreases_towards_free_value() {
    let free = solve_pekar_free(&default_grid().unwrap(), None, &FreeOptions::default()).unwrap().energy;
    let opts = BallOptions {
        coupling: FieldCoupling::FreeSpaceMatched,
        ..BallOptions::default()
    };
    let mut last = f64::INFINITY;
    for r in [6.0_f64, 10.0, 16.0] {
        // Wave numbers up to about 2 pi are enough for the minimizer's scale.
        let n = (2.0 * r).ceil() as usize;
        let e = solve_pekar_ball(&BallBasis::with_sector_size(r, 0, n).unwrap(), &opts).unwrap().energy;
        assert!(e > free, "R = {r}: {e} below the free minimum {free}");
        assert!(e < last, "R = {r}: energy did not decrease");
        last = e;
    }
    // The leading correction is the image-charge energy, about 1/R.
    assert!((last - free - 1.0 / 16.0).abs() < 0.02, "{last} {free}");
}

#[test]
fn ball_rejects_empty_basis() {
    assert!(BallBasis::new(1.0, 0, 1.0).is_err());
    let basis = BallBasis::with_sector_size(1.0, 0, 4).unwrap();
    let opts = BallOptions {
        mixing: 0.0,
        ..BallOptions::default()
    };
    assert!(solve_pekar_ball(&basis, &opts).is_err());
}
