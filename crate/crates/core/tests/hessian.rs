use std::f64::consts::PI;

use polaron_core::hessian::{
    free_zero_modes, hessian_ball, FieldVector, HessianKind, HessianOptions, HessianSetup,
    ZeroModeOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_direction(rng: &mut ChaCha8Rng, opts: &HessianOptions) -> FieldVector {
    let mut v: FieldVector = (0..=opts.l_max)
        .map(|_| (0..opts.n_radial).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    let n: f64 = v.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().flatten().for_each(|x| *x /= n);
    v
}

#[test]
fn functional_at_minimizer_and_at_zero() {
    let setup = HessianSetup::new(1.0, HessianOptions::default()).unwrap();
    let phi0 = setup.pekar_field();
    let f0 = setup.field_functional(&phi0).unwrap();
    assert!((f0 - setup.solution.energy).abs() < 1e-10, "{f0} vs {}", setup.solution.energy);
    let zero: FieldVector = phi0.iter().map(|s| vec![0.0; s.len()]).collect();
    assert!((setup.kappa(&zero).unwrap() - PI * PI).abs() < 1e-10);
}

#[test]
fn kappa_is_concave_along_random_chords() {
    let opts = HessianOptions::default();
    let setup = HessianSetup::new(1.0, opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let a: FieldVector = random_direction(&mut rng, &opts).into_iter().map(|s| s.iter().map(|x| 3.0 * x).collect()).collect();
        let b = random_direction(&mut rng, &opts);
        let mid: FieldVector = a.iter().zip(&b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| 0.5 * (p + q)).collect()).collect();
        let (ka, kb, km) = (setup.kappa(&a).unwrap(), setup.kappa(&b).unwrap(), setup.kappa(&mid).unwrap());
        assert!(km >= 0.5 * (ka + kb) - 1e-12, "{km} < mean of {ka}, {kb}");
    }
}

#[test]
fn finite_difference_oracle_on_random_directions() {
    let opts = HessianOptions::default();
    let setup = HessianSetup::new(1.0, opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5 {
        let d = random_direction(&mut rng, &opts);
        let qf = setup.quadratic_form(&d).unwrap();
        let fd = setup.finite_difference_form(&d, 1e-3).unwrap();
        assert!((qf - fd).abs() <= 1e-4 * qf.abs(), "{qf} vs {fd}");
        assert!(qf > 0.0);
    }
}

#[test]
fn sectors_are_independent_of_the_angular_cutoff() {
    let small = HessianOptions {
        l_max: 2,
        ..HessianOptions::default()
    };
    let a = HessianSetup::new(1.0, small).unwrap();
    let b = HessianSetup::new(1.0, HessianOptions::default()).unwrap();
    for l in 0..=2 {
        let diff = (a.build_k(l).unwrap() - b.build_k(l).unwrap()).abs().max();
        assert!(diff < 1e-10, "sector {l}: {diff}");
    }
    assert!(a.build_k(3).is_err());
}

#[test]
fn spectrum_and_trace_bracket() {
    let rep = hessian_ball(1.0, HessianOptions::default()).unwrap();
    let mut trace_k = 0.0;
    for s in &rep.sectors {
        let asym = (&s.matrix - s.matrix.transpose()).abs().max();
        assert!(asym < 1e-12);
        assert!(s.eigenvalues.iter().all(|&v| (-1e-8..1.0).contains(&v)));
        assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        assert!(s.contribution <= 0.0);
        trace_k += (2 * s.l + 1) as f64 * s.matrix.trace();
    }
    // -x <= sqrt(1 - x) - 1 <= -x/2 on [0, 1].
    let t = rep.trace_correction;
    assert!(t <= -0.5 * trace_k + 1e-14 && t >= -trace_k - 1e-14, "{t} vs Tr K = {trace_k}");
    let sum: f64 = rep.sectors.iter().map(|s| s.contribution).sum();
    assert_eq!(sum, t);
    assert_eq!(rep.eigenvalue_rows().len(), rep.sectors.iter().map(|s| s.eigenvalues.len()).sum::<usize>());
    // Non-s sectors fall off with l.
    let c: Vec<f64> = rep.sectors.iter().skip(1).map(|s| s.contribution.abs()).collect();
    assert!(c.windows(2).all(|w| w[1] < w[0]), "{c:?}");
}

#[test]
fn wider_field_basis_raises_the_trace_magnitude() {
    let base = HessianOptions::default();
    let wide = HessianOptions {
        n_radial: 16,
        ..base
    };
    let a = hessian_ball(1.0, base).unwrap().trace_correction;
    let b = hessian_ball(1.0, wide).unwrap().trace_correction;
    assert!(b < a && a < 0.0, "{a} {b}");
}

#[test]
fn free_approx_kind_is_recorded() {
    let setup = HessianSetup::new(2.0, HessianOptions { l_max: 2, ..HessianOptions::default() }).unwrap();
    let rep = setup.report(HessianKind::FreeApprox).unwrap();
    assert_eq!(rep.kind, HessianKind::FreeApprox);
    assert_eq!(rep.radius, 2.0);
}

#[test]
fn translation_mode_becomes_a_zero_mode_on_large_balls() {
    let s = free_zero_modes(&[20.0, 40.0], &ZeroModeOptions::default()).unwrap();
    let (p20, p40) = (&s.points[0], &s.points[1]);
    assert!(p40.translation_residual < 0.02, "{}", p40.translation_residual);
    assert!(p40.translation_residual < p20.translation_residual);
    // The dipole image makes 1 - lambda_1 scale like R^{-3}.
    let exponent = ((1.0 - p20.l1_max) / (1.0 - p40.l1_max)).ln() / 2f64.ln();
    assert!((exponent - 3.0).abs() < 0.15, "exponent {exponent}");
    assert!(p40.l0_max < 0.95);
}
