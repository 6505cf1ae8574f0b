//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use polaron_core::bounds::{chi_norm, cutoff_error_norms, ly_lower_bound, sandwich};
use polaron_core::fock::{
    assemble_fiber_hamiltonian, dense_ground_energy, discretize_modes_free, dispersion,
    fiber_ground_energy, ground_state, second_order_fiber, FockBasis, FockBudget, LanczosOptions,
    ModeSet,
};
use polaron_core::hessian::{
    free_zero_modes, trace_convergence, FieldVector, HessianKind, HessianOptions, HessianSetup,
    ZeroModeOptions,
};
use polaron_core::pekar::{
    default_grid, gaussian, mass_constant, solve_pekar_free, FreeOptions, DEFAULT_POINTS,
    DEFAULT_R_MAX,
};
use polaron_core::radial::RadialGrid;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polaron_suite::{gauss_legendre_8, three_gaussian_minimum};

type Outcome = Result<(bool, String), String>;

fn check(ok: bool, what: String, failures: &mut Vec<String>) {
    if !ok {
        failures.push(what);
    }
}

fn verdict(failures: Vec<String>, summary: String) -> (bool, String) {
    if failures.is_empty() {
        (true, summary)
    } else {
        (false, format!("{summary}; failed: {}", failures.join(", ")))
    }
}

fn free_pekar() -> Outcome {
    let t0 = Instant::now();
    let opts = FreeOptions::default();
    let sol = solve_pekar_free(&default_grid().map_err(|e| e.to_string())?, None, &opts).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed().as_secs_f64();
    let fine = Arc::new(RadialGrid::uniform(2 * DEFAULT_POINTS, DEFAULT_R_MAX).map_err(|e| e.to_string())?);
    let doubled = solve_pekar_free(&fine, None, &opts).map_err(|e| e.to_string())?;
    let oracle = three_gaussian_minimum();
    let e = sol.energy;
    let virial = sol.virial_residual();
    let mu_rel = (sol.mu - 3.0 * e).abs() / e.abs();
    let doubling = (doubled.energy - e).abs() / e.abs();
    let mut f = Vec::new();
    check(elapsed < 60.0, format!("time {elapsed:.1}s"), &mut f);
    check(e <= gaussian::BEST_ENERGY + 1e-6, "Gaussian bound".into(), &mut f);
    check(virial <= 1e-5, "virial".into(), &mut f);
    check(mu_rel <= 1e-4, "mu = 3e".into(), &mut f);
    check(doubling <= 1e-5, "grid doubling".into(), &mut f);
    check((e + 0.1085).abs() <= 5e-4, "band".into(), &mut f);
    check((oracle + 0.1085).abs() <= 5e-4, "oracle band".into(), &mut f);
    check(e <= oracle + 1e-7, "below 3-Gaussian oracle".into(), &mut f);
    Ok(verdict(
        f,
        format!(
            "e = {e:.10}, |D-2T|/D = {virial:.1e}, |mu-3e|/|e| = {mu_rel:.1e}, doubling {doubling:.1e}, 3-Gaussian oracle {oracle:.8}, {elapsed:.2}s"
        ),
    ))
}

fn mass_identity() -> Outcome {
    let sol = solve_pekar_free(&default_grid().map_err(|e| e.to_string())?, None, &FreeOptions::default()).map_err(|e| e.to_string())?;
    let m = mass_constant(&sol).map_err(|e| e.to_string())?;
    let gap = m.relative_gap();
    Ok(verdict(
        if gap <= 1e-3 { vec![] } else { vec!["relative gap".into()] },
        format!("(8pi/3) int psi^4 = {:.10}, (2/3) int |grad phi|^2 = {:.10}, gap {gap:.1e}", m.c_psi4, m.c_gradphi),
    ))
}

fn ball_hessian() -> Outcome {
    let t0 = Instant::now();
    let opts = HessianOptions::default();
    let setup = HessianSetup::new(1.0, opts).map_err(|e| e.to_string())?;
    let rep = setup.report(HessianKind::Ball).map_err(|e| e.to_string())?;
    let mut f = Vec::new();
    check(opts.l_max >= 6, "l_max".into(), &mut f);
    let (lo, hi) = rep
        .sectors
        .iter()
        .flat_map(|s| s.eigenvalues.iter().copied())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    check(lo >= -1e-8 && hi < 1.0, "eigenvalue range".into(), &mut f);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let mut d: FieldVector = (0..=opts.l_max)
            .map(|_| (0..opts.n_radial).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        let n: f64 = d.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        d.iter_mut().flatten().for_each(|x| *x /= n);
        let qf = setup.quadratic_form(&d).map_err(|e| e.to_string())?;
        let fd = setup.finite_difference_form(&d, 1e-3).map_err(|e| e.to_string())?;
        worst = worst.max((qf - fd).abs() / qf.abs());
    }
    check(worst <= 1e-3, "finite-difference oracle".into(), &mut f);
    check(rep.trace_correction < 0.0, "trace sign".into(), &mut f);
    let series = trace_convergence(1.0, opts, 3).map_err(|e| e.to_string())?;
    let raw = series.raw_change().unwrap_or(f64::INFINITY);
    let extr = series.extrapolated_change().unwrap_or(f64::INFINITY);
    check(extr <= 1e-3, "Cauchy under doubling".into(), &mut f);
    let elapsed = t0.elapsed().as_secs_f64();
    check(elapsed < 300.0, format!("time {elapsed:.1}s"), &mut f);
    let last = series.extrapolated.last().copied().unwrap_or(f64::NAN);
    Ok(verdict(
        f,
        format!(
            "eigenvalues in [{lo:.1e}, {hi:.5}], FD rel {worst:.1e}, trace {:.7}, raw doubling change {raw:.1e}, extrapolated {last:.7} with change {extr:.1e}, {elapsed:.1}s",
            rep.trace_correction
        ),
    ))
}

fn zero_modes() -> Outcome {
    let s = free_zero_modes(&[6.0, 8.0, 10.0], &ZeroModeOptions::default()).map_err(|e| e.to_string())?;
    let l1: Vec<String> = s.points.iter().map(|p| format!("{:.4}", p.l1_max)).collect();
    let l0 = s.points.iter().map(|p| p.l0_max).fold(f64::NEG_INFINITY, f64::max);
    let lim = s.extrapolated_l1.unwrap_or(f64::NAN);
    let mut f = Vec::new();
    check(s.monotone, "monotone".into(), &mut f);
    check(lim >= 0.99, "extrapolated l=1 maximum".into(), &mut f);
    check(l0 <= 0.95, "l=0 maximum".into(), &mut f);
    Ok(verdict(
        f,
        format!("l=1 maxima at R=6,8,10: [{}], limit in R (R^-3, R^-4 fit) {lim:.4}, l=0 max {l0:.4}", l1.join(", ")),
    ))
}

fn fock_machinery() -> Outcome {
    let budget = FockBudget::default();
    let lo = LanczosOptions::default();
    let osc = ModeSet::single(0.5, [0.0; 3]);
    let b1 = FockBasis::new(1, 20, u128::MAX).map_err(|e| e.to_string())?;
    let e_osc = fiber_ground_energy(&osc, &b1, 1.0, [0.0; 3], &budget, &lo).map_err(|e| e.to_string())?.energy;
    let osc_err = (e_osc + 0.25).abs();

    let mut dense_err = 0.0_f64;
    let small = discretize_modes_free(0.7, 1.0, 1.0, 1000).map_err(|e| e.to_string())?;
    for m in [3, 5] {
        let basis = FockBasis::new(small.len(), m, u128::MAX).map_err(|e| e.to_string())?;
        for p in [0.0, 0.35] {
            let h = assemble_fiber_hamiltonian(&small, &basis, 0.7, [0.0, 0.0, p], &budget).map_err(|e| e.to_string())?;
            if h.dimension > 2000 {
                return Err(format!("dense oracle case has dimension {}", h.dimension));
            }
            let ed = ground_state(&h, &lo).map_err(|e| e.to_string())?.energy;
            dense_err = dense_err.max((ed - dense_ground_energy(&h).map_err(|e| e.to_string())?).abs());
        }
    }

    let modes = discretize_modes_free(0.1, 2.0, 1.0, budget.max_modes).map_err(|e| e.to_string())?;
    let basis = FockBasis::new(modes.len(), 3, budget.max_dimension).map_err(|e| e.to_string())?;
    let ed = fiber_ground_energy(&modes, &basis, 0.1, [0.0; 3], &budget, &lo).map_err(|e| e.to_string())?.energy;
    let pt = second_order_fiber(&modes, [0.0; 3]);
    let pt_rel = (ed - pt).abs() / pt.abs();
    let mut f = Vec::new();
    check(osc_err <= 1e-8, "displaced oscillator".into(), &mut f);
    check(dense_err <= 1e-10, "dense oracle".into(), &mut f);
    check(pt_rel <= 0.1, "second order".into(), &mut f);
    Ok(verdict(
        f,
        format!(
            "oscillator error {osc_err:.1e}, dense max diff {dense_err:.1e}, alpha=0.1 ED {ed:.8} vs PT2 {pt:.8} (rel {pt_rel:.1e}, {} modes, M=3)",
            modes.len()
        ),
    ))
}

/// `(alpha, E(0), mass)` for the dispersion runs, which also feed the
/// sandwich check.
fn dispersion_runs() -> Result<Vec<(f64, f64, f64)>, String> {
    let budget = FockBudget::default();
    let mut out = Vec::new();
    for alpha in [0.0, 0.5, 1.0, 2.0] {
        let modes = discretize_modes_free(alpha, 2.0, 1.0, budget.max_modes).map_err(|e| e.to_string())?;
        let c = dispersion(&modes, alpha, &[0.0, 0.1, 0.2, -0.1], 3, &budget, &LanczosOptions::default())
            .map_err(|e| e.to_string())?;
        let e0 = c.samples.iter().find(|s| s.p == 0.0).map(|s| s.energy).unwrap();
        for s in &c.samples {
            if s.energy > e0 + s.p * s.p + 1e-9 {
                return Err(format!("E({}) above E(0) + P^2 at alpha = {alpha}", s.p));
            }
        }
        out.push((alpha, e0, c.mass_estimate));
    }
    Ok(out)
}

fn dispersion_check(runs: &[(f64, f64, f64)]) -> Outcome {
    let mut f = Vec::new();
    check(runs[0].2 == 0.5, "m(0) = 1/2".into(), &mut f);
    check(runs.iter().all(|r| r.2 >= 0.5 - 1e-9), "m >= 1/2".into(), &mut f);
    check(runs.windows(2).all(|w| w[1].2 >= w[0].2), "m nondecreasing".into(), &mut f);
    let m: Vec<String> = runs.iter().map(|r| format!("m({}) = {:.6}", r.0, r.2)).collect();
    Ok(verdict(f, format!("{} (K_cut 2, eps 1, M 3)", m.join(", "))))
}

fn bounds_check(runs: &[(f64, f64, f64)]) -> Outcome {
    let ly1 = ly_lower_bound(1.0).map_err(|e| e.to_string())?;
    let mut f = Vec::new();
    check((ly1 + 2.040387).abs() <= 1e-6, format!("ly_lower(1) = {ly1:.10} vs pinned -2.040387"), &mut f);
    let q = |cut: f64, p: i32, w: &dyn Fn(f64) -> f64| {
        let ang = 2.0 * std::f64::consts::PI * gauss_legendre_8(|t| w(t) * t.sin(), 0.0, std::f64::consts::PI, 16);
        let rad = gauss_legendre_8(|t| (cut / t).powi(2 - 2 * p) * cut / (t * t), 0.0, 1.0, 16);
        ang * rad
    };
    let mut quad_err = 0.0_f64;
    for k in [0.5, 2.0, 8.0] {
        let c = chi_norm(k).map_err(|e| e.to_string())?;
        quad_err = quad_err.max((q(k, 2, &|t: f64| t.cos().powi(2)) - c).abs() / c);
        let e = cutoff_error_norms(k).map_err(|e| e.to_string())?;
        quad_err = quad_err.max((q(k, 2, &|_| 1.0).sqrt() - e.order1).abs() / e.order1);
        quad_err = quad_err.max((q(k, 4, &|_| 1.0).sqrt() - e.order3).abs() / e.order3);
    }
    check(quad_err <= 1e-10, "quadrature oracles".into(), &mut f);
    let e_pek = solve_pekar_free(&default_grid().map_err(|e| e.to_string())?, None, &FreeOptions::default())
        .map_err(|e| e.to_string())?
        .energy;
    let mut bad = Vec::new();
    for &(alpha, e0, _) in runs {
        if let Err(e) = sandwich(alpha, e_pek, Some(e0)) {
            bad.push(format!("alpha {alpha}: {e}"));
        }
    }
    // The alpha = 0.1 weak-coupling run.
    let budget = FockBudget::default();
    let modes = discretize_modes_free(0.1, 2.0, 1.0, budget.max_modes).map_err(|e| e.to_string())?;
    let basis = FockBasis::new(modes.len(), 3, budget.max_dimension).map_err(|e| e.to_string())?;
    let ed = fiber_ground_energy(&modes, &basis, 0.1, [0.0; 3], &budget, &LanczosOptions::default()).map_err(|e| e.to_string())?;
    if let Err(e) = sandwich(0.1, e_pek, Some(ed.energy)) {
        bad.push(format!("alpha 0.1: {e}"));
    }
    let n_runs = runs.len() + 1;
    check(bad.is_empty(), format!("sandwich ({})", bad.join("; ")), &mut f);
    Ok(verdict(
        f,
        format!("ly_lower(1) = {ly1:.10}, quadrature max rel {quad_err:.1e}, sandwich on {n_runs} ED runs"),
    ))
}

fn statement() -> Outcome {
    Ok((
        true,
        "the o(alpha^-2) remainder of the two-term asymptotics and the alpha^4 limit constant of the effective mass are NOT verified numerically at desk scale; this run verifies exact finite-alpha identities and convergence trends only".into(),
    ))
}

fn main() -> ExitCode {
    let runs = dispersion_runs();
    let mut results: Vec<(&str, Outcome)> = vec![
        ("free Pekar solve", free_pekar()),
        ("mass-constant identity", mass_identity()),
        ("ball Hessian", ball_hessian()),
        ("free-space zero modes", zero_modes()),
        ("Fock machinery", fock_machinery()),
    ];
    match &runs {
        Ok(r) => {
            results.push(("dispersion", dispersion_check(r)));
            results.push(("bounds", bounds_check(r)));
        }
        Err(e) => {
            results.push(("dispersion", Err(e.clone())));
            results.push(("bounds", Err(format!("needs the dispersion runs: {e}"))));
        }
    }
    results.push(("non-reproducibility statement", statement()));
    let mut all = true;
    for (i, (name, outcome)) in results.iter().enumerate() {
        let (ok, detail) = match outcome {
            Ok((ok, d)) => (*ok, d.clone()),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= ok;
        println!("acceptance {} [{}] {name}: {detail}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
