use std::f64::consts::PI;
use std::sync::Arc;

use polaron_core::bounds::{chi_norm, cutoff_error_norms, sandwich, two_term_prediction, BoundsReport};
use polaron_core::fock::{
    assemble_confined_hamiltonian, assemble_fiber_hamiltonian, discretize_modes_free, dispersion,
    ground_state, modes_from_interval, second_order_fiber, AlphaConvention, ConfinedModel,
    CutoffConvention, FockBasis, ModeSet,
};
use polaron_core::hessian::{
    free_zero_modes, hessian_ball, trace_convergence, HessianKind, HessianOptions, HessianReport,
    HessianSetup,
};
use polaron_core::linalg::sorted_eigen;
use polaron_core::pekar::{
    mass_constant, mass_identity_checks, solve_pekar_ball, solve_pekar_free, PekarSolution,
};
use polaron_core::radial::{BallBasis, RadialGrid};
use serde_json::{json, Value};

use crate::config::{ConfinedKind, RunConfig, Task};
use crate::error::CliError;
use crate::output::{exact, num, scalar, Table, TaskOutput};

/// Confined spectra are listed in full up to this dimension.
const DENSE_SPECTRUM_DIM: usize = 2000;
const SPECTRUM_ROWS: usize = 20;

pub fn run(task: Task, cfg: &RunConfig, seed: u64) -> Result<TaskOutput, CliError> {
    let mut out = TaskOutput::default();
    match task {
        Task::PekarFree => pekar_free(cfg, &mut out)?,
        Task::PekarBall => pekar_ball(cfg, &mut out)?,
        Task::HessianBall => hessian_ball_task(cfg, &mut out)?,
        Task::HessianFree => hessian_free(cfg, &mut out)?,
        Task::FockConfined => fock_confined(cfg, seed, &mut out)?,
        Task::Fiber => fiber(cfg, seed, &mut out)?,
        Task::Dispersion => dispersion_task(cfg, seed, &mut out)?,
        Task::Bounds => bounds(cfg, &mut out)?,
        Task::Report => report(cfg, seed, &mut out)?,
    }
    Ok(out)
}

fn grid(cfg: &RunConfig, n: usize) -> Result<Arc<RadialGrid>, CliError> {
    Ok(Arc::new(RadialGrid::new(n, cfg.grid.r_max, cfg.grid.kind)?))
}

/// The free minimizer on the configured grid, plus a solve on half the
/// points. With fourth-order convergence `|E_n - E_{n/2}| / 15` estimates the
/// discretization error of the finer solve.
struct FreeRun {
    sol: PekarSolution,
    energy_err: f64,
    kinetic_err: f64,
    coulomb_err: f64,
    mu_err: f64,
}

fn free_run(cfg: &RunConfig) -> Result<FreeRun, CliError> {
    let n = cfg.grid.n as usize;
    let opts = cfg.free_options();
    let sol = solve_pekar_free(&grid(cfg, n)?, None, &opts)?;
    let coarse = solve_pekar_free(&grid(cfg, (n / 2).max(2))?, None, &opts)?;
    let est = |a: f64, b: f64| (a - b).abs() / 15.0;
    Ok(FreeRun {
        energy_err: est(sol.energy, coarse.energy),
        kinetic_err: est(sol.kinetic, coarse.kinetic),
        coulomb_err: est(sol.coulomb, coarse.coulomb),
        mu_err: est(sol.mu, coarse.mu),
        sol,
    })
}

fn profile_table(sol: &PekarSolution) -> Table {
    let mut t = Table::new("profile", &["r", "psi", "phi"]);
    let g = &sol.psi.grid;
    for (i, r) in g.points.iter().enumerate() {
        t.push(vec![num(*r), num(sol.psi.values[i]), num(sol.phi.values[i])]);
    }
    t
}

fn solution_diagnostics(sol: &PekarSolution, out: &mut TaskOutput) {
    out.diag("domain", sol.domain);
    out.diag("iterations", sol.iterations);
    out.diag("el_residual", sol.el_residual);
    out.diag("virial_residual", sol.virial_residual());
    out.diag("phi_norm_sq", sol.phi_norm_sq);
    out.diag("energy_history_tail", &sol.energy_history[sol.energy_history.len().saturating_sub(5)..]);
    out.warnings.extend(sol.warnings.iter().cloned());
}

fn pekar_free(cfg: &RunConfig, out: &mut TaskOutput) -> Result<(), CliError> {
    let run = free_run(cfg)?;
    let sol = &run.sol;
    out.result("energy", scalar(sol.energy, run.energy_err, false, "grid-halving"));
    out.result("kinetic", scalar(sol.kinetic, run.kinetic_err, false, "grid-halving"));
    out.result("coulomb", scalar(sol.coulomb, run.coulomb_err, false, "grid-halving"));
    out.result("mu", scalar(sol.mu, run.mu_err, false, "grid-halving"));
    out.result(
        "virial_residual",
        scalar(sol.virial_residual(), run.kinetic_err + run.coulomb_err, false, "grid-halving"),
    );
    let m = mass_constant(sol)?;
    out.result("mass_c_psi4", scalar(m.c_psi4, m.relative_gap(), true, "identity-gap"));
    out.result("mass_c_gradphi", scalar(m.c_gradphi, m.relative_gap(), true, "identity-gap"));
    let checks = mass_identity_checks(sol)?;
    out.diag("mass_identities", checks);
    solution_diagnostics(sol, out);
    out.tables.push(profile_table(sol));
    Ok(())
}

fn pekar_ball(cfg: &RunConfig, out: &mut TaskOutput) -> Result<(), CliError> {
    let b = &cfg.ball;
    let basis = match b.e_max {
        Some(e) => BallBasis::new(b.radius, 0, e)?,
        None => BallBasis::with_sector_size(b.radius, 0, b.n_radial.max(b.n_electron) as usize)?,
    };
    let opts = cfg.ball_options();
    let sol = solve_pekar_ball(&basis, &opts)?;
    let tol = opts.tol;
    out.result("energy", scalar(sol.energy, tol, true, "solver-tolerance"));
    out.result("kinetic", scalar(sol.kinetic, tol, true, "solver-tolerance"));
    out.result("coulomb", scalar(sol.coulomb, tol, true, "solver-tolerance"));
    out.result("mu", scalar(sol.mu, tol, true, "solver-tolerance"));
    out.result("virial_residual", scalar(sol.virial_residual(), tol, true, "solver-tolerance"));
    if let Some(data) = &sol.ball {
        out.diag("n_electron", data.n_electron());
        out.diag("n_field", data.n_field());
        out.diag("field_coefficients", &data.field_coefficients);
    }
    solution_diagnostics(&sol, out);
    out.tables.push(profile_table(&sol));
    Ok(())
}

fn eigenvalue_table(rep: &HessianReport) -> Table {
    let mut t = Table::new("eigenvalues", &["l", "n", "eigenvalue"]);
    for (l, n, v) in rep.eigenvalue_rows() {
        t.push(vec![l.to_string(), n.to_string(), num(v)]);
    }
    t
}

fn hessian_summary(rep: &HessianReport, out: &mut TaskOutput) {
    out.diag("kind", rep.kind);
    out.diag("radius", rep.radius);
    out.diag("options", rep.options);
    out.diag(
        "sector_contributions",
        rep.sectors.iter().map(|s| json!({"l": s.l, "contribution": s.contribution})).collect::<Vec<_>>(),
    );
    out.result("pekar_energy", scalar(rep.pekar_energy, rep.options.pekar_tol, true, "solver-tolerance"));
    out.result("mu", scalar(rep.mu, rep.options.pekar_tol, true, "solver-tolerance"));
    out.result("max_eigenvalue", scalar(rep.max_eigenvalue, 1e-12, false, "dense-eigensolver"));
}

fn hessian_ball_task(cfg: &RunConfig, out: &mut TaskOutput) -> Result<(), CliError> {
    let opts = cfg.hessian_options();
    let setup = HessianSetup::new(cfg.ball.radius, opts)?;
    let rep = setup.report(HessianKind::Ball)?;
    hessian_summary(&rep, out);
    let doublings = cfg.ball.doublings as usize;
    let (uncertainty, source) = if doublings > 0 {
        let series = trace_convergence(cfg.ball.radius, opts, doublings)?;
        let mut t = Table::new("convergence", &["l_max", "n_radial", "n_electron", "trace", "extrapolated"]);
        for (k, p) in series.points.iter().enumerate() {
            let ex = k.checked_sub(2).and_then(|i| series.extrapolated.get(i)).map_or(String::new(), |v| num(*v));
            t.push(vec![p.l_max.to_string(), p.n_radial.to_string(), p.n_electron.to_string(), num(p.trace), ex]);
        }
        out.tables.push(t);
        if let Some(&last) = series.extrapolated.last() {
            let change = series.extrapolated_change().unwrap_or(f64::NAN);
            let u = if change.is_nan() {
                (last - series.points.last().expect("points").trace).abs()
            } else {
                change * last.abs()
            };
            out.result("trace_extrapolated", scalar(last, u, false, "doubling-change"));
        }
        let change = series.raw_change().expect("at least two points");
        (change * rep.trace_correction.abs(), "doubling-change")
    } else {
        match rep.tail_estimate {
            Some(t) => (t.abs(), "angular-tail-estimate"),
            None => (f64::NAN, "not-estimated"),
        }
    };
    out.result("trace_correction", scalar(rep.trace_correction, uncertainty, false, source));
    if let Some(t) = rep.tail_estimate {
        out.result("tail_estimate", scalar(t, t.abs(), false, "geometric-fit"));
    }
    if cfg.fock.alpha > 0.0 {
        let tt = two_term_prediction(rep.pekar_energy, rep.trace_correction, cfg.fock.alpha)?;
        let a2 = cfg.fock.alpha * cfg.fock.alpha;
        out.result("two_term_alpha", exact(cfg.fock.alpha));
        out.result(
            "two_term_strong_coupling",
            scalar(tt.strong_coupling_units, uncertainty / (2.0 * a2), false, source),
        );
        out.result("two_term_original", scalar(tt.original_units, 0.5 * uncertainty, false, source));
    }
    out.tables.push(eigenvalue_table(&rep));
    Ok(())
}

fn hessian_free(cfg: &RunConfig, out: &mut TaskOutput) -> Result<(), CliError> {
    let s = free_zero_modes(&cfg.ball.radii, &cfg.zero_mode_options())?;
    let last = s.points.last().ok_or_else(|| CliError::config("ball.radii", "must not be empty"))?;
    out.result("last_radius", exact(last.radius));
    out.result("l1_max", scalar(last.l1_max, 1e-12, false, "dense-eigensolver"));
    out.result("l0_max", scalar(last.l0_max, 1e-12, false, "dense-eigensolver"));
    out.result(
        "translation_residual",
        scalar(last.translation_residual, 1e-12, false, "dense-eigensolver"),
    );
    if let Some(x) = s.extrapolated_l1 {
        out.result("l1_max_extrapolated", scalar(x, (x - last.l1_max).abs(), false, "fit-vs-last-radius"));
    }
    out.diag("monotone", s.monotone);
    out.warnings.extend(s.warnings.iter().cloned());
    let mut t = Table::new(
        "zero_modes",
        &["radius", "n_radial", "n_electron", "pekar_energy", "l0_max", "l1_max", "translation_residual"],
    );
    for p in &s.points {
        t.push(vec![
            num(p.radius),
            p.n_radial.to_string(),
            p.n_electron.to_string(),
            num(p.pekar_energy),
            num(p.l0_max),
            num(p.l1_max),
            num(p.translation_residual),
        ]);
    }
    out.tables.push(t);
    Ok(())
}

/// A confined energy in both unit systems.
fn energy_pair(out: &mut TaskOutput, e_strong: f64, residual: f64, alpha: f64) {
    let a2 = alpha * alpha;
    out.result("energy_original_units", scalar(a2 * e_strong, a2 * residual, false, "lanczos-residual"));
    out.result("energy_strong_coupling_units", scalar(e_strong, residual, false, "lanczos-residual"));
}

/// Copy the energy in the configured units to `energy`.
fn primary_energy(cfg: &RunConfig, out: &mut TaskOutput) {
    let key = match cfg.fock.units {
        AlphaConvention::OriginalUnits => "energy_original_units",
        AlphaConvention::StrongCouplingUnits => "energy_strong_coupling_units",
    };
    let v = out.results[key].clone();
    out.result("energy", v);
}

fn spectrum_table(h: &polaron_core::fock::SparseHamiltonian, ground: f64) -> Table {
    let mut t = Table::new("spectrum", &["index", "eigenvalue"]);
    if h.dimension <= DENSE_SPECTRUM_DIM {
        let (vals, _) = sorted_eigen(h.to_dense());
        for (i, v) in vals.iter().take(SPECTRUM_ROWS).enumerate() {
            t.push(vec![i.to_string(), num(*v)]);
        }
    } else {
        t.push(vec!["0".into(), num(ground)]);
    }
    t
}

fn fock_confined(cfg: &RunConfig, seed: u64, out: &mut TaskOutput) -> Result<(), CliError> {
    let f = &cfg.fock;
    let n_el = f.n_electron as usize;
    let model = match f.model {
        ConfinedKind::Interval => {
            let modes = modes_from_interval(f.length, f.lambda, f.cutoff_convention)?;
            ConfinedModel::interval(&modes, n_el)?
        }
        ConfinedKind::Ball => {
            let r = cfg.ball.radius;
            let electron = ((n_el as f64 + 0.5) * PI / r).powi(2);
            let e_max = f.cutoff_convention.energy_cutoff(f.lambda).max(electron);
            let basis = BallBasis::new(r, 0, e_max)?;
            ConfinedModel::ball_s_wave(&basis, n_el, f.lambda, f.cutoff_convention, cfg.ball.coupling)?
        }
    };
    let budget = cfg.budget();
    let basis = FockBasis::new(model.n_modes(), f.max_phonons as usize, budget.max_dimension)?;
    let h = assemble_confined_hamiltonian(&model, &basis, f.alpha, &budget)?;
    let g = ground_state(&h, &cfg.lanczos_options(seed))?;
    energy_pair(out, g.energy, g.residual, f.alpha);
    primary_energy(cfg, out);
    out.diag("hamiltonian", h.meta);
    out.diag("dimension", h.dimension);
    out.diag("nonzeros", h.nonzeros());
    out.diag("matvecs", g.matvecs);
    out.diag("electron_energies", &model.electron_energies);
    out.diag("phonon_couplings", &model.phonon_couplings);
    if f.model == ConfinedKind::Ball {
        // Same truncation on the classical side: s-wave only, matching mode
        // counts.
        let opts = HessianOptions {
            l_max: 0,
            n_radial: model.n_modes(),
            n_electron: n_el,
            coupling: cfg.ball.coupling,
            ..cfg.hessian_options()
        };
        let rep = hessian_ball(cfg.ball.radius, opts)?;
        let tt = two_term_prediction(rep.pekar_energy, rep.trace_correction, f.alpha)?;
        out.result("pekar_energy", scalar(rep.pekar_energy, opts.pekar_tol, true, "solver-tolerance"));
        out.result("trace_correction", scalar(rep.trace_correction, 1e-12, false, "dense-eigensolver"));
        out.result("two_term_strong_coupling", scalar(tt.strong_coupling_units, 1e-12, false, "dense-eigensolver"));
        out.result(
            "scaled_gap",
            scalar(
                2.0 * f.alpha * f.alpha * (g.energy - rep.pekar_energy),
                2.0 * f.alpha * f.alpha * g.residual,
                false,
                "lanczos-residual",
            ),
        );
    }
    out.tables.push(spectrum_table(&h, g.energy));
    Ok(())
}

/// Free-space modes; an energy cutoff is converted to the momentum radius.
fn fiber_modes(cfg: &RunConfig) -> Result<ModeSet, CliError> {
    let f = &cfg.fock;
    let k = match f.cutoff_convention {
        CutoffConvention::Momentum => f.k_cut,
        CutoffConvention::Energy => f.k_cut.sqrt(),
    };
    Ok(discretize_modes_free(f.alpha, k, f.eps, f.budget.max_modes as usize)?)
}

fn mode_diagnostics(modes: &ModeSet, out: &mut TaskOutput) {
    out.diag("n_modes", modes.len());
    out.diag("mode_origin", modes.origin);
    out.diag("cells", modes.cells);
    out.diag("coupling_sum_sq", modes.coupling_sum_sq());
}

fn fiber(cfg: &RunConfig, seed: u64, out: &mut TaskOutput) -> Result<(), CliError> {
    let f = &cfg.fock;
    if f.units == AlphaConvention::StrongCouplingUnits && f.alpha == 0.0 {
        return Err(CliError::config("fock.units", "strong-coupling units need alpha > 0"));
    }
    let modes = fiber_modes(cfg)?;
    let budget = cfg.budget();
    let basis = FockBasis::new(modes.len(), f.max_phonons as usize, budget.max_dimension)?;
    let lanczos = cfg.lanczos_options(seed);
    let ps: Vec<f64> = if f.p_values.is_empty() { vec![0.0] } else { f.p_values.clone() };
    let mut t = Table::new("energies", &["P", "E", "residual", "second_order"]);
    let mut first = None;
    for &p in &ps {
        let h = assemble_fiber_hamiltonian(&modes, &basis, f.alpha, [0.0, 0.0, p], &budget)?;
        let g = ground_state(&h, &lanczos)?;
        let pt = second_order_fiber(&modes, [0.0, 0.0, p]);
        t.push(vec![num(p), num(g.energy), num(g.residual), num(pt)]);
        if first.is_none() {
            first = Some((p, g, pt, h.meta, h.dimension, h.nonzeros()));
        }
    }
    let (p, g, pt, meta, dim, nnz) = first.expect("at least one momentum");
    out.result("P", exact(p));
    out.result("energy_original_units", scalar(g.energy, g.residual, false, "lanczos-residual"));
    if f.alpha > 0.0 {
        let a2 = f.alpha * f.alpha;
        out.result(
            "energy_strong_coupling_units",
            scalar(g.energy / a2, g.residual / a2, false, "lanczos-residual"),
        );
    }
    primary_energy(cfg, out);
    out.result("second_order", exact(pt));
    out.diag("hamiltonian", meta);
    out.diag("dimension", dim);
    out.diag("nonzeros", nnz);
    out.diag("matvecs", g.matvecs);
    mode_diagnostics(&modes, out);
    out.tables.push(t);
    Ok(())
}

fn dispersion_task(cfg: &RunConfig, seed: u64, out: &mut TaskOutput) -> Result<(), CliError> {
    let f = &cfg.fock;
    let modes = fiber_modes(cfg)?;
    let c = dispersion(
        &modes,
        f.alpha,
        &f.p_values,
        f.max_phonons as usize,
        &cfg.budget(),
        &cfg.lanczos_options(seed),
    )?;
    out.result("mass_estimate", scalar(c.mass_estimate, c.fit_residual, false, "quartic-fit-residual"));
    let e0 = c.samples.iter().find(|s| s.p == 0.0).expect("P = 0 sampled");
    out.result("energy_at_rest", scalar(e0.energy, e0.residual, false, "lanczos-residual"));
    out.diag("max_phonons", c.max_phonons);
    mode_diagnostics(&modes, out);
    out.warnings.extend(c.warnings.iter().cloned());
    let mut t = Table::new("dispersion", &["P", "E", "residual"]);
    for s in &c.samples {
        t.push(vec![num(s.p), num(s.energy), num(s.residual)]);
    }
    out.tables.push(t);
    Ok(())
}

fn bounds_row(rep: &BoundsReport, t: &mut Table) {
    t.push(rep.csv_record().to_vec());
}

fn bounds(cfg: &RunConfig, out: &mut TaskOutput) -> Result<(), CliError> {
    let alpha = cfg.fock.alpha;
    let run = free_run(cfg)?;
    let rep = sandwich(alpha, run.sol.energy, None)?;
    out.result("alpha", exact(alpha));
    out.result("ly_lower", exact(rep.ly_lower));
    out.result("gaussian_upper", exact(rep.gaussian_upper));
    out.result(
        "pekar_upper",
        scalar(rep.pekar_upper, alpha * alpha * run.energy_err, false, "grid-halving"),
    );
    out.result("pekar_energy", scalar(run.sol.energy, run.energy_err, false, "grid-halving"));
    if let Some(li) = rep.ly_intermediate {
        out.diag("ly_intermediate", li);
    }
    let k = cfg.fock.k_cut;
    out.result("chi_norm_sq", exact(chi_norm(k)?));
    let ce = cutoff_error_norms(cfg.fock.cutoff_convention.energy_cutoff(k).sqrt())?;
    out.result("cutoff_error_order1", exact(ce.order1));
    out.result("cutoff_error_order3", exact(ce.order3));
    let mut t = Table::new("bounds", &BoundsReport::CSV_HEADER);
    bounds_row(&rep, &mut t);
    out.tables.push(t);
    Ok(())
}

fn report(cfg: &RunConfig, seed: u64, out: &mut TaskOutput) -> Result<(), CliError> {
    let f = &cfg.fock;
    let run = free_run(cfg)?;
    out.result("pekar_energy", scalar(run.sol.energy, run.energy_err, false, "grid-halving"));
    let hopts = cfg.hessian_options();
    let hrep = hessian_ball(cfg.ball.radius, hopts)?;
    let trace_u = hrep.tail_estimate.map_or(f64::NAN, f64::abs);
    out.result("ball_pekar_energy", scalar(hrep.pekar_energy, hopts.pekar_tol, true, "solver-tolerance"));
    out.result("trace_correction", scalar(hrep.trace_correction, trace_u, false, "angular-tail-estimate"));
    if f.alpha > 0.0 {
        // A confined-domain prediction; the free-space table below has no
        // two-term column because no free-space trace is computed.
        let tt = two_term_prediction(hrep.pekar_energy, hrep.trace_correction, f.alpha)?;
        out.result("ball_two_term_alpha", exact(f.alpha));
        out.result(
            "ball_two_term_original",
            scalar(tt.original_units, 0.5 * trace_u, false, "angular-tail-estimate"),
        );
    }
    out.diag("ball_radius", cfg.ball.radius);
    out.diag("hessian_options", hopts);

    let budget = cfg.budget();
    let lanczos = cfg.lanczos_options(seed);
    let mut table = Table::new("bounds", &BoundsReport::CSV_HEADER);
    let mut rows = Vec::new();
    for &alpha in &f.alpha_values {
        let k = match f.cutoff_convention {
            CutoffConvention::Momentum => f.k_cut,
            CutoffConvention::Energy => f.k_cut.sqrt(),
        };
        let modes = discretize_modes_free(alpha, k, f.eps, budget.max_modes)?;
        let basis = FockBasis::new(modes.len(), f.max_phonons as usize, budget.max_dimension)?;
        let h = assemble_fiber_hamiltonian(&modes, &basis, alpha, [0.0; 3], &budget)?;
        let g = ground_state(&h, &lanczos)?;
        let rep = sandwich(alpha, run.sol.energy, Some(g.energy))?;
        bounds_row(&rep, &mut table);
        rows.push(json!({
            "alpha": alpha,
            "ly_lower": exact(rep.ly_lower),
            "numeric": scalar(g.energy, g.residual, false, "lanczos-residual"),
            "pekar_upper": scalar(rep.pekar_upper, alpha * alpha * run.energy_err, false, "grid-halving"),
            "gaussian_upper": exact(rep.gaussian_upper),
            "dimension": h.dimension,
        }));
    }
    out.result("table", Value::Array(rows));
    out.diag("fiber_phonon_cap", f.max_phonons);
    out.tables.push(table);
    out.tables.push(eigenvalue_table(&hrep));
    Ok(())
}
