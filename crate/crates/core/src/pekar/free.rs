//! Free-space solver on a uniform radial grid.
//!
//! Unknowns are `u_i = sqrt(4 pi) r_i psi(r_i)` at the interior points, so
//! that `int psi^2 d^3x = h sum u_i^2`. The kinetic term uses the
//! fourth-order five-point stencil for `-u''` with odd reflections at both
//! ends. The Coulomb term is the trapezoid double sum of
//! `u_i^2 u_j^2 / max(r_i, r_j)` with the kink on the diagonal corrected,
//! which keeps the scheme fourth order and the functional an exact quadratic
//! form in `u^2`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::gaussian;
use super::{count_nodes, DomainTag, PekarSolution};
use crate::error::{Error, Result};
use crate::linalg::Pentadiagonal;
use crate::radial::ops::require_uniform;
use crate::radial::{inverse_square_convolution, ConvolvedField, RadialFunction, RadialGrid};

/// Points of the default uniform grid.
pub const DEFAULT_POINTS: usize = 3000;
/// Outer radius of the default grid. The minimizer has decayed to about
/// 1e-7 of its peak there.
pub const DEFAULT_R_MAX: f64 = 30.0;

pub fn default_grid() -> Result<Arc<RadialGrid>> {
    Ok(Arc::new(RadialGrid::uniform(DEFAULT_POINTS, DEFAULT_R_MAX)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FreeOptions {
    /// Bound on the Euler-Lagrange residual.
    pub tol: f64,
    /// Bound on the energy change of the final sweep.
    pub energy_tol: f64,
    pub max_iterations: usize,
    /// Weight of the new potential in the self-consistent polish.
    pub mixing: f64,
}

impl Default for FreeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            energy_tol: 1e-11,
            max_iterations: 2000,
            mixing: 0.5,
        }
    }
}

/// The discrete Pekar functional on a uniform grid.
#[derive(Debug, Clone)]
pub struct FreeDiscretization {
    h: f64,
    /// Interior radii `r_1 .. r_{n-1}`.
    r: Vec<f64>,
    kinetic: Pentadiagonal,
}

impl FreeDiscretization {
    pub fn new(grid: &RadialGrid) -> Result<Self> {
        let h = require_uniform(grid, "free Pekar solver")?;
        let r: Vec<f64> = grid.points[1..grid.len() - 1].to_vec();
        let m = r.len();
        let c = 1.0 / (12.0 * h * h);
        let mut d0 = vec![30.0 * c; m];
        d0[0] -= c;
        d0[m - 1] -= c;
        let kinetic = Pentadiagonal {
            d0,
            d1: vec![-16.0 * c; m - 1],
            d2: vec![c; m - 2],
        };
        Ok(Self { h, r, kinetic })
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        self.h * u.iter().map(|v| v * v).sum::<f64>()
    }

    /// `(-Delta_h u)_i`.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.kinetic.apply(u)
    }

    /// Potential `V_i` with `D = h sum u_i^2 V_i`, i.e. the radial Newton
    /// potential of `psi^2` sampled at `r_i`.
    pub fn potential(&self, u: &[f64]) -> Vec<f64> {
        let h = self.h;
        let m = self.len();
        let q: Vec<f64> = u.iter().map(|v| h * v * v).collect();
        let mut inner = vec![0.0; m];
        let mut acc = 0.0;
        for i in 0..m {
            acc += q[i];
            inner[i] = acc;
        }
        let mut outer = vec![0.0; m];
        let mut acc = 0.0;
        for i in (0..m).rev() {
            outer[i] = acc;
            acc += q[i] / self.r[i];
        }
        (0..m)
            .map(|i| {
                let r = self.r[i];
                inner[i] / r + outer[i] - h * q[i] / (12.0 * r * r)
            })
            .collect()
    }

    /// `(T, D)` for unnormalized `u`, each already divided by `|u|^2` or
    /// `|u|^4` so that the pair refers to the normalized state.
    pub fn energies(&self, u: &[f64]) -> (f64, f64) {
        let n2 = self.norm_sq(u);
        let t = self.h * dot(u, &self.laplacian(u)) / n2;
        let v = self.potential(u);
        let d = self.h * u.iter().zip(&v).map(|(a, b)| a * a * b).sum::<f64>() / (n2 * n2);
        (t, d)
    }

    /// `E(u) = T(u) - D(u)` without normalization.
    pub fn raw_energy(&self, u: &[f64]) -> f64 {
        let t = self.h * dot(u, &self.laplacian(u));
        let v = self.potential(u);
        let d = self.h * u.iter().zip(&v).map(|(a, b)| a * a * b).sum::<f64>();
        t - d
    }

    /// Gradient of [`raw_energy`](Self::raw_energy).
    pub fn raw_gradient(&self, u: &[f64]) -> Vec<f64> {
        let lap = self.laplacian(u);
        let v = self.potential(u);
        (0..self.len())
            .map(|i| 2.0 * self.h * lap[i] - 4.0 * self.h * u[i] * v[i])
            .collect()
    }

    /// Hamiltonian `-Delta_h - 2 V` as a banded matrix.
    pub fn hamiltonian(&self, v: &[f64]) -> Pentadiagonal {
        let mut h = self.kinetic.clone();
        for (d, vi) in h.d0.iter_mut().zip(v) {
            *d -= 2.0 * vi;
        }
        h
    }

    /// Euler-Lagrange residual `|-Delta u - 2 V u - mu u|` for normalized `u`.
    pub fn el_residual(&self, u: &[f64], v: &[f64], mu: f64) -> f64 {
        let lap = self.laplacian(u);
        let s: f64 = (0..self.len())
            .map(|i| {
                let e = lap[i] - 2.0 * v[i] * u[i] - mu * u[i];
                e * e
            })
            .sum();
        (self.h * s).sqrt()
    }

    fn normalize(&self, u: &mut [f64]) {
        let n = self.norm_sq(u).sqrt();
        let sign = if u.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        for x in u.iter_mut() {
            *x *= sign / n;
        }
    }

    /// Lowest eigenpair of `-Delta_h - 2V`: bisection on the inertia count,
    /// then inverse iteration just below the bracketed eigenvalue.
    pub fn ground_state(&self, v: &[f64], guess: &[f64]) -> Result<(f64, Vec<f64>)> {
        let ham = self.hamiltonian(v);
        let norm = self.norm_sq(guess);
        let mut hi = self.h * dot(guess, &ham.apply(guess)) / norm;
        // The kinetic matrix is positive semidefinite, so min(-2V) bounds
        // the spectrum from below.
        let mut lo = v.iter().fold(f64::INFINITY, |m, &x| m.min(-2.0 * x)) - 1e-9;
        hi += 1e-12 * hi.abs().max(1.0);
        for _ in 0..200 {
            if hi - lo <= 1e-13 * hi.abs().max(1.0) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            match ham.factor_shifted(mid) {
                Ok(f) if f.negative_count() >= 1 => hi = mid,
                Ok(_) => lo = mid,
                Err(_) => hi = mid,
            }
        }
        let sigma = lo - 1e-10 * lo.abs().max(1.0);
        let f = ham.factor_shifted(sigma)?;
        let mut x = guess.to_vec();
        self.normalize(&mut x);
        let mut lambda = hi;
        for _ in 0..50 {
            let mut y = f.solve(&x);
            self.normalize(&mut y);
            let hy = ham.apply(&y);
            let rq = self.h * dot(&y, &hy);
            let res: f64 = y.iter().zip(&hy).map(|(a, b)| (b - rq * a).powi(2)).sum();
            x = y;
            lambda = rq;
            if (self.h * res).sqrt() <= 1e-11 * rq.abs().max(1.0) {
                break;
            }
        }
        Ok((lambda, x))
    }

    /// Full-grid samples of `psi` from interior `u`, with `psi(0)` from
    /// even extrapolation and `psi(r_max) = 0`.
    pub fn psi_samples(&self, u: &[f64]) -> Vec<f64> {
        let c = 1.0 / (4.0 * PI).sqrt();
        let mut out = Vec::with_capacity(self.len() + 2);
        out.push(0.0);
        out.extend(u.iter().zip(&self.r).map(|(u, r)| c * u / r));
        out.push(0.0);
        out[0] = (4.0 * out[1] - out[2]) / 3.0;
        out
    }

    /// Interior `u` from a profile sampled on the full grid.
    pub fn u_from_psi(&self, psi: &[f64]) -> Vec<f64> {
        let c = (4.0 * PI).sqrt();
        self.r
            .iter()
            .enumerate()
            .map(|(i, r)| c * r * psi[i + 1])
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Free-space minimizer. `init` defaults to the optimal Gaussian.
pub fn solve_pekar_free(
    grid: &Arc<RadialGrid>,
    init: Option<&RadialFunction>,
    opts: &FreeOptions,
) -> Result<PekarSolution> {
    if !(opts.tol > 0.0 && opts.energy_tol > 0.0) {
        return Err(Error::parameter("tol", "tolerances must be positive"));
    }
    if !(opts.mixing > 0.0 && opts.mixing <= 1.0) {
        return Err(Error::parameter("mixing", "must lie in (0, 1]"));
    }
    let disc = FreeDiscretization::new(grid)?;
    let mut warnings = Vec::new();
    let mut u = match init {
        Some(f) => {
            if !Arc::ptr_eq(&f.grid, grid) && f.grid.as_ref() != grid.as_ref() {
                return Err(Error::parameter("init", "initial state lives on another grid"));
            }
            if count_nodes(&f.values) > 0 {
                warnings.push("initial state has a node".to_string());
            }
            disc.u_from_psi(&f.values)
        }
        None => {
            let samples = grid.sample(|r| gaussian::psi(gaussian::OPTIMAL_EXPONENT, r));
            disc.u_from_psi(&samples)
        }
    };
    disc.normalize(&mut u);

    let mut history = Vec::new();
    let (t, d) = disc.energies(&u);
    let mut energy = t - d;
    history.push(energy);
    let mut iterations = 0;

    // Implicit imaginary-time steps with an adaptive step size; rejected
    // if the energy rises.
    let mut tau = 1.0;
    let mut v = disc.potential(&u);
    let mut residual = disc.el_residual(&u, &v, t - 2.0 * d);
    while residual > 1e-5 && iterations < opts.max_iterations {
        iterations += 1;
        let (t, d) = disc.energies(&u);
        let mu = t - 2.0 * d;
        let ham = disc.hamiltonian(&v);
        let mut accepted = None;
        for _ in 0..60 {
            let sigma = mu - 1.0 / tau;
            match ham.factor_shifted(sigma) {
                Ok(f) if f.negative_count() == 0 => {
                    let mut cand = f.solve(&u);
                    disc.normalize(&mut cand);
                    let (tc, dc) = disc.energies(&cand);
                    if tc - dc <= energy + 1e-14 * energy.abs() {
                        accepted = Some((cand, tc - dc));
                        break;
                    }
                }
                _ => {}
            }
            tau *= 0.5;
        }
        let Some((cand, e_new)) = accepted else {
            return Err(Error::Convergence {
                iterations,
                residual,
                history,
            });
        };
        u = cand;
        energy = e_new;
        history.push(energy);
        tau = (tau * 2.0).min(1e8);
        v = disc.potential(&u);
        let (t, d) = disc.energies(&u);
        residual = disc.el_residual(&u, &v, t - 2.0 * d);
    }

    // Self-consistent polish with damped potential mixing.
    let mut v_in = v.clone();
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let (_, u_new) = disc.ground_state(&v_in, &u)?;
        u = u_new;
        let v_out = disc.potential(&u);
        let (t, d) = disc.energies(&u);
        let e_new = t - d;
        residual = disc.el_residual(&u, &v_out, t - 2.0 * d);
        let change = (e_new - energy).abs();
        energy = e_new;
        history.push(energy);
        if !residual.is_finite() {
            break;
        }
        if residual <= opts.tol && change <= opts.energy_tol {
            converged = true;
            break;
        }
        for (a, b) in v_in.iter_mut().zip(&v_out) {
            *a = (1.0 - opts.mixing) * *a + opts.mixing * b;
        }
    }
    if !converged {
        return Err(Error::Convergence {
            iterations,
            residual,
            history,
        });
    }

    let (kinetic, coulomb) = disc.energies(&u);
    let psi = RadialFunction::new(Arc::clone(grid), disc.psi_samples(&u), 0)?;
    if count_nodes(&psi.values) > 0 {
        warnings.push("converged state has a node".to_string());
    }
    let field = pekar_field_free(&psi)?;
    Ok(PekarSolution {
        domain: DomainTag::Free,
        phi_norm_sq: field.norm_sq(),
        phi: field.field,
        psi,
        kinetic,
        coulomb,
        energy: kinetic - coulomb,
        mu: kinetic - 2.0 * coulomb,
        el_residual: residual,
        iterations,
        energy_history: history,
        warnings,
        ball: None,
    })
}

/// `phi = pi^{-3/2} psi^2 * |x|^{-2}`, the field minimizing the classical
/// energy for given `psi`.
pub fn pekar_field_free(psi: &RadialFunction) -> Result<ConvolvedField> {
    inverse_square_convolution(&psi.map(|v| v * v))
}
