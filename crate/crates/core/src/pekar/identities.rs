//! Identities satisfied by the free minimizer, each evaluated by a route
//! independent of the solver's own discretization.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::free::{pekar_field_free, FreeDiscretization};
use super::{DomainTag, PekarSolution};
use crate::error::{Error, Result};
use crate::radial::{
    apply_radial_laplacian, fourier_radial, newton_potential, Boundary, RadialFunction,
    RadialTransform,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassConstants {
    /// `(8 pi / 3) int psi^4`.
    pub c_psi4: f64,
    /// `(2/3) int |grad phi|^2`.
    pub c_gradphi: f64,
}

impl MassConstants {
    pub fn relative_gap(&self) -> f64 {
        (self.c_psi4 - self.c_gradphi).abs() / self.c_psi4
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassIdentityChecks {
    /// `|int F p F'(p) d^3p + 3/2|` with `F` the transform of `psi`.
    pub moment_residual: f64,
    /// `|(-Delta - 2 V - mu) psi| / |mu|` with `V` from the shell theorem and
    /// a grid Laplacian.
    pub el_fourier_residual: f64,
    /// The transform of `psi` had not decayed at the edge of the grid.
    pub fourier_warning: bool,
}

fn require_free(sol: &PekarSolution) -> Result<()> {
    match sol.domain {
        DomainTag::Free => Ok(()),
        DomainTag::Ball { .. } => Err(Error::Domain(
            "identity checks are defined for the free-space solution".into(),
        )),
    }
}

pub fn mass_constant(sol: &PekarSolution) -> Result<MassConstants> {
    require_free(sol)?;
    let psi4: Vec<f64> = sol.psi.values.iter().map(|v| v.powi(4)).collect();
    let c_psi4 = 8.0 * PI / 3.0 * sol.psi.grid.integrate_ball(&psi4);
    let field = pekar_field_free(&sol.psi)?;
    let c_gradphi = 2.0 / 3.0 * field.gradient_sq();
    Ok(MassConstants { c_psi4, c_gradphi })
}

fn trapezoid_k(t: &RadialTransform, f: impl Fn(f64, f64) -> f64, other: &[f64]) -> f64 {
    let dk = t.k[1] - t.k[0];
    let n = t.k.len() - 1;
    (0..=n)
        .map(|j| {
            let w = if j == n { 0.5 * dk } else { dk };
            w * f(t.k[j], t.values[j]) * other[j]
        })
        .sum()
}

pub fn mass_identity_checks(sol: &PekarSolution) -> Result<MassIdentityChecks> {
    require_free(sol)?;
    let transform = fourier_radial(&sol.psi)?;
    // d/dp j_0(p r) = -r j_1(p r), so F' is minus the l = 1 transform of r psi.
    let rpsi: Vec<f64> = sol
        .psi
        .grid
        .points
        .iter()
        .zip(&sol.psi.values)
        .map(|(r, v)| r * v)
        .collect();
    let lifted = RadialFunction::new(sol.psi.grid.clone(), rpsi, 1)?;
    let derivative = fourier_radial(&lifted)?;
    let minus_dfdp: Vec<f64> = derivative.values.clone();
    let moment = -4.0 * PI * trapezoid_k(&transform, |k, f| k * k * k * f, &minus_dfdp);
    let el = position_el_residual(&sol.psi, sol.mu)?;
    Ok(MassIdentityChecks {
        moment_residual: (moment + 1.5).abs(),
        el_fourier_residual: el,
        fourier_warning: transform.insufficient_decay,
    })
}

/// Relative residual of `-Delta psi - 2 V psi = mu psi`, with `V` the Newton
/// potential of `psi^2`.
pub fn position_el_residual(psi: &RadialFunction, mu: f64) -> Result<f64> {
    let lap = apply_radial_laplacian(psi, Boundary::Free)?;
    let v = newton_potential(&psi.map(|x| x * x))?;
    let res: Vec<f64> = (0..psi.values.len())
        .map(|i| {
            let e = lap.values[i] - 2.0 * v.values[i] * psi.values[i] - mu * psi.values[i];
            e * e
        })
        .collect();
    Ok(psi.grid.integrate_ball(&res).sqrt() / mu.abs())
}

/// `(T, D, T - D)` of a normalized trial profile on a uniform grid.
pub fn pekar_energy_of(psi: &RadialFunction) -> Result<(f64, f64, f64)> {
    let disc = FreeDiscretization::new(&psi.grid)?;
    let u = disc.u_from_psi(&psi.values);
    let (t, d) = disc.energies(&u);
    Ok((t, d, t - d))
}
