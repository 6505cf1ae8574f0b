//! Exact diagonalization of truncated Fröhlich Hamiltonians.
//!
//! The fiber model works in original units. Confined models work in
//! strong-coupling units after the rescaling `b = alpha a`, so that
//! `E_0(H_alpha) = alpha^2 E_0(h_alpha)` for the ground energies.

pub mod basis;
pub mod hamiltonian;
pub mod lanczos;
pub mod modes;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pekar::{pekar_energy_of, PekarSolution};
use crate::radial::RadialFunction;

pub use basis::{fock_dimension, FockBasis};
pub use hamiltonian::{
    assemble_confined_hamiltonian, assemble_fiber_hamiltonian, ConfinedModel, FockBudget,
    HamiltonianMeta, ModelTag, SparseHamiltonian,
};
pub use lanczos::{dense_ground_energy, ground_state, GroundState, LanczosOptions};
pub use modes::{
    discretize_modes_free, modes_from_ball, modes_from_interval, AlphaConvention, CutoffConvention,
    Mode, ModeOrigin, ModeSet,
};

/// Second-order Rayleigh-Schrödinger shift of the fiber vacuum at momentum
/// `p`: `sum_j g_j^2 / (p^2 - (p - k_j)^2 - 1)`.
pub fn second_order_fiber(modes: &ModeSet, p: [f64; 3]) -> f64 {
    let p2: f64 = p.iter().map(|x| x * x).sum();
    modes
        .modes
        .iter()
        .map(|m| {
            let q2: f64 = (0..3).map(|d| (p[d] - m.momentum[d]).powi(2)).sum();
            m.coupling * m.coupling / (p2 - q2 - 1.0)
        })
        .sum()
}

/// Ground energy of the fiber Hamiltonian.
pub fn fiber_ground_energy(
    modes: &ModeSet,
    basis: &FockBasis,
    alpha: f64,
    p: [f64; 3],
    budget: &FockBudget,
    lanczos: &LanczosOptions,
) -> Result<GroundState> {
    let h = assemble_fiber_hamiltonian(modes, basis, alpha, p, budget)?;
    ground_state(&h, lanczos)
}

/// `alpha^2 e^Pek`, the energy of the optimal product state in original
/// units.
pub fn coherent_upper_bound(sol: &PekarSolution, alpha: f64) -> f64 {
    alpha * alpha * sol.energy
}

/// `alpha^2 E^Pek(psi)` for a normalized trial profile.
pub fn coherent_upper_bound_trial(psi: &RadialFunction, alpha: f64) -> Result<f64> {
    let (_, _, e) = pekar_energy_of(psi)?;
    Ok(alpha * alpha * e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersionSample {
    pub p: f64,
    pub energy: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionCurve {
    pub alpha: f64,
    pub max_phonons: usize,
    pub n_modes: usize,
    pub samples: Vec<DispersionSample>,
    /// From the two smallest nonzero momenta, with the `P^4` term removed.
    pub mass_estimate: f64,
    /// `|m(P_1) - mass_estimate|`, the size of the quartic correction.
    pub fit_residual: f64,
    pub warnings: Vec<String>,
}

/// `E(P)` for total momentum `(0, 0, P)` and the effective mass from
/// `E(P) - E(0) = P^2 / (2m) + c P^4`.
pub fn dispersion(
    modes: &ModeSet,
    alpha: f64,
    p_values: &[f64],
    max_phonons: usize,
    budget: &FockBudget,
    lanczos: &LanczosOptions,
) -> Result<DispersionCurve> {
    let mut nonzero: Vec<f64> = p_values.iter().filter(|p| **p != 0.0).map(|p| p.abs()).collect();
    nonzero.sort_by(f64::total_cmp);
    nonzero.dedup();
    if !p_values.contains(&0.0) || nonzero.len() < 2 {
        return Err(Error::parameter(
            "P_values",
            "need P = 0 and at least two distinct nonzero momenta",
        ));
    }
    budget.validate()?;
    if modes.len() > budget.max_modes {
        return Err(Error::Budget {
            what: "phonon modes".into(),
            needed: modes.len() as u128,
            cap: budget.max_modes as u128,
        });
    }
    let basis = FockBasis::new(modes.len(), max_phonons, budget.max_dimension)?;
    let mut samples = Vec::with_capacity(p_values.len());
    for &p in p_values {
        let g = fiber_ground_energy(modes, &basis, alpha, [0.0, 0.0, p], budget, lanczos)?;
        samples.push(DispersionSample {
            p,
            energy: g.energy,
            residual: g.residual,
        });
    }
    let e_at = |p: f64| {
        samples
            .iter()
            .find(|s| s.p.abs() == p)
            .map(|s| s.energy)
            .expect("sampled momentum")
    };
    let e0 = e_at(0.0);
    let slack = 1e-9;
    let mut warnings = Vec::new();
    for s in &samples {
        if s.energy < e0 - slack {
            return Err(Error::Consistency(format!(
                "E({}) = {} lies below E(0) = {e0}",
                s.p, s.energy
            )));
        }
        if s.energy > e0 + s.p * s.p + slack {
            return Err(Error::Consistency(format!(
                "E({}) = {} exceeds E(0) + P^2 = {}",
                s.p,
                s.energy,
                e0 + s.p * s.p
            )));
        }
        if s.p.abs() > 1.0 {
            warnings.push(format!("sample at |P| = {} is outside the small-momentum range", s.p.abs()));
        }
    }
    let mut sorted = samples.clone();
    sorted.sort_by(|a, b| a.p.abs().total_cmp(&b.p.abs()));
    if sorted
        .windows(2)
        .any(|w| w[1].p.abs() <= 1.0 && w[1].energy < w[0].energy - slack)
    {
        warnings.push("E(P) is not nondecreasing in |P| on [0, 1]".to_string());
    }
    let (p1, p2) = (nonzero[0], nonzero[1]);
    let y1 = (e_at(p1) - e0) / (p1 * p1);
    let y2 = (e_at(p2) - e0) / (p2 * p2);
    let inv_2m = (y1 * p2 * p2 - y2 * p1 * p1) / (p2 * p2 - p1 * p1);
    let mass_estimate = 0.5 / inv_2m;
    let fit_residual = (0.5 / y1 - mass_estimate).abs();
    Ok(DispersionCurve {
        alpha,
        max_phonons,
        n_modes: modes.len(),
        samples,
        mass_estimate,
        fit_residual,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_electron_mass() {
        let modes = discretize_modes_free(0.0, 2.0, 1.0, 1000).unwrap();
        let c = dispersion(&modes, 0.0, &[0.0, 0.1, 0.2], 2, &FockBudget::default(), &LanczosOptions::default()).unwrap();
        assert_eq!(c.mass_estimate, 0.5);
    }
}
