//! The Pekar problem: minimize `int |grad psi|^2 - D(psi^2)` over normalized
//! `psi`, in free space and on a ball.

mod ball;
mod free;
pub mod gaussian;
mod identities;

use serde::{Deserialize, Serialize};

use crate::radial::RadialFunction;

pub use ball::{pekar_field_ball, solve_pekar_ball, BallOptions, BallPekarData, FieldCoupling};
pub use free::{
    default_grid, pekar_field_free, solve_pekar_free, FreeDiscretization, FreeOptions,
    DEFAULT_POINTS, DEFAULT_R_MAX,
};
pub use identities::{
    mass_constant, mass_identity_checks, pekar_energy_of, position_el_residual, MassConstants,
    MassIdentityChecks,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainTag {
    Free,
    Ball { radius: f64 },
}

/// Converged Pekar data.
#[derive(Debug, Clone)]
pub struct PekarSolution {
    pub domain: DomainTag,
    /// Scalar profile with `int psi^2 d^3x = 1`.
    pub psi: RadialFunction,
    /// Optimal classical field on the same grid.
    pub phi: RadialFunction,
    /// `int phi^2 d^3x`, including the analytic far-field tail in free space.
    pub phi_norm_sq: f64,
    pub kinetic: f64,
    pub coulomb: f64,
    /// `kinetic - coulomb`.
    pub energy: f64,
    /// Lagrange multiplier, `kinetic - 2 coulomb`.
    pub mu: f64,
    pub el_residual: f64,
    pub iterations: usize,
    pub energy_history: Vec<f64>,
    pub warnings: Vec<String>,
    /// Expansion data for ball solutions.
    pub ball: Option<BallPekarData>,
}

impl PekarSolution {
    /// `|D - 2T| / D`.
    pub fn virial_residual(&self) -> f64 {
        (self.coulomb - 2.0 * self.kinetic).abs() / self.coulomb
    }
}

/// Sign changes of a sampled profile, ignoring samples below `1e-10` of the
/// peak.
pub(crate) fn count_nodes(values: &[f64]) -> usize {
    let peak = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut last = 0.0;
    let mut nodes = 0;
    for &v in values {
        if v.abs() <= 1e-10 * peak {
            continue;
        }
        if last != 0.0 && v.signum() != last {
            nodes += 1;
        }
        last = v.signum();
    }
    nodes
}
