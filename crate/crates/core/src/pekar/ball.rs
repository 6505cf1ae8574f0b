//! Pekar problem on a ball with Dirichlet conditions, in the radial
//! eigenbasis of the Laplacian.
//!
//! `psi = sum_a c_a u_{0,a}(r) Y_00` and the field is expanded in the same
//! `l = 0` modes. With `d_j = <u_{0,j} Y_00, psi^2>` the Coulomb term is
//! `D = g^2 sum_j d_j^2 / e_j`, where `g^2` is fixed by [`FieldCoupling`].

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{count_nodes, DomainTag, PekarSolution};
use crate::error::{Error, Result};
use crate::linalg::sorted_eigen;
use crate::radial::{BallBasis, RadialFunction, RadialGrid};

/// Normalization of the confined Coulomb kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FieldCoupling {
    /// Kernel `(-Delta_Omega)^{-1}`.
    #[default]
    Literal,
    /// Kernel `4 pi (-Delta_Omega)^{-1}`, which tends to `1/|x - y|` as the
    /// ball grows.
    FreeSpaceMatched,
}

impl FieldCoupling {
    /// `g^2`.
    pub fn strength(self) -> f64 {
        match self {
            FieldCoupling::Literal => 1.0,
            FieldCoupling::FreeSpaceMatched => 4.0 * PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BallOptions {
    pub coupling: FieldCoupling,
    /// Number of `l = 0` electron modes; all in the basis when absent.
    pub n_electron: Option<usize>,
    /// Number of `l = 0` field modes; all in the basis when absent.
    pub n_field: Option<usize>,
    pub tol: f64,
    pub energy_tol: f64,
    pub max_iterations: usize,
    pub mixing: f64,
}

impl Default for BallOptions {
    fn default() -> Self {
        Self {
            coupling: FieldCoupling::Literal,
            n_electron: None,
            n_field: None,
            tol: 1e-11,
            energy_tol: 1e-13,
            max_iterations: 1000,
            mixing: 0.5,
        }
    }
}

/// Precomputed data of the truncated ball problem.
#[derive(Debug, Clone)]
pub struct BallPekarData {
    pub basis: Arc<BallBasis>,
    pub coupling: FieldCoupling,
    /// `e_{0,a}` of the electron modes.
    pub electron_energies: Vec<f64>,
    /// `e_{0,j}` of the field modes.
    pub field_energies: Vec<f64>,
    /// `T[j][(a, b)] = int u_j u_a u_b Y_00^3 r^2 dr dOmega`.
    pub triple: Vec<DMatrix<f64>>,
    pub psi_coefficients: Vec<f64>,
    /// `d_j = <u_{0,j} Y_00, psi^2>`.
    pub density_coefficients: Vec<f64>,
    /// `g e_j^{-1/2} d_j`, the field in the orthonormal mode basis.
    pub field_coefficients: Vec<f64>,
}

impl BallPekarData {
    pub fn new(basis: &BallBasis, n_el: usize, n_field: usize, coupling: FieldCoupling) -> Result<Self> {
        let s0 = basis
            .sector(0)
            .ok_or_else(|| Error::EmptyBasis("ball basis has no l = 0 modes".into()))?;
        if n_el == 0 || n_field == 0 || n_el > s0.len() || n_field > s0.len() {
            return Err(Error::parameter(
                "n_electron",
                format!(
                    "need 1 <= n_electron, n_field <= {} (got {n_el}, {n_field})",
                    s0.len()
                ),
            ));
        }
        let electron_energies = s0.energies[..n_el].to_vec();
        let field_energies = s0.energies[..n_field].to_vec();
        let k_total =
            (2.0 * electron_energies[n_el - 1].sqrt() + field_energies[n_field - 1].sqrt()) * 1.05;
        let grid = basis.overlap_grid(k_total);
        let vals = basis.sector_values(0, &grid);
        let y00 = 1.0 / (4.0 * PI).sqrt();
        let w: Vec<f64> = grid
            .points
            .iter()
            .zip(&grid.weights)
            .map(|(r, w)| w * r * r * y00)
            .collect();
        let nq = grid.len();
        let el = vals.columns(0, n_el).into_owned();
        let triple = crate::par::map_range(n_field, |j| {
            let mut scaled = el.clone();
            for q in 0..nq {
                let s = w[q] * vals[(q, j)];
                for a in 0..n_el {
                    scaled[(q, a)] *= s;
                }
            }
            let mut t = el.transpose() * scaled;
            crate::linalg::symmetrize(&mut t);
            t
        });
        Ok(Self {
            basis: Arc::new(basis.clone()),
            coupling,
            electron_energies,
            field_energies,
            triple,
            psi_coefficients: Vec::new(),
            density_coefficients: Vec::new(),
            field_coefficients: Vec::new(),
        })
    }

    pub fn n_electron(&self) -> usize {
        self.electron_energies.len()
    }

    pub fn n_field(&self) -> usize {
        self.field_energies.len()
    }

    pub fn density(&self, c: &DVector<f64>) -> Vec<f64> {
        self.triple.iter().map(|t| c.dot(&(t * c))).collect()
    }

    /// `(T, D)` for normalized coefficients.
    pub fn energies(&self, c: &DVector<f64>) -> (f64, f64) {
        let t = c
            .iter()
            .zip(&self.electron_energies)
            .map(|(c, e)| c * c * e)
            .sum();
        let g2 = self.coupling.strength();
        let d = self
            .density(c)
            .iter()
            .zip(&self.field_energies)
            .map(|(d, e)| d * d / e)
            .sum::<f64>()
            * g2;
        (t, d)
    }

    /// Electron Hamiltonian `diag(e) - 2 g^2 sum_j w_j T_j` for field weights
    /// `w_j = d_j / e_j`.
    pub fn hamiltonian(&self, w: &[f64]) -> DMatrix<f64> {
        let n = self.n_electron();
        let g2 = self.coupling.strength();
        let mut h = DMatrix::from_diagonal(&DVector::from_column_slice(&self.electron_energies));
        for (t, wj) in self.triple.iter().zip(w) {
            h -= t * (2.0 * g2 * wj);
        }
        debug_assert_eq!(h.nrows(), n);
        h
    }

    pub fn field_weights(&self, d: &[f64]) -> Vec<f64> {
        d.iter().zip(&self.field_energies).map(|(d, e)| d / e).collect()
    }

    /// Radial profile of `psi` (including `Y_00`) at `r`.
    pub fn psi_at(&self, r: f64) -> f64 {
        let y00 = 1.0 / (4.0 * PI).sqrt();
        self.psi_coefficients
            .iter()
            .enumerate()
            .map(|(a, c)| c * self.basis.radial(0, a, r))
            .sum::<f64>()
            * y00
    }

    /// Radial profile of the field at `r`.
    pub fn phi_at(&self, r: f64) -> f64 {
        let y00 = 1.0 / (4.0 * PI).sqrt();
        self.field_coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| c * self.basis.radial(0, j, r))
            .sum::<f64>()
            * y00
    }

    /// `V(r) = -2 g^2 ((-Delta_Omega)^{-1} psi^2)(r)` in the truncated field
    /// basis; the potential felt by the electron.
    pub fn potential_at(&self, r: f64) -> f64 {
        let y00 = 1.0 / (4.0 * PI).sqrt();
        let g2 = self.coupling.strength();
        let w = self.field_weights(&self.density_coefficients);
        -2.0 * g2
            * y00
            * w.iter()
                .enumerate()
                .map(|(j, wj)| wj * self.basis.radial(0, j, r))
                .sum::<f64>()
    }
}

fn lowest(h: DMatrix<f64>) -> (f64, DVector<f64>) {
    let (vals, vecs) = sorted_eigen(h);
    let mut c = vecs.column(0).into_owned();
    if c.sum() < 0.0 {
        c = -c;
    }
    (vals[0], c)
}

/// Field coefficients `g e_j^{-1/2} <u_j Y_00, psi^2>` for electron
/// coefficients `c`.
pub fn pekar_field_ball(data: &BallPekarData, c: &[f64]) -> Vec<f64> {
    let c = DVector::from_column_slice(c);
    let g = data.coupling.strength().sqrt();
    data.density(&c)
        .iter()
        .zip(&data.field_energies)
        .map(|(d, e)| g * d / e.sqrt())
        .collect()
}

/// Minimizer over the `l = 0` electron modes of the basis.
pub fn solve_pekar_ball(basis: &BallBasis, opts: &BallOptions) -> Result<PekarSolution> {
    if !(opts.mixing > 0.0 && opts.mixing <= 1.0) {
        return Err(Error::parameter("mixing", "must lie in (0, 1]"));
    }
    let n0 = basis.sector(0).map(|s| s.len()).unwrap_or(0);
    if n0 == 0 {
        return Err(Error::EmptyBasis("ball basis has no l = 0 modes".into()));
    }
    let n_el = opts.n_electron.unwrap_or(n0);
    let n_field = opts.n_field.unwrap_or(n0);
    let mut data = BallPekarData::new(basis, n_el, n_field, opts.coupling)?;

    let mut c = DVector::zeros(n_el);
    c[0] = 1.0;
    let (t, d) = data.energies(&c);
    let mut energy = t - d;
    let mut history = vec![energy];
    let mut w_in = data.field_weights(&data.density(&c));
    let mut iterations = 0;
    let mut residual = f64::INFINITY;
    // Residuals are measured against the largest kinetic energy in the basis.
    let scale = data.electron_energies[n_el - 1];
    let mut converged = false;
    while iterations < opts.max_iterations {
        iterations += 1;
        let (_, c_new) = lowest(data.hamiltonian(&w_in));
        c = c_new;
        let w_out = data.field_weights(&data.density(&c));
        let h = data.hamiltonian(&w_out);
        let hc = &h * &c;
        let mu = c.dot(&hc);
        residual = (hc - &c * mu).norm();
        let (t, d) = data.energies(&c);
        let change = (t - d - energy).abs();
        energy = t - d;
        history.push(energy);
        if residual <= opts.tol * scale && change <= opts.energy_tol * energy.abs().max(1.0) {
            converged = true;
            break;
        }
        for (a, b) in w_in.iter_mut().zip(&w_out) {
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

    let (kinetic, coulomb) = data.energies(&c);
    data.psi_coefficients = c.iter().copied().collect();
    data.density_coefficients = data.density(&c);
    data.field_coefficients = pekar_field_ball(&data, &data.psi_coefficients);
    let phi_norm_sq = data.field_coefficients.iter().map(|v| v * v).sum();

    let grid = Arc::new(RadialGrid::uniform(512, basis.radius)?);
    let psi = RadialFunction::from_fn(Arc::clone(&grid), |r| data.psi_at(r));
    let phi = RadialFunction::from_fn(grid, |r| data.phi_at(r));
    let mut warnings = Vec::new();
    if count_nodes(&psi.values) > 0 {
        warnings.push("converged state has a node".to_string());
    }
    Ok(PekarSolution {
        domain: DomainTag::Ball {
            radius: basis.radius,
        },
        psi,
        phi,
        phi_norm_sq,
        kinetic,
        coulomb,
        energy: kinetic - coulomb,
        mu: kinetic - 2.0 * coulomb,
        el_residual: residual,
        iterations,
        energy_history: history,
        warnings,
        ball: Some(data),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_products_of_lowest_mode() {
        // int u_1^3 Y00^3 over the unit ball, by direct quadrature.
        let basis = BallBasis::with_sector_size(1.0, 0, 4).unwrap();
        let data = BallPekarData::new(&basis, 4, 4, FieldCoupling::Literal).unwrap();
        let grid = RadialGrid::uniform(20000, 1.0).unwrap();
        let f = grid.sample(|r| basis.radial(0, 0, r).powi(3) * r * r);
        let direct = grid.integrate(&f) / (4.0 * PI).sqrt();
        assert!((data.triple[0][(0, 0)] - direct).abs() < 1e-10);
    }

    #[test]
    fn zero_coupling_limit_is_lowest_mode() {
        // Field with vanishing weights leaves the Dirichlet ground state.
        let basis = BallBasis::with_sector_size(1.0, 0, 6).unwrap();
        let data = BallPekarData::new(&basis, 6, 6, FieldCoupling::Literal).unwrap();
        let (e, _) = lowest(data.hamiltonian(&[0.0; 6]));
        assert!((e - PI * PI).abs() < 1e-12);
    }

    #[test]
    fn unit_ball_solution_identities() {
        let basis = BallBasis::with_sector_size(1.0, 0, 12).unwrap();
        let sol = solve_pekar_ball(&basis, &BallOptions::default()).unwrap();
        assert!((sol.mu - (sol.energy - sol.phi_norm_sq)).abs() < 1e-12);
        assert!(sol.psi.norm_sq() > 0.999 && sol.psi.norm_sq() < 1.001);
        assert!(sol.energy < PI * PI);
        assert!(sol.warnings.is_empty());
    }
}
