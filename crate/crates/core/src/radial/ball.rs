use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::bessel::{sph_jn, sph_jn_zero_table};
use super::grid::{GridKind, RadialGrid};
use crate::error::{Error, Result};
use crate::par;

/// Dirichlet eigenpairs of one angular momentum sector.
#[derive(Debug, Clone, PartialEq)]
pub struct BallSector {
    pub l: usize,
    /// `j_{l,n}`, increasing.
    pub zeros: Vec<f64>,
    /// `(j_{l,n} / R)^2`.
    pub energies: Vec<f64>,
    /// Radial normalization so that `int_0^R u^2 r^2 dr = 1`.
    pub norms: Vec<f64>,
}

impl BallSector {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn degeneracy(&self) -> usize {
        2 * self.l + 1
    }
}

/// Eigenbasis of the Dirichlet Laplacian on a ball of radius `radius`,
/// `u_{l,n}(r) Y_lm` with `u_{l,n}(r) = N j_l(j_{l,n} r / R)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BallBasis {
    pub radius: f64,
    pub l_max: usize,
    pub sectors: Vec<BallSector>,
    /// Largest eigenvalue admitted.
    pub e_max: f64,
}

impl BallBasis {
    /// All eigenpairs with `e <= e_max` and `l <= l_max`.
    pub fn new(radius: f64, l_max: usize, e_max: f64) -> Result<Self> {
        check_radius(radius)?;
        let lowest = (PI / radius).powi(2);
        if !(e_max >= lowest) {
            return Err(Error::EmptyBasis(format!(
                "e_max = {e_max} is below the lowest Dirichlet eigenvalue {lowest}"
            )));
        }
        let x_max = e_max.sqrt() * radius * (1.0 + 1e-14);
        let table = sph_jn_zero_table(l_max, x_max)?;
        let sectors = build_sectors(radius, table);
        Ok(Self {
            radius,
            l_max,
            sectors,
            e_max,
        })
    }

    /// The lowest `n_per_sector` eigenpairs of every sector `l <= l_max`.
    pub fn with_sector_size(radius: f64, l_max: usize, n_per_sector: usize) -> Result<Self> {
        check_radius(radius)?;
        if n_per_sector == 0 {
            return Err(Error::EmptyBasis("n_per_sector = 0".into()));
        }
        let x_max = (n_per_sector as f64 + 0.5 * l_max as f64 + 1.5) * PI;
        let mut table = sph_jn_zero_table(l_max, x_max)?;
        for z in &mut table {
            z.truncate(n_per_sector);
        }
        let sectors = build_sectors(radius, table);
        let e_max = sectors
            .iter()
            .flat_map(|s| s.energies.last().copied())
            .fold(0.0, f64::max);
        Ok(Self {
            radius,
            l_max,
            sectors,
            e_max,
        })
    }

    pub fn sector(&self, l: usize) -> Option<&BallSector> {
        self.sectors.get(l).filter(|s| !s.is_empty())
    }

    /// Number of eigenfunctions counted with their `2l + 1` degeneracy.
    pub fn dimension(&self) -> usize {
        self.sectors.iter().map(|s| s.len() * s.degeneracy()).sum()
    }

    /// Eigenfunctions (with degeneracy) with eigenvalue `<= e`.
    pub fn count_below(&self, e: f64) -> usize {
        self.sectors
            .iter()
            .map(|s| s.energies.iter().filter(|&&x| x <= e).count() * s.degeneracy())
            .sum()
    }

    /// Largest admitted wave number, `sqrt(e)` of the top eigenvalue.
    pub fn k_max(&self) -> f64 {
        self.sectors
            .iter()
            .flat_map(|s| s.zeros.last().copied())
            .fold(0.0, f64::max)
            / self.radius
    }

    /// Radial profile `u_{l,n}(r)`; `n` is zero based.
    pub fn radial(&self, l: usize, n: usize, r: f64) -> f64 {
        let s = &self.sectors[l];
        s.norms[n] * sph_jn(l, s.zeros[n] * r / self.radius)
    }

    /// Matrix of radial profiles of sector `l` on a grid, points by modes.
    pub fn sector_values(&self, l: usize, grid: &RadialGrid) -> DMatrix<f64> {
        let s = &self.sectors[l];
        let mut m = DMatrix::zeros(grid.len(), s.len());
        for (j, (&z, &nrm)) in s.zeros.iter().zip(&s.norms).enumerate() {
            for (i, &r) in grid.points.iter().enumerate() {
                m[(i, j)] = nrm * sph_jn(l, z * r / self.radius);
            }
        }
        m
    }

    /// Gauss-Legendre grid on `(0, R)` that resolves products of radial
    /// profiles whose wave numbers add up to `k_total`.
    pub fn overlap_grid(&self, k_total: f64) -> Arc<RadialGrid> {
        Arc::new(overlap_grid(self.radius, k_total))
    }
}

/// Gauss-Legendre grid on `(0, radius)` resolving oscillations up to `k_total`.
pub fn overlap_grid(radius: f64, k_total: f64) -> RadialGrid {
    let n = (0.75 * k_total * radius).ceil() as usize + 48;
    RadialGrid::new(n, radius, GridKind::GaussLegendre).expect("valid quadrature grid")
}

fn check_radius(radius: f64) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::parameter("R", format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

fn build_sectors(radius: f64, table: Vec<Vec<f64>>) -> Vec<BallSector> {
    let r3 = radius.powi(3);
    par::map_range(table.len(), |l| {
        let zeros = table[l].clone();
        let energies = zeros.iter().map(|z| (z / radius).powi(2)).collect();
        let norms = zeros
            .iter()
            .map(|&z| (2.0 / r3).sqrt() / sph_jn(l + 1, z).abs())
            .collect();
        BallSector {
            l,
            zeros,
            energies,
            norms,
        }
    })
}

/// Leading Weyl count `|Omega| E^{3/2} / (6 pi^2)` for a ball.
pub fn weyl_count(radius: f64, e: f64) -> f64 {
    let vol = 4.0 * PI / 3.0 * radius.powi(3);
    vol * e.powf(1.5) / (6.0 * PI * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_eigenvalues_unit_ball() {
        let b = BallBasis::new(1.0, 3, 60.0).unwrap();
        assert!((b.sectors[0].energies[0] - PI * PI).abs() < 1e-12);
        assert!((b.sectors[1].zeros[0] - 4.493_409_457_909_064).abs() < 1e-11);
        assert!((b.sectors[1].energies[0] - 20.190_728_556_426_6).abs() < 1e-9);
        for s in &b.sectors {
            assert!(s.energies.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn empty_basis_error() {
        assert!(matches!(BallBasis::new(1.0, 2, 5.0), Err(Error::EmptyBasis(_))));
    }

    #[test]
    fn orthonormal_under_quadrature() {
        let b = BallBasis::new(1.5, 4, 400.0).unwrap();
        let grid = b.overlap_grid(2.0 * b.k_max());
        for l in 0..=4 {
            let v = b.sector_values(l, &grid);
            let w: Vec<f64> = grid.points.iter().zip(&grid.weights).map(|(r, w)| w * r * r).collect();
            for a in 0..v.ncols() {
                for c in 0..v.ncols() {
                    let s: f64 = (0..grid.len()).map(|i| w[i] * v[(i, a)] * v[(i, c)]).sum();
                    let target = if a == c { 1.0 } else { 0.0 };
                    assert!((s - target).abs() < 1e-8, "l={l} ({a},{c}) {s}");
                }
            }
        }
    }

    #[test]
    fn eigen_count_below_cutoff() {
        // e_max = 40 on the unit ball: l=0 -> pi^2, 4 pi^2; l=1 -> 20.19, 59.7 excluded; l=2 -> 33.2
        let b = BallBasis::new(1.0, 6, 40.0).unwrap();
        assert_eq!(b.sectors[0].len(), 2);
        assert_eq!(b.sectors[1].len(), 1);
        assert_eq!(b.sectors[2].len(), 1);
        assert_eq!(b.sectors[3].len(), 0);
        assert_eq!(b.dimension(), 2 + 3 + 5);
    }
}
