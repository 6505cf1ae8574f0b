//! Radial Fourier (Hankel) transform on uniform grids.
//!
//! For `f(r) Y_lm` the three-dimensional transform with the unitary
//! convention is `(-i)^l F(k) Y_lm` with
//! `F(k) = sqrt(2/pi) int_0^inf f(r) j_l(k r) r^2 dr`. The phase is dropped.

use std::f64::consts::PI;
use std::sync::Arc;

use super::bessel::sph_jn;
use super::grid::{RadialFunction, RadialGrid};
use super::ops::require_uniform;
use crate::error::{Error, Result};
use crate::par;

/// Samples of `F(k)` on `k_j = j pi / r_max`, `j = 0..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialTransform {
    pub k: Vec<f64>,
    pub values: Vec<f64>,
    pub angular_momentum: usize,
    /// Set when more than `1e-10` of the squared norm sits in the outer 5%
    /// of the grid, so the truncated transform is unreliable.
    pub insufficient_decay: bool,
}

impl RadialTransform {
    /// `int |F|^2 k^2 dk` by the same trapezoid sum used in the transform.
    pub fn norm_sq(&self) -> f64 {
        let dk = self.k[1] - self.k[0];
        let n = self.k.len() - 1;
        self.k
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(|(j, (k, v))| {
                let w = if j == n { 0.5 * dk } else { dk };
                w * k * k * v * v
            })
            .sum()
    }
}

fn hankel(samples: &[f64], nodes: &[f64], step: f64, targets: &[f64], l: usize) -> Vec<f64> {
    let n = nodes.len() - 1;
    let c = (2.0 / PI).sqrt();
    par::map_range(targets.len(), |j| {
        let k = targets[j];
        let mut s = 0.0;
        for i in 1..=n {
            let r = nodes[i];
            let w = if i == n { 0.5 * step } else { step };
            let kernel = if l == 0 {
                let x = k * r;
                if x == 0.0 {
                    1.0
                } else {
                    x.sin() / x
                }
            } else {
                sph_jn(l, k * r)
            };
            s += w * samples[i] * kernel * r * r;
        }
        c * s
    })
}

/// Forward transform. For `l = 0` the discrete map is a sine transform and
/// is its own inverse up to rounding (see [`inverse_fourier_radial`]).
pub fn fourier_radial(f: &RadialFunction) -> Result<RadialTransform> {
    let grid = &f.grid;
    let h = require_uniform(grid, "radial Fourier transform")?;
    let n = grid.len() - 1;
    let dk = PI / grid.r_max;
    let k: Vec<f64> = (0..=n).map(|j| j as f64 * dk).collect();
    let values = hankel(&f.values, &grid.points, h, &k, f.angular_momentum);

    // Share of int f^2 r^2 dr carried by the outer 5% of the grid.
    let mass = |range: std::ops::Range<usize>| -> f64 {
        range
            .map(|i| f.values[i].powi(2) * grid.points[i].powi(2))
            .sum::<f64>()
    };
    let edge_start = n - n / 20;
    let total = mass(0..n + 1);
    let edge = mass(edge_start..n + 1);
    Ok(RadialTransform {
        k,
        values,
        angular_momentum: f.angular_momentum,
        insufficient_decay: edge > 1e-10 * total,
    })
}

/// Inverse of [`fourier_radial`] back onto the original grid.
pub fn inverse_fourier_radial(
    t: &RadialTransform,
    grid: Arc<RadialGrid>,
) -> Result<RadialFunction> {
    require_uniform(&grid, "inverse radial Fourier transform")?;
    if t.k.len() != grid.len() || ((t.k[1] - t.k[0]) * grid.r_max - PI).abs() > 1e-9 {
        return Err(Error::parameter(
            "grid",
            "grid does not match the transform's momentum lattice",
        ));
    }
    let dk = t.k[1] - t.k[0];
    let values = hankel(&t.values, &t.k, dk, &grid.points, t.angular_momentum);
    RadialFunction::new(grid, values, t.angular_momentum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_transforms_to_gaussian() {
        let grid = Arc::new(RadialGrid::uniform(1500, 15.0).unwrap());
        let f = RadialFunction::from_fn(grid, |r| (-r * r / 2.0).exp());
        let t = fourier_radial(&f).unwrap();
        assert!(!t.insufficient_decay);
        for (k, v) in t.k.iter().zip(&t.values).take(400) {
            assert!((v - (-k * k / 2.0).exp()).abs() < 1e-10, "k = {k}");
        }
    }

    #[test]
    fn l0_transform_is_involutive() {
        let grid = Arc::new(RadialGrid::uniform(800, 12.0).unwrap());
        let f = RadialFunction::from_fn(grid.clone(), |r| (1.0 + r) * (-r).exp());
        let t = fourier_radial(&f).unwrap();
        let back = inverse_fourier_radial(&t, grid).unwrap();
        for i in 1..800 {
            assert!((back.values[i] - f.values[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn l1_transform_of_r_gaussian() {
        // r e^{-r^2/2} Y_1m transforms to k e^{-k^2/2} Y_1m (up to phase).
        let grid = Arc::new(RadialGrid::uniform(1500, 15.0).unwrap());
        let vals = grid.sample(|r| r * (-r * r / 2.0).exp());
        let f = RadialFunction::new(grid, vals, 1).unwrap();
        let t = fourier_radial(&f).unwrap();
        for (k, v) in t.k.iter().zip(&t.values).take(300) {
            assert!((v - k * (-k * k / 2.0).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn parseval() {
        let grid = Arc::new(RadialGrid::uniform(1000, 20.0).unwrap());
        let f = RadialFunction::from_fn(grid, |r| (-r).exp());
        let t = fourier_radial(&f).unwrap();
        let lhs = f.grid.integrate_ball(&f.values.iter().map(|v| v * v).collect::<Vec<_>>());
        assert_relative_eq!(4.0 * PI * t.norm_sq(), lhs, max_relative = 1e-6);
    }

    #[test]
    fn slow_decay_is_flagged() {
        let grid = Arc::new(RadialGrid::uniform(200, 5.0).unwrap());
        let f = RadialFunction::from_fn(grid, |r| 1.0 / (1.0 + r));
        assert!(fourier_radial(&f).unwrap().insufficient_decay);
    }

    #[test]
    fn rejects_graded_grid() {
        let grid = Arc::new(RadialGrid::new(100, 5.0, crate::radial::GridKind::Graded).unwrap());
        let f = RadialFunction::from_fn(grid, |r| (-r).exp());
        assert!(matches!(fourier_radial(&f), Err(Error::Domain(_))));
    }
}
