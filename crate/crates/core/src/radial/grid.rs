use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::quadrature::{cumulative_uniform, gauss_legendre, simpson_weights};
use crate::error::{Error, Result};

/// Point distribution of a radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridKind {
    /// `r_i = i h`, `i = 0..=n`, Simpson weights.
    Uniform,
    /// Exponential map `r = r_max (e^{beta t} - 1)/(e^beta - 1)` of a uniform
    /// `t` grid; clusters points near the origin.
    Graded,
    /// Gauss-Legendre nodes on `(0, r_max)`; used for basis overlaps.
    GaussLegendre,
}

const GRADING: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub points: Vec<f64>,
    /// Plain `dr` weights; radial integrals multiply by `4 pi r^2` explicitly.
    pub weights: Vec<f64>,
    pub r_max: f64,
    pub kind: GridKind,
    /// `dr/dt` of the graded map at each point.
    jacobian: Option<Vec<f64>>,
}

impl RadialGrid {
    /// Build a grid with `n` intervals (uniform, graded) or `n` nodes
    /// (Gauss-Legendre).
    pub fn new(n: usize, r_max: f64, kind: GridKind) -> Result<Self> {
        if n < 16 {
            return Err(Error::parameter("n", format!("need at least 16 points, got {n}")));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::parameter("r_max", format!("must be positive, got {r_max}")));
        }
        let (points, weights) = match kind {
            GridKind::Uniform => {
                let h = r_max / n as f64;
                let pts: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
                (pts, simpson_weights(n, h))
            }
            GridKind::Graded => {
                let dt = 1.0 / n as f64;
                let scale = r_max / (GRADING.exp() - 1.0);
                let tw = simpson_weights(n, dt);
                let mut pts = Vec::with_capacity(n + 1);
                let mut jac = Vec::with_capacity(n + 1);
                for i in 0..=n {
                    let t = i as f64 * dt;
                    pts.push(scale * ((GRADING * t).exp() - 1.0));
                    jac.push(scale * GRADING * (GRADING * t).exp());
                }
                pts[n] = r_max;
                let w = tw.iter().zip(&jac).map(|(a, b)| a * b).collect();
                return Ok(Self {
                    points: pts,
                    weights: w,
                    r_max,
                    kind,
                    jacobian: Some(jac),
                });
            }
            GridKind::GaussLegendre => gauss_legendre(n, 0.0, r_max),
        };
        Ok(Self {
            points,
            weights,
            r_max,
            kind,
            jacobian: None,
        })
    }

    pub fn uniform(n: usize, r_max: f64) -> Result<Self> {
        Self::new(n, r_max, GridKind::Uniform)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Spacing of a uniform grid.
    pub fn spacing(&self) -> Option<f64> {
        match self.kind {
            GridKind::Uniform => Some(self.points[1] - self.points[0]),
            _ => None,
        }
    }

    /// `int f(r) 4 pi r^2 dr` for samples of `f` on this grid.
    pub fn integrate_ball(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        4.0 * PI
            * self
                .points
                .iter()
                .zip(&self.weights)
                .zip(f)
                .map(|((r, w), v)| w * r * r * v)
                .sum::<f64>()
    }

    /// `int f(r) dr`.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// Running integral `int_{r_0}^{r_i} f dr`.
    ///
    /// Fourth order on uniform and graded grids (the latter through the
    /// uniform parameter of the map); trapezoidal on Gauss-Legendre nodes.
    pub fn cumulative(&self, f: &[f64]) -> Vec<f64> {
        match (self.kind, &self.jacobian) {
            (GridKind::Uniform, _) => cumulative_uniform(f, self.points[1] - self.points[0]),
            (GridKind::Graded, Some(jac)) => {
                let g: Vec<f64> = f.iter().zip(jac).map(|(a, b)| a * b).collect();
                cumulative_uniform(&g, 1.0 / (self.len() - 1) as f64)
            }
            _ => {
                let mut out = vec![0.0; f.len()];
                for i in 1..f.len() {
                    out[i] = out[i - 1]
                        + 0.5 * (self.points[i] - self.points[i - 1]) * (f[i] + f[i - 1]);
                }
                out
            }
        }
    }

    /// Sample a closure on the grid points.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.points.iter().map(|&r| f(r)).collect()
    }
}

/// Samples of a function `f(r) Y_lm` on a radial grid. Only the radial
/// profile is stored; `angular_momentum` records which sector it lives in.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<f64>,
    pub angular_momentum: usize,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>, angular_momentum: usize) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::parameter(
                "values",
                format!("length {} does not match grid length {}", values.len(), grid.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("radial function has non-finite samples".into()));
        }
        Ok(Self {
            grid,
            values,
            angular_momentum,
        })
    }

    /// Scalar (l = 0) function from a closure.
    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.sample(f);
        Self {
            grid,
            values,
            angular_momentum: 0,
        }
    }

    /// `int |f|^2 d^3x` with the angular factor normalized out.
    pub fn norm_sq(&self) -> f64 {
        if self.angular_momentum == 0 {
            self.grid.integrate_ball(&self.map(|v| v * v).values)
        } else {
            // Y_lm is L^2 normalized on the sphere.
            self.grid.integrate(
                &self
                    .grid
                    .points
                    .iter()
                    .zip(&self.values)
                    .map(|(r, v)| r * r * v * v)
                    .collect::<Vec<_>>(),
            )
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
            angular_momentum: self.angular_momentum,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_spacing() {
        let g = RadialGrid::uniform(3000, 30.0).unwrap();
        assert!((g.spacing().unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(g.len(), 3001);
    }

    #[test]
    fn volume_identity_all_kinds() {
        for (kind, n) in [
            (GridKind::Uniform, 64),
            (GridKind::Uniform, 65),
            (GridKind::Graded, 3000),
            (GridKind::GaussLegendre, 40),
        ] {
            let g = RadialGrid::new(n, 1.0, kind).unwrap();
            let vol = g.integrate_ball(&vec![1.0; g.len()]);
            assert!(
                (vol / (4.0 * PI / 3.0) - 1.0).abs() < 1e-10,
                "{kind:?}: {vol}"
            );
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            RadialGrid::uniform(8, -1.0),
            Err(Error::Parameter { .. })
        ));
        assert!(matches!(
            RadialGrid::uniform(100, -1.0),
            Err(Error::Parameter { name: "r_max", .. })
        ));
    }

    #[test]
    fn graded_clusters_near_origin() {
        let g = RadialGrid::new(100, 10.0, GridKind::Graded).unwrap();
        let first = g.points[1] - g.points[0];
        let last = g.points[100] - g.points[99];
        assert!(first < 0.1 * last);
        assert!(g.points.windows(2).all(|p| p[0] < p[1]));
        assert!(g.weights.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn quadrature_exact_for_low_polynomials_against_r2() {
        let g = RadialGrid::uniform(40, 2.0).unwrap();
        for p in 0..=1 {
            let vals = g.sample(|r| r.powi(p));
            let got = g.integrate_ball(&vals);
            let exact = 4.0 * PI * 2f64.powi(p + 3) / (p + 3) as f64;
            assert!((got - exact).abs() < 1e-12 * exact);
        }
    }
}
