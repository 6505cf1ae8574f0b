//! Radial integral and differential operators for functions of `|x|`.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{GridKind, RadialFunction, RadialGrid};
use crate::error::{Error, Result};
use crate::par;

fn require_scalar(f: &RadialFunction, what: &str) -> Result<()> {
    if f.angular_momentum != 0 {
        return Err(Error::Domain(format!(
            "{what} needs an l = 0 input, got l = {}",
            f.angular_momentum
        )));
    }
    if f.grid.points[0] != 0.0 {
        return Err(Error::Domain(format!("{what} needs a grid that starts at r = 0")));
    }
    Ok(())
}

fn require_nonnegative(rho: &RadialFunction) -> Result<()> {
    let scale = rho.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if let Some(v) = rho.values.iter().find(|&&v| v < -1e-12 * scale.max(1e-300)) {
        return Err(Error::Domain(format!("density has a negative sample {v:e}")));
    }
    Ok(())
}

/// Newtonian potential `V(r) = int rho(y) / |x - y| dy` of a radial density,
/// by the shell theorem:
/// `V(r) = Q(r)/r + int_r^R 4 pi s rho(s) ds`.
///
/// The density is taken to vanish beyond the grid.
pub fn newton_potential(rho: &RadialFunction) -> Result<RadialFunction> {
    require_scalar(rho, "newton potential")?;
    require_nonnegative(rho)?;
    let g = &rho.grid;
    let enclosed_integrand: Vec<f64> = g
        .points
        .iter()
        .zip(&rho.values)
        .map(|(r, v)| 4.0 * PI * r * r * v)
        .collect();
    let outer_integrand: Vec<f64> = g
        .points
        .iter()
        .zip(&rho.values)
        .map(|(r, v)| 4.0 * PI * r * v)
        .collect();
    let enclosed = g.cumulative(&enclosed_integrand);
    let outer = g.cumulative(&outer_integrand);
    let outer_total = *outer.last().unwrap();
    let values = g
        .points
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let tail = outer_total - outer[i];
            if r == 0.0 {
                tail
            } else {
                enclosed[i] / r + tail
            }
        })
        .collect();
    RadialFunction::new(Arc::clone(g), values, 0)
}

/// Enclosed charge `Q(r_i) = int_0^{r_i} 4 pi s^2 rho ds` at every point.
pub fn enclosed_charge(rho: &RadialFunction) -> Vec<f64> {
    let g = &rho.grid;
    let integrand: Vec<f64> = g
        .points
        .iter()
        .zip(&rho.values)
        .map(|(r, v)| 4.0 * PI * r * r * v)
        .collect();
    g.cumulative(&integrand)
}

/// Result of [`inverse_square_convolution`]: the field on the grid plus the
/// even moments `M_k = int 4 pi s^{k+2} rho ds` that fix its far field
/// `pi^{-3/2} r^{-2} (M_0 + M_2/(3 r^2) + M_4/(5 r^4) + M_6/(7 r^6))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolvedField {
    pub field: RadialFunction,
    pub moments: [f64; 4],
}

impl ConvolvedField {
    pub fn field(&self) -> &RadialFunction {
        &self.field
    }

    fn tail_coefficients(&self) -> [f64; 4] {
        let m = self.moments;
        [m[0], m[1] / 3.0, m[2] / 5.0, m[3] / 7.0]
    }

    /// Multipole estimate of the field beyond the grid.
    pub fn far_field(&self, r: f64) -> f64 {
        let c = self.tail_coefficients();
        let x = 1.0 / (r * r);
        PI.powf(-1.5) * x * (c[0] + x * (c[1] + x * (c[2] + x * c[3])))
    }

    /// `int_{r > r_max} phi^2 d^3x` from the multipole tail.
    pub fn tail_norm_sq(&self) -> f64 {
        let c = self.tail_coefficients();
        let r = self.field().grid.r_max;
        let mut s = 0.0;
        for (a, ca) in c.iter().enumerate() {
            for (b, cb) in c.iter().enumerate() {
                let p = 1.0 + 2.0 * (a + b) as f64;
                s += ca * cb * r.powf(-p) / p;
            }
        }
        4.0 * PI * s / PI.powi(3)
    }

    /// `int_{r > r_max} |grad phi|^2 d^3x` from the multipole tail.
    pub fn tail_gradient_sq(&self) -> f64 {
        let c = self.tail_coefficients();
        let r = self.field().grid.r_max;
        let mut s = 0.0;
        for (a, ca) in c.iter().enumerate() {
            for (b, cb) in c.iter().enumerate() {
                let p = 3.0 + 2.0 * (a + b) as f64;
                let da = 2.0 + 2.0 * a as f64;
                let db = 2.0 + 2.0 * b as f64;
                s += ca * cb * da * db * r.powf(-p) / p;
            }
        }
        4.0 * PI * s / PI.powi(3)
    }

    /// `int phi^2 d^3x` over all space.
    pub fn norm_sq(&self) -> f64 {
        self.field().norm_sq() + self.tail_norm_sq()
    }

    /// `int |grad phi|^2 d^3x` over all space.
    pub fn gradient_sq(&self) -> f64 {
        let f = self.field();
        let d = radial_derivative(f);
        let inner = f.grid.integrate_ball(&d.iter().map(|v| v * v).collect::<Vec<_>>());
        inner + self.tail_gradient_sq()
    }
}

/// `int t^k ln|t| dt` antiderivative, with `0 ln 0 = 0`.
fn log_moment(k: usize, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let k1 = (k + 1) as f64;
    t.powi(k as i32 + 1) / k1 * (t.abs().ln() - 1.0 / k1)
}

/// Coefficients of the interpolating polynomial through `(t_j, g_j)` in
/// powers of `t`.
fn interpolant(t: &[f64], g: &[f64]) -> [f64; 3] {
    match t.len() {
        2 => {
            let b = (g[1] - g[0]) / (t[1] - t[0]);
            [g[0] - b * t[0], b, 0.0]
        }
        3 => {
            let d1 = (g[1] - g[0]) / (t[1] - t[0]);
            let d12 = (g[2] - g[1]) / (t[2] - t[1]);
            let d2 = (d12 - d1) / (t[2] - t[0]);
            // g0 + d1 (t - t0) + d2 (t - t0)(t - t1)
            [
                g[0] - d1 * t[0] + d2 * t[0] * t[1],
                d1 - d2 * (t[0] + t[1]),
                d2,
            ]
        }
        _ => unreachable!(),
    }
}

/// Panels of two intervals (one trailing single interval when the count is
/// odd).
fn panels(n_points: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i + 2 < n_points {
        out.push((i, 3));
        i += 2;
    }
    if i + 1 < n_points {
        out.push((i, 2));
    }
    out
}

/// `int_panel p(s) ln|s - c| ds` for the panel interpolant of `g` written in
/// powers of `s - c`.
fn panel_log_integral(s: &[f64], g: &[f64], c: f64) -> f64 {
    let t: Vec<f64> = s.iter().map(|x| x - c).collect();
    let p = interpolant(&t, g);
    let (a, b) = (t[0], t[t.len() - 1]);
    (0..3)
        .map(|k| p[k] * (log_moment(k, b) - log_moment(k, a)))
        .sum()
}

/// Convolution with `pi^{-3/2} |x|^{-2}` of a radial density:
/// `phi(r) = (2/sqrt(pi)) r^{-1} int_0^R s rho(s) ln((r + s)/|r - s|) ds`.
///
/// The logarithmic kernel is integrated exactly against piecewise quadratic
/// interpolants of `s rho(s)`, so the result stays accurate at small `r` and
/// across the diagonal.
pub fn inverse_square_convolution(rho: &RadialFunction) -> Result<ConvolvedField> {
    require_scalar(rho, "inverse-square convolution")?;
    require_nonnegative(rho)?;
    let grid = Arc::clone(&rho.grid);
    let s = &grid.points;
    let g: Vec<f64> = s.iter().zip(&rho.values).map(|(s, v)| s * v).collect();
    let pans = panels(s.len());
    let prefactor = 2.0 / PI.sqrt();

    let int_rho = grid.integrate(&rho.values);
    let values = par::map_range(s.len(), |i| {
        let r = s[i];
        if r == 0.0 {
            return 2.0 * prefactor * int_rho;
        }
        let mut acc = 0.0;
        for &(start, len) in &pans {
            let ss = &s[start..start + len];
            let gg = &g[start..start + len];
            acc += panel_log_integral(ss, gg, -r) - panel_log_integral(ss, gg, r);
        }
        prefactor * acc / r
    });

    let mut moments = [0.0; 4];
    for (k, m) in moments.iter_mut().enumerate() {
        let integrand: Vec<f64> = s
            .iter()
            .zip(&rho.values)
            .map(|(s, v)| 4.0 * PI * s.powi(2 * k as i32 + 2) * v)
            .collect();
        *m = grid.integrate(&integrand);
    }
    Ok(ConvolvedField {
        field: RadialFunction::new(grid, values, 0)?,
        moments,
    })
}

/// Radial derivative `d f / d r` of an even (scalar) profile.
///
/// Fourth-order central differences on uniform grids with an even reflection
/// at the origin and one-sided stencils at `r_max`; three-point nonuniform
/// differences otherwise.
pub fn radial_derivative(f: &RadialFunction) -> Vec<f64> {
    let r = &f.grid.points;
    let v = &f.values;
    let n = r.len();
    let mut out = vec![0.0; n];
    let parity = if f.angular_momentum % 2 == 0 { 1.0 } else { -1.0 };
    match f.grid.spacing() {
        Some(h) if r[0] == 0.0 => {
            let at = |j: isize| -> f64 {
                if j < 0 {
                    parity * v[(-j) as usize]
                } else {
                    v[j as usize]
                }
            };
            for (i, o) in out.iter_mut().enumerate().take(n - 2) {
                let j = i as isize;
                *o = (at(j - 2) - 8.0 * at(j - 1) + 8.0 * at(j + 1) - at(j + 2)) / (12.0 * h);
            }
            for i in n - 2..n {
                // Backward fourth-order stencils.
                let k = n - 1 - i;
                out[i] = if k == 0 {
                    (25.0 * v[i] - 48.0 * v[i - 1] + 36.0 * v[i - 2] - 16.0 * v[i - 3]
                        + 3.0 * v[i - 4])
                        / (12.0 * h)
                } else {
                    (3.0 * v[i + 1] + 10.0 * v[i] - 18.0 * v[i - 1] + 6.0 * v[i - 2] - v[i - 3])
                        / (12.0 * h)
                };
            }
        }
        _ => {
            for i in 0..n {
                let (a, b, c) = if i == 0 {
                    (0, 1, 2)
                } else if i == n - 1 {
                    (n - 3, n - 2, n - 1)
                } else {
                    (i - 1, i, i + 1)
                };
                out[i] = lagrange_derivative([r[a], r[b], r[c]], [v[a], v[b], v[c]], r[i]);
            }
        }
    }
    out
}

fn lagrange_derivative(x: [f64; 3], y: [f64; 3], at: f64) -> f64 {
    let mut d = 0.0;
    for j in 0..3 {
        let mut s = 0.0;
        for m in 0..3 {
            if m == j {
                continue;
            }
            let mut prod = 1.0 / (x[j] - x[m]);
            for k in 0..3 {
                if k != j && k != m {
                    prod *= (at - x[k]) / (x[j] - x[k]);
                }
            }
            s += prod;
        }
        d += y[j] * s;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// `f(r_max) = 0`.
    Dirichlet,
    /// No condition imposed; one-sided stencils at the outer edge.
    Free,
}

/// `-Delta (f Y_lm)` radial profile,
/// `[-u'' + l(l+1) u / r^2] / r` with `u = r f`.
///
/// Fourth-order on uniform grids, using the reflection
/// `u(-r) = (-1)^{l+1} u(r)` at the origin; second order on other grids.
pub fn apply_radial_laplacian(f: &RadialFunction, boundary: Boundary) -> Result<RadialFunction> {
    let grid = Arc::clone(&f.grid);
    let r = &grid.points;
    if r[0] != 0.0 {
        return Err(Error::Domain("laplacian needs a grid that starts at r = 0".into()));
    }
    let l = f.angular_momentum;
    let ll = (l * (l + 1)) as f64;
    let n = r.len();
    let u: Vec<f64> = r.iter().zip(&f.values).map(|(r, v)| r * v).collect();
    let mut upp = vec![0.0; n];
    match grid.kind {
        GridKind::Uniform => {
            let h = r[1];
            let parity = if l % 2 == 0 { -1.0 } else { 1.0 };
            let at = |j: isize| -> f64 {
                if j < 0 {
                    parity * u[(-j) as usize]
                } else if j as usize >= n {
                    // Odd reflection about r_max, used for Dirichlet only.
                    -u[2 * (n - 1) - j as usize]
                } else {
                    u[j as usize]
                }
            };
            let inner_end = match boundary {
                Boundary::Dirichlet => n,
                Boundary::Free => n - 2,
            };
            for (i, o) in upp.iter_mut().enumerate().take(inner_end) {
                let j = i as isize;
                *o = (-at(j - 2) + 16.0 * at(j - 1) - 30.0 * at(j) + 16.0 * at(j + 1)
                    - at(j + 2))
                    / (12.0 * h * h);
            }
            if boundary == Boundary::Free {
                let i = n - 1;
                upp[i] = (45.0 * u[i] - 154.0 * u[i - 1] + 214.0 * u[i - 2] - 156.0 * u[i - 3]
                    + 61.0 * u[i - 4]
                    - 10.0 * u[i - 5])
                    / (12.0 * h * h);
                let i = n - 2;
                upp[i] = (10.0 * u[i + 1] - 15.0 * u[i] - 4.0 * u[i - 1] + 14.0 * u[i - 2]
                    - 6.0 * u[i - 3]
                    + u[i - 4])
                    / (12.0 * h * h);
            }
        }
        _ => {
            for i in 1..n - 1 {
                let (hm, hp) = (r[i] - r[i - 1], r[i + 1] - r[i]);
                upp[i] = 2.0 * (u[i + 1] * hm - u[i] * (hm + hp) + u[i - 1] * hp)
                    / (hm * hp * (hm + hp));
            }
            if boundary == Boundary::Free {
                upp[n - 1] = upp[n - 2];
            }
        }
    }

    let mut values = vec![0.0; n];
    for i in 1..n {
        values[i] = (-upp[i] + ll * u[i] / (r[i] * r[i])) / r[i];
    }
    if l == 0 {
        // -Delta f(0) = -3 f''(0) for an even profile.
        let v = &f.values;
        values[0] = match grid.kind {
            GridKind::Uniform => {
                let h = r[1];
                -3.0 * (-2.0 * v[2] + 32.0 * v[1] - 30.0 * v[0]) / (12.0 * h * h)
            }
            _ => {
                let (a, b) = (r[1], r[2]);
                // Even quadratic fit f = c0 + c2 r^2 through the first two
                // interior points.
                let c2 = (v[2] - v[1]) / (b * b - a * a);
                -6.0 * c2
            }
        };
    }
    if boundary == Boundary::Dirichlet {
        values[n - 1] = 0.0;
    }
    RadialFunction::new(grid, values, l)
}

/// Reject grids for which a uniform-only routine would silently lose accuracy.
pub fn require_uniform(grid: &RadialGrid, what: &str) -> Result<f64> {
    grid.spacing()
        .filter(|_| grid.points[0] == 0.0)
        .ok_or_else(|| Error::Domain(format!("{what} needs a uniform grid starting at r = 0")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian_density(grid: Arc<RadialGrid>, a: f64) -> RadialFunction {
        // Normalized: int rho = 1.
        let c = (a / PI).powf(1.5);
        RadialFunction::from_fn(grid, move |r| c * (-a * r * r).exp())
    }

    #[test]
    fn newton_potential_of_gaussian_matches_erf() {
        let grid = Arc::new(RadialGrid::uniform(2000, 20.0).unwrap());
        let a = 0.7;
        let v = newton_potential(&gaussian_density(grid.clone(), a)).unwrap();
        for (i, &r) in grid.points.iter().enumerate().step_by(97) {
            let exact = if r == 0.0 {
                2.0 * (a / PI).sqrt()
            } else {
                erf(a.sqrt() * r) / r
            };
            assert_relative_eq!(v.values[i], exact, max_relative = 1e-9);
        }
    }

    #[test]
    fn newton_potential_on_graded_grid() {
        let grid = Arc::new(RadialGrid::new(3000, 20.0, GridKind::Graded).unwrap());
        let v = newton_potential(&gaussian_density(grid.clone(), 1.0)).unwrap();
        let i = grid.points.iter().position(|&r| r > 1.0).unwrap();
        let r = grid.points[i];
        assert_relative_eq!(v.values[i], erf(r) / r, max_relative = 1e-8);
    }

    #[test]
    fn newton_rejects_bad_input() {
        let grid = Arc::new(RadialGrid::uniform(64, 5.0).unwrap());
        let mut rho = gaussian_density(grid.clone(), 1.0);
        rho.values[10] = -1.0;
        assert!(matches!(newton_potential(&rho), Err(Error::Domain(_))));
        let mut rho = gaussian_density(grid, 1.0);
        rho.angular_momentum = 1;
        assert!(newton_potential(&rho).is_err());
    }

    #[test]
    fn inverse_square_far_field_and_origin() {
        let grid = Arc::new(RadialGrid::uniform(3000, 30.0).unwrap());
        let a = 1.0;
        let out = inverse_square_convolution(&gaussian_density(grid.clone(), a)).unwrap();
        let phi = out.field();
        // phi(0) = pi^{-3/2} int rho / |y|^2 = 2 a / pi^{3/2}
        let origin = 2.0 * a / PI.powf(1.5);
        assert_relative_eq!(phi.values[0], origin, max_relative = 1e-8);
        let i = 2500;
        let r = grid.points[i];
        assert_relative_eq!(phi.values[i], out.far_field(r), max_relative = 1e-8);
    }

    #[test]
    fn inverse_square_gradient_identity() {
        // int |grad phi|^2 = 4 pi int psi^4 with rho = psi^2.
        let grid = Arc::new(RadialGrid::uniform(3000, 30.0).unwrap());
        let rho = gaussian_density(grid.clone(), 0.5);
        let out = inverse_square_convolution(&rho).unwrap();
        let psi4: Vec<f64> = rho.values.iter().map(|v| v * v).collect();
        let rhs = 4.0 * PI * grid.integrate_ball(&psi4);
        assert_relative_eq!(out.gradient_sq(), rhs, max_relative = 1e-6);
    }

    #[test]
    fn laplacian_of_gaussian() {
        let grid = Arc::new(RadialGrid::uniform(1000, 10.0).unwrap());
        let f = RadialFunction::from_fn(grid.clone(), |r| (-r * r).exp());
        let lf = apply_radial_laplacian(&f, Boundary::Free).unwrap();
        for (i, &r) in grid.points.iter().enumerate().step_by(37) {
            let exact = (6.0 - 4.0 * r * r) * (-r * r).exp();
            assert!((lf.values[i] - exact).abs() < 1e-7, "r = {r}");
        }
    }

    #[test]
    fn laplacian_of_l1_bessel_mode() {
        let z = 4.493_409_457_909_064;
        let grid = Arc::new(RadialGrid::uniform(2000, 1.0).unwrap());
        let vals = grid.sample(|r| super::super::bessel::sph_jn(1, z * r));
        let f = RadialFunction::new(grid, vals.clone(), 1).unwrap();
        let lf = apply_radial_laplacian(&f, Boundary::Dirichlet).unwrap();
        for i in (1..1990).step_by(53) {
            assert!((lf.values[i] - z * z * vals[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn derivative_fourth_order() {
        let grid = Arc::new(RadialGrid::uniform(800, 8.0).unwrap());
        let f = RadialFunction::from_fn(grid.clone(), |r| (-r * r).exp());
        let d = radial_derivative(&f);
        for (i, &r) in grid.points.iter().enumerate() {
            assert!((d[i] + 2.0 * r * (-r * r).exp()).abs() < 1e-7);
        }
    }

    fn erf(x: f64) -> f64 {
        if x > 2.0 {
            // Continued fraction for erfc.
            let mut f = x;
            for k in (1..80).rev() {
                f = x + 0.5 * k as f64 / f;
            }
            return 1.0 - (-x * x).exp() / (PI.sqrt() * f);
        }
        let mut term = x;
        let mut sum = x;
        let mut n = 0.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= -x * x / n;
            sum += term / (2.0 * n + 1.0);
        }
        2.0 / PI.sqrt() * sum
    }
}
