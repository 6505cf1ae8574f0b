//! Independent oracles for the polaron-core test suites, and the acceptance
//! run. Nothing here depends on the solver code paths it is used to check.

use std::f64::consts::PI;

/// Pekar energy of `psi = sum_i c_i exp(-a_i r^2)` after normalization, from
/// closed-form Gaussian integrals.
pub fn gaussian_mixture_energy(exponents: &[f64], coefficients: &[f64]) -> f64 {
    let n = exponents.len();
    let overlap = |p: f64| (PI / p).powf(1.5);
    let mut norm = 0.0;
    let mut kinetic = 0.0;
    // The density is a sum of Gaussians with exponents a_i + a_j.
    let mut dens: Vec<(f64, f64)> = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (exponents[i], exponents[j]);
            let c = coefficients[i] * coefficients[j];
            let s = overlap(a + b);
            norm += c * s;
            kinetic += c * 6.0 * a * b / (a + b) * s;
            dens.push((a + b, c));
        }
    }
    let mut coulomb = 0.0;
    for &(p, cp) in &dens {
        for &(q, cq) in &dens {
            // Coulomb energy of two unit-charge Gaussians.
            let e = 2.0 / PI.sqrt() * (p * q / (p + q)).sqrt();
            coulomb += cp * cq * overlap(p) * overlap(q) * e;
        }
    }
    kinetic / norm - coulomb / (norm * norm)
}

/// Downhill simplex minimization with the standard coefficients.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, start: &[f64], step: f64, iterations: usize) -> (Vec<f64>, f64) {
    let d = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..d {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    for _ in 0..iterations {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        let centroid: Vec<f64> = (0..d).map(|k| simplex[..d].iter().map(|p| p[k]).sum::<f64>() / d as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..d).map(|k| centroid[k] + t * (simplex[d][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
        } else if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
        } else {
            let xc = if fr < values[d] { along(-0.5) } else { along(0.5) };
            let fc = f(&xc);
            if fc < values[d].min(fr) {
                simplex[d] = xc;
                values[d] = fc;
            } else {
                for i in 1..=d {
                    let p: Vec<f64> = (0..d).map(|k| simplex[0][k] + 0.5 * (simplex[i][k] - simplex[0][k])).collect();
                    values[i] = f(&p);
                    simplex[i] = p;
                }
            }
        }
    }
    let best = (0..=d).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best].clone(), values[best])
}

/// Minimum of the Pekar functional over mixtures of three Gaussians, with
/// restarts of the simplex from its own best point.
pub fn three_gaussian_minimum() -> f64 {
    let f = |x: &[f64]| {
        let a = [x[0].exp(), x[1].exp(), x[2].exp()];
        gaussian_mixture_energy(&a, &[1.0, x[3], x[4]])
    };
    let mut x = vec![(0.012f64).ln(), (0.035f64).ln(), (0.11f64).ln(), 1.0, 1.0];
    let mut best = f64::INFINITY;
    for _ in 0..8 {
        let (p, v) = nelder_mead(f, &x, 0.3, 3000);
        x = p;
        best = v;
    }
    best
}

/// Composite Gauss-Legendre on `[a, b]` with `panels` panels of 8 nodes,
/// written out here so the oracles do not reuse library quadrature.
pub fn gauss_legendre_8(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    const X: [f64; 4] = [
        0.183_434_642_495_649_8,
        0.525_532_409_916_329_0,
        0.796_666_477_413_626_7,
        0.960_289_856_497_536_3,
    ];
    const W: [f64; 4] = [
        0.362_683_783_378_362_0,
        0.313_706_645_877_887_3,
        0.222_381_034_453_374_5,
        0.101_228_536_290_376_3,
    ];
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for k in 0..4 {
            let dx = 0.5 * h * X[k];
            s += W[k] * (f(mid - dx) + f(mid + dx));
        }
    }
    0.5 * h * s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_to_degree_fifteen() {
        let v = gauss_legendre_8(|x| x.powi(15) + 3.0 * x.powi(4), -1.0, 2.0, 1);
        let exact = (2f64.powi(16) - 1.0) / 16.0 + 3.0 * (32.0 + 1.0) / 5.0;
        assert!((v - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn simplex_finds_rosenbrock_minimum() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let (x, v) = nelder_mead(f, &[-1.2, 1.0], 0.5, 2000);
        assert!(v < 1e-12 && (x[0] - 1.0).abs() < 1e-5, "{x:?} {v}");
    }
}
