//! Angular integrals of three axially symmetric spherical harmonics.

use std::f64::consts::PI;

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Wigner `3j` symbol `(l1 l2 l3; 0 0 0)`.
pub fn three_j_zero(l1: usize, l2: usize, l3: usize) -> f64 {
    let j = l1 + l2 + l3;
    if j % 2 == 1 || l1 > l2 + l3 || l2 > l1 + l3 || l3 > l1 + l2 {
        return 0.0;
    }
    let g = j / 2;
    let ln = 0.5
        * (ln_factorial(j - 2 * l1) + ln_factorial(j - 2 * l2) + ln_factorial(j - 2 * l3)
            - ln_factorial(j + 1))
        + ln_factorial(g)
        - ln_factorial(g - l1)
        - ln_factorial(g - l2)
        - ln_factorial(g - l3);
    let sign = if g % 2 == 0 { 1.0 } else { -1.0 };
    sign * ln.exp()
}

/// `int Y_{l1,0} Y_{l2,0} Y_{l3,0} dOmega`.
pub fn gaunt_m0(l1: usize, l2: usize, l3: usize) -> f64 {
    let w = three_j_zero(l1, l2, l3);
    if w == 0.0 {
        return 0.0;
    }
    let pref = ((2 * l1 + 1) * (2 * l2 + 1) * (2 * l3 + 1)) as f64 / (4.0 * PI);
    pref.sqrt() * w * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::quadrature::gauss_legendre;

    fn legendre(l: usize, x: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, x);
        if l == 0 {
            return 1.0;
        }
        for k in 2..=l {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn matches_direct_angular_quadrature() {
        let (x, w) = gauss_legendre(64, -1.0, 1.0);
        for l1 in 0..6 {
            for l2 in 0..6 {
                for l3 in 0..6 {
                    let y = |l: usize, t: f64| ((2 * l + 1) as f64 / (4.0 * PI)).sqrt() * legendre(l, t);
                    let direct: f64 = 2.0
                        * PI
                        * x.iter()
                            .zip(&w)
                            .map(|(&t, &wt)| wt * y(l1, t) * y(l2, t) * y(l3, t))
                            .sum::<f64>();
                    assert!((gaunt_m0(l1, l2, l3) - direct).abs() < 1e-13, "{l1} {l2} {l3}");
                }
            }
        }
    }

    #[test]
    fn monopole_coupling() {
        for l in 0..10 {
            assert!((gaunt_m0(0, l, l) - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-14);
        }
    }
}
