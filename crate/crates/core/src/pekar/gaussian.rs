//! Closed forms for the normalized Gaussian trial state
//! `psi_a(x) = (2a/pi)^{3/4} exp(-a |x|^2)`.

use std::f64::consts::PI;

/// Minimizer of [`energy`] within the Gaussian family.
pub const OPTIMAL_EXPONENT: f64 = 1.0 / (9.0 * PI);

/// Best Gaussian energy, `-1/(3 pi)`.
pub const BEST_ENERGY: f64 = -1.0 / (3.0 * PI);

pub fn psi(a: f64, r: f64) -> f64 {
    (2.0 * a / PI).powf(0.75) * (-a * r * r).exp()
}

/// `int |grad psi_a|^2 = 3a`.
pub fn kinetic(a: f64) -> f64 {
    3.0 * a
}

/// `int int psi_a^2 psi_a^2 / |x - y| = 2 sqrt(a/pi)`.
pub fn coulomb(a: f64) -> f64 {
    2.0 * (a / PI).sqrt()
}

pub fn energy(a: f64) -> f64 {
    kinetic(a) - coulomb(a)
}

/// `int psi_a^4 = (2a/pi)^{3/2} / (2 sqrt 2)`.
pub fn quartic(a: f64) -> f64 {
    (2.0 * a / PI).powf(1.5) / (2.0 * 2.0_f64.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimum_is_stationary_and_gives_best_energy() {
        let a = OPTIMAL_EXPONENT;
        let h = 1e-6 * a;
        assert!(((energy(a + h) - energy(a - h)) / (2.0 * h)).abs() < 1e-8);
        assert!((energy(a) - BEST_ENERGY).abs() < 1e-15);
        assert!((BEST_ENERGY + 0.106_103_295_394_596_9).abs() < 1e-15);
    }
}
