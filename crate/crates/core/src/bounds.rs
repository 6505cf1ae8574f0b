//! Closed-form energy bounds and the bookkeeping that compares them with
//! computed energies. Everything here is in original units unless a name
//! says otherwise.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pekar::gaussian;

/// `-(16 / (3 pi^2)) alpha^2 - 3/2`, the commutator bound at the optimal
/// split `K = 8 alpha / (3 pi)`.
pub fn ly_lower_bound(alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::parameter("alpha", "must be nonnegative"));
    }
    Ok(-16.0 / (3.0 * PI * PI) * alpha * alpha - 1.5)
}

/// Terms of the commutator bound at a general split `K`:
/// `H >= (1 - 8 alpha / (3 pi K)) (-Delta) + [low modes] - 3/2`, where the
/// low-mode field part is bounded below by `-2 alpha K / pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyIntermediate {
    pub k: f64,
    pub kinetic_prefactor: f64,
    pub field_bound: f64,
    pub remainder: f64,
    /// `field_bound + remainder`, valid when the kinetic prefactor is
    /// nonnegative.
    pub energy_bound: Option<f64>,
}

pub fn ly_intermediate(alpha: f64, k: f64) -> Result<LyIntermediate> {
    if !(alpha >= 0.0) {
        return Err(Error::parameter("alpha", "must be nonnegative"));
    }
    if !(k > 0.0) {
        return Err(Error::parameter("K", "must be positive"));
    }
    let kinetic_prefactor = 1.0 - 8.0 * alpha / (3.0 * PI * k);
    let field_bound = -2.0 * alpha * k / PI;
    Ok(LyIntermediate {
        k,
        kinetic_prefactor,
        field_bound,
        remainder: -1.5,
        energy_bound: (kinetic_prefactor >= 0.0).then_some(field_bound - 1.5),
    })
}

/// `|chi_x^j|^2 = (4 pi / 3) / K`.
pub fn chi_norm(k_cut: f64) -> Result<f64> {
    if !(k_cut > 0.0) {
        return Err(Error::parameter("K_cut", "must be positive"));
    }
    Ok(4.0 * PI / 3.0 / k_cut)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffErrors {
    /// `(int_{|k| > Lambda} |k|^{-4} dk)^{1/2}`.
    pub order1: f64,
    /// `(int_{|k| > Lambda} |k|^{-8} dk)^{1/2}`.
    pub order3: f64,
}

pub fn cutoff_error_norms(lambda: f64) -> Result<CutoffErrors> {
    if !(lambda > 0.0) {
        return Err(Error::parameter("Lambda", "must be positive"));
    }
    Ok(CutoffErrors {
        order1: (4.0 * PI / lambda).sqrt(),
        order3: (4.0 * PI / (5.0 * lambda.powi(5))).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTerm {
    /// `e_pek + trace / (2 alpha^2)`.
    pub strong_coupling_units: f64,
    /// `alpha^2 e_pek + trace / 2`.
    pub original_units: f64,
}

pub fn two_term_prediction(e_pek_domain: f64, trace_correction: f64, alpha: f64) -> Result<TwoTerm> {
    if trace_correction > 0.0 {
        return Err(Error::parameter(
            "trace_correction",
            format!("must be nonpositive, got {trace_correction}"),
        ));
    }
    if !(alpha > 0.0) {
        return Err(Error::parameter("alpha", "must be positive"));
    }
    Ok(TwoTerm {
        strong_coupling_units: e_pek_domain + trace_correction / (2.0 * alpha * alpha),
        original_units: alpha * alpha * e_pek_domain + 0.5 * trace_correction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub alpha: f64,
    pub ly_lower: f64,
    pub ly_intermediate: Option<LyIntermediate>,
    pub gaussian_upper: f64,
    pub pekar_upper: f64,
    pub two_term: Option<TwoTerm>,
    pub cutoff_errors: Option<CutoffErrors>,
    pub numeric_energy: Option<f64>,
}

impl BoundsReport {
    pub const CSV_HEADER: [&'static str; 6] =
        ["alpha", "ly_lower", "gaussian_upper", "pekar_upper", "numeric", "two_term"];

    /// Summary row; absent values are empty fields.
    pub fn csv_record(&self) -> [String; 6] {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.12e}"));
        [
            format!("{}", self.alpha),
            format!("{:.12e}", self.ly_lower),
            format!("{:.12e}", self.gaussian_upper),
            format!("{:.12e}", self.pekar_upper),
            opt(self.numeric_energy),
            opt(self.two_term.map(|t| t.original_units)),
        ]
    }
}

/// Assemble the bounds at `alpha` and check
/// `ly_lower <= numeric <= pekar_upper <= gaussian_upper`.
pub fn sandwich(alpha: f64, e_pek: f64, numeric: Option<f64>) -> Result<BoundsReport> {
    let ly_lower = ly_lower_bound(alpha)?;
    let gaussian_upper = alpha * alpha * gaussian::BEST_ENERGY;
    let pekar_upper = alpha * alpha * e_pek;
    let named = [
        ("ly_lower", Some(ly_lower)),
        ("numeric", numeric),
        ("pekar_upper", Some(pekar_upper)),
        ("gaussian_upper", Some(gaussian_upper)),
    ];
    let present: Vec<(&str, f64)> = named.iter().filter_map(|(n, v)| v.map(|x| (*n, x))).collect();
    for w in present.windows(2) {
        if w[0].1 > w[1].1 {
            return Err(Error::Consistency(format!(
                "{} = {} exceeds {} = {}",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
    }
    let ly_intermediate = if alpha > 0.0 {
        Some(ly_intermediate(alpha, 8.0 * alpha / (3.0 * PI))?)
    } else {
        None
    };
    Ok(BoundsReport {
        alpha,
        ly_lower,
        ly_intermediate,
        gaussian_upper,
        pekar_upper,
        two_term: None,
        cutoff_errors: None,
        numeric_energy: numeric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((ly_lower_bound(1.0).unwrap() + 2.0403796460924681).abs() < 1e-14);
        assert_eq!(ly_lower_bound(0.0).unwrap(), -1.5);
        assert!((ly_lower_bound(10.0).unwrap() + 55.53796460924681).abs() < 1e-12);
        assert!((chi_norm(4.0 * PI / 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((cutoff_error_norms(4.0 * PI).unwrap().order1 - 1.0).abs() < 1e-15);
        let r = cutoff_error_norms(1.3).unwrap().order3 / cutoff_error_norms(2.6).unwrap().order3;
        assert!((r - 2f64.powf(2.5)).abs() < 1e-12);
    }

    #[test]
    fn intermediate_reduces_to_final_bound() {
        let a = 3.0;
        let m = ly_intermediate(a, 8.0 * a / (3.0 * PI)).unwrap();
        assert!(m.kinetic_prefactor.abs() < 1e-15);
        assert!((m.energy_bound.unwrap() - ly_lower_bound(a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ordering_violation_names_pair() {
        let err = sandwich(1.0, -0.1085, Some(-3.0)).unwrap_err();
        assert!(err.to_string().contains("ly_lower"));
        assert!(sandwich(1.0, -0.1085, None).is_ok());
    }

    #[test]
    fn two_term_signs() {
        assert_eq!(two_term_prediction(-1.0, 0.0, 2.0).unwrap().strong_coupling_units, -1.0);
        assert!(two_term_prediction(-1.0, 0.1, 2.0).is_err());
    }
}
