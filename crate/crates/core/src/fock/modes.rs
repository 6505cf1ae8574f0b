//! Finite phonon mode sets: momentum cells for the translation invariant
//! model, Dirichlet modes of a ball or an interval for the confined one.

use std::collections::HashMap;
use std::f64::consts::PI;

use quadrature::double_exponential::integrate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radial::BallBasis;

/// How a cutoff `Lambda` on Dirichlet modes is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffConvention {
    /// Keep `e_j <= Lambda^2`.
    #[default]
    Momentum,
    /// Keep `e_j <= Lambda`.
    Energy,
}

impl CutoffConvention {
    pub fn energy_cutoff(self, lambda: f64) -> f64 {
        match self {
            CutoffConvention::Momentum => lambda * lambda,
            CutoffConvention::Energy => lambda,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaConvention {
    /// `H = -Delta - sqrt(alpha) (a(v) + a^dag(v)) + N` with standard CCR.
    #[default]
    OriginalUnits,
    /// Lengths scaled by `alpha^{-1}`, energies by `alpha^{-2}`, CCR
    /// `[a, a^dag] = alpha^{-2}`.
    StrongCouplingUnits,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModeOrigin {
    FreeCubes { k_cut: f64, eps: f64 },
    BallModes { radius: f64, lambda: f64, convention: CutoffConvention },
    IntervalModes { length: f64, lambda: f64, convention: CutoffConvention },
}

/// Spatial profile of a confined mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Profile {
    /// Ball mode `u_{l,n}(r) Y_{l,m}`, `n` zero based.
    Ball { l: usize, n: usize, m: i64 },
    /// `sqrt(2/L) sin(n pi x / L)`, `n >= 1`.
    Interval { n: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub coupling: f64,
    /// Cell centre for momentum modes, zero for confined modes.
    pub momentum: [f64; 3],
    /// Laplacian eigenvalue of confined modes, `|k|^2` of momentum modes.
    pub energy: f64,
    pub profile: Option<Profile>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellBookkeeping {
    pub centers_inside: usize,
    pub cells_inside: usize,
    pub cells_intersecting: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSet {
    pub modes: Vec<Mode>,
    pub origin: ModeOrigin,
    pub alpha_convention: AlphaConvention,
    pub cells: Option<CellBookkeeping>,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn coupling_sum_sq(&self) -> f64 {
        self.modes.iter().map(|m| m.coupling * m.coupling).sum()
    }

    /// A single momentum mode with the given coupling, for closed-form
    /// checks.
    pub fn single(coupling: f64, momentum: [f64; 3]) -> Self {
        Self {
            modes: vec![Mode {
                coupling,
                momentum,
                energy: momentum.iter().map(|k| k * k).sum(),
                profile: None,
            }],
            origin: ModeOrigin::FreeCubes {
                k_cut: 0.0,
                eps: 0.0,
            },
            alpha_convention: AlphaConvention::OriginalUnits,
            cells: None,
        }
    }
}

/// `int |k|^{-2} dk` over `[x0,x1] x [y0,y1] x [z0,z1]` intersected with
/// `|k| < radius`, for a box in the closed first octant.
///
/// The `z` integral is done in closed form; `x` and `y` by double
/// exponential quadrature split at every kink of the integrand.
pub fn cell_inverse_square_integral(lo: [f64; 3], hi: [f64; 3], radius: f64) -> f64 {
    let [x0, y0, z0] = lo;
    let [x1, y1, z1] = hi;
    let k2 = radius * radius;
    let crit = [k2 - z1 * z1, k2 - z0 * z0];
    let column = |x: f64, y: f64| -> f64 {
        let rho2 = x * x + y * y;
        if rho2 >= k2 {
            return 0.0;
        }
        let zb = z1.min((k2 - rho2).sqrt());
        if zb <= z0 {
            return 0.0;
        }
        if rho2 == 0.0 {
            return 1.0 / z0 - 1.0 / zb;
        }
        let rho = rho2.sqrt();
        ((zb / rho).atan() - (z0 / rho).atan()) / rho
    };
    let strip = |x: f64| -> f64 {
        let mut cuts = vec![y0, y1];
        for c in crit {
            let d = c - x * x;
            if d > 0.0 {
                let y = d.sqrt();
                if y > y0 && y < y1 {
                    cuts.push(y);
                }
            }
        }
        piecewise(&mut cuts, |y| column(x, y))
    };
    let mut cuts = vec![x0, x1];
    for c in crit {
        for ye in [y0, y1] {
            let d = c - ye * ye;
            if d > 0.0 {
                let x = d.sqrt();
                if x > x0 && x < x1 {
                    cuts.push(x);
                }
            }
        }
    }
    piecewise(&mut cuts, strip)
}

fn piecewise(cuts: &mut [f64], f: impl Fn(f64) -> f64) -> f64 {
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| integrate(&f, w[0], w[1], 1e-15).integral)
        .sum()
}

/// Cubes of side `eps` centred on the lattice `eps (Z + 1/2)^3`, one mode
/// per cube meeting the ball `|k| < k_cut`. The coupling is
/// `g_j^2 = alpha / (2 pi^2) int_{C_j, |k| < k_cut} |k|^{-2} dk`, so cubes cut
/// by the sphere keep their exact share and `sum_j g_j^2 = 2 alpha k_cut / pi`.
pub fn discretize_modes_free(alpha: f64, k_cut: f64, eps: f64, max_modes: usize) -> Result<ModeSet> {
    if !(eps > 0.0 && k_cut > 0.0 && k_cut.is_finite()) {
        return Err(Error::parameter("eps", format!("need k_cut, eps > 0 (got {k_cut}, {eps})")));
    }
    if !(alpha >= 0.0) {
        return Err(Error::parameter("alpha", "must be nonnegative"));
    }
    let n_side = (k_cut / eps).ceil() as i64;
    // Cells per octant meeting the ball, before anything is allocated.
    let count_octant = (0..n_side)
        .flat_map(|i| (0..n_side).flat_map(move |j| (0..n_side).map(move |k| [i, j, k])))
        .filter(|c| nearest_sq(c, eps) < k_cut * k_cut)
        .count();
    let needed = 8 * count_octant;
    if needed > max_modes {
        return Err(Error::Budget {
            what: "phonon modes".into(),
            needed: needed as u128,
            cap: max_modes as u128,
        });
    }
    let mut cache: HashMap<[i64; 3], f64> = HashMap::new();
    let mut modes = Vec::with_capacity(needed);
    let mut book = CellBookkeeping {
        centers_inside: 0,
        cells_inside: 0,
        cells_intersecting: 0,
    };
    let pref = alpha / (2.0 * PI * PI);
    for i in -n_side..n_side {
        for j in -n_side..n_side {
            for k in -n_side..n_side {
                // Octant image with nonnegative indices.
                let fold = |v: i64| if v < 0 { -v - 1 } else { v };
                let c = [fold(i), fold(j), fold(k)];
                if nearest_sq(&c, eps) >= k_cut * k_cut {
                    continue;
                }
                let mut key = c;
                key.sort_unstable();
                let integral = *cache.entry(key).or_insert_with(|| {
                    let lo = key.map(|v| v as f64 * eps);
                    let hi = key.map(|v| (v + 1) as f64 * eps);
                    cell_inverse_square_integral(lo, hi, k_cut)
                });
                let center = [i, j, k].map(|v| (v as f64 + 0.5) * eps);
                let c2: f64 = center.iter().map(|x| x * x).sum();
                book.cells_intersecting += 1;
                if c2 < k_cut * k_cut {
                    book.centers_inside += 1;
                }
                if farthest_sq(&c, eps) <= k_cut * k_cut {
                    book.cells_inside += 1;
                }
                modes.push(Mode {
                    coupling: (pref * integral).sqrt(),
                    momentum: center,
                    energy: c2,
                    profile: None,
                });
            }
        }
    }
    Ok(ModeSet {
        modes,
        origin: ModeOrigin::FreeCubes { k_cut, eps },
        alpha_convention: AlphaConvention::OriginalUnits,
        cells: Some(book),
    })
}

fn nearest_sq(c: &[i64; 3], eps: f64) -> f64 {
    c.iter().map(|&v| (v as f64 * eps).powi(2)).sum()
}

fn farthest_sq(c: &[i64; 3], eps: f64) -> f64 {
    c.iter().map(|&v| ((v + 1) as f64 * eps).powi(2)).sum()
}

/// Dirichlet modes of a ball below the cutoff, each with its `2l + 1`
/// azimuthal copies and coupling `e_j^{-1/2}`.
pub fn modes_from_ball(basis: &BallBasis, lambda: f64, convention: CutoffConvention) -> Result<ModeSet> {
    let e_cut = convention.energy_cutoff(lambda);
    if e_cut > basis.e_max * (1.0 + 1e-12) {
        return Err(Error::parameter(
            "lambda",
            format!("cutoff energy {e_cut} exceeds the basis range {}", basis.e_max),
        ));
    }
    let mut modes = Vec::new();
    for s in &basis.sectors {
        for (n, &e) in s.energies.iter().enumerate() {
            if e > e_cut {
                break;
            }
            for m in -(s.l as i64)..=(s.l as i64) {
                modes.push(Mode {
                    coupling: 1.0 / e.sqrt(),
                    momentum: [0.0; 3],
                    energy: e,
                    profile: Some(Profile::Ball { l: s.l, n, m }),
                });
            }
        }
    }
    if modes.is_empty() {
        return Err(Error::EmptyBasis(format!("no ball modes below e = {e_cut}")));
    }
    Ok(ModeSet {
        modes,
        origin: ModeOrigin::BallModes {
            radius: basis.radius,
            lambda,
            convention,
        },
        alpha_convention: AlphaConvention::StrongCouplingUnits,
        cells: None,
    })
}

/// Sine modes of `(0, L)` below the cutoff, coupling `e_n^{-1/2}`.
pub fn modes_from_interval(length: f64, lambda: f64, convention: CutoffConvention) -> Result<ModeSet> {
    if !(length > 0.0) {
        return Err(Error::parameter("length", "must be positive"));
    }
    let e_cut = convention.energy_cutoff(lambda);
    let modes: Vec<Mode> = (1..)
        .map(|n| (n, (n as f64 * PI / length).powi(2)))
        .take_while(|&(_, e)| e <= e_cut)
        .map(|(n, e)| Mode {
            coupling: 1.0 / e.sqrt(),
            momentum: [0.0; 3],
            energy: e,
            profile: Some(Profile::Interval { n }),
        })
        .collect();
    if modes.is_empty() {
        return Err(Error::EmptyBasis(format!("no interval modes below e = {e_cut}")));
    }
    Ok(ModeSet {
        modes,
        origin: ModeOrigin::IntervalModes {
            length,
            lambda,
            convention,
        },
        alpha_convention: AlphaConvention::StrongCouplingUnits,
        cells: None,
    })
}

/// `int_0^L s_a s_j s_b dx` for `s_n = sqrt(2/L) sin(n pi x / L)`.
pub fn interval_triple(length: f64, a: usize, j: usize, b: usize) -> f64 {
    // sin(a t) sin(b t) = (cos((a-b) t) - cos((a+b) t)) / 2 on (0, pi).
    let cos_sin = |m: i64, j: i64| -> f64 {
        if m * m == j * j || (j + m) % 2 == 0 {
            0.0
        } else {
            2.0 * j as f64 / (j * j - m * m) as f64
        }
    };
    let (a, j, b) = (a as i64, j as i64, b as i64);
    let angular = 0.5 * (cos_sin(a - b, j) - cos_sin(a + b, j));
    (2.0 / length).powf(1.5) * length / PI * angular
}
