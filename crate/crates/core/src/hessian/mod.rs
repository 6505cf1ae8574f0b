//! Hessian of the confined classical field energy at the Pekar minimizer,
//! `1 - K` with
//! `K = 4 g^2 (-Delta)^{-1/2} psi Q (H_el - mu)^{-1} Q psi (-Delta)^{-1/2}`.
//!
//! Because `psi` is radial, `psi * phi_{l,n,m}` stays in sector `(l, m)` and
//! `K` is block diagonal with identical blocks for every `m`. Each block is
//! assembled from the electron Hamiltonian of that sector only.

pub mod gaunt;

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sorted_eigen;
use crate::par;
use crate::pekar::{solve_pekar_ball, BallOptions, BallPekarData, FieldCoupling, PekarSolution};
use crate::radial::bessel::sph_jn;
use crate::radial::{BallBasis, RadialGrid};
use gaunt::gaunt_m0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HessianOptions {
    pub l_max: usize,
    /// Field modes per angular sector.
    pub n_radial: usize,
    /// Electron modes per angular sector, used for the resolvent.
    pub n_electron: usize,
    pub coupling: FieldCoupling,
    pub pekar_tol: f64,
}

impl Default for HessianOptions {
    fn default() -> Self {
        Self {
            l_max: 6,
            n_radial: 8,
            n_electron: 16,
            coupling: FieldCoupling::Literal,
            pekar_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HessianKind {
    Ball,
    FreeApprox,
}

/// One angular block of `K`.
#[derive(Debug, Clone)]
pub struct SectorReport {
    pub l: usize,
    pub matrix: DMatrix<f64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `(2l + 1) sum_n (sqrt(1 - lambda_n) - 1)`.
    pub contribution: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub l_max: usize,
    pub n_radial: usize,
    pub n_electron: usize,
    pub trace: f64,
}

#[derive(Debug, Clone)]
pub struct HessianReport {
    pub kind: HessianKind,
    pub radius: f64,
    pub options: HessianOptions,
    pub pekar_energy: f64,
    pub mu: f64,
    pub sectors: Vec<SectorReport>,
    pub trace_correction: f64,
    /// Geometric extrapolation of the sector contributions beyond `l_max`;
    /// reported separately and never folded into `trace_correction`.
    pub tail_estimate: Option<f64>,
    pub max_eigenvalue: f64,
    pub convergence: Vec<TracePoint>,
}

impl HessianReport {
    /// `(l, n, eigenvalue)` rows, `n` zero based.
    pub fn eigenvalue_rows(&self) -> Vec<(usize, usize, f64)> {
        self.sectors
            .iter()
            .flat_map(|s| s.eigenvalues.iter().enumerate().map(move |(n, &v)| (s.l, n, v)))
            .collect()
    }

    pub fn sector(&self, l: usize) -> Option<&SectorReport> {
        self.sectors.iter().find(|s| s.l == l)
    }
}

/// `sum_l (2l + 1) sum_n (sqrt(1 - lambda_{l,n}) - 1)` in ascending `l`,
/// ascending `n` order.
pub fn fluctuation_trace(sectors: &[(usize, Vec<f64>)]) -> Result<f64> {
    let mut total = 0.0;
    for (l, eigs) in sectors {
        total += sector_contribution(*l, eigs)?;
    }
    Ok(total)
}

fn sector_contribution(l: usize, eigs: &[f64]) -> Result<f64> {
    let mut sorted = eigs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut s = 0.0;
    for &lambda in &sorted {
        if lambda >= 1.0 {
            return Err(Error::NonDegeneracy {
                sector: l,
                eigenvalue: lambda,
            });
        }
        s += (1.0 - lambda).sqrt() - 1.0;
    }
    Ok((2 * l + 1) as f64 * s)
}

/// Geometric continuation of the last three sector contributions.
fn geometric_tail(contribs: &[f64]) -> Option<f64> {
    if contribs.len() < 3 {
        return None;
    }
    let n = contribs.len();
    let (a, b, c) = (contribs[n - 3], contribs[n - 2], contribs[n - 1]);
    if a == 0.0 || b == 0.0 {
        return None;
    }
    let q = 0.5 * (b / a + c / b);
    (q > 0.0 && q < 1.0).then(|| c * q / (1.0 - q))
}

/// Field perturbation with `m = 0` components, indexed `[l][n]`.
pub type FieldVector = Vec<Vec<f64>>;

/// Quadrature data and the confined Pekar minimizer for Hessian work.
#[derive(Debug, Clone)]
pub struct HessianSetup {
    pub radius: f64,
    pub options: HessianOptions,
    pub basis: Arc<BallBasis>,
    pub solution: PekarSolution,
    nodes: Vec<f64>,
    /// Quadrature weight times `r^2`.
    weights: Vec<f64>,
    psi: Vec<f64>,
    v0: Vec<f64>,
    electron_values: Vec<DMatrix<f64>>,
    field_values: Vec<DMatrix<f64>>,
}

impl HessianSetup {
    /// Solve the ball Pekar problem in the `l = 0` part of the basis and
    /// prepare all sectors up to `l_max`.
    pub fn new(radius: f64, options: HessianOptions) -> Result<Self> {
        if options.n_radial == 0 || options.n_electron < 2 {
            return Err(Error::parameter(
                "n_radial",
                "need n_radial >= 1 and n_electron >= 2",
            ));
        }
        let n_sector = options.n_radial.max(options.n_electron);
        let basis = BallBasis::with_sector_size(radius, options.l_max, n_sector)?;
        let pekar = BallOptions {
            coupling: options.coupling,
            n_electron: Some(options.n_electron),
            n_field: Some(options.n_radial),
            tol: options.pekar_tol,
            ..BallOptions::default()
        };
        let solution = solve_pekar_ball(&basis, &pekar)?;
        Self::with_solution(basis, solution, options)
    }

    fn with_solution(basis: BallBasis, solution: PekarSolution, options: HessianOptions) -> Result<Self> {
        let data = ball_data(&solution)?;
        let radius = basis.radius;
        let k_el = (0..=options.l_max)
            .map(|l| basis.sectors[l].zeros[options.n_electron - 1])
            .fold(0.0, f64::max)
            / radius;
        let k_f = (0..=options.l_max)
            .map(|l| basis.sectors[l].zeros[options.n_radial - 1])
            .fold(0.0, f64::max)
            / radius;
        let grid: RadialGrid = crate::radial::ball::overlap_grid(radius, 1.05 * (2.0 * k_el + 2.0 * k_f));
        let weights: Vec<f64> = grid
            .points
            .iter()
            .zip(&grid.weights)
            .map(|(r, w)| w * r * r)
            .collect();
        let psi: Vec<f64> = grid.points.iter().map(|&r| data.psi_at(r)).collect();
        let v0: Vec<f64> = grid.points.iter().map(|&r| data.potential_at(r)).collect();
        let values = par::map_range(options.l_max + 1, |l| basis.sector_values(l, &grid));
        let electron_values = values
            .iter()
            .map(|m| m.columns(0, options.n_electron).into_owned())
            .collect();
        let field_values = values
            .iter()
            .map(|m| m.columns(0, options.n_radial).into_owned())
            .collect();
        Ok(Self {
            radius,
            options,
            basis: Arc::new(basis),
            solution,
            nodes: grid.points,
            weights,
            psi,
            v0,
            electron_values,
            field_values,
        })
    }

    fn data(&self) -> &BallPekarData {
        self.solution.ball.as_ref().expect("ball solution")
    }

    fn g(&self) -> f64 {
        self.options.coupling.strength().sqrt()
    }

    fn field_energies(&self, l: usize) -> &[f64] {
        &self.basis.sectors[l].energies[..self.options.n_radial]
    }

    fn electron_energies(&self, l: usize) -> &[f64] {
        &self.basis.sectors[l].energies[..self.options.n_electron]
    }

    /// `E_a^T diag(w f) E_b` over the quadrature nodes.
    fn weighted_overlap(&self, a: &DMatrix<f64>, f: &[f64], b: &DMatrix<f64>) -> DMatrix<f64> {
        let mut scaled = b.clone();
        for (q, (w, fq)) in self.weights.iter().zip(f).enumerate() {
            let s = w * fq;
            for c in 0..scaled.ncols() {
                scaled[(q, c)] *= s;
            }
        }
        a.transpose() * scaled
    }

    /// Electron Hamiltonian `-Delta + V_{phi^Pek}` in sector `l`.
    pub fn electron_hamiltonian(&self, l: usize) -> DMatrix<f64> {
        let e = &self.electron_values[l];
        let mut h = self.weighted_overlap(e, &self.v0, e);
        for (a, ea) in self.electron_energies(l).iter().enumerate() {
            h[(a, a)] += ea;
        }
        crate::linalg::symmetrize(&mut h);
        h
    }

    /// `B[a, i] = int u_{l,a} psi u_{l,i} r^2 dr`.
    pub fn coupling_matrix(&self, l: usize) -> DMatrix<f64> {
        self.weighted_overlap(&self.electron_values[l], &self.psi, &self.field_values[l])
    }

    /// The block `K_l`.
    pub fn build_k(&self, l: usize) -> Result<DMatrix<f64>> {
        if l > self.options.l_max {
            return Err(Error::parameter("l", format!("sector {l} above l_max")));
        }
        let mu = self.solution.mu;
        let (eps, u) = sorted_eigen(self.electron_hamiltonian(l));
        let b = self.coupling_matrix(l);
        let mut proj = u.transpose() * b;
        let skip = if l == 0 {
            // Q removes psi; locate it as the eigenvector with the largest
            // overlap with the Pekar coefficients.
            let c = DVector::from_column_slice(&self.data().psi_coefficients);
            let overlaps: Vec<f64> = (0..u.ncols()).map(|k| u.column(k).dot(&c).abs()).collect();
            let best = (0..u.ncols())
                .max_by(|&a, &b| overlaps[a].total_cmp(&overlaps[b]))
                .unwrap();
            Some(best)
        } else {
            None
        };
        let g = self.g();
        let fe = self.field_energies(l).to_vec();
        for k in 0..u.ncols() {
            if Some(k) == skip {
                proj.row_mut(k).fill(0.0);
                continue;
            }
            let gap = eps[k] - mu;
            if gap <= 1e-8 {
                return Err(Error::Singular(format!(
                    "electron level {} in sector {l} is within {gap:e} of mu",
                    eps[k]
                )));
            }
            let s = 2.0 * g / gap.sqrt();
            for (i, e) in fe.iter().enumerate() {
                proj[(k, i)] *= s / e.sqrt();
            }
        }
        Ok(proj.transpose() * proj)
    }

    fn sector_report(&self, l: usize) -> Result<SectorReport> {
        let matrix = self.build_k(l)?;
        let (vals, _) = sorted_eigen(matrix.clone());
        let mut eigenvalues: Vec<f64> = vals.iter().copied().collect();
        eigenvalues.reverse();
        if let Some(&bad) = eigenvalues.iter().find(|&&v| v < -1e-8) {
            return Err(Error::Numerical(format!(
                "K has eigenvalue {bad:e} below zero in sector {l}"
            )));
        }
        let contribution = sector_contribution(l, &eigenvalues)?;
        Ok(SectorReport {
            l,
            matrix,
            eigenvalues,
            contribution,
        })
    }

    pub fn report(&self, kind: HessianKind) -> Result<HessianReport> {
        let sectors = par::map_range(self.options.l_max + 1, |l| self.sector_report(l))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        // Fixed ascending order for the reduction.
        let mut trace = 0.0;
        for s in &sectors {
            trace += s.contribution;
        }
        let contribs: Vec<f64> = sectors.iter().map(|s| s.contribution).collect();
        let max_eigenvalue = sectors
            .iter()
            .flat_map(|s| s.eigenvalues.first().copied())
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(HessianReport {
            kind,
            radius: self.radius,
            options: self.options,
            pekar_energy: self.solution.energy,
            mu: self.solution.mu,
            sectors,
            trace_correction: trace,
            tail_estimate: geometric_tail(&contribs),
            max_eigenvalue,
            convergence: vec![TracePoint {
                l_max: self.options.l_max,
                n_radial: self.options.n_radial,
                n_electron: self.options.n_electron,
                trace,
            }],
        })
    }

    /// The Pekar field as a [`FieldVector`].
    pub fn pekar_field(&self) -> FieldVector {
        let mut v = vec![vec![0.0; self.options.n_radial]; self.options.l_max + 1];
        v[0].copy_from_slice(&self.data().field_coefficients[..self.options.n_radial]);
        v
    }

    /// `kappa(phi) = min sigma(-Delta + V_phi)` over the `m = 0` electron
    /// sectors `l <= l_max`, with
    /// `V_phi = -2 g (-Delta)^{-1/2} phi`.
    pub fn kappa(&self, phi: &FieldVector) -> Result<f64> {
        let lm = self.options.l_max;
        if phi.len() != lm + 1 || phi.iter().any(|p| p.len() != self.options.n_radial) {
            return Err(Error::parameter("phi", "field vector shape does not match the setup"));
        }
        let g = self.g();
        // Radial profiles f_L(r) of V_phi, one per field sector.
        let profiles: Vec<Vec<f64>> = (0..=lm)
            .map(|l| {
                let coef: Vec<f64> = phi[l]
                    .iter()
                    .zip(self.field_energies(l))
                    .map(|(c, e)| -2.0 * g * c / e.sqrt())
                    .collect();
                let f = &self.field_values[l] * DVector::from_vec(coef);
                f.iter().copied().collect()
            })
            .collect();
        let ne = self.options.n_electron;
        let dim = ne * (lm + 1);
        let mut h = DMatrix::zeros(dim, dim);
        for l1 in 0..=lm {
            for (a, e) in self.electron_energies(l1).iter().enumerate() {
                h[(l1 * ne + a, l1 * ne + a)] += e;
            }
            for l2 in l1..=lm {
                let mut f = vec![0.0; self.nodes.len()];
                let mut any = false;
                for (big_l, prof) in profiles.iter().enumerate() {
                    let gnt = gaunt_m0(l1, big_l, l2);
                    if gnt == 0.0 || prof.iter().all(|&x| x == 0.0) {
                        continue;
                    }
                    any = true;
                    for (fq, pq) in f.iter_mut().zip(prof) {
                        *fq += gnt * pq;
                    }
                }
                if !any {
                    continue;
                }
                let block =
                    self.weighted_overlap(&self.electron_values[l1], &f, &self.electron_values[l2]);
                for a in 0..ne {
                    for b in 0..ne {
                        h[(l1 * ne + a, l2 * ne + b)] += block[(a, b)];
                        if l1 != l2 {
                            h[(l2 * ne + b, l1 * ne + a)] += block[(a, b)];
                        }
                    }
                }
            }
        }
        crate::linalg::symmetrize(&mut h);
        let (vals, _) = sorted_eigen(h);
        Ok(vals[0])
    }

    /// `F(phi) = kappa(phi) + |phi|^2`.
    pub fn field_functional(&self, phi: &FieldVector) -> Result<f64> {
        let norm: f64 = phi.iter().flatten().map(|v| v * v).sum();
        Ok(self.kappa(phi)? + norm)
    }

    /// `<delta | 1 - K | delta>` from the assembled blocks.
    pub fn quadratic_form(&self, delta: &FieldVector) -> Result<f64> {
        let mut s = 0.0;
        for (l, d) in delta.iter().enumerate() {
            let x = DVector::from_column_slice(d);
            let k = self.build_k(l)?;
            s += x.dot(&x) - x.dot(&(&k * &x));
        }
        Ok(s)
    }

    /// Symmetric second difference of `F` at the Pekar field along `delta`.
    pub fn finite_difference_form(&self, delta: &FieldVector, eps: f64) -> Result<f64> {
        let base = self.pekar_field();
        let shifted = |sign: f64| -> FieldVector {
            base.iter()
                .zip(delta)
                .map(|(b, d)| b.iter().zip(d).map(|(x, y)| x + sign * eps * y).collect())
                .collect()
        };
        let fp = self.field_functional(&shifted(1.0))?;
        let fm = self.field_functional(&shifted(-1.0))?;
        let f0 = self.field_functional(&base)?;
        Ok((fp + fm - 2.0 * f0) / (2.0 * eps * eps))
    }

    /// `l = 1, m = 0` coefficients of `d phi^Pek / dz`.
    pub fn translation_mode(&self) -> Vec<f64> {
        let data = self.data();
        let s0 = &self.basis.sectors[0];
        let y00 = 1.0 / (4.0 * PI).sqrt();
        let r_ball = self.radius;
        let dphi: Vec<f64> = self
            .nodes
            .iter()
            .map(|&r| {
                data.field_coefficients
                    .iter()
                    .enumerate()
                    .map(|(j, f)| {
                        let z = s0.zeros[j];
                        -f * s0.norms[j] * (z / r_ball) * sph_jn(1, z * r / r_ball)
                    })
                    .sum::<f64>()
                    * y00
            })
            .collect();
        let c = (4.0 * PI / 3.0).sqrt();
        let f1 = &self.field_values[1];
        (0..self.options.n_radial)
            .map(|n| {
                c * (0..self.nodes.len())
                    .map(|q| self.weights[q] * dphi[q] * f1[(q, n)])
                    .sum::<f64>()
            })
            .collect()
    }
}

fn ball_data(sol: &PekarSolution) -> Result<&BallPekarData> {
    sol.ball
        .as_ref()
        .ok_or_else(|| Error::Domain("Hessian needs a ball Pekar solution".into()))
}

/// Hessian report on a ball with the literal coupling of the options.
pub fn hessian_ball(radius: f64, options: HessianOptions) -> Result<HessianReport> {
    HessianSetup::new(radius, options)?.report(HessianKind::Ball)
}

/// Trace values under successive doublings of `(l_max, n_radial, n_electron)`.
///
/// The raw trace approaches its limit like `1 / l_max` because the sector
/// contributions fall off like `l^{-2}`. `extrapolated[k]` removes the
/// `1/s` and `1/s^2` terms from points `k, k+1, k+2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub points: Vec<TracePoint>,
    pub extrapolated: Vec<f64>,
}

impl TraceSeries {
    fn rel_change(a: f64, b: f64) -> f64 {
        (b - a).abs() / b.abs()
    }

    /// Relative change of the raw trace over the last doubling.
    pub fn raw_change(&self) -> Option<f64> {
        let n = self.points.len();
        (n >= 2).then(|| Self::rel_change(self.points[n - 2].trace, self.points[n - 1].trace))
    }

    /// Relative change of the extrapolated trace over the last doubling.
    pub fn extrapolated_change(&self) -> Option<f64> {
        let n = self.extrapolated.len();
        (n >= 2).then(|| Self::rel_change(self.extrapolated[n - 2], self.extrapolated[n - 1]))
    }
}

/// Two-stage Richardson extrapolation for a sequence at doubling scales with
/// error `a/s + b/s^2 + ...`.
pub fn richardson_doubling(values: &[f64]) -> Vec<f64> {
    let first: Vec<f64> = values.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    first.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect()
}

pub fn trace_convergence(radius: f64, options: HessianOptions, doublings: usize) -> Result<TraceSeries> {
    let mut points = Vec::new();
    let mut o = options;
    for _ in 0..=doublings {
        let rep = hessian_ball(radius, o)?;
        points.push(rep.convergence[0]);
        o.l_max *= 2;
        o.n_radial *= 2;
        o.n_electron *= 2;
    }
    let raw: Vec<f64> = points.iter().map(|p| p.trace).collect();
    Ok(TraceSeries {
        extrapolated: richardson_doubling(&raw),
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeroModeOptions {
    /// Field modes per sector cover wave numbers up to this value.
    pub k_field: f64,
    /// Electron modes per sector cover wave numbers up to this value.
    pub k_electron: f64,
    pub pekar_tol: f64,
}

impl Default for ZeroModeOptions {
    fn default() -> Self {
        Self {
            k_field: 2.0 * PI,
            k_electron: 3.0 * PI,
            pekar_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroModePoint {
    pub radius: f64,
    pub n_radial: usize,
    pub n_electron: usize,
    pub pekar_energy: f64,
    pub l0_max: f64,
    pub l1_max: f64,
    /// `|(1 - K_1) t| / |t|` for the translation mode `t = d phi / dz`.
    pub translation_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroModeSeries {
    pub points: Vec<ZeroModePoint>,
    /// `lim_{R -> inf}` of the `l = 1` maximum from a fit
    /// `lambda(R) = lambda_inf - A R^{-3} - B R^{-4}` through the last three
    /// radii.
    pub extrapolated_l1: Option<f64>,
    pub monotone: bool,
    pub warnings: Vec<String>,
}

/// Largest `l = 0` and `l = 1` eigenvalues of `K` on balls of growing
/// radius, with the free-space normalization of the kernel.
pub fn free_zero_modes(radii: &[f64], options: &ZeroModeOptions) -> Result<ZeroModeSeries> {
    let mut points = Vec::new();
    for &radius in radii {
        let count = |k: f64| ((k * radius / PI).ceil() as usize).max(2);
        let opts = HessianOptions {
            l_max: 1,
            n_radial: count(options.k_field),
            n_electron: count(options.k_electron),
            coupling: FieldCoupling::FreeSpaceMatched,
            pekar_tol: options.pekar_tol,
        };
        let setup = HessianSetup::new(radius, opts)?;
        let rep = setup.report(HessianKind::FreeApprox)?;
        let t = DVector::from_vec(setup.translation_mode());
        let k1 = &rep.sector(1).expect("l = 1 sector").matrix;
        let residual = (&t - k1 * &t).norm() / t.norm();
        points.push(ZeroModePoint {
            radius,
            n_radial: opts.n_radial,
            n_electron: opts.n_electron,
            pekar_energy: rep.pekar_energy,
            l0_max: rep.sector(0).unwrap().eigenvalues[0],
            l1_max: rep.sector(1).unwrap().eigenvalues[0],
            translation_residual: residual,
        });
    }
    let monotone = points.windows(2).all(|w| w[1].l1_max > w[0].l1_max);
    let mut warnings = Vec::new();
    if !monotone {
        warnings.push("l = 1 maximum is not increasing with the radius".to_string());
    }
    // A displaced field feels the wall through its dipole image, so
    // 1 - lambda_1 falls like R^{-3}; the next multipole order is R^{-4}.
    let extrapolated_l1 = if points.len() >= 3 {
        let n = points.len();
        let p3: Vec<(f64, f64)> = points[n - 3..].iter().map(|p| (p.radius, p.l1_max)).collect();
        let lim = richardson_known_powers(&p3, 3.0, 4.0);
        if lim.is_none() {
            warnings.push("extrapolation in the radius failed".to_string());
        }
        lim
    } else {
        None
    };
    Ok(ZeroModeSeries {
        points,
        extrapolated_l1,
        monotone,
        warnings,
    })
}

/// Limit of `y = y_inf - A x^{-p1} - B x^{-p2}` through three points.
pub fn richardson_known_powers(pts: &[(f64, f64)], p1: f64, p2: f64) -> Option<f64> {
    if pts.len() != 3 {
        return None;
    }
    let m = DMatrix::from_fn(3, 3, |i, j| match j {
        0 => 1.0,
        1 => -pts[i].0.powf(-p1),
        _ => -pts[i].0.powf(-p2),
    });
    let rhs = DVector::from_iterator(3, pts.iter().map(|p| p.1));
    m.lu().solve(&rhs).map(|x| x[0])
}
