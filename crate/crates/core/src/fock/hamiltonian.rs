//! Sparse symmetric Hamiltonians on truncated Fock spaces.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::basis::{fock_dimension, FockBasis};
use super::modes::{interval_triple, modes_from_ball, AlphaConvention, CutoffConvention, ModeSet, Profile};
use crate::error::{Error, Result};
use crate::par;
use crate::pekar::{BallPekarData, FieldCoupling};
use crate::radial::BallBasis;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockBudget {
    pub max_dimension: u128,
    pub max_nonzeros: u128,
    pub max_modes: usize,
}

impl Default for FockBudget {
    fn default() -> Self {
        Self {
            max_dimension: 2_000_000,
            max_nonzeros: 60_000_000,
            max_modes: 20_000,
        }
    }
}

impl FockBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_dimension == 0 || self.max_nonzeros == 0 || self.max_modes == 0 {
            return Err(Error::parameter("budget", "budgets must be positive"));
        }
        Ok(())
    }

    fn check_nonzeros(&self, needed: u128) -> Result<()> {
        if needed > self.max_nonzeros {
            return Err(Error::Budget {
                what: "Hamiltonian nonzeros".into(),
                needed,
                cap: self.max_nonzeros,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelTag {
    Fiber,
    ConfinedInterval,
    ConfinedBall,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianMeta {
    pub model: ModelTag,
    pub alpha: f64,
    pub momentum: [f64; 3],
    pub max_phonons: usize,
    pub n_modes: usize,
    pub n_electron: usize,
    pub units: AlphaConvention,
}

/// Compressed sparse rows holding both triangles.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    pub dimension: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    pub meta: HamiltonianMeta,
}

impl SparseHamiltonian {
    fn from_rows(rows: Vec<Vec<(u32, f64)>>, meta: HamiltonianMeta) -> Self {
        let dimension = rows.len();
        let mut row_ptr = Vec::with_capacity(dimension + 1);
        row_ptr.push(0);
        let nnz: usize = rows.iter().map(|r| r.len()).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for mut r in rows {
            r.sort_by_key(|e| e.0);
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            dimension,
            row_ptr,
            cols,
            vals,
            meta,
        }
    }

    /// From a list of `(row, col, value)` upper or full entries; duplicates
    /// add up and the lower triangle is mirrored.
    pub fn from_triplets(dimension: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); dimension];
        for &(i, j, v) in entries {
            if i >= dimension || j >= dimension {
                return Err(Error::parameter("entries", "index out of range"));
            }
            rows[i].push((j as u32, v));
            if i != j {
                rows[j].push((i as u32, v));
            }
        }
        for r in rows.iter_mut() {
            r.sort_by_key(|e| e.0);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(r.len());
            for &(c, v) in r.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            *r = merged;
        }
        let meta = HamiltonianMeta {
            model: ModelTag::Custom,
            alpha: 0.0,
            momentum: [0.0; 3],
            max_phonons: 0,
            n_modes: 0,
            n_electron: 1,
            units: AlphaConvention::OriginalUnits,
        };
        Ok(Self::from_rows(rows, meta))
    }

    pub fn nonzeros(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[a..b].iter().zip(&self.vals[a..b]).map(|(&c, &v)| (c as usize, v))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dimension)
            .map(|i| self.row(i).find(|e| e.0 == i).map_or(0.0, |e| e.1))
            .collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dimension).all(|i| self.row(i).all(|(c, v)| c == i || v == 0.0))
    }

    /// `y = H x`, each row summed in column order.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        par::fill_indexed(y, |i| self.row(i).map(|(c, v)| v * x[c]).sum());
    }

    /// Largest `|H_ij - H_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dimension {
            for (j, v) in self.row(i) {
                let t = self.row(j).find(|e| e.0 == i).map_or(0.0, |e| e.1);
                worst = worst.max((v - t).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dimension, self.dimension);
        for i in 0..self.dimension {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// Fiber Hamiltonian at total momentum `p`:
/// `(p - sum_j n_j k_j)^2 + sum_j n_j - sum_j g_j (a_j + a_j^dag)`.
pub fn assemble_fiber_hamiltonian(
    modes: &ModeSet,
    basis: &FockBasis,
    alpha: f64,
    p: [f64; 3],
    budget: &FockBudget,
) -> Result<SparseHamiltonian> {
    if modes.len() != basis.n_modes {
        return Err(Error::parameter("modes", "mode set and Fock basis disagree"));
    }
    if basis.max_phonons < 1 {
        return Err(Error::parameter("max_phonons", "must be at least 1"));
    }
    let n = modes.len();
    let dim = basis.dimension();
    budget.check_nonzeros(dim as u128 * (1 + n + basis.max_phonons) as u128)?;
    let rows = par::map_range(dim, |s| {
        let state = basis.state(s);
        let mut pf = [0.0; 3];
        for &j in state {
            let k = modes.modes[j as usize].momentum;
            for d in 0..3 {
                pf[d] += k[d];
            }
        }
        let kin: f64 = (0..3).map(|d| (p[d] - pf[d]).powi(2)).sum();
        let mut row = vec![(s as u32, kin + state.len() as f64)];
        ladder_entries(basis, state, &mut row, |j| -modes.modes[j].coupling, 1, 0);
        row
    });
    Ok(SparseHamiltonian::from_rows(
        rows,
        HamiltonianMeta {
            model: ModelTag::Fiber,
            alpha,
            momentum: p,
            max_phonons: basis.max_phonons,
            n_modes: n,
            n_electron: 1,
            units: AlphaConvention::OriginalUnits,
        },
    ))
}

/// Push `weight(j) sqrt(n_j + 1)` and `weight(j) sqrt(n_j)` for creation and
/// annihilation out of `state`, at column `stride * s' + offset`.
fn ladder_entries(
    basis: &FockBasis,
    state: &[u32],
    row: &mut Vec<(u32, f64)>,
    weight: impl Fn(usize) -> f64,
    stride: usize,
    offset: usize,
) {
    let mut buf: Vec<u32> = Vec::with_capacity(state.len() + 1);
    if state.len() < basis.max_phonons {
        for j in 0..basis.n_modes as u32 {
            let w = weight(j as usize);
            if w == 0.0 {
                continue;
            }
            let pos = state.partition_point(|&x| x <= j);
            let nj = state[..pos].iter().rev().take_while(|&&x| x == j).count();
            buf.clear();
            buf.extend_from_slice(&state[..pos]);
            buf.push(j);
            buf.extend_from_slice(&state[pos..]);
            let t = basis.index_of(&buf).expect("raised state in basis");
            row.push(((stride * t + offset) as u32, w * ((nj + 1) as f64).sqrt()));
        }
    }
    let mut i = 0;
    while i < state.len() {
        let j = state[i];
        let mut e = i;
        while e < state.len() && state[e] == j {
            e += 1;
        }
        let w = weight(j as usize);
        if w != 0.0 {
            buf.clear();
            buf.extend_from_slice(&state[..i]);
            buf.extend_from_slice(&state[i + 1..]);
            let t = basis.index_of(&buf).expect("lowered state in basis");
            row.push(((stride * t + offset) as u32, w * ((e - i) as f64).sqrt()));
        }
        i = e;
    }
}

/// Electron-phonon model in strong-coupling units on a confined domain:
/// `sum_a e_a |a><a| + alpha^{-2} sum_j b_j^dag b_j
///  - alpha^{-1} sum_j c_j <a|u_j|b> (b_j + b_j^dag)` with standard CCR.
#[derive(Debug, Clone)]
pub struct ConfinedModel {
    pub model: ModelTag,
    pub electron_energies: Vec<f64>,
    /// `c_j = g e_j^{-1/2}`.
    pub phonon_couplings: Vec<f64>,
    /// `triple[j][(a, b)] = <a| u_j |b>`.
    pub triple: Vec<DMatrix<f64>>,
}

impl ConfinedModel {
    /// Sine electron modes `1..=n_el` on `(0, L)` with the phonon modes of an
    /// interval mode set; the interaction kernel uses closed-form triple
    /// products.
    pub fn interval(modes: &ModeSet, n_el: usize) -> Result<Self> {
        let length = match modes.origin {
            super::modes::ModeOrigin::IntervalModes { length, .. } => length,
            _ => return Err(Error::parameter("modes", "interval model needs interval modes")),
        };
        if n_el == 0 {
            return Err(Error::parameter("n_electron", "must be positive"));
        }
        let electron_energies = (1..=n_el)
            .map(|a| (a as f64 * std::f64::consts::PI / length).powi(2))
            .collect();
        let mut triple = Vec::with_capacity(modes.len());
        for m in &modes.modes {
            let j = match m.profile {
                Some(Profile::Interval { n }) => n,
                _ => return Err(Error::parameter("modes", "missing interval profile")),
            };
            triple.push(DMatrix::from_fn(n_el, n_el, |a, b| {
                interval_triple(length, a + 1, j, b + 1)
            }));
        }
        Ok(Self {
            model: ModelTag::ConfinedInterval,
            electron_energies,
            phonon_couplings: modes.modes.iter().map(|m| m.coupling).collect(),
            triple,
        })
    }

    /// Radial electron and phonon modes of a ball (`l = 0` only) below the
    /// cutoff.
    pub fn ball_s_wave(
        basis: &BallBasis,
        n_el: usize,
        lambda: f64,
        convention: CutoffConvention,
        coupling: FieldCoupling,
    ) -> Result<Self> {
        let all = modes_from_ball(basis, lambda, convention)?;
        let n_field = all
            .modes
            .iter()
            .filter(|m| matches!(m.profile, Some(Profile::Ball { l: 0, .. })))
            .count();
        if n_field == 0 {
            return Err(Error::EmptyBasis("no l = 0 phonon modes below the cutoff".into()));
        }
        let data = BallPekarData::new(basis, n_el, n_field, coupling)?;
        let g = coupling.strength().sqrt();
        Ok(Self {
            model: ModelTag::ConfinedBall,
            electron_energies: data.electron_energies.clone(),
            phonon_couplings: data.field_energies.iter().map(|e| g / e.sqrt()).collect(),
            triple: data.triple,
        })
    }

    pub fn without_interaction(mut self) -> Self {
        self.phonon_couplings.iter_mut().for_each(|c| *c = 0.0);
        self
    }

    pub fn n_electron(&self) -> usize {
        self.electron_energies.len()
    }

    pub fn n_modes(&self) -> usize {
        self.phonon_couplings.len()
    }
}

/// Product basis `index = n_el * s + a` with `s` the Fock state.
pub fn assemble_confined_hamiltonian(
    model: &ConfinedModel,
    basis: &FockBasis,
    alpha: f64,
    budget: &FockBudget,
) -> Result<SparseHamiltonian> {
    if !(alpha > 0.0) {
        return Err(Error::parameter("alpha", "must be positive in strong-coupling units"));
    }
    if model.n_modes() != basis.n_modes || model.triple.len() != basis.n_modes {
        return Err(Error::parameter("modes", "missing triple-product table for some modes"));
    }
    let ne = model.n_electron();
    let dim_f = basis.dimension();
    let dim = fock_dimension(basis.n_modes, basis.max_phonons) * ne as u128;
    if dim > budget.max_dimension {
        return Err(Error::Budget {
            what: "Fock dimension".into(),
            needed: dim,
            cap: budget.max_dimension,
        });
    }
    budget.check_nonzeros(dim * (1 + ne * (basis.n_modes + basis.max_phonons)) as u128)?;
    let inv_a = 1.0 / alpha;
    let rows = par::map_range(dim_f * ne, |idx| {
        let (s, a) = (idx / ne, idx % ne);
        let state = basis.state(s);
        let mut row = vec![(
            idx as u32,
            model.electron_energies[a] + inv_a * inv_a * state.len() as f64,
        )];
        for b in 0..ne {
            ladder_entries(
                basis,
                state,
                &mut row,
                |j| -inv_a * model.phonon_couplings[j] * model.triple[j][(a, b)],
                ne,
                b,
            );
        }
        row
    });
    Ok(SparseHamiltonian::from_rows(
        rows,
        HamiltonianMeta {
            model: model.model,
            alpha,
            momentum: [0.0; 3],
            max_phonons: basis.max_phonons,
            n_modes: basis.n_modes,
            n_electron: ne,
            units: AlphaConvention::StrongCouplingUnits,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fiber_matrix_is_symmetric() {
        let modes = super::super::modes::discretize_modes_free(0.7, 2.0, 1.0, 1000).unwrap();
        let basis = FockBasis::new(modes.len(), 2, u128::MAX).unwrap();
        let h = assemble_fiber_hamiltonian(&modes, &basis, 0.7, [0.0, 0.0, 0.3], &FockBudget::default()).unwrap();
        assert_eq!(h.asymmetry(), 0.0);
        assert_eq!(h.diagonal()[0], 0.09);
    }

    #[test]
    fn confined_matrix_is_symmetric() {
        let modes = super::super::modes::modes_from_interval(1.0, 7.0, CutoffConvention::Momentum).unwrap();
        let model = ConfinedModel::interval(&modes, 3).unwrap();
        let basis = FockBasis::new(model.n_modes(), 3, u128::MAX).unwrap();
        let h = assemble_confined_hamiltonian(&model, &basis, 2.0, &FockBudget::default()).unwrap();
        assert!(h.asymmetry() < 1e-15);
    }
}
