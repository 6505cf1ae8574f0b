//! Occupation-number basis with a cap on the total phonon number.
//!
//! A state with `m` phonons is the sorted multiset `j_1 <= ... <= j_m` of the
//! occupied modes. States are ordered by `m`, then colexicographically, and
//! ranked with the combinatorial number system applied to `c_i = j_i + i`.

use crate::error::{Error, Result};

/// `C(n, k)` in `u128`, saturating at `u128::MAX`.
pub fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays exact because acc is C(n, i).
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `dim = C(N + M, M)`, the number of states with at most `M` phonons in `N`
/// modes.
pub fn fock_dimension(n_modes: usize, max_phonons: usize) -> u128 {
    binomial((n_modes + max_phonons) as u128, max_phonons as u128)
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    pub n_modes: usize,
    pub max_phonons: usize,
    /// Flattened multisets; state `s` occupies `offsets[s]..offsets[s + 1]`.
    modes: Vec<u32>,
    offsets: Vec<usize>,
    /// `grade_start[m]` is the index of the first state with `m` phonons.
    grade_start: Vec<usize>,
    /// `binom[n][k] = C(n, k)` for the ranking.
    binom: Vec<Vec<usize>>,
}

impl FockBasis {
    pub fn new(n_modes: usize, max_phonons: usize, max_dimension: u128) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::EmptyBasis("no phonon modes".into()));
        }
        let dim = fock_dimension(n_modes, max_phonons);
        if dim > max_dimension {
            return Err(Error::Budget {
                what: "Fock dimension".into(),
                needed: dim,
                cap: max_dimension,
            });
        }
        let top = n_modes + max_phonons;
        let binom: Vec<Vec<usize>> = (0..=top)
            .map(|n| (0..=max_phonons).map(|k| binomial(n as u128, k as u128).min(usize::MAX as u128) as usize).collect())
            .collect();
        let dim = dim as usize;
        let mut modes = Vec::new();
        let mut offsets = Vec::with_capacity(dim + 1);
        offsets.push(0);
        let mut grade_start = Vec::with_capacity(max_phonons + 2);
        for m in 0..=max_phonons {
            grade_start.push(offsets.len() - 1);
            // Colex order over c_1 < ... < c_m from {0, .., N + m - 2}.
            let mut c: Vec<usize> = (0..m).collect();
            loop {
                modes.extend(c.iter().enumerate().map(|(i, &ci)| (ci - i) as u32));
                offsets.push(modes.len());
                if !next_colex(&mut c, n_modes + m - 1) {
                    break;
                }
            }
        }
        grade_start.push(offsets.len() - 1);
        debug_assert_eq!(offsets.len() - 1, dim);
        Ok(Self {
            n_modes,
            max_phonons,
            modes,
            offsets,
            grade_start,
            binom,
        })
    }

    pub fn dimension(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Sorted occupied modes of state `s`.
    pub fn state(&self, s: usize) -> &[u32] {
        &self.modes[self.offsets[s]..self.offsets[s + 1]]
    }

    pub fn phonon_number(&self, s: usize) -> usize {
        self.offsets[s + 1] - self.offsets[s]
    }

    /// Occupation vector `(n_1, .., n_N)` of state `s`.
    pub fn occupations(&self, s: usize) -> Vec<u32> {
        let mut n = vec![0; self.n_modes];
        for &j in self.state(s) {
            n[j as usize] += 1;
        }
        n
    }

    /// Index of a sorted multiset, `None` if it is not in the basis.
    pub fn index_of(&self, multiset: &[u32]) -> Option<usize> {
        let m = multiset.len();
        if m > self.max_phonons || multiset.windows(2).any(|w| w[1] < w[0]) {
            return None;
        }
        let mut rank = 0;
        for (i, &j) in multiset.iter().enumerate() {
            if j as usize >= self.n_modes {
                return None;
            }
            rank += self.binom[j as usize + i][i + 1];
        }
        Some(self.grade_start[m] + rank)
    }

    /// Index of an occupation vector.
    pub fn index_of_occupations(&self, n: &[u32]) -> Option<usize> {
        if n.len() != self.n_modes {
            return None;
        }
        let ms: Vec<u32> = n
            .iter()
            .enumerate()
            .flat_map(|(j, &c)| std::iter::repeat_n(j as u32, c as usize))
            .collect();
        self.index_of(&ms)
    }
}

/// Next `k`-subset of `{0, .., n - 1}` in colex order.
fn next_colex(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in 0..k {
        let limit = if i + 1 < k { c[i + 1] } else { n };
        if c[i] + 1 < limit {
            c[i] += 1;
            for (t, ct) in c.iter_mut().enumerate().take(i) {
                *ct = t;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_formula_and_bijection() {
        for (n, m) in [(1, 5), (3, 3), (5, 2), (4, 0), (6, 4)] {
            let b = FockBasis::new(n, m, u128::MAX).unwrap();
            assert_eq!(b.dimension() as u128, fock_dimension(n, m));
            for s in 0..b.dimension() {
                assert_eq!(b.index_of(b.state(s)), Some(s));
                assert_eq!(b.index_of_occupations(&b.occupations(s)), Some(s));
                assert!(b.phonon_number(s) <= m);
            }
        }
    }

    #[test]
    fn budget_rejected_before_allocation() {
        let err = FockBasis::new(2400, 3, 1_000_000).unwrap_err();
        assert!(matches!(err, Error::Budget { needed, .. } if needed == fock_dimension(2400, 3)));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(67, 3), 47905);
        assert_eq!(binomial(10, 0), 1);
        assert_eq!(binomial(3, 5), 0);
    }
}
