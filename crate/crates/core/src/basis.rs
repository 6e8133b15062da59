//! Computational bases restricted to symmetry sectors.
//!
//! A basis label is a `u64` whose bit `i` is the state of site `i` (1 = up).
//! States are stored in increasing order and looked up without hashing:
//! the magnetization sector ranks a label by its combinadic (colex) index,
//! the parity sector by dropping the lowest bit.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest number of sites a basis label can hold.
pub const MAX_SITES: usize = 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SectorConstraint {
    None,
    /// Fixed eigenvalue `m` of total σᶻ (number of up spins minus down spins).
    Magnetization(i32),
    /// Fixed eigenvalue (±1) of the product of all σᶻ.
    ZParity(i8),
}

#[derive(Debug, Clone)]
pub struct SectorBasis {
    n_sites: usize,
    constraint: SectorConstraint,
    states: Vec<u64>,
    // binom[n][k] for the combinadic ranking; empty unless magnetization
    binom: Vec<Vec<u64>>,
}

/// Number of up spins in the magnetization sector `m`, if feasible.
pub fn ups_for(n_sites: usize, m: i32) -> Option<usize> {
    let n = n_sites as i64;
    let m = m as i64;
    if m.abs() > n || (n + m) % 2 != 0 {
        return None;
    }
    Some(((n + m) / 2) as usize)
}

pub fn build_basis(n_sites: usize, constraint: SectorConstraint) -> Result<SectorBasis> {
    if n_sites == 0 || n_sites > MAX_SITES {
        return Err(Error::BadSector(format!(
            "n_sites = {n_sites} outside 1..={MAX_SITES}"
        )));
    }
    let full = 1u64 << n_sites;
    match constraint {
        SectorConstraint::None => Ok(SectorBasis {
            n_sites,
            constraint,
            states: (0..full).collect(),
            binom: Vec::new(),
        }),
        SectorConstraint::Magnetization(m) => {
            let k = ups_for(n_sites, m).ok_or_else(|| {
                Error::BadSector(format!("magnetization {m} infeasible for {n_sites} sites"))
            })?;
            let binom = binomials(n_sites);
            let dim = binom[n_sites][k] as usize;
            let mut states = Vec::with_capacity(dim);
            if k == 0 {
                states.push(0);
            } else {
                // Gosper's hack walks same-popcount labels in increasing order
                let mut s: u64 = (1u64 << k) - 1;
                while s < full {
                    states.push(s);
                    let c = s & s.wrapping_neg();
                    let r = s + c;
                    s = (((r ^ s) >> 2) / c) | r;
                }
            }
            debug_assert_eq!(states.len(), dim);
            Ok(SectorBasis {
                n_sites,
                constraint,
                states,
                binom,
            })
        }
        SectorConstraint::ZParity(p) => {
            if p != 1 && p != -1 {
                return Err(Error::BadSector(format!("parity eigenvalue {p} is not ±1")));
            }
            let want_odd_downs = p == -1;
            let states = (0..full)
                .filter(|&s| {
                    let downs = n_sites as u32 - s.count_ones();
                    (downs % 2 == 1) == want_odd_downs
                })
                .collect();
            Ok(SectorBasis {
                n_sites,
                constraint,
                states,
                binom: Vec::new(),
            })
        }
    }
}

fn binomials(n: usize) -> Vec<Vec<u64>> {
    let mut t = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = alloc::vec![0u64; n + 1];
        row[0] = 1;
        for k in 1..=i {
            let prev: &Vec<u64> = &t[i - 1];
            row[k] = prev[k - 1] + if k < i { prev[k] } else { 0 };
        }
        t.push(row);
    }
    t
}

impl SectorBasis {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn constraint(&self) -> SectorConstraint {
        self.constraint
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn state(&self, index: usize) -> u64 {
        self.states[index]
    }

    pub fn contains(&self, label: u64) -> bool {
        if self.n_sites < 64 && label >> self.n_sites != 0 {
            return false;
        }
        match self.constraint {
            SectorConstraint::None => true,
            SectorConstraint::Magnetization(m) => {
                Some(label.count_ones() as usize) == ups_for(self.n_sites, m)
            }
            SectorConstraint::ZParity(p) => {
                let downs = self.n_sites as u32 - label.count_ones();
                (downs % 2 == 1) == (p == -1)
            }
        }
    }

    /// Position of `label` in the basis, or `None` if it lies outside the sector.
    pub fn index(&self, label: u64) -> Option<usize> {
        if !self.contains(label) {
            return None;
        }
        Some(match self.constraint {
            SectorConstraint::None => label as usize,
            SectorConstraint::ZParity(_) => (label >> 1) as usize,
            SectorConstraint::Magnetization(_) => {
                let mut rank = 0u64;
                let mut rest = label;
                let mut i = 1;
                while rest != 0 {
                    let c = rest.trailing_zeros() as usize;
                    if c >= i {
                        rank += self.binom[c][i];
                    }
                    rest &= rest - 1;
                    i += 1;
                }
                rank as usize
            }
        })
    }

    /// Total σᶻ of a label.
    pub fn magnetization(&self, label: u64) -> i32 {
        2 * label.count_ones() as i32 - self.n_sites as i32
    }

    /// Embeds a sector vector into the full `2^n` basis.
    pub fn to_full(&self, v: &[f64]) -> Vec<f64> {
        let mut out = alloc::vec![0.0; 1usize << self.n_sites];
        for (k, &s) in self.states.iter().enumerate() {
            out[s as usize] = v[k];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn full_basis_two_sites() {
        let b = build_basis(2, SectorConstraint::None).unwrap();
        assert_eq!(b.states(), &[0b00, 0b01, 0b10, 0b11]);
    }

    #[test]
    fn four_sites_zero_magnetization() {
        let b = build_basis(4, SectorConstraint::Magnetization(0)).unwrap();
        assert_eq!(
            b.states(),
            &[0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]
        );
        for (k, &s) in b.states().iter().enumerate() {
            assert_eq!(b.index(s), Some(k));
        }
        assert_eq!(b.index(0b0111), None);
    }

    #[test]
    fn infeasible_sectors() {
        assert!(matches!(
            build_basis(3, SectorConstraint::Magnetization(0)),
            Err(Error::BadSector(_))
        ));
        assert!(matches!(
            build_basis(3, SectorConstraint::Magnetization(5)),
            Err(Error::BadSector(_))
        ));
        assert!(matches!(
            build_basis(0, SectorConstraint::None),
            Err(Error::BadSector(_))
        ));
        assert!(matches!(
            build_basis(3, SectorConstraint::ZParity(0)),
            Err(Error::BadSector(_))
        ));
    }

    #[test]
    fn extreme_magnetizations() {
        let up = build_basis(5, SectorConstraint::Magnetization(5)).unwrap();
        assert_eq!(up.states(), &[0b11111]);
        let down = build_basis(5, SectorConstraint::Magnetization(-5)).unwrap();
        assert_eq!(down.states(), &[0]);
        assert_eq!(down.index(0), Some(0));
    }

    #[test]
    fn parity_sectors_partition_full_basis() {
        for n in 1..8 {
            let even = build_basis(n, SectorConstraint::ZParity(1)).unwrap();
            let odd = build_basis(n, SectorConstraint::ZParity(-1)).unwrap();
            assert_eq!(even.dim() + odd.dim(), 1 << n);
            for b in [&even, &odd] {
                for (k, &s) in b.states().iter().enumerate() {
                    assert_eq!(b.index(s), Some(k));
                }
            }
        }
    }

    #[test]
    fn to_full_places_amplitudes() {
        let b = build_basis(2, SectorConstraint::Magnetization(0)).unwrap();
        assert_eq!(b.to_full(&[0.6, 0.8]), vec![0.0, 0.6, 0.8, 0.0]);
    }
}
