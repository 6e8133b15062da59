//! Real sparse operators on a [`SectorBasis`].
//!
//! Every XYZ bond has real matrix elements in the computational basis:
//!
//! - `σᶻσᶻ` is diagonal, `+1` on parallel and `-1` on antiparallel bits,
//! - `σˣσˣ` flips both bits with amplitude `1`,
//! - `σʸσʸ` flips both bits with amplitude `-1` (parallel) or `+1` (antiparallel).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{SectorBasis, SectorConstraint};
use crate::error::{Error, Result};
use crate::network::{classify_bonds, Axis, Bond, SpinNetwork, SYMMETRY_TOL};

/// A real symmetric operator that can act on vectors.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`. Both slices have length `dim()`.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    /// Upper bound on the spectral norm.
    fn norm_bound(&self) -> f64;
}

/// Compressed-row sparse matrix with real entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
    hermitian: bool,
}

impl SparseOperator {
    /// Builds from per-row entry lists; duplicate columns are summed and
    /// exact zeros dropped.
    pub fn from_rows(dim: usize, rows: Vec<Vec<(usize, f64)>>, hermitian: bool) -> Self {
        assert_eq!(rows.len(), dim);
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                assert!(c < dim, "column {c} out of range");
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c as u32);
                    vals.push(v);
                    last = Some(c);
                }
            }
            // drop entries that cancelled to zero
            let start = *row_ptr.last().unwrap();
            let mut w = start;
            for r in start..cols.len() {
                if vals[r] != 0.0 {
                    cols[w] = cols[r];
                    vals[w] = vals[r];
                    w += 1;
                }
            }
            cols.truncate(w);
            vals.truncate(w);
            row_ptr.push(cols.len());
        }
        SparseOperator {
            dim,
            row_ptr,
            cols,
            vals,
            hermitian,
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let rows = diag
            .iter()
            .enumerate()
            .map(|(k, &d)| vec![(k, d)])
            .collect();
        SparseOperator::from_rows(diag.len(), rows, true)
    }

    pub fn identity(dim: usize) -> Self {
        SparseOperator::diagonal(&vec![1.0; dim])
    }

    pub fn zero(dim: usize) -> Self {
        SparseOperator::from_rows(dim, vec![Vec::new(); dim], true)
    }

    /// Dense row-major symmetric matrix, keeping nonzero entries.
    pub fn from_dense(a: &[f64], dim: usize) -> Self {
        assert_eq!(a.len(), dim * dim);
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| (j, a[i * dim + j])).collect())
            .collect();
        let mut op = SparseOperator::from_rows(dim, rows, false);
        op.hermitian = op.is_symmetric(0.0);
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.vals[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&(j as u32)) {
            Ok(p) => v[p],
            Err(_) => 0.0,
        }
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| {
            let (c, v) = self.row(i);
            c.iter()
                .zip(v)
                .all(|(&j, &a)| (a - self.get(j as usize, i)).abs() <= tol)
        })
    }

    /// Exact mat-vec, rows summed left to right.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        self.apply_rows(v, &mut out, 0);
        Ok(out)
    }

    /// Computes rows `first..first + out.len()` of `A v` into `out`.
    pub fn apply_rows(&self, v: &[f64], out: &mut [f64], first: usize) {
        for (k, y) in out.iter_mut().enumerate() {
            let (c, a) = self.row(first + k);
            let mut acc = 0.0;
            for (&j, &x) in c.iter().zip(a) {
                acc += x * v[j as usize];
            }
            *y = acc;
        }
    }

    /// `⟨v|A|v⟩ / ⟨v|v⟩`.
    pub fn expectation(&self, v: &[f64]) -> Result<f64> {
        let av = self.apply(v)?;
        let nn = crate::linalg::dot(v, v);
        if nn == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(crate::linalg::dot(v, &av) / nn)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                a[i * n + j as usize] = x;
            }
        }
        a
    }

    pub fn scaled(&self, c: f64) -> Self {
        SparseOperator {
            vals: self.vals.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl LinearOperator for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim);
        self.apply_rows(x, y, 0);
    }

    fn norm_bound(&self) -> f64 {
        self.max_row_sum()
    }
}

#[inline]
fn bond_elements(state: u64, b: &Bond) -> (f64, u64, f64) {
    let bi = (state >> b.i) & 1;
    let bj = (state >> b.j) & 1;
    let parallel = bi == bj;
    let w = b.weight;
    let c = b.coupling;
    let diag = w * c.z * if parallel { 1.0 } else { -1.0 };
    let amp = w * if parallel { c.x - c.y } else { c.x + c.y };
    (diag, state ^ (1u64 << b.i) ^ (1u64 << b.j), amp)
}

fn check_conserved(bonds: &[Bond], basis: &SectorBasis) -> Result<()> {
    if let SectorConstraint::Magnetization(m) = basis.constraint() {
        if !classify_bonds(bonds, SYMMETRY_TOL).conserves_sz() {
            return Err(Error::SectorNotConserved(format!("magnetization {m}")));
        }
    }
    Ok(())
}

fn check_sites(bonds: &[Bond], basis: &SectorBasis) -> Result<()> {
    let n = basis.n_sites();
    match bonds.iter().find(|b| b.i >= n || b.j >= n) {
        Some(b) => Err(Error::DimensionMismatch {
            expected: n,
            got: b.i.max(b.j) + 1,
        }),
        None => Ok(()),
    }
}

/// Sparse matrix of `Σ_bonds weight·(Jx σˣσˣ + Jy σʸσʸ + Jz σᶻσᶻ)` on `basis`.
pub fn assemble_bonds(bonds: &[Bond], basis: &SectorBasis) -> Result<SparseOperator> {
    check_sites(bonds, basis)?;
    check_conserved(bonds, basis)?;
    let rows = basis
        .states()
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            let mut row = Vec::with_capacity(bonds.len() + 1);
            let mut diag = 0.0;
            for b in bonds {
                let (d, t, amp) = bond_elements(s, b);
                diag += d;
                if amp != 0.0 {
                    // out-of-sector targets only arise from sub-tolerance anisotropy
                    if let Some(col) = basis.index(t) {
                        row.push((col, amp));
                    }
                }
            }
            row.push((k, diag));
            row
        })
        .collect();
    Ok(SparseOperator::from_rows(basis.dim(), rows, true))
}

pub fn assemble_hamiltonian(net: &SpinNetwork, basis: &SectorBasis) -> Result<SparseOperator> {
    if basis.n_sites() != net.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: net.n_sites(),
            got: basis.n_sites(),
        });
    }
    assemble_bonds(net.bonds(), basis)
}

/// Matrix-free Hamiltonian: rows are generated from the bond list on each
/// application. Represents the same matrix as [`assemble_bonds`].
#[derive(Debug, Clone)]
pub struct BondOperator<'a> {
    bonds: Vec<Bond>,
    basis: &'a SectorBasis,
    norm: f64,
}

impl<'a> BondOperator<'a> {
    pub fn new(bonds: &[Bond], basis: &'a SectorBasis) -> Result<Self> {
        check_sites(bonds, basis)?;
        check_conserved(bonds, basis)?;
        let norm = bonds
            .iter()
            .map(|b| {
                let c = b.coupling;
                b.weight.abs() * (c.x.abs() + c.y.abs() + c.z.abs())
            })
            .sum();
        Ok(BondOperator {
            bonds: bonds.to_vec(),
            basis,
            norm,
        })
    }

    pub fn from_network(net: &SpinNetwork, basis: &'a SectorBasis) -> Result<Self> {
        if basis.n_sites() != net.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: net.n_sites(),
                got: basis.n_sites(),
            });
        }
        BondOperator::new(net.bonds(), basis)
    }

    /// Computes rows `first..first + out.len()` of `H x`.
    pub fn apply_rows(&self, x: &[f64], out: &mut [f64], first: usize) {
        for (k, y) in out.iter_mut().enumerate() {
            let row = first + k;
            let s = self.basis.state(row);
            let mut diag = 0.0;
            let mut off = 0.0;
            for b in &self.bonds {
                let (d, t, amp) = bond_elements(s, b);
                diag += d;
                if amp != 0.0 {
                    if let Some(col) = self.basis.index(t) {
                        off += amp * x[col];
                    }
                }
            }
            *y = off + diag * x[row];
        }
    }
}

impl LinearOperator for BondOperator<'_> {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.dim());
        self.apply_rows(x, y, 0);
    }

    fn norm_bound(&self) -> f64 {
        self.norm
    }
}

/// Product `Π σ^{axis}_{site}` on `basis`, which must be real: an odd number
/// of σʸ factors gives purely imaginary entries and is rejected.
pub fn pauli_string(basis: &SectorBasis, factors: &[(usize, Axis)]) -> Result<SparseOperator> {
    let n = basis.n_sites();
    if let Some(&(s, _)) = factors.iter().find(|(s, _)| *s >= n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: s + 1,
        });
    }
    let n_y = factors.iter().filter(|(_, a)| *a == Axis::Y).count();
    if n_y % 2 == 1 {
        return Err(Error::ImaginaryOperator);
    }
    // i^n_y for even n_y
    let phase = if n_y % 4 == 0 { 1.0 } else { -1.0 };
    let mut rows = vec![Vec::new(); basis.dim()];
    for (k, &s) in basis.states().iter().enumerate() {
        let mut t = s;
        let mut amp = phase;
        // apply factors right to left
        for &(site, axis) in factors.iter().rev() {
            let bit = (t >> site) & 1;
            match axis {
                Axis::Z => amp *= if bit == 1 { 1.0 } else { -1.0 },
                Axis::X => t ^= 1 << site,
                Axis::Y => {
                    // σʸ = i·Ỹ with Ỹ|1⟩ = |0⟩, Ỹ|0⟩ = -|1⟩
                    amp *= if bit == 1 { 1.0 } else { -1.0 };
                    t ^= 1 << site;
                }
            }
        }
        let col = basis
            .index(t)
            .ok_or_else(|| Error::SectorNotConserved(format!("{:?}", basis.constraint())))?;
        // the loop built column k of the operator: entry (col, k)
        rows[col].push((k, amp));
    }
    let mut op = SparseOperator::from_rows(basis.dim(), rows, false);
    op.hermitian = op.is_symmetric(1e-12);
    Ok(op)
}

/// Total σᶻ, diagonal in every sector.
pub fn magnetization_operator(basis: &SectorBasis) -> SparseOperator {
    let diag: Vec<f64> = basis
        .states()
        .iter()
        .map(|&s| basis.magnetization(s) as f64)
        .collect();
    SparseOperator::diagonal(&diag)
}

/// `P_α = Π_j σ^α_j` over the given sites.
pub fn parity_operator(basis: &SectorBasis, sites: &[usize], axis: Axis) -> Result<SparseOperator> {
    let factors: Vec<(usize, Axis)> = sites.iter().map(|&s| (s, axis)).collect();
    pauli_string(basis, &factors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::network::Coupling;

    #[test]
    fn xx_pair_matrix() {
        let basis = build_basis(2, SectorConstraint::None).unwrap();
        let h = assemble_bonds(&[Bond::bulk(0, 1, Coupling::xx(1.0))], &basis).unwrap();
        assert_eq!(h.get(1, 2), 2.0);
        assert_eq!(h.get(2, 1), 2.0);
        assert_eq!(h.get(0, 3), 0.0);
        for k in 0..4 {
            assert_eq!(h.get(k, k), 0.0);
        }
    }

    #[test]
    fn pair_matrix_matches_kronecker_products() {
        // σˣσˣ, σʸσʸ, σᶻσᶻ with site 0 as the low bit
        let basis = build_basis(2, SectorConstraint::None).unwrap();
        let (jx, jy, jz) = (0.7, -0.3, 1.1);
        let h = assemble_bonds(&[Bond::bulk(0, 1, Coupling::new(jx, jy, jz))], &basis).unwrap();
        let want = [
            [jz, 0.0, 0.0, jx - jy],
            [0.0, -jz, jx + jy, 0.0],
            [0.0, jx + jy, -jz, 0.0],
            [jx - jy, 0.0, 0.0, jz],
        ];
        for i in 0..4 {
            for j in 0..4 {
                assert!((h.get(i, j) - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn ising_x_rejects_magnetization_sector() {
        let basis = build_basis(2, SectorConstraint::Magnetization(0)).unwrap();
        let r = assemble_bonds(&[Bond::bulk(0, 1, Coupling::new(1.0, 0.0, 0.0))], &basis);
        assert!(matches!(r, Err(Error::SectorNotConserved(_))));
    }

    #[test]
    fn identity_and_zero_apply() {
        let v = [0.5, -1.0, 2.0];
        assert_eq!(SparseOperator::identity(3).apply(&v).unwrap(), v.to_vec());
        assert_eq!(SparseOperator::zero(3).apply(&v).unwrap(), vec![0.0; 3]);
        assert!(matches!(
            SparseOperator::identity(3).apply(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn single_site_sigma_z_expectation() {
        let basis = build_basis(1, SectorConstraint::None).unwrap();
        let z = pauli_string(&basis, &[(0, Axis::Z)]).unwrap();
        assert_eq!(z.expectation(&[1.0, 0.0]).unwrap(), -1.0);
        assert_eq!(z.expectation(&[0.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(z.expectation(&[0.0, 0.0]), Err(Error::ZeroVector)));
        assert!(matches!(
            pauli_string(&basis, &[(0, Axis::Y)]),
            Err(Error::ImaginaryOperator)
        ));
    }

    #[test]
    fn pauli_yy_equals_bond_term() {
        let basis = build_basis(3, SectorConstraint::None).unwrap();
        let yy = pauli_string(&basis, &[(0, Axis::Y), (2, Axis::Y)]).unwrap();
        let h = assemble_bonds(&[Bond::bulk(0, 2, Coupling::new(0.0, 1.0, 0.0))], &basis).unwrap();
        assert_eq!(yy.to_dense(), h.to_dense());
    }

    #[test]
    fn matrix_free_matches_csr() {
        let basis = build_basis(5, SectorConstraint::ZParity(1)).unwrap();
        let bonds = [
            Bond::bulk(0, 1, Coupling::new(1.0, 0.4, -0.2)),
            Bond::bulk(1, 2, Coupling::new(0.3, 1.0, 0.5)),
            Bond::new(3, 4, Coupling::xxx(1.0), 0.25),
            Bond::bulk(0, 4, Coupling::xx(-1.0)),
        ];
        let a = assemble_bonds(&bonds, &basis).unwrap();
        let b = BondOperator::new(&bonds, &basis).unwrap();
        let x: Vec<f64> = (0..basis.dim()).map(|k| (k as f64 * 0.37).sin()).collect();
        let mut y = vec![0.0; basis.dim()];
        b.apply_into(&x, &mut y);
        let z = a.apply(&x).unwrap();
        for (p, q) in y.iter().zip(&z) {
            assert!((p - q).abs() < 1e-14);
        }
        assert!(a.is_symmetric(0.0));
    }
}
