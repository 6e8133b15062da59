//! Reduced density matrices and two-qubit / multipartite entanglement measures.
//!
//! A reduced density matrix over `sites = [s0, s1, ...]` is indexed by the
//! integer whose bit `p` is the state of `s_p`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::basis::SectorBasis;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, hermitian_function};
use crate::spectrum::NetworkSpectrum;

/// Largest subset [`reduce`] accepts.
pub const MAX_KEEP: usize = 12;
/// Tolerance on trace, Hermiticity and positivity.
pub const DM_TOL: f64 = 1e-10;
/// Density-matrix eigenvalues at or below this are treated as exact zeros.
const NULL_EIGENVALUE: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Where a reduced state came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Source {
    pub network_hash: Option<String>,
    pub lambdas: Vec<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    sites: Vec<usize>,
    dim: usize,
    data: Vec<Complex64>,
    pub source: Option<Source>,
}

impl DensityMatrix {
    /// Checks trace and Hermiticity; positivity is checked by [`validate`](Self::validate).
    pub fn new(sites: Vec<usize>, data: Vec<Complex64>) -> Result<Self> {
        let dim = 1usize << sites.len();
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        let rho = DensityMatrix {
            sites,
            dim,
            data,
            source: None,
        };
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > DM_TOL || tr.im.abs() > DM_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr}")));
        }
        let herm = rho.hermiticity_error();
        if herm > DM_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "non-Hermitian by {herm:e}"
            )));
        }
        Ok(rho)
    }

    pub fn from_real(sites: Vec<usize>, data: &[f64]) -> Result<Self> {
        DensityMatrix::new(
            sites,
            data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// `|ψ⟩⟨ψ|` of a state over `sites`, indexed like the matrix.
    pub fn from_pure(sites: Vec<usize>, psi: &[Complex64]) -> Result<Self> {
        let dim = 1usize << sites.len();
        if psi.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: psi.len(),
            });
        }
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                data[i * dim + j] = psi[i] * psi[j].conj();
            }
        }
        DensityMatrix::new(sites, data)
    }

    pub fn maximally_mixed(sites: Vec<usize>) -> Self {
        let dim = 1usize << sites.len();
        let mut data = vec![ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        DensityMatrix {
            sites,
            dim,
            data,
            source: None,
        }
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    /// Renames the sites without touching the matrix.
    pub fn with_sites(mut self, sites: Vec<usize>) -> Result<Self> {
        if sites.len() != self.sites.len() {
            return Err(Error::DimensionMismatch {
                expected: self.sites.len(),
                got: sites.len(),
            });
        }
        self.sites = sites;
        Ok(self)
    }

    pub fn with_source(mut self, source: Source) -> Self {
        self.source = Some(source);
        self
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..=i {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.data, self.dim)
    }

    /// Full invariant check including positivity (costly for large subsets).
    pub fn validate(&self) -> Result<()> {
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -DM_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// Traces out every site not in `keep`, which must be a subset of `sites()`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let pos: Vec<usize> =
            keep.iter()
                .map(|s| {
                    self.sites.iter().position(|x| x == s).ok_or_else(|| {
                        Error::BadSubset(format!("site {s} not in {:?}", self.sites))
                    })
                })
                .collect::<Result<_>>()?;
        check_distinct(keep)?;
        let sub = 1usize << keep.len();
        let keep_mask: usize = pos.iter().map(|&p| 1 << p).sum();
        let extract = |i: usize| {
            pos.iter()
                .enumerate()
                .map(|(q, &p)| ((i >> p) & 1) << q)
                .sum::<usize>()
        };
        let mut data = vec![ZERO; sub * sub];
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i & !keep_mask == j & !keep_mask {
                    data[extract(i) * sub + extract(j)] += self.get(i, j);
                }
            }
        }
        Ok(DensityMatrix {
            sites: keep.to_vec(),
            dim: sub,
            data,
            source: self.source.clone(),
        })
    }

    /// Applies a 2x2 unitary (row-major) to the `p`-th site of the matrix.
    pub fn conjugate_local(&self, p: usize, u: &[Complex64; 4]) -> DensityMatrix {
        let d = self.dim;
        let bit = 1usize << p;
        let apply_left = |m: &[Complex64]| {
            let mut out = vec![ZERO; d * d];
            for i in 0..d {
                let a = (i & bit != 0) as usize;
                for b in 0..2 {
                    let src = if b == 1 { i | bit } else { i & !bit };
                    let coef = u[a * 2 + b];
                    for j in 0..d {
                        out[i * d + j] += coef * m[src * d + j];
                    }
                }
            }
            out
        };
        let left = apply_left(&self.data);
        // (U ρ)† = ρ U† for Hermitian ρ, so U (U ρ)† = U ρ U†
        let mut adj = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                adj[i * d + j] = left[j * d + i].conj();
            }
        }
        let data = apply_left(&adj);
        DensityMatrix {
            sites: self.sites.clone(),
            dim: d,
            data,
            source: self.source.clone(),
        }
    }
}

fn check_distinct(keep: &[usize]) -> Result<()> {
    for (a, s) in keep.iter().enumerate() {
        if keep[..a].contains(s) {
            return Err(Error::BadSubset(format!("site {s} repeated")));
        }
    }
    Ok(())
}

fn check_keep(keep: &[usize], n_sites: usize) -> Result<()> {
    if keep.is_empty() {
        return Err(Error::BadSubset("empty subset".into()));
    }
    if keep.len() > MAX_KEEP {
        return Err(Error::BadSubset(format!(
            "{} sites exceed the limit {MAX_KEEP}",
            keep.len()
        )));
    }
    if let Some(s) = keep.iter().find(|&&s| s >= n_sites) {
        return Err(Error::BadSubset(format!("site {s} outside 0..{n_sites}")));
    }
    check_distinct(keep)
}

fn norm_check(state: &[f64]) -> Result<()> {
    let nn: f64 = state.iter().map(|x| x * x).sum();
    if (nn - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized(nn));
    }
    Ok(())
}

/// Accumulates `weight · Tr_rest |ψ⟩⟨ψ|` into a real matrix.
fn accumulate(state: &[f64], basis: &SectorBasis, keep: &[usize], weight: f64, out: &mut [f64]) {
    let dim = 1usize << keep.len();
    let mask: u64 = keep.iter().map(|&s| 1u64 << s).sum();
    let mut entries: Vec<(u64, usize, f64)> = basis
        .states()
        .iter()
        .zip(state)
        .filter(|(_, &a)| a != 0.0)
        .map(|(&s, &a)| {
            let sub = keep
                .iter()
                .enumerate()
                .map(|(p, &q)| (((s >> q) & 1) as usize) << p)
                .sum();
            (s & !mask, sub, a)
        })
        .collect();
    entries.sort_by_key(|e| (e.0, e.1));
    let mut start = 0;
    while start < entries.len() {
        let rest = entries[start].0;
        let mut end = start;
        while end < entries.len() && entries[end].0 == rest {
            end += 1;
        }
        let group = &entries[start..end];
        for &(_, a, x) in group {
            for &(_, b, y) in group {
                out[a * dim + b] += weight * x * y;
            }
        }
        start = end;
    }
}

/// `Tr_{complement of keep} |ψ⟩⟨ψ|` for a real state given on `basis`.
pub fn reduce(state: &[f64], basis: &SectorBasis, keep: &[usize]) -> Result<DensityMatrix> {
    reduce_mixture(&[(state, basis)], keep)
}

/// Equal-weight mixture of the reductions of several states.
pub fn reduce_mixture(states: &[(&[f64], &SectorBasis)], keep: &[usize]) -> Result<DensityMatrix> {
    if states.is_empty() {
        return Err(Error::ZeroVector);
    }
    for &(_, basis) in states {
        check_keep(keep, basis.n_sites())?;
    }
    let dim = 1usize << keep.len();
    let mut acc = vec![0.0; dim * dim];
    let w = 1.0 / states.len() as f64;
    for &(psi, basis) in states {
        if psi.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                got: psi.len(),
            });
        }
        norm_check(psi)?;
        accumulate(psi, basis, keep, w, &mut acc);
    }
    // symmetrize away rounding
    for i in 0..dim {
        for j in 0..i {
            let m = 0.5 * (acc[i * dim + j] + acc[j * dim + i]);
            acc[i * dim + j] = m;
            acc[j * dim + i] = m;
        }
    }
    DensityMatrix::from_real(keep.to_vec(), &acc)
}

/// Reduced state of the ground manifold (equal mixture if degenerate).
pub fn reduce_ground(spec: &NetworkSpectrum, keep: &[usize]) -> Result<DensityMatrix> {
    let states: Vec<(&[f64], &SectorBasis)> = spec.ground_states().map(|(b, v)| (v, b)).collect();
    reduce_mixture(&states, keep)
}

fn checked_eigs(rho: &DensityMatrix) -> Result<Vec<f64>> {
    let ev = rho.eigenvalues();
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -DM_TOL {
        return Err(Error::InvalidDensityMatrix(format!(
            "negative eigenvalue {min:e}"
        )));
    }
    Ok(ev)
}

/// Wootters concurrence of a two-site density matrix.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.sites.len() != 2 {
        return Err(Error::BadDimension(format!(
            "concurrence needs 2 sites, got {}",
            rho.sites.len()
        )));
    }
    checked_eigs(rho)?;
    // rounding-level eigenvalues would otherwise leak ~sqrt(eps) into √ρ and
    // ~eps^(1/4) into the Wootters values
    let sqrt_rho = hermitian_function(&rho.data, 4, |x| {
        if x > NULL_EIGENVALUE {
            libm::sqrt(x)
        } else {
            0.0
        }
    });
    // σʸ⊗σʸ flips both bits: -1 on |00>,|11>, +1 on |01>,|10>
    let flip = |i: usize| 3 - i;
    let sign = |i: usize| if i == 0 || i == 3 { -1.0 } else { 1.0 };
    let mut tilde = [ZERO; 16];
    for i in 0..4 {
        for j in 0..4 {
            tilde[i * 4 + j] = rho.get(flip(i), flip(j)).conj() * (sign(i) * sign(j));
        }
    }
    let mul = |a: &[Complex64], b: &[Complex64]| {
        let mut c = [ZERO; 16];
        for i in 0..4 {
            for k in 0..4 {
                for j in 0..4 {
                    c[i * 4 + j] += a[i * 4 + k] * b[k * 4 + j];
                }
            }
        }
        c
    };
    let r = mul(&mul(&sqrt_rho, &tilde), &sqrt_rho);
    let mut mu: Vec<f64> = hermitian_eigenvalues(&r, 4)
        .into_iter()
        .map(|x| libm::sqrt(x.max(0.0)))
        .collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    Ok((mu[0] - mu[1] - mu[2] - mu[3]).max(0.0))
}

/// `4 det ρ` of a single-site density matrix, clamped to `[0, 1]`.
pub fn tangle_single(rho: &DensityMatrix) -> Result<f64> {
    if rho.sites.len() != 1 {
        return Err(Error::BadDimension(format!(
            "tangle needs 1 site, got {}",
            rho.sites.len()
        )));
    }
    let det = (rho.get(0, 0) * rho.get(1, 1) - rho.get(0, 1) * rho.get(1, 0)).re;
    Ok((4.0 * det).clamp(0.0, 1.0))
}

/// `T_j - Σ_{k≠j} C²_{jk}` of a pure state on `basis`.
pub fn residual_tangle(state: &[f64], basis: &SectorBasis, j: usize) -> Result<f64> {
    norm_check(state)?;
    let n = basis.n_sites();
    check_keep(&[j], n)?;
    let t = tangle_single(&reduce(state, basis, &[j])?)?;
    let mut sum = 0.0;
    for k in (0..n).filter(|&k| k != j) {
        let c = concurrence(&reduce(state, basis, &[j, k])?)?;
        sum += c * c;
    }
    Ok(t - sum)
}

/// Equal superposition of the six two-up, two-down states of four spins.
pub fn make_z0() -> Vec<f64> {
    let a = 1.0 / libm::sqrt(6.0);
    (0u32..16)
        .map(|s| if s.count_ones() == 2 { a } else { 0.0 })
        .collect()
}

/// `⟨t|ρ|t⟩` for a pure target indexed like `rho`.
pub fn fidelity(rho: &DensityMatrix, target: &[f64]) -> Result<f64> {
    let t: Vec<Complex64> = target.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fidelity_complex(rho, &t)
}

pub fn fidelity_complex(rho: &DensityMatrix, target: &[Complex64]) -> Result<f64> {
    if target.len() != rho.dim {
        return Err(Error::DimensionMismatch {
            expected: rho.dim,
            got: target.len(),
        });
    }
    let nn: f64 = target.iter().map(|z| z.norm_sqr()).sum();
    if nn == 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut f = ZERO;
    for i in 0..rho.dim {
        for j in 0..rho.dim {
            f += target[i].conj() * rho.get(i, j) * target[j];
        }
    }
    Ok((f.re / nn).clamp(0.0, 1.0))
}

/// `½ Σ |eig(ρ - σ)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.sites.len() != b.sites.len() {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let diff: Vec<Complex64> = a.data.iter().zip(&b.data).map(|(x, y)| x - y).collect();
    Ok(0.5
        * hermitian_eigenvalues(&diff, a.dim)
            .iter()
            .map(|x| x.abs())
            .sum::<f64>())
}
