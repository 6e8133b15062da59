//! Low-lying spectra of operators and networks.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{build_basis, ups_for, SectorBasis, SectorConstraint};
use crate::error::{Error, Result};
use crate::lanczos::{lanczos, LanczosOptions};
use crate::linalg::symmetric_eigen;
use crate::network::{classify_symmetry, SpinNetwork, SYMMETRY_TOL};
use crate::operator::{assemble_hamiltonian, LinearOperator, SparseOperator};

/// `E1 - E0` below `DEGENERACY_REL * max(1, |E0|)` counts as degenerate.
pub const DEGENERACY_REL: f64 = 1e-10;
/// Default size limit of [`dense_spectrum`].
pub const DENSE_CAP: usize = 1 << 14;

pub fn degeneracy_threshold(e0: f64) -> f64 {
    DEGENERACY_REL * e0.abs().max(1.0)
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub residual_norms: Vec<f64>,
    /// `E1 - E0`, zero when only one level is known.
    pub gap: f64,
    pub ground_degenerate: bool,
    pub degeneracy_threshold: f64,
    /// Operator applications (Lanczos) or zero (dense).
    pub matvecs: usize,
    pub seed: Option<u64>,
}

impl SpectrumResult {
    fn from_pairs(
        values: Vec<f64>,
        vectors: Vec<Vec<f64>>,
        residuals: Vec<f64>,
        matvecs: usize,
        seed: Option<u64>,
    ) -> Self {
        let e0 = values.first().copied().unwrap_or(0.0);
        let threshold = degeneracy_threshold(e0);
        let gap = if values.len() > 1 {
            (values[1] - e0).max(0.0)
        } else {
            0.0
        };
        SpectrumResult {
            ground_degenerate: values.len() > 1 && gap < threshold,
            eigenvalues: values,
            eigenvectors: vectors,
            residual_norms: residuals,
            gap,
            degeneracy_threshold: threshold,
            matvecs,
            seed,
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn ground_state(&self) -> &[f64] {
        &self.eigenvectors[0]
    }
}

/// Full spectrum by dense diagonalization; errors above [`DENSE_CAP`].
pub fn dense_spectrum(op: &SparseOperator) -> Result<SpectrumResult> {
    dense_spectrum_capped(op, DENSE_CAP)
}

pub fn dense_spectrum_capped(op: &SparseOperator, cap: usize) -> Result<SpectrumResult> {
    let n = op.dim();
    if n > cap {
        return Err(Error::TooLarge { dim: n, cap });
    }
    if n == 0 {
        return Ok(SpectrumResult::from_pairs(
            Vec::new(),
            Vec::new(),
            Vec::new(),
            0,
            None,
        ));
    }
    let eig = symmetric_eigen(&op.to_dense(), n);
    let vectors: Vec<Vec<f64>> = (0..n).map(|k| eig.vector(k).to_vec()).collect();
    let residuals = vectors
        .iter()
        .zip(&eig.values)
        .map(|(v, &e)| {
            let mut hv = vec![0.0; n];
            op.apply_rows(v, &mut hv, 0);
            crate::linalg::axpy(-e, v, &mut hv);
            crate::linalg::norm(&hv)
        })
        .collect();
    Ok(SpectrumResult::from_pairs(
        eig.values, vectors, residuals, 0, None,
    ))
}

/// Lowest `k` (at least 2, at most the dimension) eigenpairs by Lanczos.
pub fn lanczos_spectrum<A: LinearOperator + ?Sized>(
    op: &A,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<SpectrumResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::BadParams(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let opts = LanczosOptions {
        k: k.max(2),
        tol,
        seed,
        ..Default::default()
    };
    let e = lanczos(op, &opts)?;
    Ok(SpectrumResult::from_pairs(
        e.values,
        e.vectors,
        e.residuals,
        e.matvecs,
        Some(seed),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub seed: u64,
    /// Eigenpairs per sector.
    pub k: usize,
    /// Sectors at or below this size are diagonalized densely.
    pub dense_threshold: usize,
    /// Refuse sectors larger than this.
    pub max_dim: usize,
    /// Also solve the bulk alone and reject degenerate bulks.
    pub check_bulk: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            seed: 0x5eed,
            k: 2,
            dense_threshold: 256,
            max_dim: 1 << 20,
            check_bulk: true,
        }
    }
}

/// Solves one operator with the dense or Lanczos path per `opts`.
pub fn solve_operator(op: &SparseOperator, opts: &SolverOptions) -> Result<SpectrumResult> {
    if op.dim() > opts.max_dim {
        return Err(Error::TooLarge {
            dim: op.dim(),
            cap: opts.max_dim,
        });
    }
    if op.dim() <= opts.dense_threshold {
        let mut r = dense_spectrum(op)?;
        let keep = opts.k.max(2).min(r.eigenvalues.len());
        // keep the whole lowest multiplet so degeneracies are visible
        let mut end = keep;
        while end < r.eigenvalues.len()
            && r.eigenvalues[end] - r.eigenvalues[keep - 1] < degeneracy_threshold(r.eigenvalues[0])
        {
            end += 1;
        }
        r.eigenvalues.truncate(end);
        r.eigenvectors.truncate(end);
        r.residual_norms.truncate(end);
        Ok(r)
    } else {
        lanczos_spectrum(op, opts.k, opts.tol, opts.seed)
    }
}

#[derive(Debug, Clone)]
pub struct SectorSolution {
    pub basis: SectorBasis,
    pub result: SpectrumResult,
}

/// Global low-lying spectrum of a network, possibly split over sectors.
#[derive(Debug, Clone)]
pub struct NetworkSpectrum {
    /// Lowest levels over all examined sectors, ascending.
    pub energies: Vec<f64>,
    pub gap: f64,
    pub ground_degenerate: bool,
    pub degeneracy_threshold: f64,
    pub sectors: Vec<SectorSolution>,
    /// `(sector, eigenpair)` indices of every state in the ground manifold.
    pub ground: Vec<(usize, usize)>,
    /// Gap of the bulk alone, when checked.
    pub bulk_gap: Option<f64>,
    pub max_residual: f64,
    pub matvecs: usize,
}

impl NetworkSpectrum {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// Ground-manifold states with their bases.
    pub fn ground_states(&self) -> impl Iterator<Item = (&SectorBasis, &[f64])> + '_ {
        self.ground.iter().map(|&(s, i)| {
            let sol = &self.sectors[s];
            (&sol.basis, sol.result.eigenvectors[i].as_slice())
        })
    }
}

/// Sectors examined for a network: magnetization sectors `m0, m0 ± 2, ...`
/// when total σᶻ is conserved, the full basis otherwise.
pub fn sector_plan(net: &SpinNetwork) -> Vec<SectorConstraint> {
    let n = net.n_sites();
    if classify_symmetry(net, SYMMETRY_TOL).conserves_sz() {
        let m0 = (n % 2) as i32;
        [m0 - 2, m0, m0 + 2]
            .into_iter()
            .filter(|&m| ups_for(n, m).is_some())
            .map(SectorConstraint::Magnetization)
            .collect()
    } else {
        vec![SectorConstraint::None]
    }
}

fn solve_sector(
    net: &SpinNetwork,
    c: SectorConstraint,
    opts: &SolverOptions,
) -> Result<SectorSolution> {
    let basis = build_basis(net.n_sites(), c)?;
    if basis.dim() > opts.max_dim {
        return Err(Error::TooLarge {
            dim: basis.dim(),
            cap: opts.max_dim,
        });
    }
    let op = assemble_hamiltonian(net, &basis)?;
    let result = solve_operator(&op, opts)?;
    Ok(SectorSolution { basis, result })
}

/// Ground state(s) and global gap of a network.
///
/// Conserving networks are solved in magnetization sectors starting from
/// `m0, m0 ± 2`; while the lowest energy sits in an outermost examined
/// sector the search widens outward on both sides.
pub fn ground_and_gap(net: &SpinNetwork) -> Result<NetworkSpectrum> {
    ground_and_gap_with(net, &SolverOptions::default())
}

pub fn ground_and_gap_with(net: &SpinNetwork, opts: &SolverOptions) -> Result<NetworkSpectrum> {
    let bulk_gap = if opts.check_bulk {
        let (bulk, _) = net.bulk_network();
        let spec = ground_and_gap_with(
            &bulk,
            &SolverOptions {
                check_bulk: false,
                ..*opts
            },
        )?;
        if spec.ground_degenerate {
            return Err(Error::DegenerateBulk { gap: spec.gap });
        }
        Some(spec.gap)
    } else {
        None
    };
    let n = net.n_sites();
    let mut sectors: Vec<SectorSolution> = Vec::new();
    for c in sector_plan(net) {
        sectors.push(solve_sector(net, c, opts)?);
    }
    loop {
        let lowest = lowest_sector(&sectors);
        let m = match sectors[lowest].basis.constraint() {
            SectorConstraint::Magnetization(m) => m,
            _ => break,
        };
        let ms: Vec<i32> = sectors
            .iter()
            .filter_map(|s| match s.basis.constraint() {
                SectorConstraint::Magnetization(m) => Some(m),
                _ => None,
            })
            .collect();
        let (lo, hi) = (*ms.iter().min().unwrap(), *ms.iter().max().unwrap());
        if m != lo && m != hi {
            break;
        }
        // Jx = Jy implies the global flip symmetry m -> -m: widen both ends
        let next: Vec<i32> = [lo - 2, hi + 2]
            .into_iter()
            .filter(|&x| ups_for(n, x).is_some())
            .collect();
        if next.is_empty() {
            break;
        }
        for x in next {
            sectors.push(solve_sector(net, SectorConstraint::Magnetization(x), opts)?);
        }
    }
    Ok(merge(sectors, bulk_gap))
}

fn lowest_sector(sectors: &[SectorSolution]) -> usize {
    let mut best = 0;
    for (i, s) in sectors.iter().enumerate() {
        if s.result.eigenvalues[0] < sectors[best].result.eigenvalues[0] {
            best = i;
        }
    }
    best
}

fn merge(sectors: Vec<SectorSolution>, bulk_gap: Option<f64>) -> NetworkSpectrum {
    let mut levels: Vec<(f64, usize, usize)> = Vec::new();
    for (s, sol) in sectors.iter().enumerate() {
        for (i, &e) in sol.result.eigenvalues.iter().enumerate() {
            levels.push((e, s, i));
        }
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let e0 = levels[0].0;
    let threshold = degeneracy_threshold(e0);
    let ground: Vec<(usize, usize)> = levels
        .iter()
        .filter(|l| l.0 - e0 < threshold)
        .map(|l| (l.1, l.2))
        .collect();
    let gap = if levels.len() > 1 {
        levels[1].0 - e0
    } else {
        0.0
    };
    let max_residual = sectors
        .iter()
        .flat_map(|s| s.result.residual_norms.iter().copied())
        .fold(0.0, f64::max);
    let matvecs = sectors.iter().map(|s| s.result.matvecs).sum();
    NetworkSpectrum {
        energies: levels.iter().map(|l| l.0).collect(),
        gap: gap.max(0.0),
        ground_degenerate: levels.len() > 1 && gap < threshold,
        degeneracy_threshold: threshold,
        sectors,
        ground,
        bulk_gap,
        max_residual,
        matvecs,
    }
}
