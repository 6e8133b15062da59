//! Second-order effective Hamiltonian of the surface spins.
//!
//! With the bulk ground state `|φ₀⟩` non-degenerate, integrating out the
//! bulk gives, for each axis α,
//!
//! ```text
//! Λᵅⱼₖ = -2 λⱼλₖ KᵅⱼKᵅₖ Σ_{ℓ≠0} Re[⟨φ₀|σᵅ_{Bⱼ}|φℓ⟩⟨φℓ|σᵅ_{Bₖ}|φ₀⟩] / (Eℓ - E₀)
//! H_eff = Σ_α [ Σ_{j<k} Λᵅⱼₖ σᵅⱼσᵅₖ + ½ Σⱼ Λᵅⱼⱼ ]
//! ```
//!
//! where `Bⱼ` is the bulk site surface spin `j` hangs from. Each unordered
//! pair enters once because `Λ` already carries both orderings; the
//! diagonal terms are constant shifts. Bulk parity symmetry removes every
//! cross-axis term. All vectors are real: `σʸ = iỸ` with `Ỹ` real
//! antisymmetric, and the two factors of `i` cancel against the sign from
//! `Ỹᵀ = -Ỹ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::basis::{build_basis, SectorBasis, SectorConstraint};
use crate::entanglement::{fidelity, reduce_ground, trace_distance, DensityMatrix};
use crate::error::{Error, Result};
use crate::linalg::{conjugate_gradient, dot, project_out};
use crate::network::{
    classify_bonds, Axis, Bond, Coupling, SpinNetwork, SymmetryClass, SYMMETRY_TOL,
};
use crate::operator::{assemble_bonds, assemble_hamiltonian, LinearOperator, SparseOperator};
use crate::spectrum::{
    degeneracy_threshold, dense_spectrum, ground_and_gap_with, lanczos_spectrum, SolverOptions,
    SpectrumResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Full dense bulk spectrum.
    SumOverStates,
    /// Conjugate-gradient solves against the bulk ground state.
    Resolvent,
}

/// Bulk dimension up to which [`Method::SumOverStates`] is the automatic choice.
pub const SUM_OVER_STATES_AUTO: usize = 1 << 10;
const CG_TOL: f64 = 1e-12;

impl Method {
    pub fn auto(bulk_dim: usize) -> Method {
        if bulk_dim <= SUM_OVER_STATES_AUTO {
            Method::SumOverStates
        } else {
            Method::Resolvent
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    /// Network ids of the surface spins, in order.
    pub surface_sites: Vec<usize>,
    /// `λⱼ` of each surface spin.
    pub lambdas: Vec<f64>,
    /// `tensor[α][j * n + k]`, symmetric in `j, k`.
    pub tensor: [Vec<f64>; 3],
    pub symmetry: SymmetryClass,
    pub method: Method,
    pub bulk_energy: f64,
    pub bulk_gap: f64,
    /// `bulk_gap / (max λ · max |K|)`; perturbation theory wants this large.
    pub validity_ratio: f64,
}

impl EffectiveHamiltonian {
    pub fn n_surface(&self) -> usize {
        self.surface_sites.len()
    }

    pub fn get(&self, axis: Axis, j: usize, k: usize) -> f64 {
        self.tensor[axis.index()][j * self.n_surface() + k]
    }

    /// Self-energy terms `Λᵅⱼⱼ` per axis.
    pub fn diagonal(&self, axis: Axis) -> Vec<f64> {
        (0..self.n_surface())
            .map(|j| self.get(axis, j, j))
            .collect()
    }

    /// Pair couplings as bonds over surface positions `0..n`.
    pub fn pair_bonds(&self) -> Vec<Bond> {
        let n = self.n_surface();
        let mut out = Vec::new();
        for j in 0..n {
            for k in j + 1..n {
                let c = Coupling::new(
                    self.get(Axis::X, j, k),
                    self.get(Axis::Y, j, k),
                    self.get(Axis::Z, j, k),
                );
                out.push(Bond::new(j, k, c, 1.0));
            }
        }
        out
    }

    /// The same model with every `λ` multiplied by `c`; `Λ` scales by `c²`.
    pub fn rescaled(&self, c: f64) -> EffectiveHamiltonian {
        let c2 = c * c;
        let scale = |v: &Vec<f64>| v.iter().map(|x| x * c2).collect();
        EffectiveHamiltonian {
            lambdas: self.lambdas.iter().map(|l| l * c).collect(),
            tensor: [
                scale(&self.tensor[0]),
                scale(&self.tensor[1]),
                scale(&self.tensor[2]),
            ],
            validity_ratio: self.validity_ratio / c,
            ..self.clone()
        }
    }
}

/// `O|φ⟩` for `O = σˣ, Ỹ, σᶻ` on `site`, full basis.
fn single_site(axis: Axis, site: usize, phi: &[f64]) -> Vec<f64> {
    let bit = 1usize << site;
    (0..phi.len())
        .map(|t| match axis {
            Axis::X => phi[t ^ bit],
            // Ỹ|1⟩ = |0⟩, Ỹ|0⟩ = -|1⟩
            Axis::Y => {
                if t & bit == 0 {
                    phi[t ^ bit]
                } else {
                    -phi[t ^ bit]
                }
            }
            Axis::Z => {
                if t & bit == 0 {
                    -phi[t]
                } else {
                    phi[t]
                }
            }
        })
        .collect()
}

struct Bulk {
    op: SparseOperator,
    e0: f64,
    phi0: Vec<f64>,
    gap: f64,
}

fn solve_bulk(bulk: &SpinNetwork) -> Result<Bulk> {
    let basis = build_basis(bulk.n_sites(), SectorConstraint::None)?;
    let op = assemble_hamiltonian(bulk, &basis)?;
    let spec = lanczos_spectrum(&op, 2, 1e-13, SolverOptions::default().seed)?;
    let e0 = spec.eigenvalues[0];
    let gap = spec.eigenvalues.get(1).map_or(f64::INFINITY, |e1| e1 - e0);
    if gap < degeneracy_threshold(e0) {
        return Err(Error::DegenerateBulk { gap });
    }
    let phi0 = spec.eigenvectors[0].clone();
    Ok(Bulk { op, e0, phi0, gap })
}

/// Every bulk eigenpair, block by block over the symmetry sectors.
struct BulkSpectrum {
    blocks: Vec<(SectorBasis, SpectrumResult)>,
    ground: (usize, usize),
    e0: f64,
    phi0: Vec<f64>,
    gap: f64,
}

impl BulkSpectrum {
    /// `χⱼₖ = Σ_{ℓ≠0} (φℓ·uⱼ)(φℓ·uₖ)/(Eℓ - E₀)` for full-basis `u`.
    fn chi(&self, u: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let ns = u.len();
        let mut chi = vec![vec![0.0; ns]; ns];
        for (b, (basis, spec)) in self.blocks.iter().enumerate() {
            for (l, (phi, &e)) in spec.eigenvectors.iter().zip(&spec.eigenvalues).enumerate() {
                if (b, l) == self.ground {
                    continue;
                }
                let proj: Vec<f64> = u
                    .iter()
                    .map(|uj| {
                        phi.iter()
                            .zip(basis.states())
                            .map(|(p, &s)| p * uj[s as usize])
                            .sum()
                    })
                    .collect();
                let d = e - self.e0;
                for j in 0..ns {
                    for k in 0..ns {
                        chi[j][k] += proj[j] * proj[k] / d;
                    }
                }
            }
        }
        chi
    }
}

enum Solved {
    Dense(BulkSpectrum),
    Iterative(Bulk),
}

fn bulk_spectrum(bulk: &SpinNetwork) -> Result<BulkSpectrum> {
    let n = bulk.n_sites();
    // σˣ and Ỹ connect neighbouring sectors, so every block is needed
    let constraints: Vec<SectorConstraint> =
        if classify_bonds(bulk.bonds(), SYMMETRY_TOL).conserves_sz() {
            (0..=n as i32)
                .map(|ups| SectorConstraint::Magnetization(2 * ups - n as i32))
                .collect()
        } else {
            vec![SectorConstraint::ZParity(1), SectorConstraint::ZParity(-1)]
        };
    let mut blocks = Vec::with_capacity(constraints.len());
    for c in constraints {
        let basis = build_basis(n, c)?;
        let spec = dense_spectrum(&assemble_hamiltonian(bulk, &basis)?)?;
        blocks.push((basis, spec));
    }
    let mut levels: Vec<(f64, usize, usize)> = blocks
        .iter()
        .enumerate()
        .flat_map(|(b, (_, spec))| {
            spec.eigenvalues
                .iter()
                .take(2)
                .enumerate()
                .map(move |(l, &e)| (e, b, l))
        })
        .collect();
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (e0, gb, gl) = levels[0];
    let gap = levels.get(1).map_or(f64::INFINITY, |l| l.0 - e0);
    if gap < degeneracy_threshold(e0) {
        return Err(Error::DegenerateBulk { gap });
    }
    let phi0 = blocks[gb].0.to_full(&blocks[gb].1.eigenvectors[gl]);
    Ok(BulkSpectrum {
        blocks,
        ground: (gb, gl),
        e0,
        phi0,
        gap,
    })
}

/// `Q (H - E0) Q` on the complement of `φ₀`.
struct Shifted<'a> {
    bulk: &'a Bulk,
}

impl LinearOperator for Shifted<'_> {
    fn dim(&self) -> usize {
        self.bulk.phi0.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let mut qx = x.to_vec();
        project_out([self.bulk.phi0.as_slice()], &mut qx);
        self.bulk.op.apply_rows(&qx, y, 0);
        crate::linalg::axpy(-self.bulk.e0, &qx, y);
        project_out([self.bulk.phi0.as_slice()], y);
    }

    fn norm_bound(&self) -> f64 {
        self.bulk.op.max_row_sum() + self.bulk.e0.abs()
    }
}

/// Second-order effective couplings of the surface spins of `net`.
pub fn effective_couplings(net: &SpinNetwork, method: Method) -> Result<EffectiveHamiltonian> {
    let links = net.surface_links();
    let (bulk, old_ids) = net.bulk_network();
    let new_id = |old: usize| {
        old_ids
            .iter()
            .position(|&o| o == old)
            .expect("link ends in the bulk")
    };
    let ns = links.len();
    let solved = match method {
        Method::SumOverStates => Solved::Dense(bulk_spectrum(&bulk)?),
        Method::Resolvent => Solved::Iterative(solve_bulk(&bulk)?),
    };
    let (e0, gap, phi0) = match &solved {
        Solved::Dense(d) => (d.e0, d.gap, &d.phi0),
        Solved::Iterative(b) => (b.e0, b.gap, &b.phi0),
    };
    let mut tensor = [vec![0.0; ns * ns], vec![0.0; ns * ns], vec![0.0; ns * ns]];
    for axis in Axis::ALL {
        let u: Vec<Vec<f64>> = links
            .iter()
            .map(|l| single_site(axis, new_id(l.bulk), phi0))
            .collect();
        // chi[j][k] = Σ_{ℓ≠0} (φℓ·uⱼ)(φℓ·uₖ)/(Eℓ - E₀)
        let chi: Vec<Vec<f64>> = match &solved {
            Solved::Dense(d) => d.chi(&u),
            Solved::Iterative(b) => {
                let shifted = Shifted { bulk: b };
                let dim = b.phi0.len();
                let xs: Vec<Vec<f64>> = u
                    .iter()
                    .map(|uk| {
                        let mut rhs = uk.clone();
                        project_out([b.phi0.as_slice()], &mut rhs);
                        let mut x = vec![0.0; dim];
                        conjugate_gradient(
                            |v, out| shifted.apply_into(v, out),
                            &rhs,
                            &mut x,
                            CG_TOL,
                            10 * dim,
                        )
                        .map_err(|r| {
                            Error::ResolventSingular(alloc::format!(
                                "CG stalled after {} iterations at relative residual {:e}",
                                r.iterations,
                                r.relative_residual
                            ))
                        })?;
                        Ok(x)
                    })
                    .collect::<Result<_>>()?;
                (0..ns)
                    .map(|j| (0..ns).map(|k| dot(&u[j], &xs[k])).collect())
                    .collect()
            }
        };
        for j in 0..ns {
            for k in 0..ns {
                let (lj, lk) = (&links[j], &links[k]);
                // symmetrize: the resolvent route gives χ up to solver error
                let c = 0.5 * (chi[j][k] + chi[k][j]);
                tensor[axis.index()][j * ns + k] = -2.0
                    * lj.weight
                    * lk.weight
                    * lj.coupling.get(axis)
                    * lk.coupling.get(axis)
                    * c;
            }
        }
    }
    let lambdas: Vec<f64> = links.iter().map(|l| l.weight).collect();
    let max_l = lambdas.iter().copied().fold(0.0, f64::max);
    let max_k = links
        .iter()
        .map(|l| {
            l.coupling
                .x
                .abs()
                .max(l.coupling.y.abs())
                .max(l.coupling.z.abs())
        })
        .fold(0.0, f64::max);
    let mut eff = EffectiveHamiltonian {
        surface_sites: links.iter().map(|l| l.surface).collect(),
        lambdas,
        tensor,
        symmetry: classify_bonds(&[], SYMMETRY_TOL),
        method,
        bulk_energy: e0,
        bulk_gap: gap,
        validity_ratio: if max_l * max_k > 0.0 {
            gap / (max_l * max_k)
        } else {
            f64::INFINITY
        },
    };
    eff.symmetry = classify_bonds(&eff.pair_bonds(), SYMMETRY_TOL);
    Ok(eff)
}

/// Dense spectrum of the effective model over the surface spins, ordered
/// as `surface_sites` (surface spin `j` is bit `j`).
pub fn effective_ground(eff: &EffectiveHamiltonian) -> Result<SpectrumResult> {
    let n = eff.n_surface();
    if n == 0 || n > 12 {
        return Err(Error::BadDimension(alloc::format!(
            "{n} surface spins; need 1..=12"
        )));
    }
    let basis = build_basis(n, SectorConstraint::None)?;
    let op = assemble_bonds(&eff.pair_bonds(), &basis)?;
    let shift: f64 = Axis::ALL
        .iter()
        .map(|&a| 0.5 * eff.diagonal(a).iter().sum::<f64>())
        .sum();
    let mut spec = dense_spectrum(&op)?;
    for e in spec.eigenvalues.iter_mut() {
        *e += shift;
    }
    Ok(spec)
}

/// Surface density matrix of the effective ground manifold (equal mixture
/// when degenerate), labeled with network site ids.
pub fn effective_density(eff: &EffectiveHamiltonian) -> Result<DensityMatrix> {
    let spec = effective_ground(eff)?;
    let n = eff.n_surface();
    let basis = build_basis(n, SectorConstraint::None)?;
    let e0 = spec.eigenvalues[0];
    let threshold = degeneracy_threshold(e0);
    let keep: Vec<usize> = (0..n).collect();
    let states: Vec<(&[f64], &crate::basis::SectorBasis)> = spec
        .eigenvalues
        .iter()
        .zip(&spec.eigenvectors)
        .filter(|(e, _)| **e - e0 < threshold)
        .map(|(_, v)| (v.as_slice(), &basis))
        .collect();
    crate::entanglement::reduce_mixture(&states, &keep)?.with_sites(eff.surface_sites.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPoint {
    pub lambda: f64,
    pub trace_distance: f64,
    /// `⟨ψ_eff|ρ_exact|ψ_eff⟩`, absent when the effective ground state is degenerate.
    pub fidelity: Option<f64>,
    pub exact_gap: f64,
    pub effective_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub points: Vec<(f64, core::result::Result<ValidationPoint, Error>)>,
}

impl ValidationReport {
    /// Successful points ordered by decreasing λ.
    fn ok_by_decreasing_lambda(&self) -> Vec<&ValidationPoint> {
        let mut ok: Vec<&ValidationPoint> = self
            .points
            .iter()
            .filter_map(|(_, r)| r.as_ref().ok())
            .collect();
        ok.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
        ok
    }

    /// Trace distance non-increasing over the three smallest λ.
    pub fn monotone_tail(&self) -> bool {
        let ok = self.ok_by_decreasing_lambda();
        let tail = &ok[ok.len().saturating_sub(3)..];
        tail.windows(2)
            .all(|w| w[1].trace_distance <= w[0].trace_distance)
    }

    /// Trace distance at the smallest λ.
    pub fn smallest_lambda_distance(&self) -> Option<f64> {
        self.ok_by_decreasing_lambda()
            .last()
            .map(|p| p.trace_distance)
    }
}

/// Compares exact and effective surface states along a λ grid. Surface
/// weights are rescaled so that the largest equals each grid value.
pub fn validate_effective(net: &SpinNetwork, lambda_grid: &[f64]) -> Result<ValidationReport> {
    validate_effective_with(net, lambda_grid, &SolverOptions::default())
}

pub fn validate_effective_with(
    net: &SpinNetwork,
    lambda_grid: &[f64],
    opts: &SolverOptions,
) -> Result<ValidationReport> {
    let mut report = ValidationReport { points: Vec::new() };
    if lambda_grid.is_empty() {
        return Ok(report);
    }
    let links = net.surface_links();
    let w_max = links.iter().map(|l| l.weight).fold(0.0, f64::max);
    let bulk_dim = 1usize << (net.n_sites() - links.len());
    let base = effective_couplings(net, Method::auto(bulk_dim));
    for &lambda in lambda_grid {
        let point = match &base {
            Err(e) => Err(e.clone()),
            Ok(eff) => validation_point(net, eff, lambda, w_max, opts),
        };
        report.points.push((lambda, point));
    }
    Ok(report)
}

fn validation_point(
    net: &SpinNetwork,
    base: &EffectiveHamiltonian,
    lambda: f64,
    w_max: f64,
    opts: &SolverOptions,
) -> core::result::Result<ValidationPoint, Error> {
    let c = lambda / w_max;
    let scaled = net.with_surface_weights(|s| {
        let l = net
            .surface_links()
            .into_iter()
            .find(|l| l.surface == s)
            .expect("surface link");
        l.weight * c
    })?;
    let surface = net.surface_sites();
    let exact = ground_and_gap_with(
        &scaled,
        &SolverOptions {
            check_bulk: false,
            ..*opts
        },
    )?;
    let rho_exact = reduce_ground(&exact, &surface)?;
    let eff = base.rescaled(c);
    let rho_eff = effective_density(&eff)?;
    let spec = effective_ground(&eff)?;
    let fid = if spec.ground_degenerate {
        None
    } else {
        // ψ_eff is indexed by surface position, as is rho_exact over `surface`
        Some(fidelity(&rho_exact, &spec.eigenvectors[0])?)
    };
    Ok(ValidationPoint {
        lambda,
        trace_distance: trace_distance(&rho_exact, &rho_eff)?,
        fidelity: fid,
        exact_gap: exact.gap,
        effective_gap: spec.gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Site, SiteKind};

    /// Bulk XX pair (0,1) with surface spins 2 on 0 and 3 on 1.
    fn pair_net(j: Coupling, k: Coupling, lambda: f64) -> SpinNetwork {
        let sites = vec![
            Site::new(0, "B0", SiteKind::Bulk),
            Site::new(1, "B1", SiteKind::Bulk),
            Site::new(2, "S1", SiteKind::Surface),
            Site::new(3, "S2", SiteKind::Surface),
        ];
        let bonds = vec![
            Bond::bulk(0, 1, j),
            Bond::new(2, 0, k, lambda),
            Bond::new(3, 1, k, lambda),
        ];
        SpinNetwork::new(sites, bonds).unwrap()
    }

    #[test]
    fn xx_pair_by_hand() {
        // bulk singlet E0 = -2; σˣ_B0|φ0⟩ lies in the {|00⟩,|11⟩} block at
        // energy 0 with σˣ_B1|φ0⟩ = -σˣ_B0|φ0⟩, so χˣ₁₂ = -1/2 and
        // Λˣ₁₂ = -2λ²·(-1/2) = λ².
        let lambda = 0.1;
        let net = pair_net(Coupling::xx(1.0), Coupling::xx(1.0), lambda);
        for method in [Method::SumOverStates, Method::Resolvent] {
            let eff = effective_couplings(&net, method).unwrap();
            assert!(
                (eff.get(Axis::X, 0, 1) - lambda * lambda).abs() < 1e-12,
                "{method:?} {eff:?}"
            );
            assert!((eff.get(Axis::Y, 0, 1) - eff.get(Axis::X, 0, 1)).abs() < 1e-14);
            assert_eq!(eff.get(Axis::Z, 0, 1), 0.0);
            assert!((eff.get(Axis::X, 0, 0) + lambda * lambda).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_couplings_are_fully_degenerate() {
        let net = pair_net(Coupling::xx(1.0), Coupling::new(0.0, 0.0, 0.0), 0.1);
        let eff = effective_couplings(&net, Method::SumOverStates).unwrap();
        assert!(eff.tensor.iter().all(|t| t.iter().all(|&x| x == 0.0)));
        assert!(effective_ground(&eff).unwrap().ground_degenerate);
    }

    #[test]
    fn antiferro_pair_gives_singlet() {
        let net = pair_net(Coupling::xx(1.0), Coupling::xx(1.0), 0.1);
        let eff = effective_couplings(&net, Method::SumOverStates).unwrap();
        let rho = effective_density(&eff).unwrap();
        let c = crate::entanglement::concurrence(&rho).unwrap();
        assert!((c - 1.0).abs() < 1e-10);
    }
}
