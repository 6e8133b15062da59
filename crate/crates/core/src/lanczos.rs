//! Lanczos iteration with full reorthogonalization.
//!
//! One *round* grows a Krylov space from a seeded random start vector,
//! orthogonal to everything locked so far, until the lowest wanted Ritz
//! pairs converge (or the space hits its memory cap, which triggers an
//! explicit restart from the best Ritz vector). Converged pairs are locked.
//! Single-vector Krylov spaces see only one copy of a degenerate
//! eigenvalue, so after `k` pairs are locked further rounds run until one
//! of them finds nothing below the current `k`-th value.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::{
    axpy, dot, normalize, project_out, tridiagonal_eigenvalues, tridiagonal_eigenvectors,
};
use crate::operator::LinearOperator;

/// Krylov basis memory budget, in `f64`s.
const KRYLOV_BUDGET: usize = 1 << 25;
const MIN_KRYLOV: usize = 60;
const MAX_KRYLOV: usize = 2000;
/// Steps between convergence checks.
const CHECK_EVERY: usize = 10;
/// Returned pairs must satisfy this residual bound relative to `‖H‖`.
pub const RESIDUAL_GUARANTEE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub k: usize,
    /// Stopping tolerance on `‖Hx - θx‖ / ‖H‖`.
    pub tol: f64,
    pub seed: u64,
    pub max_restarts: usize,
    /// Krylov dimension cap; `None` derives it from the memory budget.
    pub krylov_dim: Option<usize>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            k: 2,
            tol: 1e-12,
            seed: 0x5eed,
            max_restarts: 40,
            krylov_dim: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// Explicit `‖Hx - θx‖` per pair.
    pub residuals: Vec<f64>,
    /// Operator applications.
    pub matvecs: usize,
    /// Largest Ritz value magnitude seen, used as `‖H‖`.
    pub norm_estimate: f64,
}

struct Solver<'a, A: ?Sized> {
    op: &'a A,
    dim: usize,
    opts: LanczosOptions,
    rng: ChaCha8Rng,
    locked: Vec<Vec<f64>>,
    locked_values: Vec<f64>,
    locked_residuals: Vec<f64>,
    matvecs: usize,
    /// Upper bound on `‖H‖`, for breakdown detection.
    bound: f64,
    /// Largest Ritz magnitude seen, the `‖H‖` used in tolerances.
    norm: f64,
    best_residual: f64,
}

struct Ritz {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
}

/// Lowest `opts.k` eigenpairs (clamped to the dimension), ascending.
pub fn lanczos<A: LinearOperator + ?Sized>(op: &A, opts: &LanczosOptions) -> Result<Eigenpairs> {
    let dim = op.dim();
    if dim == 0 {
        return Err(Error::ZeroVector);
    }
    let k = opts.k.clamp(1, dim);
    let mut s = Solver {
        op,
        dim,
        opts: LanczosOptions { k, ..*opts },
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        locked: Vec::new(),
        locked_values: Vec::new(),
        locked_residuals: Vec::new(),
        matvecs: 0,
        bound: op.norm_bound(),
        norm: 0.0,
        best_residual: f64::INFINITY,
    };
    s.run()?;
    let mut order: Vec<usize> = (0..s.locked.len()).collect();
    order.sort_by(|&a, &b| s.locked_values[a].total_cmp(&s.locked_values[b]));
    order.truncate(k);
    Ok(Eigenpairs {
        values: order.iter().map(|&i| s.locked_values[i]).collect(),
        residuals: order.iter().map(|&i| s.locked_residuals[i]).collect(),
        vectors: order.iter().map(|&i| s.locked[i].clone()).collect(),
        matvecs: s.matvecs,
        norm_estimate: s.norm,
    })
}

impl<A: LinearOperator + ?Sized> Solver<'_, A> {
    fn krylov_cap(&self) -> usize {
        let cap = self
            .opts
            .krylov_dim
            .unwrap_or_else(|| (KRYLOV_BUDGET / self.dim).clamp(MIN_KRYLOV, MAX_KRYLOV));
        cap.max(2).min(self.dim - self.locked.len())
    }

    fn random_start(&mut self) -> Option<Vec<f64>> {
        for _ in 0..4 {
            let mut v: Vec<f64> = (0..self.dim)
                .map(|_| (self.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
                .collect();
            for _ in 0..2 {
                project_out(self.locked.iter().map(|q| q.as_slice()), &mut v);
            }
            if normalize(&mut v) > 1e-8 {
                return Some(v);
            }
        }
        None
    }

    fn kth_value(&self) -> f64 {
        let mut v = self.locked_values.clone();
        v.sort_by(f64::total_cmp);
        v[self.opts.k - 1]
    }

    fn run(&mut self) -> Result<()> {
        let k = self.opts.k;
        let mut restarts = 0;
        let mut start = None;
        loop {
            if self.locked.len() == self.dim {
                return Ok(());
            }
            let v0 = match start.take() {
                Some(v) => v,
                None => match self.random_start() {
                    Some(v) => v,
                    None => return Ok(()),
                },
            };
            let want = k.saturating_sub(self.locked.len()).max(1);
            let (converged, restart) = self.round(v0, want)?;
            let verifying = self.locked.len() >= k;
            if verifying {
                // accept only what lies strictly below the current k-th value
                let kth = self.kth_value();
                let slack = 1e-10 * kth.abs().max(1.0);
                let below: Vec<Ritz> = converged
                    .into_iter()
                    .filter(|r| r.value < kth - slack)
                    .collect();
                if self.lock(below) == 0 {
                    if restart.is_some() {
                        restarts += 1;
                        if restarts > self.opts.max_restarts {
                            return Ok(());
                        }
                        start = restart;
                        continue;
                    }
                    return Ok(());
                }
            } else if self.lock(converged) == 0 && restart.is_none() {
                // nothing new from a complete round: count it against the budget
                restarts += 1;
                if restarts > self.opts.max_restarts {
                    return Err(self.no_convergence());
                }
            }
            if let Some(v) = restart {
                restarts += 1;
                if restarts > self.opts.max_restarts {
                    return Err(self.no_convergence());
                }
                start = Some(v);
            }
        }
    }

    /// Locks pairs that are genuinely new; returns how many were taken.
    fn lock(&mut self, pairs: Vec<Ritz>) -> usize {
        let mut taken = 0;
        for mut r in pairs {
            project_out(self.locked.iter().map(|q| q.as_slice()), &mut r.vector);
            // a vector mostly inside the locked span is a copy, and whatever
            // survives projection is noise
            if normalize(&mut r.vector) < 0.99 {
                continue;
            }
            project_out(self.locked.iter().map(|q| q.as_slice()), &mut r.vector);
            normalize(&mut r.vector);
            self.locked.push(r.vector);
            self.locked_values.push(r.value);
            self.locked_residuals.push(r.residual);
            taken += 1;
        }
        taken
    }

    fn no_convergence(&self) -> Error {
        Error::NoConvergence {
            iterations: self.matvecs,
            residual: self.best_residual / self.norm.max(f64::MIN_POSITIVE),
        }
    }

    fn apply(&mut self, x: &[f64], y: &mut [f64]) {
        self.op.apply_into(x, y);
        self.matvecs += 1;
    }

    fn orthogonalize(&self, basis: &[Vec<f64>], w: &mut [f64]) {
        for _ in 0..2 {
            project_out(self.locked.iter().map(|q| q.as_slice()), w);
            project_out(basis.iter().map(|q| q.as_slice()), w);
        }
    }

    /// One Krylov round. Returns converged pairs among the lowest `want`
    /// Ritz values, and a restart vector if the round ran out of room.
    fn round(&mut self, v0: Vec<f64>, want: usize) -> Result<(Vec<Ritz>, Option<Vec<f64>>)> {
        let cap = self.krylov_cap();
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap);
        let mut alpha: Vec<f64> = Vec::with_capacity(cap);
        let mut beta: Vec<f64> = Vec::with_capacity(cap);
        let mut w = vec![0.0; self.dim];
        basis.push(v0);
        loop {
            let j = basis.len() - 1;
            {
                let (vj, prev) = (&basis[j], j.checked_sub(1).map(|p| &basis[p]));
                self.op.apply_into(vj, &mut w);
                let a = dot(vj, &w);
                axpy(-a, vj, &mut w);
                if let Some(p) = prev {
                    axpy(-beta[j - 1], p, &mut w);
                }
                alpha.push(a);
            }
            self.matvecs += 1;
            self.orthogonalize(&basis, &mut w);
            let b = crate::linalg::norm(&w);
            let m = basis.len();
            let exhausted = b <= 1e-14 * self.bound.max(self.norm);
            let full = m >= cap;
            if exhausted || full || m.is_multiple_of(CHECK_EVERY) {
                let theta = tridiagonal_eigenvalues(&alpha, &beta);
                let top = theta.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
                self.norm = self.norm.max(top);
                let n_want = want.min(m);
                let wanted = &theta[..n_want];
                let mut done = 0;
                let ys: Vec<(f64, Vec<f64>)> = wanted
                    .iter()
                    .copied()
                    .zip(tridiagonal_eigenvectors(&alpha, &beta, wanted))
                    .collect();
                for (_, y) in &ys {
                    let est = if exhausted { 0.0 } else { (b * y[m - 1]).abs() };
                    if est > self.opts.tol * self.norm {
                        break;
                    }
                    done += 1;
                }
                if done == n_want || exhausted || full {
                    return self.finish(&basis, ys, done, exhausted);
                }
            }
            let mut next = w.clone();
            crate::linalg::scale(1.0 / b, &mut next);
            beta.push(b);
            basis.push(next);
        }
    }

    fn ritz_vector(&self, basis: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        for (v, &c) in basis.iter().zip(y) {
            axpy(c, v, &mut x);
        }
        normalize(&mut x);
        x
    }

    fn finish(
        &mut self,
        basis: &[Vec<f64>],
        ys: Vec<(f64, Vec<f64>)>,
        done: usize,
        exhausted: bool,
    ) -> Result<(Vec<Ritz>, Option<Vec<f64>>)> {
        let mut converged = Vec::new();
        let mut hx = vec![0.0; self.dim];
        let mut first_unconverged = None;
        for (idx, (_, y)) in ys.iter().enumerate() {
            let x = self.ritz_vector(basis, y);
            self.apply(&x, &mut hx);
            let theta = dot(&x, &hx);
            axpy(-theta, &x, &mut hx);
            let res = crate::linalg::norm(&hx);
            self.best_residual = self.best_residual.min(res);
            let good = res <= RESIDUAL_GUARANTEE * self.norm;
            if idx < done && good && first_unconverged.is_none() {
                converged.push(Ritz {
                    value: theta,
                    vector: x,
                    residual: res,
                });
            } else {
                if first_unconverged.is_none() {
                    first_unconverged = Some(x);
                }
                if !exhausted {
                    break;
                }
            }
        }
        if exhausted {
            // invariant subspace: every Ritz pair is exact up to rounding
            return Ok((converged, None));
        }
        Ok((converged, first_unconverged))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::SparseOperator;

    fn diag_op(d: &[f64]) -> SparseOperator {
        SparseOperator::diagonal(d)
    }

    #[test]
    fn diagonal_with_degenerate_ground() {
        let d = [3.0, -1.0, 2.0, -1.0, 0.5, 7.0, -1.0, 4.0];
        let e = lanczos(
            &diag_op(&d),
            &LanczosOptions {
                k: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(e.values.len(), 4);
        for (got, want) in e.values.iter().zip([-1.0, -1.0, -1.0, 0.5]) {
            assert!((got - want).abs() < 1e-12, "{:?}", e.values);
        }
    }

    #[test]
    fn k_clamps_to_dimension() {
        let d = [1.0, 2.0, 3.0];
        let e = lanczos(
            &diag_op(&d),
            &LanczosOptions {
                k: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(e.values.len(), 3);
    }

    #[test]
    fn kramers_pairs_are_not_duplicated() {
        // odd spin count with XYZ bonds: every level is exactly doubly degenerate
        use crate::basis::{build_basis, SectorConstraint};
        use crate::network::{Bond, Coupling};
        use crate::operator::assemble_bonds;
        use crate::spectrum::dense_spectrum;
        let bonds: Vec<Bond> = (0..7)
            .flat_map(|i| (i + 1..7).map(move |j| (i, j)))
            .filter(|&(i, j)| j == i + 1 || (i * 7 + j) % 3 == 0)
            .map(|(i, j)| {
                let t = (i * 7 + j) as f64;
                let c = Coupling::new(libm::sin(t), libm::cos(1.3 * t), libm::sin(0.7 * t + 1.0));
                Bond::new(i, j, c, 1.0)
            })
            .collect();
        let basis = build_basis(7, SectorConstraint::None).unwrap();
        let h = assemble_bonds(&bonds, &basis).unwrap();
        let want = dense_spectrum(&h).unwrap().eigenvalues;
        for seed in 0..20 {
            let e = lanczos(
                &h,
                &LanczosOptions {
                    k: 3,
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            for (g, w) in e.values.iter().zip(&want) {
                assert!(
                    (g - w).abs() < 1e-9,
                    "seed {seed}: {:?} vs {:?}",
                    e.values,
                    &want[..3]
                );
            }
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let n = 300;
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, (i as f64 * 0.7).sin())];
                if i + 1 < n {
                    r.push((i + 1, 0.5));
                }
                if i > 0 {
                    r.push((i - 1, 0.5));
                }
                r
            })
            .collect();
        let op = SparseOperator::from_rows(n, rows, true);
        let o = LanczosOptions {
            k: 3,
            seed: 7,
            ..Default::default()
        };
        let a = lanczos(&op, &o).unwrap();
        let b = lanczos(&op, &o).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }
}
