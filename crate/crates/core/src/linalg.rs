//! Small dense linear-algebra kernels.
//!
//! Symmetric eigendecomposition is Householder tridiagonalization followed
//! by the implicit QL iteration (the EISPACK `tred2`/`tql2` pair). Hermitian
//! matrices go through the real embedding `[[Re, -Im], [Im, Re]]`, which
//! doubles every eigenvalue and commutes with matrix functions.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

/// Normalizes in place and returns the original norm.
pub fn normalize(x: &mut [f64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale(1.0 / n, x);
    }
    n
}

/// Removes the components of `x` along each (orthonormal) vector of `basis`.
pub fn project_out<'a, I>(basis: I, x: &mut [f64])
where
    I: IntoIterator<Item = &'a [f64]>,
{
    for q in basis {
        let c = dot(q, x);
        axpy(-c, q, x);
    }
}

/// Eigendecomposition of a real symmetric matrix, ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub n: usize,
    pub values: Vec<f64>,
    /// Row-major; row `i` is the eigenvector of `values[i]`.
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }
}

/// Ascending eigenvalues of the symmetric `n x n` matrix `a`.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix buffer does not match n*n");
    if n == 0 {
        return Vec::new();
    }
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e, false);
    tql2(n, None, &mut d, &mut e);
    d.sort_by(f64::total_cmp);
    d
}

/// Full eigendecomposition of the symmetric `n x n` row-major matrix `a`.
pub fn symmetric_eigen(a: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(a.len(), n * n, "matrix buffer does not match n*n");
    if n == 0 {
        return SymmetricEigen {
            n,
            values: Vec::new(),
            vectors: Vec::new(),
        };
    }
    let mut v = a.to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    // tred2 stores column-major, so `v` comes back with eigenvector rows,
    // which is the layout tql2 rotates
    tred2(n, &mut v, &mut d, &mut e, true);
    tql2(n, Some(&mut v), &mut d, &mut e);
    sort_pairs(n, d, v)
}

/// Eigendecomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and sub-diagonal `off` (`off.len() == diag.len() - 1`).
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64]) -> SymmetricEigen {
    let n = diag.len();
    assert!(
        n == 0 || off.len() + 1 == n,
        "off-diagonal length must be n - 1"
    );
    if n == 0 {
        return SymmetricEigen {
            n,
            values: Vec::new(),
            vectors: Vec::new(),
        };
    }
    let mut d = diag.to_vec();
    // tql2 expects e[i] at position i with e[0] unused
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(off);
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        w[i * n + i] = 1.0;
    }
    tql2(n, Some(&mut w), &mut d, &mut e);
    sort_pairs(n, d, w)
}

/// Ascending eigenvalues of a symmetric tridiagonal matrix, no vectors.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert!(
        n == 0 || off.len() + 1 == n,
        "off-diagonal length must be n - 1"
    );
    if n == 0 {
        return Vec::new();
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[1..n].copy_from_slice(off);
    tql2(n, None, &mut d, &mut e);
    d.sort_by(f64::total_cmp);
    d
}

/// Unit eigenvector of a symmetric tridiagonal matrix for the (already
/// accurate) eigenvalue `theta`, by inverse iteration.
pub fn tridiagonal_eigenvector(diag: &[f64], off: &[f64], theta: f64) -> Vec<f64> {
    tridiagonal_eigenvectors(diag, off, &[theta]).pop().unwrap()
}

/// Eigenvectors for ascending `thetas` by inverse iteration. Vectors of
/// clustered eigenvalues are kept orthogonal, so a (near-)repeated value
/// gets an independent vector rather than a copy.
pub fn tridiagonal_eigenvectors(diag: &[f64], off: &[f64], thetas: &[f64]) -> Vec<Vec<f64>> {
    let n = diag.len();
    if n == 1 {
        return thetas.iter().map(|_| vec![1.0]).collect();
    }
    let scale = diag
        .iter()
        .map(|x| x.abs())
        .chain(off.iter().map(|x| x.abs()))
        .fold(f64::MIN_POSITIVE, f64::max);
    let cluster_gap = 1e-3 * scale;
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(thetas.len());
    let mut cluster_start = 0;
    let mut prev_shift = f64::NEG_INFINITY;
    for (k, &theta) in thetas.iter().enumerate() {
        if k > 0 && theta - thetas[k - 1] > cluster_gap {
            cluster_start = k;
        }
        // coincident shifts would give identical solves
        let mut shift = theta;
        if k > cluster_start && shift - prev_shift < 10.0 * f64::EPSILON * scale {
            shift = prev_shift + 10.0 * f64::EPSILON * scale;
        }
        prev_shift = shift;
        let lu = ShiftedTridiagonalLu::new(diag, off, shift, f64::EPSILON * scale);
        // deterministic, non-special start, distinct per index
        let mut x: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * libm::sin((i + 1) as f64 * (k + 1) as f64))
            .collect();
        for _ in 0..3 {
            lu.solve(&mut x);
            project_out(out[cluster_start..k].iter().map(|v| v.as_slice()), &mut x);
            normalize(&mut x);
        }
        out.push(x);
    }
    out
}

// Partial-pivoting LU of T - shift*I (the LAPACK gttrf layout).
struct ShiftedTridiagonalLu {
    d: Vec<f64>,
    dl: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedTridiagonalLu {
    fn new(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if libm::fabs(d[i]) >= libm::fabs(dl[i]) {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        ShiftedTridiagonalLu {
            d,
            dl,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.dl[i] * b[i];
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn sort_pairs(n: usize, d: Vec<f64>, w: Vec<f64>) -> SymmetricEigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for &k in &order {
        values.push(d[k]);
        vectors.extend_from_slice(&w[k * n..(k + 1) * n]);
    }
    SymmetricEigen { n, values, vectors }
}

// Householder reduction to tridiagonal form. `v` is column-major (a
// symmetric input reads the same either way) and on exit holds the
// accumulated orthogonal transform with eigenvectors in columns.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let at = |i: usize, j: usize| j * n + i;
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for x in &d[..i] {
            scale += libm::fabs(*x);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
                v[at(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[at(j, i)] = f;
                g = e[j] + v[at(j, j)] * f;
                for k in j + 1..i {
                    g += v[at(k, j)] * d[k];
                    e[k] += v[at(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[at(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[at(i - 1, j)];
                v[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    if !accumulate {
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = v[at(j, j)];
        }
        e[0] = 0.0;
        return;
    }
    for i in 0..n - 1 {
        v[at(n - 1, i)] = v[at(i, i)];
        v[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[at(k, i + 1)] * v[at(k, j)];
                }
                for k in 0..=i {
                    v[at(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[at(n - 1, j)];
        v[at(n - 1, j)] = 0.0;
    }
    v[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

// Implicit QL on the tridiagonal (d, e). `w`, if given, holds eigenvectors
// as rows.
fn tql2(n: usize, mut w: Option<&mut [f64]>, d: &mut [f64], e: &mut [f64]) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(libm::fabs(d[l]) + libm::fabs(e[l]));
        let mut m = l;
        while m < n - 1 {
            if libm::fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                assert!(iter < 300, "QL iteration failed to converge");
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(w) = w.as_deref_mut() {
                        let (lo, hi) = w.split_at_mut((i + 1) * n);
                        let row_i = &mut lo[i * n..];
                        let row_i1 = &mut hi[..n];
                        for k in 0..n {
                            let h = row_i1[k];
                            row_i1[k] = s * row_i[k] + c * h;
                            row_i[k] = c * row_i[k] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if libm::fabs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
}

fn embed(a: &[Complex64], n: usize) -> Vec<f64> {
    let m = 2 * n;
    let mut out = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = a[i * n + j];
            out[i * m + j] = z.re;
            out[i * m + j + n] = -z.im;
            out[(i + n) * m + j] = z.im;
            out[(i + n) * m + j + n] = z.re;
        }
    }
    out
}

/// Ascending eigenvalues of a Hermitian `n x n` row-major matrix.
pub fn hermitian_eigenvalues(a: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let values = symmetric_eigenvalues(&embed(a, n), 2 * n);
    // each eigenvalue appears twice in the embedding
    (0..n)
        .map(|k| 0.5 * (values[2 * k] + values[2 * k + 1]))
        .collect()
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function<F>(a: &[Complex64], n: usize, f: F) -> Vec<Complex64>
where
    F: Fn(f64) -> f64,
{
    assert_eq!(a.len(), n * n);
    let m = 2 * n;
    let eig = symmetric_eigen(&embed(a, n), m);
    let fv: Vec<f64> = eig.values.iter().map(|&x| f(x)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut re = 0.0;
            let mut im = 0.0;
            for (k, fk) in fv.iter().enumerate() {
                let vk = eig.vector(k);
                re += fk * vk[i] * vk[j];
                im += fk * vk[i + n] * vk[j];
            }
            out[i * n + j] = Complex64::new(re, im);
        }
    }
    out
}

/// Outcome of a converged conjugate-gradient solve.
#[derive(Debug, Clone, Copy)]
pub struct CgReport {
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradient for `A x = b` with `A` symmetric positive definite on
/// the relevant subspace. `x` holds the initial guess on entry. Returns
/// `Err(report)` if `max_iter` is hit or the curvature turns non-positive.
pub fn conjugate_gradient<F>(
    mut apply: F,
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> core::result::Result<CgReport, CgReport>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgReport {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let rel = libm::sqrt(rr) / bnorm;
        if rel <= rel_tol {
            return Ok(CgReport {
                iterations: it,
                relative_residual: rel,
            });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(CgReport {
                iterations: it,
                relative_residual: rel,
            });
        }
        let alpha = rr / pap;
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
    let rel = libm::sqrt(rr) / bnorm;
    if rel <= rel_tol {
        Ok(CgReport {
            iterations: max_iter,
            relative_residual: rel,
        })
    } else {
        Err(CgReport {
            iterations: max_iter,
            relative_residual: rel,
        })
    }
}
