use proptest::prelude::*;
use spinsurf_core::basis::ups_for;
use spinsurf_core::entanglement::reduce_mixture;
use spinsurf_core::network::{classify_bonds, SYMMETRY_TOL};
use spinsurf_core::operator::{assemble_bonds, magnetization_operator, parity_operator};
use spinsurf_core::*;

use num_complex::Complex64;

fn coupling() -> impl Strategy<Value = Coupling> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Coupling::new(x, y, z))
}

/// Random bonds on `n` sites: a connected path plus extra edges.
fn bonds(n: usize, xxz: bool) -> impl Strategy<Value = Vec<Bond>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let np = pairs.len();
    (
        proptest::collection::vec(coupling(), np),
        proptest::collection::vec(any::<bool>(), np),
        proptest::collection::vec(0.05..1.0f64, np),
    )
        .prop_map(move |(cs, keep, ws)| {
            pairs
                .iter()
                .enumerate()
                .filter(|&(k, &(i, j))| j == i + 1 || keep[k])
                .map(|(k, &(i, j))| {
                    let mut c = cs[k];
                    if xxz {
                        c.y = c.x;
                    }
                    Bond::new(i, j, c, ws[k])
                })
                .collect()
        })
}

fn state(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0f64, dim).prop_filter_map("nonzero", |mut v| {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (n > 1e-3).then(|| {
            v.iter_mut().for_each(|x| *x /= n);
            v
        })
    })
}

fn dense(op: &SparseOperator) -> (Vec<f64>, usize) {
    (op.to_dense(), op.dim())
}

fn commutator_norm(a: &SparseOperator, b: &SparseOperator) -> f64 {
    let ((a, n), (b, _)) = (dense(a), dense(b));
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let c: f64 = (0..n)
                .map(|k| a[i * n + k] * b[k * n + j] - b[i * n + k] * a[k * n + j])
                .sum();
            worst = worst.max(c.abs());
        }
    }
    worst
}

fn sorted_spectrum(op: &SparseOperator) -> Vec<f64> {
    dense_spectrum(op).unwrap().eigenvalues
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn basis_index_inverts_state(n in 1usize..=12, m_raw in -12i32..=12) {
        let m = if (n as i32 + m_raw) % 2 == 0 { m_raw } else { m_raw + 1 };
        prop_assume!(ups_for(n, m).is_some());
        for c in [SectorConstraint::None, SectorConstraint::Magnetization(m), SectorConstraint::ZParity(1), SectorConstraint::ZParity(-1)] {
            let b = build_basis(n, c).unwrap();
            for k in 0..b.dim() {
                prop_assert_eq!(b.index(b.state(k)), Some(k));
            }
        }
    }

    #[test]
    fn assembly_is_linear(a in bonds(4, false), b in bonds(4, false), s in -3.0..3.0f64) {
        let basis = build_basis(4, SectorConstraint::None).unwrap();
        let ha = assemble_bonds(&a, &basis).unwrap().to_dense();
        let hb = assemble_bonds(&b, &basis).unwrap().to_dense();
        let mut both: Vec<Bond> = a.clone();
        both.extend(b.iter().map(|x| Bond::new(x.i, x.j, x.coupling.scaled(s), x.weight)));
        let h = assemble_bonds(&both, &basis).unwrap().to_dense();
        for k in 0..h.len() {
            prop_assert!((h[k] - ha[k] - s * hb[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn xxz_commutes_with_total_sz(b in bonds(5, true)) {
        let basis = build_basis(5, SectorConstraint::None).unwrap();
        let h = assemble_bonds(&b, &basis).unwrap();
        prop_assert!(commutator_norm(&h, &magnetization_operator(&basis)) < 1e-12);
    }

    #[test]
    fn bulk_commutes_with_axis_parities(b in bonds(4, false)) {
        let basis = build_basis(4, SectorConstraint::None).unwrap();
        let h = assemble_bonds(&b, &basis).unwrap();
        for axis in Axis::ALL {
            let p = parity_operator(&basis, &[0, 1, 2, 3], axis).unwrap();
            prop_assert!(commutator_norm(&h, &p) < 1e-12, "{:?}", axis);
        }
    }

    #[test]
    fn sector_union_is_full_spectrum(b in bonds(6, true)) {
        let full = build_basis(6, SectorConstraint::None).unwrap();
        let want = sorted_spectrum(&assemble_bonds(&b, &full).unwrap());
        let mut got = Vec::new();
        for m in (-6..=6).step_by(2) {
            let basis = build_basis(6, SectorConstraint::Magnetization(m)).unwrap();
            got.extend(sorted_spectrum(&assemble_bonds(&b, &basis).unwrap()));
        }
        got.sort_by(f64::total_cmp);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-9);
        }
        let mut par = Vec::new();
        for p in [1, -1] {
            let basis = build_basis(6, SectorConstraint::ZParity(p)).unwrap();
            par.extend(sorted_spectrum(&assemble_bonds(&b, &basis).unwrap()));
        }
        par.sort_by(f64::total_cmp);
        for (g, w) in par.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-9);
        }
    }

    #[test]
    fn lanczos_matches_dense(b in bonds(7, false), seed in any::<u64>()) {
        let basis = build_basis(7, SectorConstraint::None).unwrap();
        let h = assemble_bonds(&b, &basis).unwrap();
        let want = sorted_spectrum(&h);
        let got = lanczos_spectrum(&h, 3, 1e-12, seed).unwrap();
        for (g, w) in got.eigenvalues.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-9, "{:?} vs {:?}", got.eigenvalues, &want[..3]);
        }
    }

    #[test]
    fn partial_trace_composes(psi in state(32), keep in proptest::sample::subsequence(vec![0usize, 1, 2, 3, 4], 3)) {
        let basis = build_basis(5, SectorConstraint::None).unwrap();
        let big = reduce(&psi, &basis, &keep).unwrap();
        for drop in 0..3 {
            let sub: Vec<usize> = keep.iter().enumerate().filter(|&(k, _)| k != drop).map(|(_, &s)| s).collect();
            let direct = reduce(&psi, &basis, &sub).unwrap();
            let nested = big.partial_trace(&sub).unwrap();
            prop_assert!(trace_distance(&direct, &nested).unwrap() < 1e-12);
        }
    }

    #[test]
    fn sector_and_full_reduction_agree(b in bonds(6, true), keep in proptest::sample::subsequence(vec![0usize, 1, 2, 3, 4, 5], 2)) {
        let sector = build_basis(6, SectorConstraint::Magnetization(0)).unwrap();
        let full = build_basis(6, SectorConstraint::None).unwrap();
        let spec = dense_spectrum(&assemble_bonds(&b, &sector).unwrap()).unwrap();
        let v = spec.ground_state();
        let a = reduce_mixture(&[(v, &sector)], &keep).unwrap();
        let f = reduce(&sector.to_full(v), &full, &keep).unwrap();
        prop_assert!(trace_distance(&a, &f).unwrap() < 1e-12);
    }

    #[test]
    fn concurrence_is_local_unitary_invariant(
        psi in state(4),
        (t, p, q) in (0.0..3.2f64, 0.0..6.3f64, 0.0..6.3f64),
    ) {
        let basis = build_basis(2, SectorConstraint::None).unwrap();
        let rho = reduce(&psi, &basis, &[0, 1]).unwrap();
        // general SU(2) element
        let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
        let u = [
            Complex64::from_polar(c, p),
            -Complex64::from_polar(s, q),
            Complex64::from_polar(s, -q),
            Complex64::from_polar(c, -p),
        ];
        // near separable states the square roots amplify rounding to ~sqrt(eps)
        let c0 = concurrence(&rho).unwrap();
        for pos in 0..2 {
            let c1 = concurrence(&rho.conjugate_local(pos, &u)).unwrap();
            prop_assert!((c0 - c1).abs() < 1e-7, "{} vs {}", c0, c1);
        }
        // pure two-qubit states: C = 2|ad - bc|
        let want = 2.0 * (psi[0] * psi[3] - psi[1] * psi[2]).abs();
        prop_assert!((c0 - want).abs() < 1e-7);
    }

    #[test]
    fn three_qubit_monogamy(psi in state(8)) {
        let basis = build_basis(3, SectorConstraint::None).unwrap();
        for j in 0..3 {
            let r = residual_tangle(&psi, &basis, j).unwrap();
            prop_assert!(r > -1e-9, "residual tangle {}", r);
        }
        for pair in [[0, 1], [0, 2], [1, 2]] {
            let c = concurrence(&reduce(&psi, &basis, &pair).unwrap()).unwrap();
            prop_assert!((0.0..=1.0 + 1e-12).contains(&c));
        }
    }

    #[test]
    fn classification_ignores_scale(b in bonds(4, false), xxz in bonds(4, true), c in 0.01..100.0f64) {
        for b in [b, xxz] {
            let scaled: Vec<Bond> = b.iter().map(|x| Bond::new(x.i, x.j, x.coupling.scaled(c), x.weight)).collect();
            prop_assert_eq!(classify_bonds(&b, SYMMETRY_TOL), classify_bonds(&scaled, SYMMETRY_TOL));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn effective_couplings_scale_as_lambda_squared(lambda in 0.001..0.3f64, c in 0.1..3.0f64, jz in -1.0..1.0f64) {
        let p = GeometryParams::new(lambda, Coupling::xxz(1.0, jz), Sign::Antiferro);
        let net = make_geometry("square4", &p).unwrap();
        let base = effective_couplings(&net, Method::SumOverStates).unwrap();
        let net_c = make_geometry("square4", &GeometryParams { lambda: lambda * c, ..p }).unwrap();
        prop_assume!(lambda * c <= 1.0);
        let direct = effective_couplings(&net_c, Method::SumOverStates).unwrap();
        let scaled = base.rescaled(c);
        for a in 0..3 {
            for (x, y) in direct.tensor[a].iter().zip(&scaled.tensor[a]) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-6));
            }
        }
    }
}
