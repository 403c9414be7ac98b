//! Property suites for linear algebra, algebras, representations and states.
//! Each property compares against a second route to the same quantity.

use std::sync::Arc;

use hilbmod_core::linalg::{hermitian_eigen, numerical_rank, psd_check, svd};
use hilbmod_core::sample::{self, random_matrix, random_unitary};
use hilbmod_core::states::{
    dominates, functional_norm, gns, norm_orthogonal, orthogonal, orthogonality_witness, vector_state, BlockDensity,
};
use hilbmod_core::{decompose, rank_profile, unitary_equivalent, Algebra, CMatrix, Functional, Tolerance, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerance {
    Tolerance::default()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn algebra(r: &mut ChaCha8Rng) -> Arc<Algebra> {
    sample::random_algebra(6, 9, &tol(), r).unwrap()
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn svd_reconstructs_and_orders(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7) {
        let a = random_matrix(rows, cols, &mut rng(seed));
        let d = svd(&a);
        let k = d.values.len();
        let s = CMatrix::diagonal(&d.values.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        let back = d.u.columns(0..k).mul(&s).mul(&d.v.columns(0..k).adjoint());
        prop_assert!(back.max_abs_diff(&a) < 1e-12);
        prop_assert!(d.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn product_rank_is_inner_dimension(seed in any::<u64>(), n in 2usize..7, inner in 1usize..7) {
        let mut r = rng(seed);
        let k = inner.min(n);
        let p = random_matrix(n, k, &mut r).mul(&random_matrix(k, n, &mut r));
        prop_assert_eq!(numerical_rank(&p, &tol()), k);
    }

    #[test]
    fn eigendecomposition_reconstructs(seed in any::<u64>(), n in 1usize..7) {
        let h = sample::random_hermitian(n, &mut rng(seed));
        let e = hermitian_eigen(&h, &tol()).unwrap();
        let d = CMatrix::diagonal(&e.values.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        prop_assert!(e.vectors.mul(&d).mul(&e.vectors.adjoint()).max_abs_diff(&h) < 1e-12);
        let psd = sample::random_psd(n, n / 2 + 1, &mut rng(seed ^ 1));
        prop_assert!(psd_check(&psd, &tol()).unwrap());
    }

    #[test]
    fn algebra_dimension_matches_block_shape(seed in any::<u64>()) {
        let mut r = rng(seed);
        let shape = sample::random_shape(6, 9, &mut r);
        let alg = sample::random_algebra_with_shape(&shape, &tol(), &mut r).unwrap();
        let expected: usize = shape.iter().map(|(n, _)| n * n).sum();
        prop_assert_eq!(alg.dim(), expected);
        let s = alg.structure().unwrap();
        let mut got: Vec<(usize, usize)> = s.blocks.iter().map(|b| (b.dim, b.ambient_multiplicity)).collect();
        let mut want = shape.clone();
        got.sort_unstable();
        want.sort_unstable();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn gns_roundtrip_and_carrier_dimension(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = algebra(&mut r);
        let phi = sample::random_positive_functional(&alg, &mut r).unwrap();
        let (rep, v) = gns(&phi, &tol()).unwrap();
        prop_assert!(vector_state(&rep, &v).unwrap().max_abs_diff(&phi) < 1e-9);
        prop_assert_eq!(rep.dim(), numerical_rank(&phi.gram(), &tol()));
        // dim H_phi = sum_i n_i rank(D_i), read off the block densities.
        let dims = alg.structure().unwrap().block_dims();
        let by_density: usize = BlockDensity::of(&phi)
            .unwrap()
            .supports(&tol())
            .iter()
            .zip(&dims)
            .map(|(q, n)| q.cols() * n)
            .sum();
        prop_assert_eq!(rep.dim(), by_density);
    }

    #[test]
    fn decomposition_matches_central_ranks(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = algebra(&mut r);
        let rep = sample::random_representation(&alg, 16, &mut r).unwrap();
        let dec = decompose(&rep, &tol(), seed).unwrap();
        prop_assert!(dec.intertwining_residual() < 1e-8);
        prop_assert!(dec.schur_dims(&tol()).iter().all(|&d| d == 1));
        // Multiplicity of block i = rank pi(p_i) / n_i, with p_i the central projection.
        let s = alg.structure().unwrap();
        let mut from_center: Vec<(usize, usize)> = (0..s.blocks.len())
            .map(|i| {
                let p = alg.element(s.central_projection(i)).unwrap();
                (s.blocks[i].dim, rank_profile(&rep, &p, &tol()).unwrap() / s.blocks[i].dim)
            })
            .filter(|(_, m)| *m > 0)
            .collect();
        let mut from_dec: Vec<(usize, usize)> = dec.blocks.iter().map(|b| (b.block.dim(), b.multiplicity)).collect();
        from_center.sort_unstable();
        from_dec.sort_unstable();
        prop_assert_eq!(from_center, from_dec);
        // dim of the commutant = sum of squared multiplicities.
        let sq: usize = dec.blocks.iter().map(|b| b.multiplicity * b.multiplicity).sum();
        prop_assert_eq!(rep.commutant(&tol()).dim(), sq);
    }

    #[test]
    fn conjugate_representations_are_equivalent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = algebra(&mut r);
        let rep = sample::random_representation(&alg, 12, &mut r).unwrap();
        let u = random_unitary(rep.dim(), &mut r);
        let other = rep.conjugate(&u);
        prop_assert!(unitary_equivalent(&rep, &other, &tol(), seed).unwrap().is_some());
        let bigger = rep.direct_sum(&sample::random_representation(&alg, 4, &mut r).unwrap()).unwrap();
        prop_assert!(unitary_equivalent(&rep, &bigger, &tol(), seed).unwrap().is_none());
    }

    #[test]
    fn support_and_norm_orthogonality_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = algebra(&mut r);
        let (phi, psi) = split_pair(&alg, &mut r);
        let by_support = orthogonal(&phi, &psi, &tol()).unwrap();
        prop_assert_eq!(by_support, norm_orthogonal(&phi, &psi, &tol()).unwrap());
        if by_support {
            let a = orthogonality_witness(&phi, &psi, &tol()).unwrap();
            prop_assert!(phi.eval(&alg.unit().sub(&a).unwrap()).unwrap().norm() < 1e-9);
            prop_assert!(psi.eval(&a).unwrap().norm() < 1e-9);
        }
    }

    #[test]
    fn positive_functional_norm_is_value_at_unit(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = algebra(&mut r);
        let phi = sample::random_positive_functional(&alg, &mut r).unwrap();
        prop_assert!((functional_norm(&phi, &tol()).unwrap() - phi.at_unit().re).abs() < 1e-10);
    }

    #[test]
    fn domination_constant_is_minimal(seed in any::<u64>()) {
        let mut r = rng(seed);
        let alg = algebra(&mut r);
        let psi = sample::random_positive_functional(&alg, &mut r).unwrap();
        // A density compressed to the support of psi is dominated by psi.
        let dens: Vec<CMatrix> = BlockDensity::of(&psi)
            .unwrap()
            .supports(&tol())
            .iter()
            .map(|q| {
                let x = q.mul(&random_matrix(q.cols(), q.cols(), &mut r));
                x.mul(&x.adjoint())
            })
            .collect();
        let phi = Functional::from_densities(&alg, &dens).unwrap();
        let g = dominates(&phi, &psi, &tol()).unwrap();
        prop_assert!(g.is_some());
        let g = g.unwrap();
        prop_assert!(psi.scale(g * (1.0 + 1e-6)).sub(&phi).unwrap().is_positive(&tol()));
        if phi.at_unit().re > 1e-6 {
            prop_assert!(!psi.scale(g * (1.0 - 1e-3)).sub(&phi).unwrap().is_positive(&tol()));
        }
    }
}

/// Two positive functionals whose block supports are split between them in
/// about half the blocks and random elsewhere.
fn split_pair(alg: &Arc<Algebra>, r: &mut ChaCha8Rng) -> (Functional, Functional) {
    let dims = alg.structure().unwrap().block_dims();
    let mut dp = Vec::new();
    let mut dq = Vec::new();
    for &d in &dims {
        let u = random_unitary(d, r);
        let a = r.gen_range(0..=d);
        let b0 = if r.gen_bool(0.5) { a } else { r.gen_range(0..=d) };
        let x = u.columns(0..a).mul(&random_matrix(a, a, r));
        let y = u.columns(b0..d).mul(&random_matrix(d - b0, d - b0, r));
        dp.push(x.mul(&x.adjoint()));
        dq.push(y.mul(&y.adjoint()));
    }
    (Functional::from_densities(alg, &dp).unwrap(), Functional::from_densities(alg, &dq).unwrap())
}
