use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::sample;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn tol() -> Tolerance {
    Tolerance::default()
}

fn real(rows: &[&[f64]]) -> CMatrix {
    CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| c(rows[i][j]))
}

fn d2() -> Arc<Algebra> {
    Algebra::generate(2, &[real(&[&[1.0, 0.0], &[0.0, 0.0]])], &tol()).unwrap()
}

fn m2() -> Arc<Algebra> {
    Algebra::generate(2, &[real(&[&[0.0, 1.0], &[0.0, 0.0]])], &tol()).unwrap()
}

fn one_block(alg: &Arc<Algebra>, m: Multiplicity) -> ExtendedModel {
    ExtendedModel::from_canonical(alg, &[m], &tol()).unwrap()
}

/// `D_2` with block 0 at `m0` and block 1 at `m1`.
fn d2_model(m0: Multiplicity, m1: Multiplicity) -> ExtendedModel {
    ExtendedModel::from_canonical(&d2(), &[m0, m1], &tol()).unwrap()
}

fn at(model: &ExtendedModel, entries: &[(usize, usize, &[f64])]) -> ModelVector {
    model.vector(entries.iter().map(|(b, k, xs)| (*b, *k, xs.iter().map(|x| c(*x)).collect())).collect()).unwrap()
}

fn close(a: &ModelVector, b: &ModelVector) -> bool {
    a.max_abs_diff(b) <= 1e-12
}

#[test]
fn construction_checks_blocks() {
    let alg = d2();
    let s = alg.structure().unwrap();
    let r0 = Representation::from_parts_unchecked(alg.clone(), s.blocks[0].images.clone());
    let err = ExtendedModel::new(
        alg.clone(),
        vec![(r0.clone(), Multiplicity::Omega), (r0.clone(), Multiplicity::Finite(1))],
        &tol(),
    )
    .unwrap_err();
    assert_eq!(err, Error::EquivalentBlocks { first: 0, second: 1 });
    let id = Representation::identity(&alg);
    assert!(matches!(
        ExtendedModel::new(alg.clone(), vec![(id, Multiplicity::Omega)], &tol()),
        Err(Error::NotIrreducible { block: 0, commutant_dim: 2 })
    ));
    assert!(ExtendedModel::new(alg, vec![], &tol()).is_err());
}

#[test]
fn apply_examples() {
    let m = one_block(&m2(), Multiplicity::Finite(1));
    let v = at(&m, &[(0, 0, &[1.0, 0.0])]);
    assert!(close(&m.apply(&m.algebra().unit(), &v).unwrap(), &v));
    let s = m.algebra().structure().unwrap();
    let e21 = m.algebra().element(s.matrix_unit(0, 1, 0)).unwrap();
    let out = m.apply(&e21, &v).unwrap();
    assert!(close(&out, &at(&m, &[(0, 0, &[0.0, 1.0])])));

    let d = d2_model(Multiplicity::Omega, Multiplicity::Omega);
    let p0 = d.algebra().element(d.algebra().structure().unwrap().central_projection(0)).unwrap();
    let v1 = at(&d, &[(1, 3, &[2.0])]);
    assert!(d.apply(&p0, &v1).unwrap().norm() < 1e-12);
}

#[test]
fn copy_range_is_validated() {
    let m = one_block(&m2(), Multiplicity::Finite(2));
    let err = m.vector(vec![(0, 2, vec![c(1.0), c(0.0)])]).unwrap_err();
    assert_eq!(err, Error::CopyOutOfRange { block: 0, copy: 2, multiplicity: 2 });
}

#[test]
fn dcl_examples() {
    let m = d2_model(Multiplicity::Omega, Multiplicity::Omega);
    let e = at(&m, &[(0, 0, &[1.0])]);
    assert!(close(&m.dcl_project(std::slice::from_ref(&e), &e), &e));
    let v = at(&m, &[(0, 0, &[2.0]), (0, 1, &[3.0])]);
    assert!(m.dcl_project(&[], &v).is_zero());
    assert!(close(&m.dcl_project(&[e], &v), &at(&m, &[(0, 0, &[2.0])])));
}

#[test]
fn acl_examples() {
    let m = d2_model(Multiplicity::Finite(1), Multiplicity::Omega);
    let d = at(&m, &[(0, 0, &[1.5])]);
    assert!(close(&m.acl_project(&[], &d), &d));
    let ess = at(&m, &[(1, 4, &[1.0])]);
    assert!(m.acl_project(&[], &ess).is_zero());
    let e = at(&m, &[(1, 0, &[1.0])]);
    assert!(close(&m.acl_project(&[e], &d.add(&ess)), &d));
}

#[test]
fn type_equal_examples() {
    let m = one_block(&m2(), Multiplicity::Omega);
    let v = at(&m, &[(0, 0, &[1.0, 0.0])]);
    let w = at(&m, &[(0, 5, &[1.0, 0.0])]);
    assert!(m.type_equal(&v, &v, &[]).unwrap());
    assert!(m.type_equal(&v, &w, &[]).unwrap());
    // same copy profile is needed: (0, 1) gives a different state
    let z = at(&m, &[(0, 5, &[0.0, 1.0])]);
    assert!(!m.type_equal(&v, &z, &[]).unwrap());

    let d = d2_model(Multiplicity::Omega, Multiplicity::Omega);
    let a = at(&d, &[(0, 0, &[1.0])]);
    let b = at(&d, &[(1, 0, &[1.0])]);
    assert!(!d.type_equal(&a, &b, &[]).unwrap());

    let h = TypeHandle::new(vec![], v.clone());
    assert!(h.same_type(&TypeHandle::new(vec![], w), &m).unwrap());
}

#[test]
fn independence_examples() {
    let m = d2_model(Multiplicity::Finite(1), Multiplicity::Omega);
    let d = at(&m, &[(0, 0, &[1.0])]);
    let f = at(&m, &[(1, 0, &[1.0]), (0, 0, &[2.0])]);
    assert!(m.independent(&d, &[], std::slice::from_ref(&f)));
    let v = at(&m, &[(1, 1, &[1.0])]);
    assert!(!m.independent(&v, &[], std::slice::from_ref(&v)));
    assert!(!m.independent_pairwise(&v, &[], std::slice::from_ref(&v)));
    let u = at(&m, &[(1, 2, &[1.0])]);
    assert!(m.independent(&v, &[], std::slice::from_ref(&u)));
    assert!(m.independent_pairwise(&v, &[], &[u]));
    assert!(m.independent_tuple(&[d, v.clone()], &[], &[at(&m, &[(1, 7, &[1.0])])]));
}

#[test]
fn nonforking_extension_examples() {
    let m = d2_model(Multiplicity::Omega, Multiplicity::Omega);
    let u = at(&m, &[(0, 1, &[1.0])]);
    let v = at(&m, &[(0, 1, &[0.5]), (1, 0, &[2.0])]);
    let w = m.nonforking_extension(&v, &[], std::slice::from_ref(&u), None).unwrap();
    assert!(m.type_equal(&v, &w, &[]).unwrap());
    assert!(m.independent(&w, &[], std::slice::from_ref(&u)));
    assert!(w.block(0).keys().all(|&k| k >= 2));
    assert!((w.norm() - v.norm()).abs() < 1e-12);

    let same = m.nonforking_extension(&v, std::slice::from_ref(&u), std::slice::from_ref(&u), Some(3)).unwrap();
    assert!(m.type_equal(&v, &same, std::slice::from_ref(&u)).unwrap());

    let inside = u.scale(c(3.0));
    let w2 = m.nonforking_extension(&inside, std::slice::from_ref(&u), &[u.clone(), v], None).unwrap();
    assert!(close(&w2, &inside));

    assert!(m.nonforking_extension(&u, std::slice::from_ref(&u), &[], None).is_err());
}

#[test]
fn finite_blocks_run_out() {
    let m = d2_model(Multiplicity::Finite(2), Multiplicity::Omega);
    let d = at(&m, &[(0, 0, &[1.0])]);
    let e = at(&m, &[(1, 0, &[1.0])]);
    // discrete mass stays where it is
    let w = m.nonforking_extension(&d, &[], &[e], None).unwrap();
    assert!(close(&w, &d));
    assert_eq!(m.used_copies(0), 1);
    assert!(m.allocate_fresh(0, 2, 0).is_err());
    assert_eq!(m.allocate_fresh(0, 1, 0).unwrap(), 1);
    assert_eq!(m.allocate_fresh(0, 1, 0), Err(Error::InsufficientMultiplicity { block: 0 }));
}

#[test]
fn canonical_base_examples() {
    let m = d2_model(Multiplicity::Omega, Multiplicity::Omega);
    let e = at(&m, &[(0, 0, &[1.0])]);
    let v = at(&m, &[(0, 0, &[1.0]), (1, 0, &[0.7])]);
    let cb = m.canonical_base(&[v.clone(), e.clone()], std::slice::from_ref(&e));
    assert!(close(&cb[0], &e));
    assert!(close(&cb[1], &e));
    assert!(m.canonical_base(&[v], &[])[0].is_zero());
}

#[test]
fn morley_sequence_examples() {
    let m = one_block(&m2(), Multiplicity::Omega);
    let e = at(&m, &[(0, 0, &[1.0, 0.0])]);
    let v = at(&m, &[(0, 0, &[0.3, 0.1]), (0, 1, &[1.0, 0.0])]);
    let seq = m.morley_sequence(&v, std::slice::from_ref(&e), 4, Some(11)).unwrap();
    assert_eq!(seq.len(), 4);
    let avg = average(&seq).unwrap();
    let p = m.acl_project(std::slice::from_ref(&e), &v);
    assert!((avg.sub(&p).norm() - 0.5).abs() < 1e-12);

    let one = m.morley_sequence(&v, std::slice::from_ref(&e), 1, None).unwrap();
    assert!(close(&average(&one).unwrap(), &v));

    let inside = e.scale(c(2.0));
    let flat = m.morley_sequence(&inside, &[e], 3, None).unwrap();
    assert!(flat.iter().all(|x| close(x, &inside)));
}

#[test]
fn type_orthogonality_examples() {
    let m = d2_model(Multiplicity::Omega, Multiplicity::Omega);
    let a = at(&m, &[(0, 0, &[1.0])]);
    let a2 = at(&m, &[(0, 1, &[1.0])]);
    let b = at(&m, &[(1, 0, &[1.0])]);
    assert!(m.types_orthogonal(&a, &b, &[]).unwrap());
    assert!(!m.types_orthogonal(&a, &a2, &[]).unwrap());
    assert!(m.types_orthogonal(&a, &a2, std::slice::from_ref(&a)).unwrap());
    assert!(m.types_orthogonal_acl(&a, &a2, std::slice::from_ref(&a)).unwrap());

    let dm = d2_model(Multiplicity::Finite(1), Multiplicity::Omega);
    let disc = at(&dm, &[(0, 0, &[1.0])]);
    let ess = at(&dm, &[(1, 0, &[1.0])]);
    assert!(dm.types_orthogonal(&disc, &ess, &[]).unwrap());
}

#[test]
fn type_domination_examples() {
    let m = d2_model(Multiplicity::Omega, Multiplicity::Omega);
    let a = at(&m, &[(0, 0, &[1.0])]);
    let b = at(&m, &[(1, 0, &[1.0])]);
    assert!(m.type_dominates(&a, &[], &a, std::slice::from_ref(&a), std::slice::from_ref(&a), None).unwrap());
    assert!(!m.type_dominates(&a, &[], &b, &[], &[], None).unwrap());
    let half = a.scale(c(0.5));
    assert!(m.type_dominates(&a, &[], &half, &[], &[], Some(1)).unwrap());
    assert!(m.type_dominates(&half, &[], &a, &[], &[], Some(2)).unwrap());
}

#[test]
fn epsilon_finite_base_examples() {
    let m = one_block(&m2(), Multiplicity::Omega);
    let u = at(&m, &[(0, 0, &[1.0, 0.0])]);
    let v = u.scale(c(0.25));
    assert!(m.epsilon_finite_base(&v, std::slice::from_ref(&u), 1.0).is_empty());
    assert_eq!(m.epsilon_finite_base(&u, std::slice::from_ref(&u), 1e-8), vec![0]);

    let e0 = at(&m, &[(0, 0, &[1.0, 0.0])]);
    let e1 = at(&m, &[(0, 1, &[1.0, 0.0])]);
    let e2 = e0.add(&e1);
    let v = at(&m, &[(0, 0, &[1.0, 2.0]), (0, 1, &[0.5, 0.0]), (0, 2, &[1.0, 1.0])]);
    let idx = m.epsilon_finite_base(&v, &[e0, e1, e2], 1e-8);
    assert!(idx.len() <= 2);
}

#[test]
fn automorphism_examples() {
    let m = one_block(&m2(), Multiplicity::Omega);
    let v = at(&m, &[(0, 0, &[1.0, 0.5])]);
    let id = m.automorphism_witness(&v, &v, &[]).unwrap();
    assert!(id.residual < 1e-12);
    assert!(close(&id.apply(&v), &v));

    let w = at(&m, &[(0, 1, &[1.0, 0.5])]);
    let swap = m.automorphism_witness(&v, &w, &[]).unwrap();
    assert!(swap.residual < 1e-12);
    let other = at(&m, &[(0, 1, &[0.0, 1.0])]);
    let image = swap.apply(&other);
    assert!(image.get(0, 1).map_or(true, |x| crate::linalg::norm(x) < 1e-12));

    let e = at(&m, &[(0, 2, &[1.0, 0.0])]);
    let v = at(&m, &[(0, 2, &[0.3, 0.0]), (0, 0, &[1.0, 1.0])]);
    let w = at(&m, &[(0, 2, &[0.3, 0.0]), (0, 3, &[0.0, 0.0]), (0, 4, &[1.0, 1.0])]);
    let aut = m.automorphism_witness(&v, &w, std::slice::from_ref(&e)).unwrap();
    assert!(aut.residual < 1e-10);
    assert!(close(&aut.apply(&e), &e));

    let far = at(&m, &[(0, 0, &[2.0, 0.0])]);
    assert_eq!(m.automorphism_witness(&v, &far, &[e]).unwrap_err(), Error::TypesDiffer);
}

#[test]
fn monster_keeps_profile() {
    let m = d2_model(Multiplicity::Finite(2), Multiplicity::Omega);
    let big = monster(&m);
    assert!(elementarily_equivalent(&m, &big).unwrap());
    let other = d2_model(Multiplicity::Finite(1), Multiplicity::Omega);
    assert!(!elementarily_equivalent(&m, &other).unwrap());
    let p0 = m.algebra().element(m.algebra().structure().unwrap().central_projection(0)).unwrap();
    assert_eq!(m.rank(&p0).unwrap(), ModelRank::Finite(2));
    assert_eq!(m.rank(&m.algebra().unit()).unwrap(), ModelRank::Infinite);
    let (disc, ess) = m.discrete_essential_split();
    assert_eq!(disc.blocks().len(), 1);
    assert_eq!(ess.blocks().len(), 1);
}

#[test]
fn envelope_matches_block_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let alg = sample::random_algebra_with_shape(&[(2, 1), (1, 1)], &tol(), &mut rng).unwrap();
    let m = sample::random_model_with(&alg, &[Multiplicity::Omega, Multiplicity::Finite(2)], &tol(), &mut rng).unwrap();
    for _ in 0..10 {
        let e: Vec<ModelVector> = (0..2).map(|_| sample::random_model_vector(&m, 4, 2, &mut rng)).collect();
        let v = sample::random_model_vector(&m, 4, 3, &mut rng);
        let mut all: Vec<&ModelVector> = e.iter().collect();
        all.push(&v);
        let env = m.envelope(&all);
        let flat_e: Vec<Vec<C64>> = e.iter().map(|x| env.flatten(x)).collect();
        let flat = env.rep.project(&flat_e, &env.flatten(&v), &tol()).unwrap();
        let direct = m.dcl_project(&e, &v);
        assert!(env.unflatten(&flat).max_abs_diff(&direct) < 1e-9);
        assert!(close(&env.unflatten(&env.flatten(&v)), &v));
    }
}
