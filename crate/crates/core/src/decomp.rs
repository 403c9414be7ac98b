//! Decomposition into irreducibles and the equivalence relations built on it.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{combine, AlgElement, Algebra};
use crate::error::{Error, Result};
use crate::linalg::{eigh, numerical_rank, numerical_rank_scaled, pseudo_inverse, CMatrix, Tolerance, C64};
use crate::rep::{span_images, Representation};

const MAX_ATTEMPTS: usize = 8;

pub(crate) struct RawBlock {
    pub rho: Vec<CMatrix>,
    pub isometries: Vec<CMatrix>,
}

pub(crate) struct RawDecomposition {
    pub kernel: CMatrix,
    pub blocks: Vec<RawBlock>,
}

/// Splits `images` (a representation of `alg`, kernel allowed) into isotypic
/// components and then into irreducible copies.
///
/// Isotypic components are eigenspaces of a random Hermitian central element.
/// Inside a component `rho (tensor) I_k`, the top eigenspace of a random
/// Hermitian element has dimension `k`; an orthonormal basis `f_1..f_k` of it
/// generates the `k` copies, and the map `pi(a) f_1 -> pi(a) f_j` supplies
/// identical coordinates on each copy.
pub(crate) fn split_representation(
    alg: &Algebra,
    images: &[CMatrix],
    tol: &Tolerance,
    seed: u64,
) -> Result<RawDecomposition> {
    let m = images.first().map_or(0, CMatrix::rows);
    let unit = combine(images, alg.unit_coords());
    let pe = eigh(&unit);
    let keep = pe.values.iter().filter(|&&x| x > 0.5).count();
    let q0 = pe.vectors.columns(0..keep);
    let kernel = pe.vectors.columns(keep..m);
    let nd: Vec<CMatrix> = images.iter().map(|x| q0.adjoint_mul(&x.mul(&q0))).collect();
    if keep == 0 {
        return Ok(RawDecomposition { kernel, blocks: Vec::new() });
    }

    let center: Vec<CMatrix> = alg.hermitian_center_span().iter().map(|z| combine(&nd, z)).collect();
    let center_cols: Vec<Vec<C64>> = center.iter().map(|z| z.data().to_vec()).collect();
    let components = numerical_rank(&CMatrix::from_columns(keep * keep, &center_cols), tol);
    let herm: Vec<CMatrix> = alg.hermitian_span().iter().map(|h| combine(&nd, h)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..MAX_ATTEMPTS {
        if let Some(blocks) = attempt(&nd, &center, components, &herm, &q0, tol, &mut rng) {
            return Ok(RawDecomposition { kernel, blocks });
        }
    }
    Err(Error::NumericalDegeneracy(alloc::format!("eigenvalue collisions persisted through {MAX_ATTEMPTS} resamples")))
}

fn random_hermitian(parts: &[CMatrix], rng: &mut ChaCha8Rng) -> CMatrix {
    let coeffs: Vec<C64> = parts.iter().map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
    combine(parts, &coeffs)
}

/// Consecutive index ranges of a descending spectrum, split at relative gaps.
fn clusters(values: &[f64], tol: &Tolerance) -> Vec<core::ops::Range<usize>> {
    let scale = values.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i - 1] - values[i] > tol.gap_rel * scale {
            out.push(start..i);
            start = i;
        }
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn attempt(
    nd: &[CMatrix],
    center: &[CMatrix],
    components: usize,
    herm: &[CMatrix],
    q0: &CMatrix,
    tol: &Tolerance,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<RawBlock>> {
    let m0 = q0.cols();
    let z = eigh(&random_hermitian(center, rng));
    let iso = clusters(&z.values, tol);
    if iso.len() != components {
        return None;
    }
    let mut blocks = Vec::with_capacity(iso.len());
    let mut placed = 0;
    for range in iso {
        let qc = z.vectors.columns(range);
        let s = qc.cols();
        let comp: Vec<CMatrix> = nd.iter().map(|x| qc.adjoint_mul(&x.mul(&qc))).collect();
        let hc = qc.adjoint_mul(&random_hermitian(herm, rng).mul(&qc));
        let he = eigh(&hc);
        let top = clusters(&he.values, tol).into_iter().next()?;
        let k = top.len();
        let seeds: Vec<Vec<C64>> = top.map(|j| he.vectors.column(j)).collect();
        let q1 = span_images(&comp, &seeds[..1], tol);
        let n = q1.len();
        if n * k != s {
            return None;
        }
        let q1 = CMatrix::from_columns(s, &q1);
        let x = CMatrix::from_columns(s, &comp.iter().map(|b| b.mul_vec(&seeds[0])).collect::<Vec<_>>());
        let coeffs = pseudo_inverse(&x, tol).mul(&q1);
        let rho: Vec<CMatrix> = comp.iter().map(|b| q1.adjoint_mul(&b.mul(&q1))).collect();
        let mut isometries = Vec::with_capacity(k);
        for f in &seeds {
            let y = CMatrix::from_columns(s, &comp.iter().map(|b| b.mul_vec(f)).collect::<Vec<_>>());
            let local = y.mul(&coeffs);
            isometries.push(q0.mul(&qc.mul(&local)));
        }
        placed += n * k;
        blocks.push(RawBlock { rho, isometries });
    }
    if placed != m0 || !verify_blocks(nd, q0, &blocks, tol) {
        return None;
    }
    Some(blocks)
}

/// Orthonormality of all copies together and the intertwining identity per copy.
fn verify_blocks(nd: &[CMatrix], q0: &CMatrix, blocks: &[RawBlock], tol: &Tolerance) -> bool {
    let all: Vec<&CMatrix> = blocks.iter().flat_map(|b| b.isometries.iter()).collect();
    let u = CMatrix::hstack(&all);
    let gram = u.adjoint_mul(&u);
    if gram.max_abs_diff(&CMatrix::identity(gram.rows())) > tol.eq_abs {
        return false;
    }
    // the compressed images nd act on q0's coordinates; lift them back
    for b in blocks {
        for v in &b.isometries {
            let local = q0.adjoint_mul(v);
            for (x, r) in nd.iter().zip(&b.rho) {
                if x.mul(&local).max_abs_diff(&local.mul(r)) > tol.eq_abs {
                    return false;
                }
            }
        }
    }
    true
}

/// An irreducible summand, with its own coordinates.
#[derive(Clone, Debug)]
pub struct IrreducibleBlock {
    pub id: usize,
    pub rep: Representation,
}

impl IrreducibleBlock {
    pub fn dim(&self) -> usize {
        self.rep.dim()
    }
}

#[derive(Clone, Debug)]
pub struct DecomposedBlock {
    pub block: IrreducibleBlock,
    pub multiplicity: usize,
    /// `multiplicity` isometries `C^{n_i} -> carrier` with `pi(b) V = V rho(b)`.
    pub isometries: Vec<CMatrix>,
}

/// `H = ker pi(A) (+) sum_i H_i^{(k_i)}` with explicit isometries.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub source: Representation,
    pub kernel_basis: CMatrix,
    pub blocks: Vec<DecomposedBlock>,
}

impl Decomposition {
    /// `sum_i rho_i^{(k_i)}`, copies in block order, followed by a zero
    /// summand for the kernel.
    pub fn reassemble(&self) -> Representation {
        let alg = self.source.algebra();
        let kdim = self.kernel_basis.cols();
        let images = (0..alg.dim())
            .map(|k| {
                let mut parts: Vec<&CMatrix> = Vec::new();
                for b in &self.blocks {
                    for _ in 0..b.multiplicity {
                        parts.push(&b.block.rep.images()[k]);
                    }
                }
                let zero = CMatrix::zeros(kdim, kdim);
                parts.push(&zero);
                CMatrix::block_diag(&parts)
            })
            .collect();
        Representation::from_parts_unchecked(alg.clone(), images)
    }

    /// Unitary `U` from the reassembled carrier onto the source carrier,
    /// `pi(b) U = U reassembled(b)`.
    pub fn assembly_unitary(&self) -> CMatrix {
        let mut parts: Vec<&CMatrix> = self.blocks.iter().flat_map(|b| b.isometries.iter()).collect();
        parts.push(&self.kernel_basis);
        CMatrix::hstack(&parts)
    }

    /// Largest `|pi(b) U - U reassembled(b)|` over the basis.
    pub fn intertwining_residual(&self) -> f64 {
        let u = self.assembly_unitary();
        let re = self.reassemble();
        self.source.images().iter().zip(re.images()).map(|(x, y)| x.mul(&u).max_abs_diff(&u.mul(y))).fold(0.0, f64::max)
    }

    /// Commutant dimension of each block's irreducible representation.
    pub fn schur_dims(&self, tol: &Tolerance) -> Vec<usize> {
        self.blocks.iter().map(|b| b.block.rep.commutant(tol).dim()).collect()
    }

    pub fn multiplicities(&self) -> Vec<(usize, usize)> {
        self.blocks.iter().map(|b| (b.block.dim(), b.multiplicity)).collect()
    }
}

pub fn decompose(rep: &Representation, tol: &Tolerance, seed: u64) -> Result<Decomposition> {
    let alg = rep.algebra();
    let raw = split_representation(alg, rep.images(), tol, seed)?;
    let blocks = raw
        .blocks
        .into_iter()
        .enumerate()
        .map(|(id, b)| DecomposedBlock {
            multiplicity: b.isometries.len(),
            block: IrreducibleBlock { id, rep: Representation::from_parts_unchecked(alg.clone(), b.rho) },
            isometries: b.isometries,
        })
        .collect();
    Ok(Decomposition { source: rep.clone(), kernel_basis: raw.kernel, blocks })
}

/// Unitary `W` with `target(b) = W source(b) W*` between equivalent irreducibles.
pub(crate) fn irreducible_equivalence(
    source: &Representation,
    target: &Representation,
    tol: &Tolerance,
) -> Result<Option<CMatrix>> {
    if source.dim() != target.dim() {
        return Ok(None);
    }
    let sp = source.intertwiners(target, tol)?;
    match sp.basis.first() {
        None => Ok(None),
        Some(t) => Ok(Some(t.scale(C64::new(Float::sqrt(source.dim() as f64), 0.0)))),
    }
}

/// `Some(U)` with `U pi_1(b) U* = pi_2(b)` when the two representations are
/// unitarily equivalent.
pub fn unitary_equivalent(
    r1: &Representation,
    r2: &Representation,
    tol: &Tolerance,
    seed: u64,
) -> Result<Option<CMatrix>> {
    r1.algebra().check_same(r2.algebra())?;
    if r1.dim() != r2.dim() {
        return Ok(None);
    }
    let d1 = decompose(r1, tol, seed)?;
    let d2 = decompose(r2, tol, seed)?;
    if d1.kernel_basis.cols() != d2.kernel_basis.cols() || d1.blocks.len() != d2.blocks.len() {
        return Ok(None);
    }
    let m = r1.dim();
    let mut u = d2.kernel_basis.mul(&d1.kernel_basis.adjoint());
    if m == 0 {
        u = CMatrix::zeros(0, 0);
    }
    let mut taken = alloc::vec![false; d2.blocks.len()];
    for b1 in &d1.blocks {
        let mut found = None;
        for (j, b2) in d2.blocks.iter().enumerate() {
            if taken[j] {
                continue;
            }
            if let Some(w) = irreducible_equivalence(&b1.block.rep, &b2.block.rep, tol)? {
                found = Some((j, w));
                break;
            }
        }
        let Some((j, w)) = found else { return Ok(None) };
        taken[j] = true;
        let b2 = &d2.blocks[j];
        if b1.multiplicity != b2.multiplicity {
            return Ok(None);
        }
        for (v1, v2) in b1.isometries.iter().zip(&b2.isometries) {
            u = u.add(&v2.mul(&w).mul(&v1.adjoint()));
        }
    }
    let residual = equivalence_residual(r1, r2, &u);
    if residual > tol.eq_abs * 10.0 {
        return Err(Error::NumericalDegeneracy(alloc::format!("assembled unitary misses by {residual:e}")));
    }
    Ok(Some(u))
}

/// Largest of `|U pi_1(b) U* - pi_2(b)|` over the basis and `|U* U - I|`.
pub fn equivalence_residual(r1: &Representation, r2: &Representation, u: &CMatrix) -> f64 {
    let unitarity = u.adjoint_mul(u).max_abs_diff(&CMatrix::identity(u.cols()));
    r1.images()
        .iter()
        .zip(r2.images())
        .map(|(a, b)| u.mul(a).mul(&u.adjoint()).max_abs_diff(b))
        .fold(unitarity, f64::max)
}

/// Equality of the vector states of `v1` and `v2` on every basis element.
pub fn cyclic_isometric_isomorphic(
    r1: &Representation,
    v1: &[C64],
    r2: &Representation,
    v2: &[C64],
    tol: &Tolerance,
) -> Result<bool> {
    r1.algebra().check_same(r2.algebra())?;
    check_len(r1, v1)?;
    check_len(r2, v2)?;
    let a = r1.vector_state_values(v1);
    let b = r2.vector_state_values(v2);
    Ok(a.iter().zip(&b).all(|(x, y)| (x - y).norm() <= tol.eq_abs))
}

fn check_len(r: &Representation, v: &[C64]) -> Result<()> {
    if v.len() != r.dim() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "vector of length {} for carrier of dimension {}",
            v.len(),
            r.dim()
        )));
    }
    Ok(())
}

/// The least-norm `S` with `S pi_1(b) v1 = pi_2(b) v2` for every basis element,
/// or `None` when that system has no solution.
pub(crate) fn cyclic_map(
    r1: &Representation,
    v1: &[C64],
    r2: &Representation,
    v2: &[C64],
    tol: &Tolerance,
) -> Option<CMatrix> {
    let x = CMatrix::from_columns(r1.dim(), &r1.images().iter().map(|b| b.mul_vec(v1)).collect::<Vec<_>>());
    let y = CMatrix::from_columns(r2.dim(), &r2.images().iter().map(|b| b.mul_vec(v2)).collect::<Vec<_>>());
    let s = y.mul(&pseudo_inverse(&x, tol));
    let scale = y.max_abs().max(1.0);
    (s.mul(&x).max_abs_diff(&y) <= tol.eq_abs * scale).then_some(s)
}

/// The isometry `H_{v1} -> H_{v2}` with `pi_1(a) v1 -> pi_2(a) v2`, zero on
/// `H_{v1}` complement; `None` unless the two cyclic triples are isomorphic.
pub fn cyclic_isometry(
    r1: &Representation,
    v1: &[C64],
    r2: &Representation,
    v2: &[C64],
    tol: &Tolerance,
) -> Result<Option<CMatrix>> {
    r1.algebra().check_same(r2.algebra())?;
    check_len(r1, v1)?;
    check_len(r2, v2)?;
    let Some(s) = cyclic_map(r1, v1, r2, v2, tol) else { return Ok(None) };
    let q = CMatrix::from_columns(r1.dim(), &span_images(r1.images(), &[v1.to_vec()], tol));
    let sq = s.mul(&q);
    let dev = sq.adjoint_mul(&sq).max_abs_diff(&CMatrix::identity(q.cols()));
    Ok((dev <= tol.eq_abs * 10.0).then_some(s))
}

/// Numerical rank of `pi(x)`, with the cutoff measured against `|x|` so that
/// rounding noise on an absent block does not count.
pub fn rank_profile(rep: &Representation, x: &AlgElement, tol: &Tolerance) -> Result<usize> {
    Ok(numerical_rank_scaled(&rep.apply(x)?, x.to_matrix().frobenius(), tol))
}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn f<T: Send + Sync>() {}
    f::<Arc<Algebra>>();
    f::<Decomposition>();
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn e(n: usize, r: usize, s: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| C64::new(if (i, j) == (r, s) { 1.0 } else { 0.0 }, 0.0))
    }

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn m2() -> Arc<Algebra> {
        Algebra::generate(2, &[e(2, 0, 1)], &Tolerance::default()).unwrap()
    }

    fn d2() -> Arc<Algebra> {
        Algebra::generate(2, &[e(2, 0, 0)], &Tolerance::default()).unwrap()
    }

    /// `diag(a, ..)` representations of the diagonal algebra, by character pattern.
    fn d2_rep(pattern: &[usize]) -> Representation {
        let a = d2();
        let images = a
            .basis()
            .iter()
            .map(|b| CMatrix::diagonal(&pattern.iter().map(|&p| b[(p, p)]).collect::<Vec<_>>()))
            .collect();
        Representation::new(a, images, &Tolerance::default()).unwrap()
    }

    #[test]
    fn decomposition_examples() {
        let t = Tolerance::default();
        let r = Representation::identity(&m2());
        assert_eq!(decompose(&r, &t, 1).unwrap().multiplicities(), vec![(2, 1)]);
        assert_eq!(decompose(&r.amplify(2), &t, 1).unwrap().multiplicities(), vec![(2, 2)]);
        let mut ms = decompose(&d2_rep(&[0, 0, 1]), &t, 3).unwrap().multiplicities();
        ms.sort_unstable();
        assert_eq!(ms, vec![(1, 1), (1, 2)]);
    }

    #[test]
    fn decomposition_is_seeded() {
        let t = Tolerance::default();
        let r = d2_rep(&[0, 1, 0, 1, 1]);
        let a = decompose(&r, &t, 11).unwrap();
        let b = decompose(&r, &t, 11).unwrap();
        assert_eq!(a.assembly_unitary(), b.assembly_unitary());
    }

    #[test]
    fn reassembly_intertwines() {
        let t = Tolerance::default();
        let r = Representation::identity(&m2()).amplify(3);
        let d = decompose(&r, &t, 5).unwrap();
        assert!(d.intertwining_residual() < 1e-10);
        assert_eq!(d.schur_dims(&t), vec![1]);
    }

    #[test]
    fn kernel_is_split_off() {
        let t = Tolerance::default();
        let a = m2();
        let images = a.basis().iter().map(|b| CMatrix::block_diag(&[b, &CMatrix::zeros(1, 1)])).collect();
        let r = Representation::with_kernel(a, images, &t).unwrap();
        let d = decompose(&r, &t, 0).unwrap();
        assert_eq!(d.kernel_basis.cols(), 1);
        assert!(d.intertwining_residual() < 1e-10);
    }

    #[test]
    fn equivalence_examples() {
        let t = Tolerance::default();
        let r = d2_rep(&[0, 1]);
        assert!(unitary_equivalent(&r, &r, &t, 0).unwrap().is_some());
        assert!(unitary_equivalent(&d2_rep(&[0, 0, 1]), &d2_rep(&[0, 1, 1]), &t, 0).unwrap().is_none());
        let u = unitary_equivalent(&d2_rep(&[0, 1]), &d2_rep(&[1, 0]), &t, 0).unwrap().unwrap();
        // a permutation up to phases
        assert!(u[(0, 0)].norm() < 1e-10 && (u[(0, 1)].norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cyclic_examples() {
        let t = Tolerance::default();
        let r = Representation::identity(&m2());
        let v = vec![c(0.6), C64::new(0.0, 0.8)];
        let phase = C64::new(0.0, 1.0);
        let w: Vec<C64> = v.iter().map(|x| x * phase).collect();
        assert!(cyclic_isometric_isomorphic(&r, &v, &r, &w, &t).unwrap());
        assert!(!cyclic_isometric_isomorphic(&r, &[c(1.0), c(0.0)], &r, &[c(0.0), c(1.0)], &t).unwrap());
        let d = Representation::identity(&d2());
        let h = 1.0 / 2f64.sqrt();
        assert!(!cyclic_isometric_isomorphic(&d, &[c(1.0), c(0.0)], &d, &[c(h), c(h)], &t).unwrap());
        let s = cyclic_isometry(&r, &v, &r, &w, &t).unwrap().unwrap();
        assert!(s.mul_vec(&v).iter().zip(&w).all(|(a, b)| (a - b).norm() < 1e-10));
        assert!(cyclic_isometry(&r, &[c(1.0), c(0.0)], &r, &[c(0.0), c(1.0)], &t).unwrap().is_none());
    }

    #[test]
    fn rank_examples() {
        let t = Tolerance::default();
        let r = d2_rep(&[0, 0, 1]);
        let a = r.algebra().clone();
        assert_eq!(rank_profile(&r, &a.unit(), &t).unwrap(), 3);
        assert_eq!(rank_profile(&r, &a.zero(), &t).unwrap(), 0);
        let p = a.from_matrix(&e(2, 0, 0)).unwrap();
        assert_eq!(rank_profile(&r, &p, &t).unwrap(), 2);
    }
}
