//! Concrete unital *-subalgebras of `M_n`, coordinatized by a trace-orthonormal basis.

use alloc::boxed::Box;
use alloc::string::ToString;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use once_cell::race::OnceBox;

use crate::decomp::split_representation;
use crate::error::{Error, Result};
use crate::linalg::{self, orthonormalize_vecs, psd_check, CMatrix, Tolerance, C64};

/// Seed of the internal decomposition that fixes the canonical block coordinates.
const STRUCTURE_SEED: u64 = 0x5eed_a16e;

/// A unital *-subalgebra of `M_n` with an orthonormal basis under `Tr(x* y)`.
///
/// The first basis element is always `I / sqrt(n)`.
pub struct Algebra {
    ambient_dim: usize,
    basis: Vec<CMatrix>,
    /// `c[(i * d + j) * d + k]`: coefficient of `b_k` in `b_i b_j`.
    struct_consts: Vec<C64>,
    /// Column `i` holds the coordinates of `b_i*`.
    invol: CMatrix,
    unit_coords: Vec<C64>,
    generators: Vec<Vec<C64>>,
    tol: Tolerance,
    structure: OnceBox<AlgebraStructure>,
}

impl Clone for Algebra {
    fn clone(&self) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            basis: self.basis.clone(),
            struct_consts: self.struct_consts.clone(),
            invol: self.invol.clone(),
            unit_coords: self.unit_coords.clone(),
            generators: self.generators.clone(),
            tol: self.tol,
            structure: OnceBox::new(),
        }
    }
}

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Algebra").field("ambient_dim", &self.ambient_dim).field("dim", &self.basis.len()).finish()
    }
}

impl Algebra {
    /// Smallest unital *-subalgebra of `M_n` containing `generators`.
    pub fn generate(ambient_dim: usize, generators: &[CMatrix], tol: &Tolerance) -> Result<Arc<Self>> {
        let n = ambient_dim;
        if n == 0 {
            return Err(Error::DimensionMismatch("ambient dimension must be positive".to_string()));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.rows() != n || g.cols() != n {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "generator {i} is {}x{}, expected {n}x{n}",
                    g.rows(),
                    g.cols()
                )));
            }
        }
        let n2 = n * n;
        let mut seeds: Vec<Vec<C64>> = vec![CMatrix::identity(n).data().to_vec()];
        for g in generators {
            seeds.push(g.data().to_vec());
            seeds.push(g.adjoint().data().to_vec());
        }
        let mut basis = orthonormalize_vecs(&[], &seeds, n2, tol);
        let mut fresh = 0..basis.len();
        for _round in 0..n2 {
            let mats: Vec<CMatrix> = basis.iter().map(|b| CMatrix::from_vec(n, n, b.clone())).collect();
            let mut candidates = Vec::new();
            for i in fresh.clone() {
                candidates.push(mats[i].adjoint().data().to_vec());
                for (j, m) in mats.iter().enumerate() {
                    candidates.push(mats[i].mul(m).data().to_vec());
                    if !fresh.contains(&j) {
                        candidates.push(m.mul(&mats[i]).data().to_vec());
                    }
                }
            }
            let added = orthonormalize_vecs(&basis, &candidates, n2, tol);
            if added.is_empty() {
                break;
            }
            fresh = basis.len()..basis.len() + added.len();
            basis.extend(added);
        }
        let basis: Vec<CMatrix> = basis.into_iter().map(|b| CMatrix::from_vec(n, n, b)).collect();
        let generators = generators.iter().map(|g| basis.iter().map(|b| b.hs_inner(g)).collect()).collect();
        Ok(Arc::new(Self::from_basis(n, basis, generators, *tol)))
    }

    fn from_basis(ambient_dim: usize, basis: Vec<CMatrix>, generators: Vec<Vec<C64>>, tol: Tolerance) -> Self {
        let d = basis.len();
        let mut struct_consts = vec![C64::new(0.0, 0.0); d * d * d];
        for i in 0..d {
            for j in 0..d {
                let p = basis[i].mul(&basis[j]);
                for k in 0..d {
                    struct_consts[(i * d + j) * d + k] = basis[k].hs_inner(&p);
                }
            }
        }
        let invol = CMatrix::from_fn(d, d, |k, i| basis[k].hs_inner(&basis[i].adjoint()));
        let unit_coords = basis.iter().map(|b| b.trace().conj()).collect();
        Self { ambient_dim, basis, struct_consts, invol, unit_coords, generators, tol, structure: OnceBox::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    /// `c[i][j][k]` with `b_i b_j = sum_k c[i][j][k] b_k`.
    pub fn struct_const(&self, i: usize, j: usize, k: usize) -> C64 {
        let d = self.dim();
        self.struct_consts[(i * d + j) * d + k]
    }

    /// `J` with `b_i* = sum_k J[k][i] b_k`.
    pub fn involution(&self) -> &CMatrix {
        &self.invol
    }

    pub fn unit_coords(&self) -> &[C64] {
        &self.unit_coords
    }

    /// Coordinates of the generators the algebra was built from.
    pub fn generator_coords(&self) -> &[Vec<C64>] {
        &self.generators
    }

    /// Coordinates of a set whose images generate any representation's image
    /// as a unital *-algebra: the unit, the generators and their adjoints.
    pub(crate) fn generating_set(&self) -> Vec<Vec<C64>> {
        let mut out = vec![self.unit_coords.clone()];
        for g in &self.generators {
            out.push(g.clone());
            out.push(self.star_coords(g));
        }
        out
    }

    /// Real spanning set of the Hermitian elements.
    pub(crate) fn hermitian_span(&self) -> Vec<Vec<C64>> {
        let d = self.dim();
        let half = C64::new(0.5, 0.0);
        let mihalf = C64::new(0.0, -0.5);
        let mut out = Vec::with_capacity(2 * d);
        for k in 0..d {
            let s = self.invol.column(k);
            let mut re: Vec<C64> = s.iter().map(|x| x * half).collect();
            re[k] += half;
            let mut im: Vec<C64> = s.iter().map(|x| -x * mihalf).collect();
            im[k] += mihalf;
            out.push(re);
            out.push(im);
        }
        out
    }

    /// Real spanning set of the Hermitian part of the center.
    pub(crate) fn hermitian_center_span(&self) -> Vec<Vec<C64>> {
        let d = self.dim();
        let rows = CMatrix::from_fn(d * d, d, |row, k| {
            let (l, j) = (row / d, row % d);
            self.struct_const(k, l, j) - self.struct_const(l, k, j)
        });
        let scale = self.struct_consts.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let center = linalg::solve_homogeneous_scaled(&rows, scale, &self.tol);
        let mut out = Vec::new();
        for c in 0..center.cols() {
            let z = center.column(c);
            let zs = self.star_coords(&z);
            out.push(z.iter().zip(&zs).map(|(a, b)| (a + b) * 0.5).collect());
            out.push(z.iter().zip(&zs).map(|(a, b)| (a - b) * C64::new(0.0, -0.5)).collect());
        }
        out
    }

    pub(crate) fn mul_coords(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let d = self.dim();
        let mut out = vec![C64::new(0.0, 0.0); d];
        for (i, xi) in x.iter().enumerate() {
            if *xi == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, yj) in y.iter().enumerate() {
                let f = xi * yj;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                let base = (i * d + j) * d;
                for (o, c) in out.iter_mut().zip(&self.struct_consts[base..base + d]) {
                    *o += f * c;
                }
            }
        }
        out
    }

    pub(crate) fn star_coords(&self, x: &[C64]) -> Vec<C64> {
        let xc: Vec<C64> = x.iter().map(|z| z.conj()).collect();
        self.invol.mul_vec(&xc)
    }

    pub(crate) fn coords_to_matrix(&self, x: &[C64]) -> CMatrix {
        combine(&self.basis, x)
    }

    /// Structural identity: same ambient dimension and the same basis within `1e-10`.
    pub fn same_as(&self, other: &Self) -> bool {
        core::ptr::eq(self, other)
            || (self.ambient_dim == other.ambient_dim
                && self.dim() == other.dim()
                && self.basis.iter().zip(&other.basis).all(|(a, b)| a.max_abs_diff(b) <= 1e-10))
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::AlgebraMismatch)
        }
    }

    /// Block structure of the algebra, computed on first use.
    pub fn structure(&self) -> Result<&AlgebraStructure> {
        self.structure.get_or_try_init(|| AlgebraStructure::compute(self).map(Box::new))
    }

    pub fn element(self: &Arc<Self>, coords: Vec<C64>) -> Result<AlgElement> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "element has {} coordinates, algebra dimension is {}",
                coords.len(),
                self.dim()
            )));
        }
        Ok(AlgElement { algebra: self.clone(), coords })
    }

    pub fn unit(self: &Arc<Self>) -> AlgElement {
        AlgElement { algebra: self.clone(), coords: self.unit_coords.clone() }
    }

    pub fn zero(self: &Arc<Self>) -> AlgElement {
        AlgElement { algebra: self.clone(), coords: vec![C64::new(0.0, 0.0); self.dim()] }
    }

    pub fn basis_element(self: &Arc<Self>, k: usize) -> AlgElement {
        let mut coords = vec![C64::new(0.0, 0.0); self.dim()];
        coords[k] = C64::new(1.0, 0.0);
        AlgElement { algebra: self.clone(), coords }
    }

    /// Coordinates of `m`; fails if `m` is farther than `eq_abs` from the algebra.
    pub fn from_matrix(self: &Arc<Self>, m: &CMatrix) -> Result<AlgElement> {
        if m.rows() != self.ambient_dim || m.cols() != self.ambient_dim {
            return Err(Error::DimensionMismatch("matrix does not match ambient dimension".to_string()));
        }
        let coords: Vec<C64> = self.basis.iter().map(|b| b.hs_inner(m)).collect();
        let residual = self.coords_to_matrix(&coords).max_abs_diff(m);
        if residual > self.tol.eq_abs {
            return Err(Error::Invalid(alloc::format!("matrix lies outside the algebra (residual {residual:e})")));
        }
        Ok(AlgElement { algebra: self.clone(), coords })
    }
}

pub(crate) fn combine(mats: &[CMatrix], coords: &[C64]) -> CMatrix {
    let (r, c) = mats.first().map_or((0, 0), |m| (m.rows(), m.cols()));
    let mut out = CMatrix::zeros(r, c);
    for (m, x) in mats.iter().zip(coords) {
        if *x != C64::new(0.0, 0.0) {
            out.add_scaled(m, *x);
        }
    }
    out
}

/// An element of an [`Algebra`], stored as basis coordinates.
#[derive(Clone, Debug)]
pub struct AlgElement {
    algebra: Arc<Algebra>,
    coords: Vec<C64>,
}

impl AlgElement {
    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn coords(&self) -> &[C64] {
        &self.coords
    }

    fn same(&self, other: &Self) -> Result<()> {
        self.algebra.check_same(&other.algebra)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        Ok(Self { algebra: self.algebra.clone(), coords: self.algebra.mul_coords(&self.coords, &other.coords) })
    }

    pub fn star(&self) -> Self {
        Self { algebra: self.algebra.clone(), coords: self.algebra.star_coords(&self.coords) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same(other)?;
        let coords = self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect();
        Ok(Self { algebra: self.algebra.clone(), coords })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { algebra: self.algebra.clone(), coords: self.coords.iter().map(|x| x * s).collect() }
    }

    pub fn to_matrix(&self) -> CMatrix {
        self.algebra.coords_to_matrix(&self.coords)
    }

    /// Hermitian and positive semidefinite as a matrix.
    pub fn is_positive(&self, tol: &Tolerance) -> bool {
        psd_check(&self.to_matrix(), tol).unwrap_or(false)
    }
}

/// One irreducible summand of the algebra's identity representation.
#[derive(Clone, Debug)]
pub struct CanonicalBlock {
    pub dim: usize,
    /// Multiplicity of this summand inside `M_n`.
    pub ambient_multiplicity: usize,
    /// `rho(b_k)` for each basis element.
    pub images: Vec<CMatrix>,
    /// Offset of this block's entries in the flattened block tuple.
    pub offset: usize,
}

/// The isomorphism `A = M_{n_1} + ... + M_{n_p}` in explicit coordinates.
#[derive(Clone, Debug)]
pub struct AlgebraStructure {
    pub blocks: Vec<CanonicalBlock>,
    /// Maps a flattened block tuple to algebra coordinates.
    to_coords: CMatrix,
}

impl AlgebraStructure {
    fn compute(alg: &Algebra) -> Result<Self> {
        let raw = split_representation(alg, alg.basis(), &alg.tol, STRUCTURE_SEED)?;
        let d = alg.dim();
        let mut blocks = Vec::new();
        let mut offset = 0;
        for b in raw.blocks {
            let dim = b.rho.first().map_or(0, CMatrix::rows);
            blocks.push(CanonicalBlock { dim, ambient_multiplicity: b.isometries.len(), images: b.rho, offset });
            offset += dim * dim;
        }
        if offset != d {
            return Err(Error::NumericalDegeneracy(alloc::format!(
                "block dimensions account for {offset} of {d} algebra dimensions"
            )));
        }
        let forward = CMatrix::from_fn(d, d, |row, k| {
            let blk = blocks.iter().rev().find(|b| b.offset <= row).expect("offset 0 block");
            let local = row - blk.offset;
            blk.images[k][(local / blk.dim, local % blk.dim)]
        });
        let to_coords = linalg::pseudo_inverse(&forward, &alg.tol);
        Ok(Self { blocks, to_coords })
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.dim).collect()
    }

    /// `rho_i(x)` for every block.
    pub fn block_images(&self, coords: &[C64]) -> Vec<CMatrix> {
        self.blocks.iter().map(|b| combine(&b.images, coords)).collect()
    }

    /// Coordinates of the element whose block images are `mats`.
    pub fn embed(&self, mats: &[CMatrix]) -> Vec<C64> {
        let mut flat = Vec::with_capacity(self.to_coords.cols());
        for (b, m) in self.blocks.iter().zip(mats) {
            debug_assert_eq!(m.rows(), b.dim);
            flat.extend_from_slice(m.data());
        }
        self.to_coords.mul_vec(&flat)
    }

    /// Coordinates of the element acting as `E_rs` on block `i` and as zero elsewhere.
    pub fn matrix_unit(&self, i: usize, r: usize, s: usize) -> Vec<C64> {
        let b = &self.blocks[i];
        self.to_coords.column(b.offset + r * b.dim + s)
    }

    /// Coordinates of the central projection onto block `i`.
    pub fn central_projection(&self, i: usize) -> Vec<C64> {
        let mats: Vec<CMatrix> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(j, b)| if j == i { CMatrix::identity(b.dim) } else { CMatrix::zeros(b.dim, b.dim) })
            .collect();
        self.embed(&mats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> CMatrix {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| C64::new(rows[i][j], 0.0))
    }

    fn e(n: usize, r: usize, s: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| C64::new(if (i, j) == (r, s) { 1.0 } else { 0.0 }, 0.0))
    }

    #[test]
    fn generation_examples() {
        let t = Tolerance::default();
        assert_eq!(Algebra::generate(2, &[real(&[&[1.0, 0.0], &[0.0, -1.0]])], &t).unwrap().dim(), 2);
        assert_eq!(Algebra::generate(2, &[e(2, 0, 1)], &t).unwrap().dim(), 4);
        assert_eq!(Algebra::generate(2, &[], &t).unwrap().dim(), 1);
        assert!(matches!(Algebra::generate(2, &[CMatrix::identity(3)], &t), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn first_basis_element_is_normalized_identity() {
        let a = Algebra::generate(3, &[e(3, 0, 1)], &Tolerance::default()).unwrap();
        let expected = CMatrix::identity(3).scale(C64::new(1.0 / 3f64.sqrt(), 0.0));
        assert!(a.basis()[0].max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn matrix_unit_product() {
        let t = Tolerance::default();
        let a = Algebra::generate(2, &[e(2, 0, 1)], &t).unwrap();
        let x = a.from_matrix(&e(2, 0, 1)).unwrap();
        let y = a.from_matrix(&e(2, 1, 0)).unwrap();
        assert!(x.mul(&y).unwrap().to_matrix().max_abs_diff(&e(2, 0, 0)) < 1e-12);
        assert!(x.star().to_matrix().max_abs_diff(&e(2, 1, 0)) < 1e-12);
        assert!(x.star().mul(&x).unwrap().is_positive(&t));
        let unit = a.unit();
        assert!(unit.mul(&y).unwrap().to_matrix().max_abs_diff(&y.to_matrix()) < 1e-12);
    }

    #[test]
    fn positivity_examples() {
        let t = Tolerance::default();
        let a = Algebra::generate(2, &[real(&[&[1.0, 0.0], &[0.0, -1.0]])], &t).unwrap();
        assert!(a.unit().is_positive(&t));
        let g = a.from_matrix(&real(&[&[1.0, 0.0], &[0.0, -1.0]])).unwrap();
        assert!(!g.is_positive(&t));
        assert!(g.star().coords().iter().zip(g.coords()).all(|(x, y)| (x - y).norm() < 1e-12));
    }

    #[test]
    fn involution_squares_to_identity() {
        let t = Tolerance::default();
        let g = CMatrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, (i as f64) - 1.0));
        let a = Algebra::generate(3, &[g.mul(&e(3, 0, 0))], &t).unwrap();
        let j = a.involution();
        assert!(j.mul(&j.conj()).max_abs_diff(&CMatrix::identity(a.dim())) < 1e-10);
        let u: CMatrix = a.coords_to_matrix(a.unit_coords());
        assert!(u.max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn matrix_in_outside_algebra_rejected() {
        let t = Tolerance::default();
        let a = Algebra::generate(2, &[real(&[&[1.0, 0.0], &[0.0, -1.0]])], &t).unwrap();
        assert!(a.from_matrix(&e(2, 0, 1)).is_err());
    }

    #[test]
    fn structure_of_diagonal_plus_full_block() {
        let t = Tolerance::default();
        // C + M_2 inside M_3
        let a = Algebra::generate(3, &[e(3, 0, 0), e(3, 1, 2)], &t).unwrap();
        assert_eq!(a.dim(), 5);
        let s = a.structure().unwrap();
        let mut dims = s.block_dims();
        dims.sort_unstable();
        assert_eq!(dims, [1, 2]);
        for (i, b) in s.blocks.iter().enumerate() {
            for r in 0..b.dim {
                for c in 0..b.dim {
                    let imgs = s.block_images(&s.matrix_unit(i, r, c));
                    for (j, m) in imgs.iter().enumerate() {
                        let want = if i == j { e(b.dim, r, c) } else { CMatrix::zeros(m.rows(), m.rows()) };
                        assert!(m.max_abs_diff(&want) < 1e-10);
                    }
                }
            }
        }
    }
}
