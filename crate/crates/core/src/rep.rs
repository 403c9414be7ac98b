//! Validated *-representations, cyclic subspaces, commutants and intertwiners.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::algebra::{combine, AlgElement, Algebra};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank, orthonormalize_vecs, solve_homogeneous_scaled, CMatrix, Tolerance, C64};

/// A *-homomorphism `A -> M_m`, stored as the images of the algebra basis.
#[derive(Clone, Debug)]
pub struct Representation {
    algebra: Arc<Algebra>,
    images: Vec<CMatrix>,
}

impl Representation {
    /// Validates homomorphism, star and nondegeneracy before accepting `images`.
    pub fn new(algebra: Arc<Algebra>, images: Vec<CMatrix>, tol: &Tolerance) -> Result<Self> {
        let rep = Self::with_kernel(algebra, images, tol)?;
        let residual = rep.degeneracy_residual();
        if residual > tol.eq_abs {
            return Err(Error::Degenerate { residual });
        }
        Ok(rep)
    }

    /// As [`Representation::new`] but allows `pi(e) != I`.
    pub fn with_kernel(algebra: Arc<Algebra>, images: Vec<CMatrix>, tol: &Tolerance) -> Result<Self> {
        let d = algebra.dim();
        if images.len() != d {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} images for an algebra of dimension {d}",
                images.len()
            )));
        }
        let m = images.first().map_or(0, CMatrix::rows);
        if images.iter().any(|x| x.rows() != m || x.cols() != m) {
            return Err(Error::DimensionMismatch("images must all be square of one size".into()));
        }
        if images.iter().flat_map(|x| x.data()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("non-finite entry in image".into()));
        }
        let rep = Self { algebra, images };
        rep.check_star(tol)?;
        rep.check_homomorphism(tol)?;
        Ok(rep)
    }

    pub(crate) fn from_parts_unchecked(algebra: Arc<Algebra>, images: Vec<CMatrix>) -> Self {
        Self { algebra, images }
    }

    fn worst_star(&self) -> (f64, usize) {
        let (mut worst, mut at) = (0.0, 0);
        for i in 0..self.images.len() {
            let star = self.apply_coords(&self.algebra.involution().column(i));
            let r = star.max_abs_diff(&self.images[i].adjoint());
            if r > worst {
                (worst, at) = (r, i);
            }
        }
        (worst, at)
    }

    fn worst_homomorphism(&self) -> (f64, (usize, usize)) {
        let d = self.images.len();
        let (mut worst, mut at) = (0.0, (0, 0));
        for i in 0..d {
            for j in 0..d {
                let lhs = self.images[i].mul(&self.images[j]);
                let c: Vec<C64> = (0..d).map(|k| self.algebra.struct_const(i, j, k)).collect();
                let r = lhs.max_abs_diff(&combine(&self.images, &c));
                if r > worst {
                    (worst, at) = (r, (i, j));
                }
            }
        }
        (worst, at)
    }

    /// `max_i |pi(b_i*) - pi(b_i)*|`.
    pub fn star_residual(&self) -> f64 {
        self.worst_star().0
    }

    /// `max_{i,j} |pi(b_i) pi(b_j) - pi(b_i b_j)|`.
    pub fn homomorphism_residual(&self) -> f64 {
        self.worst_homomorphism().0
    }

    /// `|pi(e) - I|`.
    pub fn degeneracy_residual(&self) -> f64 {
        self.apply_coords(self.algebra.unit_coords()).max_abs_diff(&CMatrix::identity(self.dim()))
    }

    fn check_star(&self, tol: &Tolerance) -> Result<()> {
        let (worst, at) = self.worst_star();
        if worst > tol.eq_abs {
            return Err(Error::NotStar { i: at, residual: worst });
        }
        Ok(())
    }

    fn check_homomorphism(&self, tol: &Tolerance) -> Result<()> {
        let (worst, at) = self.worst_homomorphism();
        if worst > tol.eq_abs {
            return Err(Error::NotHomomorphism { i: at.0, j: at.1, residual: worst });
        }
        Ok(())
    }

    /// The inclusion `A -> M_n`.
    pub fn identity(algebra: &Arc<Algebra>) -> Self {
        Self { algebra: algebra.clone(), images: algebra.basis().to_vec() }
    }

    /// `x -> x (tensor) I_k`: `k` copies of `self`.
    pub fn amplify(&self, k: usize) -> Self {
        let id = CMatrix::identity(k);
        Self { algebra: self.algebra.clone(), images: self.images.iter().map(|x| x.kron(&id)).collect() }
    }

    /// `x -> U pi(x) U*` for a unitary or isometry `U`.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        let images = self.images.iter().map(|x| u.mul(x).mul(&u.adjoint())).collect();
        Self { algebra: self.algebra.clone(), images }
    }

    /// `V* pi(x) V` for an isometry `V` onto an invariant subspace.
    pub fn compress(&self, v: &CMatrix) -> Self {
        let images = self.images.iter().map(|x| v.adjoint_mul(&x.mul(v))).collect();
        Self { algebra: self.algebra.clone(), images }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.images.first().map_or(0, CMatrix::rows)
    }

    pub fn images(&self) -> &[CMatrix] {
        &self.images
    }

    pub fn apply(&self, x: &AlgElement) -> Result<CMatrix> {
        self.algebra.check_same(x.algebra())?;
        Ok(self.apply_coords(x.coords()))
    }

    pub(crate) fn apply_coords(&self, coords: &[C64]) -> CMatrix {
        if self.images.is_empty() {
            return CMatrix::zeros(0, 0);
        }
        combine(&self.images, coords)
    }

    /// Images of the unit, the generators and their adjoints.
    pub(crate) fn generating_images(&self) -> Vec<CMatrix> {
        self.algebra.generating_set().iter().map(|c| self.apply_coords(c)).collect()
    }

    /// Orthonormal basis (columns) of `H_E = span { pi(b_k) v : v in E }`.
    pub fn cyclic_subspace(&self, vectors: &[Vec<C64>], tol: &Tolerance) -> Result<CMatrix> {
        let m = self.dim();
        if vectors.iter().any(|v| v.len() != m) {
            return Err(Error::DimensionMismatch("vector length differs from carrier dimension".into()));
        }
        let candidates: Vec<Vec<C64>> =
            vectors.iter().flat_map(|v| self.images.iter().map(move |x| x.mul_vec(v))).collect();
        Ok(CMatrix::from_columns(m, &orthonormalize_vecs(&[], &candidates, m, tol)))
    }

    /// `P_E v`.
    pub fn project(&self, vectors: &[Vec<C64>], v: &[C64], tol: &Tolerance) -> Result<Vec<C64>> {
        let q = self.cyclic_subspace(vectors, tol)?;
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch("vector length differs from carrier dimension".into()));
        }
        Ok(crate::linalg::project_onto(&q, v))
    }

    /// `v - P_E v`.
    pub fn project_perp(&self, vectors: &[Vec<C64>], v: &[C64], tol: &Tolerance) -> Result<Vec<C64>> {
        let p = self.project(vectors, v, tol)?;
        Ok(v.iter().zip(&p).map(|(a, b)| a - b).collect())
    }

    pub fn commutant(&self, tol: &Tolerance) -> IntertwinerSpace {
        let gens = self.generating_images();
        intertwiner_solve(&gens, &gens, tol)
    }

    /// Operators `T` with `T pi_1(x) = pi_2(x) T` (here `self` is `pi_1`).
    pub fn intertwiners(&self, target: &Self, tol: &Tolerance) -> Result<IntertwinerSpace> {
        self.algebra.check_same(&target.algebra)?;
        Ok(intertwiner_solve(&self.generating_images(), &target.generating_images(), tol))
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.algebra.check_same(&other.algebra)?;
        let images = self.images.iter().zip(&other.images).map(|(a, b)| CMatrix::block_diag(&[a, b])).collect();
        Ok(Self { algebra: self.algebra.clone(), images })
    }

    /// `span(images) == commutant(commutant)` as subspaces of `M_m`.
    pub fn bicommutant_check(&self, tol: &Tolerance) -> bool {
        let c = self.commutant(tol);
        let cc = intertwiner_solve(&c.basis, &c.basis, tol);
        let m = self.dim();
        let span = CMatrix::from_columns(m * m, &self.images.iter().map(|x| x.data().to_vec()).collect::<Vec<_>>());
        let r = numerical_rank(&span, tol);
        if r != cc.basis.len() {
            return false;
        }
        self.images.iter().all(|x| {
            let coeffs: Vec<C64> = cc.basis.iter().map(|b| b.hs_inner(x)).collect();
            combine(&cc.basis, &coeffs).max_abs_diff(x) <= tol.eq_abs
        })
    }

    pub fn vector_state_values(&self, v: &[C64]) -> Vec<C64> {
        self.images.iter().map(|x| crate::linalg::inner(v, &x.mul_vec(v))).collect()
    }
}

/// Basis of the operators `T` with `T a_k = b_k T` for paired families.
#[derive(Clone, Debug)]
pub struct IntertwinerSpace {
    pub source_dim: usize,
    pub target_dim: usize,
    /// Orthonormal under `Tr(S* T)`; each `target_dim x source_dim`.
    pub basis: Vec<CMatrix>,
}

impl IntertwinerSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

pub(crate) fn intertwiner_solve(source: &[CMatrix], target: &[CMatrix], tol: &Tolerance) -> IntertwinerSpace {
    let m1 = source.first().map_or(0, CMatrix::rows);
    let m2 = target.first().map_or(0, CMatrix::rows);
    let unknowns = m1 * m2;
    let mut sys = CMatrix::zeros(source.len() * unknowns, unknowns);
    for (g, (a, b)) in source.iter().zip(target).enumerate() {
        let base = g * unknowns;
        // row (i, j): sum_l T_il a_lj - sum_l b_il T_lj
        for i in 0..m2 {
            for j in 0..m1 {
                let row = base + i * m1 + j;
                for l in 0..m1 {
                    sys[(row, i * m1 + l)] += a[(l, j)];
                }
                for l in 0..m2 {
                    sys[(row, l * m1 + j)] -= b[(i, l)];
                }
            }
        }
    }
    let scale = source.iter().chain(target).map(CMatrix::frobenius).fold(0.0, f64::max);
    let null = solve_homogeneous_scaled(&sys, scale, tol);
    let basis = (0..null.cols()).map(|c| CMatrix::from_vec(m2, m1, null.column(c))).collect();
    IntertwinerSpace { source_dim: m1, target_dim: m2, basis }
}

/// Orthonormal basis of span `{ x v : x in images, v in vectors }` as a column list.
pub(crate) fn span_images(images: &[CMatrix], vectors: &[Vec<C64>], tol: &Tolerance) -> Vec<Vec<C64>> {
    let m = images.first().map_or(0, CMatrix::rows);
    let candidates: Vec<Vec<C64>> = vectors.iter().flat_map(|v| images.iter().map(move |x| x.mul_vec(v))).collect();
    orthonormalize_vecs(&[], &candidates, m, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn validation_examples() {
        let t = Tolerance::default();
        let a = m2();
        assert!(Representation::new(a.clone(), a.basis().to_vec(), &t).is_ok());
        let amp = Representation::identity(&a).amplify(2);
        assert!(Representation::new(a.clone(), amp.images().to_vec(), &t).is_ok());
        let p = CMatrix::block_diag(&[&CMatrix::identity(2), &CMatrix::zeros(2, 2)]);
        let half: Vec<CMatrix> = a.basis().iter().map(|b| CMatrix::block_diag(&[b, &CMatrix::zeros(2, 2)])).collect();
        assert!(matches!(Representation::new(a.clone(), half.clone(), &t), Err(Error::Degenerate { .. })));
        let k = Representation::with_kernel(a, half, &t).unwrap();
        assert!(k.apply_coords(k.algebra().unit_coords()).max_abs_diff(&p) < 1e-12);
    }

    #[test]
    fn broken_homomorphism_rejected() {
        let t = Tolerance::default();
        let a = d2();
        let mut imgs = a.basis().to_vec();
        imgs[1] = imgs[1].scale(c(2.0));
        assert!(Representation::new(a, imgs, &t).is_err());
    }

    #[test]
    fn cyclic_subspace_examples() {
        let t = Tolerance::default();
        let r = Representation::identity(&m2());
        assert_eq!(r.cyclic_subspace(&[vec![c(0.0), c(0.0)]], &t).unwrap().cols(), 0);
        assert_eq!(r.cyclic_subspace(&[vec![c(1.0), c(0.0)]], &t).unwrap().cols(), 2);
        let d = Representation::identity(&d2());
        assert_eq!(d.cyclic_subspace(&[vec![c(1.0), c(0.0)]], &t).unwrap().cols(), 1);
        let p = d.project(&[vec![c(1.0), c(0.0)]], &[c(3.0), c(4.0)], &t).unwrap();
        assert!((p[0] - c(3.0)).norm() < 1e-14 && p[1].norm() < 1e-14);
        let q = d.project_perp(&[vec![c(1.0), c(0.0)]], &[c(3.0), c(4.0)], &t).unwrap();
        assert!(q[0].norm() < 1e-14 && (q[1] - c(4.0)).norm() < 1e-14);
    }

    #[test]
    fn commutant_examples() {
        let t = Tolerance::default();
        let a = m2();
        let r = Representation::identity(&a);
        assert_eq!(r.commutant(&t).dim(), 1);
        assert_eq!(r.amplify(2).commutant(&t).dim(), 4);
        let d = d2();
        let s = d.structure().unwrap();
        let chars: Vec<Representation> =
            s.blocks.iter().map(|b| Representation::new(d.clone(), b.images.clone(), &t).unwrap()).collect();
        assert_eq!(chars[0].intertwiners(&chars[1], &t).unwrap().dim(), 0);
        assert_eq!(chars[0].intertwiners(&chars[0], &t).unwrap().dim(), 1);
    }

    #[test]
    fn commutant_elements_commute_with_every_image() {
        let t = Tolerance::default();
        let r = Representation::identity(&m2()).amplify(3);
        for x in &r.commutant(&t).basis {
            for y in r.images() {
                assert!(x.mul(y).max_abs_diff(&y.mul(x)) < 1e-10);
            }
        }
    }

    #[test]
    fn direct_sum_examples() {
        let t = Tolerance::default();
        let a = m2();
        let r = Representation::identity(&a);
        let rr = r.direct_sum(&r).unwrap();
        let amp = r.amplify(2);
        // (x (+) x) and x (tensor) I_2 differ by a permutation of the carrier
        assert_eq!(rr.commutant(&t).dim(), amp.commutant(&t).dim());
        let empty = Representation::from_parts_unchecked(a.clone(), vec![CMatrix::zeros(0, 0); a.dim()]);
        let same = r.direct_sum(&empty).unwrap();
        assert_eq!(same.images(), r.images());
    }

    #[test]
    fn bicommutant_examples() {
        let t = Tolerance::default();
        assert!(Representation::identity(&m2()).bicommutant_check(&t));
        assert!(Representation::identity(&m2()).amplify(2).bicommutant_check(&t));
        assert!(Representation::identity(&d2()).bicommutant_check(&t));
    }
}
