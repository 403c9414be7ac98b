//! Linear functionals on an algebra: GNS, norms, orthogonality and domination.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_traits::Float;

use crate::algebra::{AlgElement, Algebra};
use crate::decomp::{cyclic_map, decompose, irreducible_equivalence};
use crate::error::{Error, Result};
use crate::linalg::{eigh, psd_check, psd_check_scaled, singular_values, CMatrix, Tolerance, C64};
use crate::rep::Representation;

/// A linear functional stored as its values `phi(b_k)` on the basis.
#[derive(Clone, Debug)]
pub struct Functional {
    algebra: Arc<Algebra>,
    values: Vec<C64>,
}

impl Functional {
    pub fn new(algebra: Arc<Algebra>, values: Vec<C64>) -> Result<Self> {
        if values.len() != algebra.dim() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "{} values for an algebra of dimension {}",
                values.len(),
                algebra.dim()
            )));
        }
        Ok(Self { algebra, values })
    }

    pub fn zero(algebra: &Arc<Algebra>) -> Self {
        Self { algebra: algebra.clone(), values: alloc::vec![C64::new(0.0, 0.0); algebra.dim()] }
    }

    /// `x -> sum_i Tr(D_i rho_i(x))` for block matrices `D_i`.
    pub fn from_densities(algebra: &Arc<Algebra>, densities: &[CMatrix]) -> Result<Self> {
        let s = algebra.structure()?;
        if densities.len() != s.blocks.len() {
            return Err(Error::DimensionMismatch("one density per block required".into()));
        }
        let values = (0..algebra.dim())
            .map(|k| s.blocks.iter().zip(densities).map(|(b, dm)| dm.mul(&b.images[k]).trace()).sum())
            .collect();
        Ok(Self { algebra: algebra.clone(), values })
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn eval_coords(&self, coords: &[C64]) -> C64 {
        coords.iter().zip(&self.values).map(|(a, b)| a * b).sum()
    }

    pub fn eval(&self, x: &AlgElement) -> Result<C64> {
        self.algebra.check_same(x.algebra())?;
        Ok(self.eval_coords(x.coords()))
    }

    /// `phi(e)`.
    pub fn at_unit(&self) -> C64 {
        self.eval_coords(self.algebra.unit_coords())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.algebra.check_same(&other.algebra)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { algebra: self.algebra.clone(), values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { algebra: self.algebra.clone(), values: self.values.iter().map(|x| x * s).collect() }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max_i |phi(b_i*) - conj(phi(b_i))|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let j = self.algebra.involution();
        (0..self.values.len())
            .map(|i| (self.eval_coords(&j.column(i)) - self.values[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `G_ij = phi(b_i* b_j)`.
    pub fn gram(&self) -> CMatrix {
        let a = &self.algebra;
        let d = a.dim();
        let t = CMatrix::from_fn(d, d, |l, j| (0..d).map(|k| a.struct_const(l, j, k) * self.values[k]).sum());
        a.involution().transpose().mul(&t)
    }

    pub fn is_positive(&self, tol: &Tolerance) -> bool {
        self.check_positive(tol).is_ok()
    }

    pub fn check_positive(&self, tol: &Tolerance) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation > tol.eq_abs {
            return Err(Error::NotHermitianFunctional { deviation });
        }
        let g = self.gram();
        if !psd_check(&g, tol)? {
            let min_eigenvalue = eigh(&g).values.last().copied().unwrap_or(0.0);
            return Err(Error::NotPositive { min_eigenvalue });
        }
        Ok(())
    }

    fn check_hermitian(&self, tol: &Tolerance) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation > tol.eq_abs {
            return Err(Error::NotHermitianFunctional { deviation });
        }
        Ok(())
    }
}

/// `phi_v(x) = <pi(x) v | v>`.
pub fn vector_state(rep: &Representation, v: &[C64]) -> Result<Functional> {
    if v.len() != rep.dim() {
        return Err(Error::DimensionMismatch("vector length differs from carrier dimension".into()));
    }
    Ok(Functional { algebra: rep.algebra().clone(), values: rep.vector_state_values(v) })
}

/// The GNS triple of a positive functional: a cyclic representation on
/// `L^2(A, phi)` and the class of the unit.
pub fn gns(phi: &Functional, tol: &Tolerance) -> Result<(Representation, Vec<C64>)> {
    phi.check_positive(tol)?;
    let alg = phi.algebra();
    let d = alg.dim();
    let e = eigh(&phi.gram());
    let top = e.values.first().copied().unwrap_or(0.0).max(0.0);
    let cut = tol.rank_threshold(d, d, top);
    let r = if top > 0.0 { e.values.iter().filter(|&&x| x > cut).count() } else { 0 };
    // C = Lambda^{1/2} U*, C^+ = U Lambda^{-1/2}
    let c = CMatrix::from_fn(r, d, |i, j| e.vectors[(j, i)].conj() * Float::sqrt(e.values[i]));
    let cp = CMatrix::from_fn(d, r, |i, j| e.vectors[(i, j)] / Float::sqrt(e.values[j]));
    let images = (0..d)
        .map(|k| {
            let l = CMatrix::from_fn(d, d, |row, col| alg.struct_const(k, col, row));
            c.mul(&l).mul(&cp)
        })
        .collect();
    let rep = Representation::new(alg.clone(), images, tol)?;
    let cyclic = c.mul_vec(alg.unit_coords());
    Ok((rep, cyclic))
}

/// Per-block matrices `D_i` with `phi(x) = sum_i Tr(D_i rho_i(x))`.
#[derive(Clone, Debug)]
pub struct BlockDensity {
    pub blocks: Vec<CMatrix>,
}

impl BlockDensity {
    pub fn of(phi: &Functional) -> Result<Self> {
        let s = phi.algebra.structure()?;
        let blocks = s
            .blocks
            .iter()
            .enumerate()
            .map(|(i, b)| CMatrix::from_fn(b.dim, b.dim, |r, c| phi.eval_coords(&s.matrix_unit(i, c, r))))
            .collect();
        Ok(Self { blocks })
    }

    /// `sum_i |D_i|_1`, assuming Hermitian blocks.
    pub fn trace_norm(&self) -> f64 {
        self.blocks.iter().map(|b| eigh(b).values.iter().map(|x| x.abs()).sum::<f64>()).sum()
    }

    fn largest_eigenvalue(&self) -> f64 {
        self.blocks.iter().flat_map(|b| eigh(b).values).fold(0.0, |a: f64, x| a.max(x.abs()))
    }

    /// Orthonormal bases of the support of each block, cut at the rank threshold
    /// relative to the largest eigenvalue over all blocks.
    pub fn supports(&self, tol: &Tolerance) -> Vec<CMatrix> {
        let top = self.largest_eigenvalue();
        self.blocks
            .iter()
            .map(|b| {
                let e = eigh(b);
                let n = b.rows();
                let keep = if top > 0.0 {
                    let cut = tol.rank_threshold(n, n, top);
                    e.values.iter().filter(|&&x| x > cut).count()
                } else {
                    0
                };
                e.vectors.columns(0..keep)
            })
            .collect()
    }
}

/// Exact dual norm `sum_i |D_i|_1` of a Hermitian functional.
pub fn functional_norm(phi: &Functional, tol: &Tolerance) -> Result<f64> {
    phi.check_hermitian(tol)?;
    Ok(BlockDensity::of(phi)?.trace_norm())
}

fn support_pair(phi: &Functional, psi: &Functional, tol: &Tolerance) -> Result<(Vec<CMatrix>, Vec<CMatrix>)> {
    phi.algebra.check_same(&psi.algebra)?;
    phi.check_positive(tol)?;
    psi.check_positive(tol)?;
    Ok((BlockDensity::of(phi)?.supports(tol), BlockDensity::of(psi)?.supports(tol)))
}

fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Largest principal cosine between the supports of two positive functionals.
pub fn support_overlap(phi: &Functional, psi: &Functional, tol: &Tolerance) -> Result<f64> {
    let (sp, sq) = support_pair(phi, psi, tol)?;
    Ok(sp.iter().zip(&sq).map(|(a, b)| spectral_norm(&a.adjoint_mul(b))).fold(0.0, f64::max))
}

/// Orthogonality decided by per-block support projections.
pub fn orthogonal(phi: &Functional, psi: &Functional, tol: &Tolerance) -> Result<bool> {
    Ok(support_overlap(phi, psi, tol)? <= tol.eq_abs)
}

/// Orthogonality decided by `|phi - psi| = |phi| + |psi|`.
pub fn norm_orthogonal(phi: &Functional, psi: &Functional, tol: &Tolerance) -> Result<bool> {
    phi.algebra.check_same(&psi.algebra)?;
    let lhs = functional_norm(&phi.sub(psi)?, tol)?;
    let rhs = functional_norm(phi, tol)? + functional_norm(psi, tol)?;
    Ok((lhs - rhs).abs() <= tol.eq_abs)
}

/// Support projection `a` of `phi`: `0 <= a <= e`, `phi(e - a) = 0`, `psi(a) = 0`.
pub fn orthogonality_witness(phi: &Functional, psi: &Functional, tol: &Tolerance) -> Result<AlgElement> {
    if !orthogonal(phi, psi, tol)? {
        return Err(Error::NotOrthogonal);
    }
    let s = phi.algebra.structure()?;
    let proj: Vec<CMatrix> = BlockDensity::of(phi)?.supports(tol).iter().map(|q| q.mul(&q.adjoint())).collect();
    phi.algebra.element(s.embed(&proj))
}

/// `Some(gamma_min)` when `gamma psi - phi` is positive for some `gamma`.
pub fn dominates(phi: &Functional, psi: &Functional, tol: &Tolerance) -> Result<Option<f64>> {
    let (sp, sq) = support_pair(phi, psi, tol)?;
    for (a, b) in sp.iter().zip(&sq) {
        let outside = a.sub(&b.mul(&b.adjoint_mul(a)));
        if spectral_norm(&outside) > tol.eq_abs {
            return Ok(None);
        }
    }
    let rho = BlockDensity::of(phi)?;
    let sigma = BlockDensity::of(psi)?;
    let mut gamma: f64 = 0.0;
    for ((r, s), q) in rho.blocks.iter().zip(&sigma.blocks).zip(&sq) {
        if q.cols() == 0 {
            continue;
        }
        let sr = q.adjoint_mul(&s.mul(q));
        let es = eigh(&sr);
        let w = es.vectors;
        let inv_sqrt: Vec<C64> = es.values.iter().map(|&x| C64::new(1.0 / Float::sqrt(x), 0.0)).collect();
        let half = w.mul(&CMatrix::diagonal(&inv_sqrt)).mul(&w.adjoint());
        let rr = q.adjoint_mul(&r.mul(q));
        let m = half.mul(&rr).mul(&half);
        gamma = gamma.max(eigh(&m).values.first().copied().unwrap_or(0.0));
    }
    let diff = psi.scale(gamma).sub(phi)?;
    let scale = phi.gram().max_abs().max(gamma * psi.gram().max_abs());
    if !psd_check_scaled(&diff.gram(), scale, tol)? {
        return Err(Error::NumericalDegeneracy(alloc::format!(
            "gamma = {gamma:e} fails the positivity check of gamma psi - phi"
        )));
    }
    Ok(Some(gamma))
}

/// Least-norm `S` on `H_w` intertwining the action with `S w = v`; `None`
/// when no such operator exists.
pub fn radon_nikodym_witness(rep: &Representation, w: &[C64], v: &[C64], tol: &Tolerance) -> Result<Option<CMatrix>> {
    if w.len() != rep.dim() || v.len() != rep.dim() {
        return Err(Error::DimensionMismatch("vector length differs from carrier dimension".into()));
    }
    Ok(cyclic_map(rep, w, rep, v, tol))
}

/// Domination of vector states, `phi_v <= gamma phi_w`.
pub fn embeds_cyclic(r1: &Representation, v: &[C64], r2: &Representation, w: &[C64], tol: &Tolerance) -> Result<bool> {
    r1.algebra().check_same(r2.algebra())?;
    Ok(dominates(&vector_state(r1, v)?, &vector_state(r2, w)?, tol)?.is_some())
}

/// True when the GNS representations of `phi` and `psi` share no irreducible summand.
pub fn gns_disjoint(phi: &Functional, psi: &Functional, tol: &Tolerance, seed: u64) -> Result<bool> {
    phi.algebra.check_same(&psi.algebra)?;
    let d1 = decompose(&gns(phi, tol)?.0, tol, seed)?;
    let d2 = decompose(&gns(psi, tol)?.0, tol, seed)?;
    for a in &d1.blocks {
        for b in &d2.blocks {
            if irreducible_equivalence(&a.block.rep, &b.block.rep, tol)?.is_some() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `|S|^2` in operator norm.
pub fn operator_norm_sq(s: &CMatrix) -> f64 {
    let n = spectral_norm(s);
    n * n
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

    /// Functional `(a, b) -> pa + qb` on the diagonal algebra.
    fn d2_functional(a: &Arc<Algebra>, p: f64, q: f64) -> Functional {
        let values = a.basis().iter().map(|b| b[(0, 0)] * p + b[(1, 1)] * q).collect();
        Functional::new(a.clone(), values).unwrap()
    }

    #[test]
    fn vector_state_examples() {
        let t = Tolerance::default();
        let a = m2();
        let r = Representation::identity(&a);
        let z = vector_state(&r, &[c(0.0), c(0.0)]).unwrap();
        assert!(z.values().iter().all(|x| x.norm() == 0.0));
        let phi = vector_state(&r, &[c(1.0), c(0.0)]).unwrap();
        for (p, q, want) in [(0, 0, 1.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 0.0)] {
            let x = a.from_matrix(&e(2, p, q)).unwrap();
            assert!((phi.eval(&x).unwrap() - c(want)).norm() < 1e-12);
        }
        let v = [c(0.3), C64::new(0.1, -0.7)];
        let twice = vector_state(&r, &[v[0] * 2.0, v[1] * 2.0]).unwrap();
        assert!(twice.max_abs_diff(&vector_state(&r, &v).unwrap().scale(4.0)) < 1e-12);
        assert!(phi.is_positive(&t));
    }

    #[test]
    fn gns_examples() {
        let t = Tolerance::default();
        let a = d2();
        let (r, v) = gns(&d2_functional(&a, 1.0, 0.0), &t).unwrap();
        assert_eq!(r.dim(), 1);
        assert!((crate::linalg::norm(&v) - 1.0).abs() < 1e-12);
        let (r0, _) = gns(&Functional::zero(&a), &t).unwrap();
        assert_eq!(r0.dim(), 0);
        let mix = d2_functional(&a, 0.5, 0.5);
        let (r2, v2) = gns(&mix, &t).unwrap();
        assert_eq!(r2.dim(), 2);
        assert!(vector_state(&r2, &v2).unwrap().max_abs_diff(&mix) < 1e-12);
    }

    #[test]
    fn non_positive_rejected() {
        let t = Tolerance::default();
        let a = d2();
        assert!(matches!(gns(&d2_functional(&a, 1.0, -1.0), &t), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn norm_examples() {
        let t = Tolerance::default();
        let a = d2();
        assert!((functional_norm(&d2_functional(&a, 1.0, -1.0), &t).unwrap() - 2.0).abs() < 1e-12);
        assert!(functional_norm(&Functional::zero(&a), &t).unwrap().abs() < 1e-14);
        let phi = d2_functional(&a, 0.25, 0.5);
        assert!((functional_norm(&phi, &t).unwrap() - phi.at_unit().re).abs() < 1e-12);
    }

    #[test]
    fn orthogonality_examples() {
        let t = Tolerance::default();
        let a = d2();
        let (p, q) = (d2_functional(&a, 1.0, 0.0), d2_functional(&a, 0.0, 1.0));
        assert!(orthogonal(&p, &q, &t).unwrap());
        assert!(!orthogonal(&p, &p, &t).unwrap());
        let w = orthogonality_witness(&p, &q, &t).unwrap();
        assert!(w.to_matrix().max_abs_diff(&e(2, 0, 0)) < 1e-10);
        let z = orthogonality_witness(&Functional::zero(&a), &q, &t).unwrap();
        assert!(z.to_matrix().max_abs() < 1e-12);
        assert!(matches!(orthogonality_witness(&p, &p, &t), Err(Error::NotOrthogonal)));
    }

    #[test]
    fn full_matrix_block_orthogonal_but_not_disjoint() {
        let t = Tolerance::default();
        let a = m2();
        let r = Representation::identity(&a);
        let phi = vector_state(&r, &[c(1.0), c(0.0)]).unwrap();
        let psi = vector_state(&r, &[c(0.0), c(1.0)]).unwrap();
        assert!(orthogonal(&phi, &psi, &t).unwrap());
        assert!(norm_orthogonal(&phi, &psi, &t).unwrap());
        let w = orthogonality_witness(&phi, &psi, &t).unwrap();
        assert!(w.to_matrix().max_abs_diff(&e(2, 0, 0)) < 1e-10);
        // both GNS representations are the defining representation of M_2
        assert!(!gns_disjoint(&phi, &psi, &t, 0).unwrap());
    }

    #[test]
    fn domination_examples() {
        let t = Tolerance::default();
        let a = d2();
        let p = d2_functional(&a, 1.0, 0.0);
        let g = dominates(&p, &p, &t).unwrap().unwrap();
        assert!((g - 1.0).abs() < 1e-10);
        let g = dominates(&p, &d2_functional(&a, 0.5, 0.5), &t).unwrap().unwrap();
        assert!((g - 2.0).abs() < 1e-10);
        assert!(dominates(&p, &d2_functional(&a, 0.0, 1.0), &t).unwrap().is_none());
    }

    #[test]
    fn domination_at_the_optimum_tolerates_rounding() {
        let t = Tolerance::default();
        let a = d2();
        // gamma psi - phi vanishes at the optimum, leaving only rounding noise.
        let phi = d2_functional(&a, 0.0, 0.2765913046101456);
        let psi = d2_functional(&a, 0.0, 0.26382041703009873);
        let g = dominates(&phi, &psi, &t).unwrap().unwrap();
        assert!((g - 0.2765913046101456 / 0.26382041703009873).abs() < 1e-12);
    }

    #[test]
    fn radon_nikodym_examples() {
        let t = Tolerance::default();
        let r = Representation::identity(&d2());
        let h = 1.0 / 2f64.sqrt();
        let w = [c(h), c(h)];
        let s = radon_nikodym_witness(&r, &w, &w, &t).unwrap().unwrap();
        assert!(s.max_abs_diff(&CMatrix::identity(2)) < 1e-10);
        let half = [c(h / 2.0), c(h / 2.0)];
        let s = radon_nikodym_witness(&r, &w, &half, &t).unwrap().unwrap();
        assert!(s.max_abs_diff(&CMatrix::identity(2).scale(c(0.5))) < 1e-10);
        let s = radon_nikodym_witness(&r, &w, &[c(h), c(0.0)], &t).unwrap().unwrap();
        assert!(s.max_abs_diff(&e(2, 0, 0)) < 1e-10);
        assert!(radon_nikodym_witness(&r, &[c(1.0), c(0.0)], &[c(0.0), c(1.0)], &t).unwrap().is_none());
    }

    #[test]
    fn embedding_examples() {
        let t = Tolerance::default();
        let r = Representation::identity(&d2());
        let h = 1.0 / 2f64.sqrt();
        let (x, y) = ([c(1.0), c(0.0)], [c(0.0), c(1.0)]);
        assert!(embeds_cyclic(&r, &x, &r, &x, &t).unwrap());
        assert!(!embeds_cyclic(&r, &x, &r, &y, &t).unwrap());
        assert!(embeds_cyclic(&r, &x, &r, &[c(h), c(h)], &t).unwrap());
    }

    #[test]
    fn density_reconstructs_values() {
        let a = m2();
        let r = Representation::identity(&a);
        let phi = vector_state(&r, &[C64::new(0.6, 0.1), c(-0.3)]).unwrap();
        let d = BlockDensity::of(&phi).unwrap();
        let back = Functional::from_densities(&a, &d.blocks).unwrap();
        assert!(back.max_abs_diff(&phi) < 1e-12);
        assert_eq!(vec![2], d.blocks.iter().map(CMatrix::rows).collect::<Vec<_>>());
    }
}
