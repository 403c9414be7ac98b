use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use super::{ExtendedModel, ModelVector};
use crate::error::Result;
use crate::linalg::{orthonormalize_vecs, CMatrix, C64};
use crate::rep::Representation;

impl ExtendedModel {
    /// Sorted union of the copies used in `block` by `vectors`.
    pub(crate) fn copy_set(&self, block: usize, vectors: &[&ModelVector]) -> Vec<usize> {
        let mut s = BTreeSet::new();
        for v in vectors {
            s.extend(v.block(block).keys().copied());
        }
        s.into_iter().collect()
    }

    /// Orthonormal basis of the copy-space span `R` of the columns of every
    /// `Z_e`; then `H_E` meets block `block` in `{ Y : col(Y) in R }`.
    pub(crate) fn copy_span(&self, block: usize, base: &[&ModelVector], copies: &[usize]) -> CMatrix {
        let n = self.blocks[block].dim();
        let mut cols = Vec::new();
        for e in base {
            if e.block(block).is_empty() {
                continue;
            }
            let z = e.copy_matrix(block, copies, n);
            for j in 0..n {
                cols.push(z.column(j));
            }
        }
        let q = orthonormalize_vecs(&[], &cols, copies.len(), &self.tol);
        CMatrix::from_columns(copies.len(), &q)
    }

    /// `P_{H_E} v` restricted to the blocks selected by `which`; other blocks
    /// are copied through unchanged when `passthrough` holds, dropped otherwise.
    fn project_blocks(
        &self,
        base: &[ModelVector],
        v: &ModelVector,
        which: impl Fn(usize) -> bool,
        passthrough: bool,
    ) -> ModelVector {
        let refs: Vec<&ModelVector> = base.iter().collect();
        let mut out = self.zero_vector();
        for b in 0..self.blocks.len() {
            if v.block(b).is_empty() {
                continue;
            }
            if !which(b) {
                if passthrough {
                    *out.block_mut(b) = v.block(b).clone();
                }
                continue;
            }
            let mut all = refs.clone();
            all.push(v);
            let copies = self.copy_set(b, &all);
            let q = self.copy_span(b, &refs, &copies);
            if q.cols() == 0 {
                continue;
            }
            let z = v.copy_matrix(b, &copies, self.blocks[b].dim());
            let p = q.mul(&q.adjoint_mul(&z));
            out.set_from_matrix(b, &copies, &p);
        }
        out.prune(self.noise_floor(v));
        out
    }

    /// Threshold under which a computed copy component counts as zero.
    pub(crate) fn noise_floor(&self, v: &ModelVector) -> f64 {
        self.tol.rank_rel * v.norm()
    }

    /// `P_E v`, the projection onto `dcl(E) = H_E`.
    pub fn dcl_project(&self, base: &[ModelVector], v: &ModelVector) -> ModelVector {
        self.project_blocks(base, v, |_| true, false)
    }

    /// `v_d + P_{H_{E_e}} v_e`, the projection onto `acl(E)`.
    pub fn acl_project(&self, base: &[ModelVector], v: &ModelVector) -> ModelVector {
        self.project_blocks(base, v, |b| self.is_essential(b), true)
    }

    /// `v - p` with components under the noise floor of `v` removed.
    pub(crate) fn residual(&self, v: &ModelVector, p: &ModelVector) -> ModelVector {
        let mut r = v.sub(p);
        r.prune(self.noise_floor(v));
        r
    }

    /// `tp(v / E) = tp(w / E)`: equal projections onto `H_E` and equal vector
    /// states of the orthogonal complements.
    pub fn type_equal(&self, v: &ModelVector, w: &ModelVector, base: &[ModelVector]) -> Result<bool> {
        self.validate(v)?;
        self.validate(w)?;
        let pv = self.dcl_project(base, v);
        let pw = self.dcl_project(base, w);
        if pv.max_abs_diff(&pw) > self.tol.eq_abs {
            return Ok(false);
        }
        let fv = self.vector_state(&self.residual(v, &pv));
        let fw = self.vector_state(&self.residual(w, &pw));
        Ok(fv.max_abs_diff(&fw) <= self.tol.eq_abs)
    }

    /// `|P_{acl(B)} v - P_{acl(B u F)} v|` for the independence test.
    pub fn forking_defect(&self, v: &ModelVector, base: &[ModelVector], side: &[ModelVector]) -> f64 {
        let joint: Vec<ModelVector> = base.iter().chain(side).cloned().collect();
        self.acl_project(base, v).sub(&self.acl_project(&joint, v)).norm()
    }

    /// `v` independent from `side` over `base`.
    pub fn independent(&self, v: &ModelVector, base: &[ModelVector], side: &[ModelVector]) -> bool {
        self.forking_defect(v, base, side) <= self.tol.eq_abs
    }

    /// Coordinatewise independence of a tuple.
    pub fn independent_tuple(&self, vs: &[ModelVector], base: &[ModelVector], side: &[ModelVector]) -> bool {
        vs.iter().all(|v| self.independent(v, base, side))
    }

    /// Independence through orthogonality of essential cyclic subspaces:
    /// `H_{v''}` against each `H_{f''}`, where `x'' = P_{acl(B)}^perp x`.
    pub fn independent_pairwise(&self, v: &ModelVector, base: &[ModelVector], side: &[ModelVector]) -> bool {
        let vpp = self.residual(v, &self.acl_project(base, v));
        side.iter().all(|f| {
            let fpp = self.residual(f, &self.acl_project(base, f));
            if fpp.is_zero() {
                return true;
            }
            self.dcl_project(&[fpp], &vpp).norm() <= self.tol.eq_abs
        })
    }

    /// The finite representation spanned by the copies that `vectors` touch.
    pub fn envelope(&self, vectors: &[&ModelVector]) -> Envelope {
        let mut layout = Vec::new();
        let mut offset = 0;
        let mut per_block: Vec<Vec<CMatrix>> = Vec::new();
        for (b, blk) in self.blocks.iter().enumerate() {
            let copies = self.copy_set(b, vectors);
            if copies.is_empty() {
                continue;
            }
            let id = CMatrix::identity(copies.len());
            per_block.push(blk.rep.images().iter().map(|x| x.kron(&id)).collect());
            let size = blk.dim() * copies.len();
            layout.push((b, copies, offset));
            offset += size;
        }
        let images = (0..self.algebra.dim())
            .map(|k| {
                let parts: Vec<&CMatrix> = per_block.iter().map(|p| &p[k]).collect();
                CMatrix::block_diag(&parts)
            })
            .collect();
        Envelope {
            rep: Representation::from_parts_unchecked(self.algebra.clone(), images),
            layout,
            block_dims: self.blocks.iter().map(|b| b.dim()).collect(),
        }
    }
}

/// A finite subrepresentation `sum_i rho_i (tensor) C^{S_i}` of a model, with
/// the coordinate maps to and from model vectors.
#[derive(Clone, Debug)]
pub struct Envelope {
    pub rep: Representation,
    layout: Vec<(usize, Vec<usize>, usize)>,
    block_dims: Vec<usize>,
}

impl Envelope {
    /// Flat coordinates; entries outside the envelope's copies are dropped.
    pub fn flatten(&self, v: &ModelVector) -> Vec<C64> {
        let mut out = alloc::vec![C64::new(0.0, 0.0); self.rep.dim()];
        for (b, copies, offset) in &self.layout {
            let s = copies.len();
            for (c_idx, c) in copies.iter().enumerate() {
                if let Some(coeffs) = v.get(*b, *c) {
                    for (r, x) in coeffs.iter().enumerate() {
                        out[offset + r * s + c_idx] = *x;
                    }
                }
            }
        }
        out
    }

    pub fn unflatten(&self, flat: &[C64]) -> ModelVector {
        let mut v = ModelVector::zero(self.block_dims.len());
        for (b, copies, offset) in &self.layout {
            let s = copies.len();
            let n = self.block_dims[*b];
            for (c_idx, c) in copies.iter().enumerate() {
                let coeffs: Vec<C64> = (0..n).map(|r| flat[offset + r * s + c_idx]).collect();
                if coeffs.iter().any(|x| *x != C64::new(0.0, 0.0)) {
                    v.insert(*b, *c, coeffs);
                }
            }
        }
        v
    }
}
