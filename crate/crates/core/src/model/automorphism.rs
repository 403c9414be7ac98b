use alloc::vec::Vec;

use super::{ExtendedModel, ModelVector};
use crate::error::{Error, Result};
use crate::linalg::{orthonormalize_vecs, svd, CMatrix, C64};

/// A unitary `Z -> W Z` on the listed copies of one block, identity elsewhere.
#[derive(Clone, Debug)]
pub struct BlockUnitary {
    pub block: usize,
    pub copies: Vec<usize>,
    pub unitary: CMatrix,
}

/// A finite-support automorphism of a model: one copy-space unitary per block.
/// Such maps commute with the action by construction.
#[derive(Clone, Debug)]
pub struct AutomorphismWitness {
    pub blocks: Vec<BlockUnitary>,
    /// Worst of: unitarity defect, `|U e - e|` over the base, `|U v - w|`.
    pub residual: f64,
}

impl AutomorphismWitness {
    pub fn apply(&self, v: &ModelVector) -> ModelVector {
        let mut out = v.clone();
        for bu in &self.blocks {
            let part = v.block(bu.block);
            if bu.copies.iter().all(|c| !part.contains_key(c)) {
                continue;
            }
            let n = part.values().next().map_or(0, Vec::len);
            let z = v.copy_matrix(bu.block, &bu.copies, n);
            let wz = bu.unitary.mul(&z);
            let target = out.block_mut(bu.block);
            for (r, c) in bu.copies.iter().enumerate() {
                target.insert(*c, wz.row(r).to_vec());
            }
        }
        out
    }

    /// `max |W* W - I|` over the blocks.
    pub fn unitarity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|bu| {
                let k = bu.unitary.rows();
                bu.unitary.adjoint_mul(&bu.unitary).max_abs_diff(&CMatrix::identity(k))
            })
            .fold(0.0, f64::max)
    }
}

impl ExtendedModel {
    /// An automorphism fixing `H_E` pointwise and sending `v` to `w`, when
    /// `tp(v / E) = tp(w / E)`.
    ///
    /// Per block, with `R` the copy-space span of the base and `Z_v'`, `Z_w'`
    /// the parts orthogonal to it, equal vector states give `Z_v'* Z_v' =
    /// Z_w'* Z_w'`. From `Z_v' = A S K*` put `B = Z_w' K S^{-1}`; then
    /// `W = Q_R Q_R* + B A* + C_w C_v*` with `C_v`, `C_w` completing the bases.
    pub fn automorphism_witness(
        &self,
        v: &ModelVector,
        w: &ModelVector,
        base: &[ModelVector],
    ) -> Result<AutomorphismWitness> {
        if !self.type_equal(v, w, base)? {
            return Err(Error::TypesDiffer);
        }
        let refs: Vec<&ModelVector> = base.iter().collect();
        let mut blocks = Vec::new();
        for b in 0..self.blocks.len() {
            let mut all = refs.clone();
            all.push(v);
            all.push(w);
            let copies = self.copy_set(b, &all);
            if v.block(b).is_empty() && w.block(b).is_empty() {
                continue;
            }
            let n = self.blocks[b].dim();
            let s = copies.len();
            let q = self.copy_span(b, &refs, &copies);
            let perp = |x: &ModelVector| {
                let z = x.copy_matrix(b, &copies, n);
                z.sub(&q.mul(&q.adjoint_mul(&z)))
            };
            let zv = perp(v);
            let zw = perp(w);
            let dec = svd(&zv);
            let smax = dec.values.first().copied().unwrap_or(0.0);
            let threshold = self.tol.rank_threshold(s, n, smax).max(self.tol.eq_abs);
            let r = dec.values.iter().filter(|&&x| x > threshold).count();
            let a = dec.u.columns(0..r);
            let k = dec.v.columns(0..r);
            let inv: Vec<C64> = dec.values[..r].iter().map(|x| C64::new(1.0 / x, 0.0)).collect();
            let bmat = zw.mul(&k).mul(&CMatrix::diagonal(&inv));

            let qcols: Vec<Vec<C64>> = (0..q.cols()).map(|j| q.column(j)).collect();
            let unit: Vec<Vec<C64>> = (0..s)
                .map(|i| {
                    let mut e = alloc::vec![C64::new(0.0, 0.0); s];
                    e[i] = C64::new(1.0, 0.0);
                    e
                })
                .collect();
            let complete = |m: &CMatrix| {
                let mut existing = qcols.clone();
                existing.extend((0..m.cols()).map(|j| m.column(j)));
                let extra = orthonormalize_vecs(&existing, &unit, s, &self.tol);
                CMatrix::from_columns(s, &extra)
            };
            let cv = complete(&a);
            let cw = complete(&bmat);
            if cv.cols() != cw.cols() {
                return Err(Error::NumericalDegeneracy(alloc::format!(
                    "block {b}: complements of dimension {} and {}",
                    cv.cols(),
                    cw.cols()
                )));
            }
            let u = q.mul(&q.adjoint()).add(&bmat.mul(&a.adjoint())).add(&cw.mul(&cv.adjoint()));
            blocks.push(BlockUnitary { block: b, copies, unitary: u });
        }
        let mut witness = AutomorphismWitness { blocks, residual: 0.0 };
        let mut residual = witness.unitarity_defect();
        residual = residual.max(witness.apply(v).max_abs_diff(w));
        for e in base {
            residual = residual.max(witness.apply(e).max_abs_diff(e));
        }
        witness.residual = residual;
        Ok(witness)
    }
}
