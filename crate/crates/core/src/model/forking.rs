use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ExtendedModel, ModelVector};
use crate::error::{Error, Result};
use crate::linalg::{svd, C64};
use crate::sample::random_unitary;
use crate::states::{dominates, orthogonal, Functional};

impl ExtendedModel {
    fn check_subset(&self, small: &[ModelVector], large: &[ModelVector]) -> Result<()> {
        let contained = small.iter().all(|e| large.iter().any(|f| f.max_abs_diff(e) <= self.tol.eq_abs));
        if contained {
            Ok(())
        } else {
            Err(Error::Invalid("the base is not contained in the extension set".into()))
        }
    }

    /// First copy index past every copy used by `vectors`.
    fn support_floor(&self, block: usize, vectors: &[&ModelVector]) -> usize {
        vectors.iter().filter_map(|v| v.max_copy(block)).map(|c| c + 1).max().unwrap_or(0)
    }

    /// A realization of `tp(v / E)` independent from `F` over `E`: the part of
    /// `v` in `acl(E)` plus the remainder moved into unused copies.
    ///
    /// The remainder of each block, a `copies x n` matrix `Z`, is compressed to
    /// the `r x n` matrix `Q* Z` over an orthonormal basis `Q` of its column
    /// space, and written into `r` freshly allocated copies. With a seed, a
    /// random `r x r` unitary is applied first.
    pub fn nonforking_extension(
        &self,
        v: &ModelVector,
        base: &[ModelVector],
        side: &[ModelVector],
        seed: Option<u64>,
    ) -> Result<ModelVector> {
        self.validate(v)?;
        self.check_subset(base, side)?;
        let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
        let kept = self.acl_project(base, v);
        let rest = self.residual(v, &kept);
        let mut out = kept;
        let mut context: Vec<&ModelVector> = base.iter().chain(side).collect();
        context.push(v);
        for b in 0..self.blocks.len() {
            if rest.block(b).is_empty() {
                continue;
            }
            let n = self.blocks[b].dim();
            let copies: Vec<usize> = rest.block(b).keys().copied().collect();
            let z = rest.copy_matrix(b, &copies, n);
            let dec = svd(&z);
            let smax = dec.values.first().copied().unwrap_or(0.0);
            let threshold = self.tol.rank_threshold(z.rows(), z.cols(), smax);
            let r = dec.values.iter().filter(|&&s| s > threshold).count();
            if r == 0 {
                continue;
            }
            let q = dec.u.columns(0..r);
            let mut m = q.adjoint_mul(&z);
            if let Some(rng) = rng.as_mut() {
                m = random_unitary(r, rng).mul(&m);
            }
            let start = self.allocate_fresh(b, r, self.support_floor(b, &context))?;
            for k in 0..r {
                out.insert(b, start + k, m.row(k).to_vec());
            }
        }
        self.register(&out);
        Ok(out)
    }

    /// `Cb(v / E) = (P_E v_1, ..., P_E v_n)`.
    pub fn canonical_base(&self, vs: &[ModelVector], base: &[ModelVector]) -> Vec<ModelVector> {
        vs.iter().map(|v| self.dcl_project(base, v)).collect()
    }

    /// `k` realizations of `tp(v / E)`, starting from `v` itself, each
    /// independent over `E` from the ones before it.
    pub fn morley_sequence(
        &self,
        v: &ModelVector,
        base: &[ModelVector],
        k: usize,
        seed: Option<u64>,
    ) -> Result<Vec<ModelVector>> {
        self.validate(v)?;
        self.register(v);
        for e in base {
            self.register(e);
        }
        let mut seq: Vec<ModelVector> = Vec::with_capacity(k);
        if k == 0 {
            return Ok(seq);
        }
        seq.push(v.clone());
        while seq.len() < k {
            let side: Vec<ModelVector> = base.iter().chain(&seq).cloned().collect();
            let step_seed = seed.map(|s| s.wrapping_add(seq.len() as u64));
            seq.push(self.nonforking_extension(v, base, &side, step_seed)?);
        }
        Ok(seq)
    }

    fn essential_remainder(&self, v: &ModelVector, projection: impl Fn(&ModelVector) -> ModelVector) -> ModelVector {
        let ve = v.restrict(|b| self.is_essential(b));
        let p = projection(&ve);
        self.residual(&ve, &p)
    }

    /// `phi` of `P_E^perp(v_e)`.
    pub fn orthogonal_part_state(&self, v: &ModelVector, base: &[ModelVector]) -> Functional {
        self.vector_state(&self.essential_remainder(v, |x| self.dcl_project(base, x)))
    }

    /// `phi` of `P_{acl(E)}^perp(v_e)`.
    pub fn orthogonal_part_state_acl(&self, v: &ModelVector, base: &[ModelVector]) -> Functional {
        self.vector_state(&self.essential_remainder(v, |x| self.acl_project(base, x)))
    }

    /// Orthogonality of `tp(v / E)` and `tp(w / E)`.
    pub fn types_orthogonal(&self, v: &ModelVector, w: &ModelVector, base: &[ModelVector]) -> Result<bool> {
        orthogonal(&self.orthogonal_part_state(v, base), &self.orthogonal_part_state(w, base), &self.tol)
    }

    /// [`Self::types_orthogonal`] with `acl(E)` in place of `E`.
    pub fn types_orthogonal_acl(&self, v: &ModelVector, w: &ModelVector, base: &[ModelVector]) -> Result<bool> {
        orthogonal(&self.orthogonal_part_state_acl(v, base), &self.orthogonal_part_state_acl(w, base), &self.tol)
    }

    /// Whether `tp(v / E)` dominates `tp(w / F)` over `G`, read off the
    /// nonforking extensions of both types to `G`.
    #[allow(clippy::too_many_arguments)]
    pub fn type_dominates(
        &self,
        v: &ModelVector,
        e: &[ModelVector],
        w: &ModelVector,
        f: &[ModelVector],
        g: &[ModelVector],
        seed: Option<u64>,
    ) -> Result<bool> {
        self.check_subset(e, g)?;
        self.check_subset(f, g)?;
        let v2 = self.nonforking_extension(v, e, g, seed)?;
        let w2 = self.nonforking_extension(w, f, g, seed.map(|s| s ^ 0x9e37_79b9_7f4a_7c15))?;
        let phi_v = self.orthogonal_part_state_acl(&v2, g);
        let phi_w = self.orthogonal_part_state_acl(&w2, g);
        Ok(dominates(&phi_w, &phi_v, &self.tol)?.is_some())
    }

    /// Greedy finite subset `E_0` of `E`, as indices, with
    /// `|P_{acl(E_0)} v - P_{acl(E)} v| <= eps`. Elements are taken in index
    /// order when they reduce the defect, with repeated passes until stable.
    pub fn epsilon_finite_base(&self, v: &ModelVector, base: &[ModelVector], eps: f64) -> Vec<usize> {
        let target = self.acl_project(base, v);
        let defect = |idx: &[usize]| {
            let sub: Vec<ModelVector> = idx.iter().map(|&i| base[i].clone()).collect();
            self.acl_project(&sub, v).sub(&target).norm()
        };
        let mut chosen: Vec<usize> = Vec::new();
        let mut current = defect(&chosen);
        loop {
            let mut changed = false;
            for i in 0..base.len() {
                if current <= eps {
                    break;
                }
                if chosen.contains(&i) {
                    continue;
                }
                chosen.push(i);
                let d = defect(&chosen);
                if d < current - self.tol.eq_abs {
                    current = d;
                    changed = true;
                } else {
                    chosen.pop();
                }
            }
            if current <= eps || !changed {
                break;
            }
        }
        if current > eps {
            chosen = (0..base.len()).collect();
        }
        chosen.sort_unstable();
        chosen
    }
}

/// `(v_1 + ... + v_k) / k`.
pub fn average(vs: &[ModelVector]) -> Option<ModelVector> {
    let first = vs.first()?;
    let sum = vs[1..].iter().fold(first.clone(), |acc, v| acc.add(v));
    Some(sum.scale(C64::new(1.0 / vs.len() as f64, 0.0)))
}
