use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use crate::linalg::{CMatrix, C64};

/// A finite-support vector of an [`super::ExtendedModel`]: per block, a map
/// from copy index to coefficients in that block's carrier.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelVector {
    parts: Vec<BTreeMap<usize, Vec<C64>>>,
}

impl ModelVector {
    /// The zero vector of a model with `blocks` blocks.
    pub fn zero(blocks: usize) -> Self {
        Self { parts: vec![BTreeMap::new(); blocks] }
    }

    pub fn num_blocks(&self) -> usize {
        self.parts.len()
    }

    /// Adds `coeffs` to copy `copy` of `block`. No validation against a model.
    pub fn insert(&mut self, block: usize, copy: usize, coeffs: Vec<C64>) {
        match self.parts[block].get_mut(&copy) {
            Some(existing) => {
                for (a, b) in existing.iter_mut().zip(&coeffs) {
                    *a += b;
                }
            }
            None => {
                self.parts[block].insert(copy, coeffs);
            }
        }
    }

    pub fn get(&self, block: usize, copy: usize) -> Option<&[C64]> {
        self.parts.get(block)?.get(&copy).map(Vec::as_slice)
    }

    pub fn block(&self, block: usize) -> &BTreeMap<usize, Vec<C64>> {
        &self.parts[block]
    }

    pub(crate) fn block_mut(&mut self, block: usize) -> &mut BTreeMap<usize, Vec<C64>> {
        &mut self.parts[block]
    }

    /// `(block, copy, coeffs)` in block then copy order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &[C64])> {
        self.parts.iter().enumerate().flat_map(|(b, m)| m.iter().map(move |(c, v)| (b, *c, v.as_slice())))
    }

    pub fn max_copy(&self, block: usize) -> Option<usize> {
        self.parts.get(block)?.keys().next_back().copied()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        let mut out = Self::zero(self.parts.len().max(other.parts.len()));
        for (b, part) in out.parts.iter_mut().enumerate() {
            let empty = BTreeMap::new();
            let x = self.parts.get(b).unwrap_or(&empty);
            let y = other.parts.get(b).unwrap_or(&empty);
            for c in x.keys().chain(y.keys()) {
                if part.contains_key(c) {
                    continue;
                }
                let n = x.get(c).or(y.get(c)).map_or(0, Vec::len);
                let zero = vec![C64::new(0.0, 0.0); n];
                let xv = x.get(c).unwrap_or(&zero);
                let yv = y.get(c).unwrap_or(&zero);
                part.insert(*c, xv.iter().zip(yv).map(|(a, b)| f(*a, *b)).collect());
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        let parts = self
            .parts
            .iter()
            .map(|m| m.iter().map(|(c, v)| (*c, v.iter().map(|x| x * s).collect())).collect())
            .collect();
        Self { parts }
    }

    /// `sum conj(self) other` over all shared coordinates.
    pub fn inner(&self, other: &Self) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (x, y) in self.parts.iter().zip(&other.parts) {
            for (c, v) in x {
                if let Some(w) = y.get(c) {
                    acc += crate::linalg::inner(v, w);
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> f64 {
        Float::sqrt(self.entries().flat_map(|(_, _, v)| v.iter()).map(|x| x.norm_sqr()).sum::<f64>())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).entries().flat_map(|(_, _, v)| v.iter().map(|x| x.norm())).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.entries().all(|(_, _, v)| v.iter().all(|x| *x == C64::new(0.0, 0.0)))
    }

    /// Restriction to the blocks for which `keep` holds.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Self {
        let parts =
            self.parts.iter().enumerate().map(|(b, m)| if keep(b) { m.clone() } else { BTreeMap::new() }).collect();
        Self { parts }
    }

    /// Drops copies whose coefficient norm is at most `threshold`.
    pub(crate) fn prune(&mut self, threshold: f64) {
        for m in &mut self.parts {
            m.retain(|_, v| crate::linalg::norm(v) > threshold);
        }
    }

    /// Block part as a `copies x n` matrix, one row per listed copy.
    pub(crate) fn copy_matrix(&self, block: usize, copies: &[usize], n: usize) -> CMatrix {
        let mut z = CMatrix::zeros(copies.len(), n);
        for (r, c) in copies.iter().enumerate() {
            if let Some(v) = self.parts[block].get(c) {
                for (j, x) in v.iter().enumerate() {
                    z[(r, j)] = *x;
                }
            }
        }
        z
    }

    /// Replaces the block part by the rows of `z`, skipping exactly-zero rows.
    pub(crate) fn set_from_matrix(&mut self, block: usize, copies: &[usize], z: &CMatrix) {
        let m = &mut self.parts[block];
        m.clear();
        for (r, c) in copies.iter().enumerate() {
            let row = z.row(r);
            if row.iter().any(|x| *x != C64::new(0.0, 0.0)) {
                m.insert(*c, row.to_vec());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn arithmetic_over_disjoint_supports() {
        let mut a = ModelVector::zero(2);
        a.insert(0, 3, vec![c(1.0), c(2.0)]);
        let mut b = ModelVector::zero(2);
        b.insert(0, 5, vec![c(0.0), c(1.0)]);
        b.insert(1, 0, vec![c(4.0)]);
        let s = a.add(&b);
        assert_eq!(s.entries().count(), 3);
        assert_eq!(a.inner(&b), c(0.0));
        assert!((s.norm() - 22f64.sqrt()).abs() < 1e-14);
        assert!(s.sub(&b).max_abs_diff(&a) == 0.0);
    }

    #[test]
    fn insert_accumulates() {
        let mut a = ModelVector::zero(1);
        a.insert(0, 0, vec![c(1.0)]);
        a.insert(0, 0, vec![c(2.0)]);
        assert_eq!(a.get(0, 0), Some(&[c(3.0)][..]));
    }
}
