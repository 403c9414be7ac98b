//! Dense complex linear algebra with an explicit tolerance policy.
//!
//! Five primitives carry everything above this module: [`hermitian_eigen`],
//! [`numerical_rank`], [`orthonormalize`], [`solve_homogeneous`] and
//! [`psd_check`]. Operator equality is always the max-entry norm compared
//! against [`Tolerance::eq_abs`]; rank decisions always use the relative
//! cutoff `rank_rel * max(rows, cols) * sigma_max`.

mod eigen;
mod matrix;
mod svd;

pub use eigen::{hermitian_eigen, psd_check, psd_check_scaled, HermitianEigen};
pub use matrix::{inner, norm, CMatrix};
pub use svd::{
    numerical_rank, numerical_rank_scaled, pseudo_inverse, singular_values, solve_homogeneous,
    solve_homogeneous_scaled, svd, Svd,
};

pub(crate) use eigen::eigh;

use alloc::vec::Vec;

pub type C64 = num_complex::Complex64;

/// Thresholds shared by every numerical decision in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value cutoff used for every rank decision.
    pub rank_rel: f64,
    /// Absolute max-entry tolerance for equality of operators, vectors and values.
    pub eq_abs: f64,
    /// Relative gap under which two eigenvalues are treated as collided.
    pub gap_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { rank_rel: 1e-9, eq_abs: 1e-8, gap_rel: 1e-6 }
    }
}

impl Tolerance {
    pub fn is_valid(&self) -> bool {
        self.rank_rel > 0.0 && self.eq_abs > 0.0 && self.gap_rel > 0.0
    }

    /// Cutoff below which a singular value of a `rows x cols` matrix counts as zero.
    pub fn rank_threshold(&self, rows: usize, cols: usize, sigma_max: f64) -> f64 {
        self.rank_rel * (rows.max(cols).max(1) as f64) * sigma_max
    }
}

/// Orthonormal basis of the span of `vectors` (given as columns), by modified
/// Gram-Schmidt with one re-orthogonalization pass.
///
/// Input order is preserved; a column whose residual after projection falls
/// under the rank threshold (relative to the largest input norm) is dropped.
pub fn orthonormalize(vectors: &CMatrix, tol: &Tolerance) -> CMatrix {
    let cols: Vec<Vec<C64>> = (0..vectors.cols()).map(|j| vectors.column(j)).collect();
    let basis = orthonormalize_vecs(&[], &cols, vectors.rows(), tol);
    CMatrix::from_columns(vectors.rows(), &basis)
}

/// Extends the orthonormal family `existing` by the span of `candidates`,
/// returning only the new orthonormal vectors.
pub(crate) fn orthonormalize_vecs(
    existing: &[Vec<C64>],
    candidates: &[Vec<C64>],
    dim: usize,
    tol: &Tolerance,
) -> Vec<Vec<C64>> {
    let max_norm = candidates.iter().map(|c| norm(c)).fold(0.0, f64::max);
    if max_norm == 0.0 {
        return Vec::new();
    }
    let threshold = tol.rank_threshold(dim, existing.len() + candidates.len(), max_norm);
    let mut out: Vec<Vec<C64>> = Vec::new();
    for cand in candidates {
        let mut r = cand.clone();
        for _ in 0..2 {
            for q in existing.iter().chain(out.iter()) {
                let c = inner(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= c * qi;
                }
            }
        }
        let n = norm(&r);
        if n > threshold {
            let inv = 1.0 / n;
            for x in r.iter_mut() {
                *x *= inv;
            }
            out.push(r);
        }
    }
    out
}

/// Projection of `v` onto the span of the orthonormal columns of `q`.
pub fn project_onto(q: &CMatrix, v: &[C64]) -> Vec<C64> {
    let mut out = alloc::vec![C64::new(0.0, 0.0); v.len()];
    for j in 0..q.cols() {
        let col = q.column(j);
        let c = inner(&col, v);
        for (o, x) in out.iter_mut().zip(&col) {
            *o += c * x;
        }
    }
    out
}
