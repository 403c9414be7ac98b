use alloc::vec::Vec;

use num_traits::Float;

use super::{CMatrix, Tolerance, C64};
use crate::error::{Error, Result};

/// Spectral decomposition `m = V diag(values) V*`, values descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let d: Vec<C64> = self.values.iter().map(|&x| C64::new(x, 0.0)).collect();
        self.vectors.mul(&CMatrix::diagonal(&d)).mul(&self.vectors.adjoint())
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
pub fn hermitian_eigen(m: &CMatrix, tol: &Tolerance) -> Result<HermitianEigen> {
    let deviation = m.hermitian_deviation();
    if deviation > tol.eq_abs {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(eigh(m))
}

/// Same as [`hermitian_eigen`] with no Hermiticity check; the input is symmetrized.
pub(crate) fn eigh(m: &CMatrix) -> HermitianEigen {
    let n = m.rows();
    let mut a = CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius();
    if scale > 0.0 {
        for _sweep in 0..100 {
            let mut off = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if Float::sqrt(off) <= f64::EPSILON * scale * 1e-2 {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    HermitianEigen { values, vectors }
}

fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let n = a.rows();
    let phase = apq / mag;
    let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + Float::sqrt(1.0 + tau * tau))
    } else {
        -1.0 / (-tau + Float::sqrt(1.0 + tau * tau))
    };
    let c = 1.0 / Float::sqrt(1.0 + t * t);
    let s = t * c;
    let sp = phase * s;
    let spc = sp.conj();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * c - akq * spc;
        a[(k, q)] = akp * sp + akq * c;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = apk * c - aqk * sp;
        a[(q, k)] = apk * spc + aqk * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * c - vkq * spc;
        v[(k, q)] = vkp * sp + vkq * c;
    }
}

/// True iff the smallest eigenvalue is at least `-eq_abs * ||m||` (max-entry norm).
pub fn psd_check(m: &CMatrix, tol: &Tolerance) -> Result<bool> {
    psd_check_scaled(m, 0.0, tol)
}

/// [`psd_check`] with the cutoff measured against `max(|m|, scale)`, for
/// matrices that are differences of larger ones and may be pure rounding.
pub fn psd_check_scaled(m: &CMatrix, scale: f64, tol: &Tolerance) -> Result<bool> {
    let e = hermitian_eigen(m, tol)?;
    let min = e.values.last().copied().unwrap_or(0.0);
    Ok(min >= -tol.eq_abs * m.max_abs().max(scale))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn real(rows: &[&[f64]]) -> CMatrix {
        CMatrix::from_fn(rows.len(), rows[0].len(), |i, j| C64::new(rows[i][j], 0.0))
    }

    #[test]
    fn swap_matrix_spectrum() {
        let e = hermitian_eigen(&real(&[&[0.0, 1.0], &[1.0, 0.0]]), &Tolerance::default()).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14 && (e.values[1] + 1.0).abs() < 1e-14);
        let r = 1.0 / 2f64.sqrt();
        let v0 = e.vectors.column(0);
        // eigenvectors are determined up to phase
        let ph = v0[0] / r;
        assert!((v0[1] - ph * r).norm() < 1e-12);
        let v1 = e.vectors.column(1);
        let ph = v1[0] / r;
        assert!((v1[1] + ph * r).norm() < 1e-12);
    }

    #[test]
    fn diagonal_keeps_order() {
        let e = hermitian_eigen(&real(&[&[3.0, 0.0], &[0.0, -1.0]]), &Tolerance::default()).unwrap();
        assert_eq!(e.values, [3.0, -1.0]);
        assert_eq!(e.vectors, CMatrix::identity(2));
    }

    #[test]
    fn identity_spectrum() {
        let e = hermitian_eigen(&CMatrix::identity(2), &Tolerance::default()).unwrap();
        assert_eq!(e.values, [1.0, 1.0]);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eigen(&m, &Tolerance::default()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn psd_examples() {
        let t = Tolerance::default();
        assert!(psd_check(&real(&[&[1.0, 0.0], &[0.0, 0.0]]), &t).unwrap());
        assert!(!psd_check(&real(&[&[1.0, 0.0], &[0.0, -1.0]]), &t).unwrap());
        assert!(psd_check(&real(&[&[2.0, 1.0], &[1.0, 2.0]]), &t).unwrap());
    }

    #[test]
    fn complex_hermitian_reconstructs() {
        let m = CMatrix::from_fn(4, 4, |i, j| {
            let x = C64::new((i * 7 + j * 3) as f64 % 5.0, (i as f64) - (j as f64));
            if i == j {
                C64::new(x.re, 0.0)
            } else {
                x
            }
        });
        let h = m.add(&m.adjoint());
        let e = hermitian_eigen(&h, &Tolerance::default()).unwrap();
        assert!(e.reconstruct().max_abs_diff(&h) < 1e-12);
        let vv = e.vectors.adjoint_mul(&e.vectors);
        assert!(vv.max_abs_diff(&CMatrix::identity(4)) < 1e-12);
    }
}
