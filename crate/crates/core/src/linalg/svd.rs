use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;

use super::{inner, norm, orthonormalize_vecs, CMatrix, Tolerance, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Thin singular value decomposition `a = u diag(values) v*` with
/// `k = min(rows, cols)` columns in `u` and `v`, values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub values: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(a: &CMatrix) -> Svd {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint());
        return Svd { u: t.v, values: t.values, v: t.u };
    }
    let (m, n) = (a.rows(), a.cols());
    let (values, v) = right_singular(a);
    let tiny = values.first().copied().unwrap_or(0.0) * f64::EPSILON * (m.max(1) as f64);
    let mut ucols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (j, &s) in values.iter().enumerate() {
        if s > tiny && s > 0.0 {
            let mut col = a.mul_vec(&v[j]);
            for x in col.iter_mut() {
                *x /= s;
            }
            ucols.push(col);
        } else {
            missing.push(j);
            ucols.push(vec![ZERO; m]);
        }
    }
    if !missing.is_empty() {
        let present: Vec<Vec<C64>> =
            ucols.iter().enumerate().filter(|(j, _)| !missing.contains(j)).map(|(_, c)| c.clone()).collect();
        let units: Vec<Vec<C64>> = (0..m)
            .map(|i| {
                let mut e = vec![ZERO; m];
                e[i] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        let fill = orthonormalize_vecs(&present, &units, m, &Tolerance::default());
        for (slot, col) in missing.iter().zip(fill) {
            ucols[*slot] = col;
        }
    }
    Svd { u: CMatrix::from_columns(m, &ucols), values, v: CMatrix::from_columns(n, &v) }
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.rows() < a.cols() {
        return singular_values(&a.adjoint());
    }
    right_singular(a).0
}

/// Number of singular values above `rank_rel * max(rows, cols) * sigma_max`.
pub fn numerical_rank(m: &CMatrix, tol: &Tolerance) -> usize {
    let s = singular_values(m);
    rank_of(&s, m.rows(), m.cols(), tol)
}

/// [`numerical_rank`] with the cutoff relative to `max(sigma_max, scale)`.
pub fn numerical_rank_scaled(m: &CMatrix, scale: f64, tol: &Tolerance) -> usize {
    let s = singular_values(m);
    rank_at_scale(&s, m.rows(), m.cols(), scale, tol)
}

fn rank_of(s: &[f64], rows: usize, cols: usize, tol: &Tolerance) -> usize {
    rank_at_scale(s, rows, cols, 0.0, tol)
}

fn rank_at_scale(s: &[f64], rows: usize, cols: usize, scale: f64, tol: &Tolerance) -> usize {
    let smax = s.first().copied().unwrap_or(0.0).max(scale);
    if smax == 0.0 {
        return 0;
    }
    let cut = tol.rank_threshold(rows, cols, smax);
    s.iter().filter(|&&x| x > cut).count()
}

/// Orthonormal basis (as columns) of the null space of `a`.
pub fn solve_homogeneous(a: &CMatrix, tol: &Tolerance) -> CMatrix {
    let n = a.cols();
    if a.rows() == 0 {
        return CMatrix::identity(n);
    }
    let (values, v) = right_singular(a);
    let r = rank_of(&values, a.rows(), a.cols(), tol);
    CMatrix::from_columns(n, &v[r..])
}

/// [`solve_homogeneous`] with the rank cutoff taken relative to
/// `max(sigma_max, scale)`, so a system made of rounding noise alone is
/// treated as zero.
pub fn solve_homogeneous_scaled(a: &CMatrix, scale: f64, tol: &Tolerance) -> CMatrix {
    let n = a.cols();
    if a.rows() == 0 {
        return CMatrix::identity(n);
    }
    let (values, v) = right_singular(a);
    let r = rank_at_scale(&values, a.rows(), a.cols(), scale, tol);
    CMatrix::from_columns(n, &v[r..])
}

/// Moore-Penrose pseudo-inverse, discarding singular values under the rank cutoff.
pub fn pseudo_inverse(a: &CMatrix, tol: &Tolerance) -> CMatrix {
    let d = svd(a);
    let r = rank_of(&d.values, a.rows(), a.cols(), tol);
    let mut out = CMatrix::zeros(a.cols(), a.rows());
    for k in 0..r {
        let inv = 1.0 / d.values[k];
        for i in 0..a.cols() {
            let vik = d.v[(i, k)] * inv;
            for j in 0..a.rows() {
                out[(i, j)] += vik * d.u[(j, k)].conj();
            }
        }
    }
    out
}

/// Singular values (all `cols` of them, descending) and matching right
/// singular vectors of `a`, by one-sided Jacobi. Tall inputs are first
/// reduced to their triangular QR factor.
fn right_singular(a: &CMatrix) -> (Vec<f64>, Vec<Vec<C64>>) {
    let n = a.cols();
    let mut cols: Vec<Vec<C64>> =
        if a.rows() > n + n / 2 { qr_r_columns(a) } else { (0..n).map(|j| a.column(j)).collect() };
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|x| x.norm_sqr()).sum();
                let gamma = inner(&cols[p], &cols[q]);
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * Float::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let tau = (beta - alpha) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + Float::sqrt(1.0 + tau * tau))
                } else {
                    -1.0 / (-tau + Float::sqrt(1.0 + tau * tau))
                };
                let c = 1.0 / Float::sqrt(1.0 + t * t);
                let sp = phase * (t * c);
                let spc = sp.conj();
                let (lo, hi) = cols.split_at_mut(q);
                rot_pair(&mut lo[p], &mut hi[0], c, sp, spc);
                let (lo, hi) = v.split_at_mut(q);
                rot_pair(&mut lo[p], &mut hi[0], c, sp, spc);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<(f64, usize)> = cols.iter().enumerate().map(|(j, c)| (norm(c), j)).collect();
    s.sort_by(|x, y| y.0.total_cmp(&x.0));
    let values = s.iter().map(|x| x.0).collect();
    let vecs = s.iter().map(|x| v[x.1].clone()).collect();
    (values, vecs)
}

fn rot_pair(xp: &mut [C64], xq: &mut [C64], c: f64, sp: C64, spc: C64) {
    for (a, b) in xp.iter_mut().zip(xq.iter_mut()) {
        let (ap, aq) = (*a, *b);
        *a = ap * c - aq * spc;
        *b = ap * sp + aq * c;
    }
}

/// Columns of the `n x n` triangular factor of a Householder QR of `a`.
fn qr_r_columns(a: &CMatrix) -> Vec<Vec<C64>> {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| a.column(j)).collect();
    for k in 0..n.min(m) {
        let x = &cols[k][k..];
        let xn = norm(x);
        if xn == 0.0 {
            continue;
        }
        let x0 = x[0];
        let ph = if x0.norm() > 0.0 { x0 / x0.norm() } else { C64::new(1.0, 0.0) };
        let alpha = -ph * xn;
        let mut h: Vec<C64> = x.to_vec();
        h[0] -= alpha;
        let hn = norm(&h);
        if hn == 0.0 {
            continue;
        }
        for e in h.iter_mut() {
            *e /= hn;
        }
        for col in cols.iter_mut().skip(k) {
            let seg = &mut col[k..];
            let d = inner(&h, seg) * 2.0;
            for (s, hv) in seg.iter_mut().zip(&h) {
                *s -= d * hv;
            }
        }
    }
    cols.into_iter()
        .map(|mut c| {
            c.truncate(n);
            c
        })
        .collect()
}
