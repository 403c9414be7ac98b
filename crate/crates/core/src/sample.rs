//! Seeded random instances for tests, benchmarks and the acceptance suite.

use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::{AlgElement, Algebra};
use crate::error::Result;
use crate::linalg::{orthonormalize, CMatrix, Tolerance, C64};
use crate::model::{ExtendedModel, ModelVector, Multiplicity};
use crate::rep::Representation;
use crate::states::Functional;

pub fn complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex(rng))
}

pub fn random_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n).map(|_| complex(rng)).collect()
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let a = random_matrix(n, n, rng);
    a.add(&a.adjoint()).scale(C64::new(0.5, 0.0))
}

/// Orthonormalized random square matrix; redrawn in the measure-zero event of
/// a rank drop.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let tol = Tolerance::default();
    loop {
        let q = orthonormalize(&random_matrix(n, n, rng), &tol);
        if q.cols() == n {
            return q;
        }
    }
}

/// `B B*` with `B` an `n x rank` random matrix.
pub fn random_psd<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> CMatrix {
    let b = random_matrix(n, rank, rng);
    b.mul(&b.adjoint())
}

/// Random block shape `(n_i, m_i)`: blocks `M_{n_i}` each repeated `m_i`
/// times inside `M_ambient`, with algebra dimension at most `max_dim`.
pub fn random_shape<R: Rng + ?Sized>(max_ambient: usize, max_dim: usize, rng: &mut R) -> Vec<(usize, usize)> {
    loop {
        let count = rng.gen_range(1..=3);
        let shape: Vec<(usize, usize)> = (0..count).map(|_| (rng.gen_range(1..=3), rng.gen_range(1..=2))).collect();
        let ambient: usize = shape.iter().map(|(n, m)| n * m).sum();
        let dim: usize = shape.iter().map(|(n, _)| n * n).sum();
        if ambient <= max_ambient && dim <= max_dim {
            return shape;
        }
    }
}

/// The algebra `sum_i M_{n_i} (tensor) I_{m_i}`, rotated by a random unitary
/// and presented by two random generators.
pub fn random_algebra_with_shape<R: Rng + ?Sized>(
    shape: &[(usize, usize)],
    tol: &Tolerance,
    rng: &mut R,
) -> Result<Arc<Algebra>> {
    let ambient: usize = shape.iter().map(|(n, m)| n * m).sum();
    let u = random_unitary(ambient, rng);
    let gens: Vec<CMatrix> = (0..2)
        .map(|_| {
            let parts: Vec<CMatrix> =
                shape.iter().map(|&(n, m)| random_matrix(n, n, rng).kron(&CMatrix::identity(m))).collect();
            let refs: Vec<&CMatrix> = parts.iter().collect();
            u.mul(&CMatrix::block_diag(&refs)).mul(&u.adjoint())
        })
        .collect();
    Algebra::generate(ambient, &gens, tol)
}

pub fn random_algebra<R: Rng + ?Sized>(
    max_ambient: usize,
    max_dim: usize,
    tol: &Tolerance,
    rng: &mut R,
) -> Result<Arc<Algebra>> {
    let shape = random_shape(max_ambient, max_dim, rng);
    random_algebra_with_shape(&shape, tol, rng)
}

/// `sum_i rho_i (tensor) I_{k_i}` over the algebra's blocks, rotated by a
/// random unitary; carrier dimension at most `max_dim`, every block possibly
/// absent but at least one present.
pub fn random_representation<R: Rng + ?Sized>(
    algebra: &Arc<Algebra>,
    max_dim: usize,
    rng: &mut R,
) -> Result<Representation> {
    let structure = algebra.structure()?;
    let dims = structure.block_dims();
    let mults = loop {
        let mults: Vec<usize> = dims.iter().map(|_| rng.gen_range(0..=3)).collect();
        let total: usize = dims.iter().zip(&mults).map(|(d, m)| d * m).sum();
        if total > 0 && total <= max_dim {
            break mults;
        }
    };
    let parts: Vec<Representation> = structure
        .blocks
        .iter()
        .zip(&mults)
        .filter(|(_, &m)| m > 0)
        .map(|(b, &m)| Representation::from_parts_unchecked(algebra.clone(), b.images.clone()).amplify(m))
        .collect();
    let mut rep = parts[0].clone();
    for p in &parts[1..] {
        rep = rep.direct_sum(p)?;
    }
    let u = random_unitary(rep.dim(), rng);
    Ok(rep.conjugate(&u))
}

/// Random positive functional with a random (possibly zero) rank on each
/// block, not all zero.
pub fn random_positive_functional<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R) -> Result<Functional> {
    let dims = algebra.structure()?.block_dims();
    loop {
        let ranks: Vec<usize> = dims.iter().map(|&d| rng.gen_range(0..=d)).collect();
        if ranks.iter().all(|&r| r == 0) {
            continue;
        }
        let dens: Vec<CMatrix> = dims.iter().zip(&ranks).map(|(&d, &r)| random_psd(d, r, rng)).collect();
        return Functional::from_densities(algebra, &dens);
    }
}

/// Random element supported on a random subset of blocks with random ranks;
/// exercises rank profiles that a generic element would not.
pub fn random_block_element<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R) -> Result<AlgElement> {
    let dims = algebra.structure()?.block_dims();
    let mats: Vec<CMatrix> = dims
        .iter()
        .map(|&d| {
            let r = rng.gen_range(0..=d);
            random_matrix(d, r, rng).mul(&random_matrix(r, d, rng))
        })
        .collect();
    algebra.element(algebra.structure()?.embed(&mats))
}

/// Random multiplicity profile over the algebra's blocks, at least one present.
pub fn random_multiplicities<R: Rng + ?Sized>(blocks: usize, rng: &mut R) -> Vec<Multiplicity> {
    loop {
        let m: Vec<Multiplicity> = (0..blocks)
            .map(|_| match rng.gen_range(0..5) {
                0 => Multiplicity::Finite(0),
                1 => Multiplicity::Finite(1),
                2 => Multiplicity::Finite(2),
                _ => Multiplicity::Omega,
            })
            .collect();
        if m.iter().any(|x| *x != Multiplicity::Finite(0)) {
            return m;
        }
    }
}

/// Model with the given profile; absent blocks are left out and the present
/// ones appear in shuffled order, each conjugated by a random unitary.
pub fn random_model_with<R: Rng + ?Sized>(
    algebra: &Arc<Algebra>,
    mults: &[Multiplicity],
    tol: &Tolerance,
    rng: &mut R,
) -> Result<ExtendedModel> {
    let structure = algebra.structure()?;
    let mut blocks: Vec<(Representation, Multiplicity)> = structure
        .blocks
        .iter()
        .zip(mults)
        .filter(|(_, m)| **m != Multiplicity::Finite(0))
        .map(|(b, m)| {
            let rep = Representation::from_parts_unchecked(algebra.clone(), b.images.clone());
            let u = random_unitary(b.dim, rng);
            (rep.conjugate(&u), *m)
        })
        .collect();
    blocks.shuffle(rng);
    ExtendedModel::new(algebra.clone(), blocks, tol)
}

pub fn random_model<R: Rng + ?Sized>(algebra: &Arc<Algebra>, tol: &Tolerance, rng: &mut R) -> Result<ExtendedModel> {
    let count = algebra.structure()?.blocks.len();
    let mults = random_multiplicities(count, rng);
    random_model_with(algebra, &mults, tol, rng)
}

/// Random vector on up to `max_copies` copies per block chosen among the first
/// `copy_range` admissible copies; blocks are kept with probability 1/2 and
/// at least one entry is produced.
pub fn random_model_vector<R: Rng + ?Sized>(
    model: &ExtendedModel,
    copy_range: usize,
    max_copies: usize,
    rng: &mut R,
) -> ModelVector {
    loop {
        let mut v = model.zero_vector();
        for (b, blk) in model.blocks().iter().enumerate() {
            if rng.gen_bool(0.5) {
                continue;
            }
            let limit = match blk.multiplicity {
                Multiplicity::Finite(k) => k.min(copy_range),
                Multiplicity::Omega => copy_range,
            };
            if limit == 0 {
                continue;
            }
            let mut copies: Vec<usize> = (0..limit).collect();
            copies.shuffle(rng);
            let take = rng.gen_range(1..=max_copies.min(limit));
            for &c in &copies[..take] {
                v.insert(b, c, random_vector(blk.dim(), rng));
            }
        }
        if !v.is_zero() {
            return v;
        }
    }
}
