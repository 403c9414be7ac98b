//! Models of the theory of a representation: finitely many inequivalent
//! irreducible blocks, each with a finite or countably infinite multiplicity.
//!
//! Every block `i` acts on `C^{n_i} (tensor) l^2(copies)`. Since an irreducible
//! block's image is all of `M_{n_i}`, a block component of a vector is best
//! seen as a `copies x n_i` matrix `Z` on which `a` acts by `Z -> Z rho(a)^T`.
//! Cyclic subspaces then become column spaces in copy space, and the unitaries
//! commuting with the action are exactly `Z -> W Z`. All closure, forking and
//! automorphism computations below work in that picture.

mod automorphism;
mod closure;
mod forking;
mod vector;

pub use automorphism::{AutomorphismWitness, BlockUnitary};
pub use closure::Envelope;
pub use forking::average;
pub use vector::ModelVector;

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use crate::algebra::{AlgElement, Algebra};
use crate::decomp::{irreducible_equivalence, Decomposition};
use crate::error::{Error, Result};
use crate::linalg::{numerical_rank_scaled, CMatrix, Tolerance, C64};
use crate::rep::Representation;
use crate::states::Functional;

/// Multiplicity of a block: a natural number or the symbolic infinite `Omega`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    Finite(usize),
    Omega,
}

impl Multiplicity {
    pub fn is_omega(self) -> bool {
        matches!(self, Self::Omega)
    }

    pub fn admits(self, copy: usize) -> bool {
        match self {
            Self::Finite(k) => copy < k,
            Self::Omega => true,
        }
    }
}

impl core::fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Self::Finite(k) => write!(f, "{k}"),
            Self::Omega => f.write_str("omega"),
        }
    }
}

/// Rank of an operator on a model: finite, or infinite when an `Omega`
/// block sees a nonzero image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelRank {
    Finite(usize),
    Infinite,
}

#[derive(Clone, Debug)]
pub struct ModelBlock {
    pub rep: Representation,
    pub multiplicity: Multiplicity,
    canonical: usize,
}

impl ModelBlock {
    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    /// Index of the equivalent block in the algebra's own structure.
    pub fn canonical(&self) -> usize {
        self.canonical
    }
}

/// A type `tp(v / E)`: a base set and a realization.
#[derive(Clone, Debug)]
pub struct TypeHandle {
    pub base: Vec<ModelVector>,
    pub realization: ModelVector,
}

impl TypeHandle {
    pub fn new(base: Vec<ModelVector>, realization: ModelVector) -> Self {
        Self { base, realization }
    }

    /// Equality of types over a shared base.
    pub fn same_type(&self, other: &Self, model: &ExtendedModel) -> Result<bool> {
        if self.base != other.base {
            return Err(Error::Invalid("types over different bases".into()));
        }
        model.type_equal(&self.realization, &other.realization, &self.base)
    }
}

pub struct ExtendedModel {
    algebra: Arc<Algebra>,
    blocks: Vec<ModelBlock>,
    used_copies: Vec<AtomicUsize>,
    tol: Tolerance,
}

impl Clone for ExtendedModel {
    fn clone(&self) -> Self {
        Self {
            algebra: self.algebra.clone(),
            blocks: self.blocks.clone(),
            used_copies: self.used_copies.iter().map(|u| AtomicUsize::new(u.load(Ordering::SeqCst))).collect(),
            tol: self.tol,
        }
    }
}

impl core::fmt::Debug for ExtendedModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let blocks: Vec<(usize, Multiplicity)> = self.blocks.iter().map(|b| (b.dim(), b.multiplicity)).collect();
        f.debug_struct("ExtendedModel").field("blocks", &blocks).finish()
    }
}

impl ExtendedModel {
    /// Validates irreducibility and pairwise inequivalence of the blocks.
    pub fn new(algebra: Arc<Algebra>, blocks: Vec<(Representation, Multiplicity)>, tol: &Tolerance) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::Invalid("a model needs at least one block".into()));
        }
        let structure = algebra.structure()?;
        let mut out = Vec::with_capacity(blocks.len());
        for (i, (rep, multiplicity)) in blocks.into_iter().enumerate() {
            algebra.check_same(rep.algebra())?;
            let commutant_dim = rep.commutant(tol).dim();
            if commutant_dim != 1 {
                return Err(Error::NotIrreducible { block: i, commutant_dim });
            }
            let mut canonical = None;
            for (c, cb) in structure.blocks.iter().enumerate() {
                if cb.dim != rep.dim() {
                    continue;
                }
                let reference = Representation::from_parts_unchecked(algebra.clone(), cb.images.clone());
                if irreducible_equivalence(&reference, &rep, tol)?.is_some() {
                    canonical = Some(c);
                    break;
                }
            }
            let canonical = canonical.ok_or_else(|| {
                Error::NumericalDegeneracy(alloc::format!("block {i} matches no block of the algebra"))
            })?;
            if let Some(first) = out.iter().position(|b: &ModelBlock| b.canonical == canonical) {
                return Err(Error::EquivalentBlocks { first, second: i });
            }
            out.push(ModelBlock { rep, multiplicity, canonical });
        }
        Ok(Self::from_blocks(algebra, out, *tol))
    }

    fn from_blocks(algebra: Arc<Algebra>, blocks: Vec<ModelBlock>, tol: Tolerance) -> Self {
        let used_copies = blocks.iter().map(|_| AtomicUsize::new(0)).collect();
        Self { algebra, blocks, used_copies, tol }
    }

    /// Blocks and multiplicities read off a decomposition; `omega` makes every
    /// multiplicity infinite.
    pub fn from_decomposition(dec: &Decomposition, omega: bool, tol: &Tolerance) -> Result<Self> {
        let blocks = dec
            .blocks
            .iter()
            .map(|b| {
                let m = if omega { Multiplicity::Omega } else { Multiplicity::Finite(b.multiplicity) };
                (b.block.rep.clone(), m)
            })
            .collect();
        Self::new(dec.source.algebra().clone(), blocks, tol)
    }

    /// One block per irreducible of the algebra, all with the given multiplicity
    /// pattern (indexed like the algebra's structure blocks).
    pub fn from_canonical(algebra: &Arc<Algebra>, mults: &[Multiplicity], tol: &Tolerance) -> Result<Self> {
        let structure = algebra.structure()?;
        if mults.len() != structure.blocks.len() {
            return Err(Error::DimensionMismatch("one multiplicity per algebra block required".into()));
        }
        let blocks = structure
            .blocks
            .iter()
            .zip(mults)
            .enumerate()
            .map(|(c, (b, m))| ModelBlock {
                rep: Representation::from_parts_unchecked(algebra.clone(), b.images.clone()),
                multiplicity: *m,
                canonical: c,
            })
            .collect();
        Ok(Self::from_blocks(algebra.clone(), blocks, *tol))
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[ModelBlock] {
        &self.blocks
    }

    pub fn tolerance(&self) -> &Tolerance {
        &self.tol
    }

    pub fn is_essential(&self, block: usize) -> bool {
        self.blocks[block].multiplicity.is_omega()
    }

    /// High-water mark of copies handed out or seen in block `block`.
    pub fn used_copies(&self, block: usize) -> usize {
        self.used_copies[block].load(Ordering::SeqCst)
    }

    /// Records the support of `v` so later fresh allocations avoid it.
    pub fn register(&self, v: &ModelVector) {
        for (b, used) in self.used_copies.iter().enumerate() {
            if let Some(c) = v.max_copy(b) {
                used.fetch_max(c + 1, Ordering::SeqCst);
            }
        }
    }

    /// Reserves `count` unused copies of `block` at or beyond `floor`,
    /// returning the first index.
    pub fn allocate_fresh(&self, block: usize, count: usize, floor: usize) -> Result<usize> {
        let cell = &self.used_copies[block];
        let mut cur = cell.load(Ordering::SeqCst);
        loop {
            let start = cur.max(floor);
            if let Multiplicity::Finite(k) = self.blocks[block].multiplicity {
                if start + count > k {
                    return Err(Error::InsufficientMultiplicity { block });
                }
            }
            match cell.compare_exchange(cur, start + count, Ordering::SeqCst, Ordering::SeqCst) {
                Ok(_) => return Ok(start),
                Err(actual) => cur = actual,
            }
        }
    }

    /// Checks block count, coefficient lengths and copy ranges.
    pub fn validate(&self, v: &ModelVector) -> Result<()> {
        if v.num_blocks() != self.blocks.len() {
            return Err(Error::DimensionMismatch(alloc::format!(
                "vector has {} blocks, model has {}",
                v.num_blocks(),
                self.blocks.len()
            )));
        }
        for (b, copy, coeffs) in v.entries() {
            let blk = &self.blocks[b];
            if !blk.multiplicity.admits(copy) {
                let multiplicity = match blk.multiplicity {
                    Multiplicity::Finite(k) => k,
                    Multiplicity::Omega => usize::MAX,
                };
                return Err(Error::CopyOutOfRange { block: b, copy, multiplicity });
            }
            if coeffs.len() != blk.dim() {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "block {b} copy {copy} has {} coefficients, block dimension is {}",
                    coeffs.len(),
                    blk.dim()
                )));
            }
        }
        Ok(())
    }

    pub fn zero_vector(&self) -> ModelVector {
        ModelVector::zero(self.blocks.len())
    }

    /// Builds and validates a vector from `(block, copy, coeffs)` entries.
    pub fn vector(&self, entries: Vec<(usize, usize, Vec<C64>)>) -> Result<ModelVector> {
        let mut v = self.zero_vector();
        for (b, c, coeffs) in entries {
            if b >= self.blocks.len() {
                return Err(Error::DimensionMismatch(alloc::format!("block {b} does not exist")));
            }
            if coeffs.len() != self.blocks[b].dim() {
                return Err(Error::DimensionMismatch(alloc::format!(
                    "block {b} expects {} coefficients",
                    self.blocks[b].dim()
                )));
            }
            v.insert(b, c, coeffs);
        }
        self.validate(&v)?;
        Ok(v)
    }

    /// `x . v`, copy by copy.
    pub fn apply(&self, x: &AlgElement, v: &ModelVector) -> Result<ModelVector> {
        self.algebra.check_same(x.algebra())?;
        self.validate(v)?;
        let mut out = self.zero_vector();
        for (b, blk) in self.blocks.iter().enumerate() {
            if v.block(b).is_empty() {
                continue;
            }
            let m = blk.rep.apply_coords(x.coords());
            for (c, coeffs) in v.block(b) {
                out.insert(b, *c, m.mul_vec(coeffs));
            }
        }
        Ok(out)
    }

    /// `phi_v(x) = <x v | v>`.
    pub fn vector_state(&self, v: &ModelVector) -> Functional {
        let d = self.algebra.dim();
        let mut values = alloc::vec![C64::new(0.0, 0.0); d];
        for (b, blk) in self.blocks.iter().enumerate() {
            let part = v.block(b);
            if part.is_empty() {
                continue;
            }
            let n = blk.dim();
            let mut gram = CMatrix::zeros(n, n);
            for coeffs in part.values() {
                for r in 0..n {
                    for s in 0..n {
                        gram[(r, s)] += coeffs[r] * coeffs[s].conj();
                    }
                }
            }
            for (k, val) in values.iter_mut().enumerate() {
                *val += blk.rep.images()[k].mul(&gram).trace();
            }
        }
        Functional::new(self.algebra.clone(), values).expect("one value per basis element")
    }

    /// Finite-multiplicity blocks and `Omega` blocks as two models.
    pub fn discrete_essential_split(&self) -> (Self, Self) {
        let pick = |omega: bool| {
            let blocks = self.blocks.iter().filter(|b| b.multiplicity.is_omega() == omega).cloned().collect();
            Self::from_blocks(self.algebra.clone(), blocks, self.tol)
        };
        (pick(false), pick(true))
    }

    /// Multiplicity of the algebra's `canonical` block in this model.
    pub fn multiplicity_of(&self, canonical: usize) -> Multiplicity {
        self.blocks.iter().find(|b| b.canonical == canonical).map_or(Multiplicity::Finite(0), |b| b.multiplicity)
    }

    /// `sum_i mult_i rank(rho_i(x))`, infinite as soon as an `Omega` block
    /// sees a nonzero image.
    pub fn rank(&self, x: &AlgElement) -> Result<ModelRank> {
        self.algebra.check_same(x.algebra())?;
        let scale = x.to_matrix().frobenius();
        let mut total = 0usize;
        for blk in &self.blocks {
            let r = numerical_rank_scaled(&blk.rep.apply_coords(x.coords()), scale, &self.tol);
            match blk.multiplicity {
                Multiplicity::Finite(k) => total += k * r,
                Multiplicity::Omega if r > 0 => return Ok(ModelRank::Infinite),
                Multiplicity::Omega => {}
            }
        }
        Ok(ModelRank::Finite(total))
    }
}

/// The monster model of the theory of `reference`: its discrete blocks at their
/// finite multiplicities plus `Omega` copies of every block of its essential part,
/// with no copies allocated yet.
pub fn monster(reference: &ExtendedModel) -> ExtendedModel {
    ExtendedModel::from_blocks(reference.algebra.clone(), reference.blocks.clone(), reference.tol)
}

/// Equality of the two multiplicity functions, blocks matched by equivalence.
pub fn elementarily_equivalent(m1: &ExtendedModel, m2: &ExtendedModel) -> Result<bool> {
    m1.algebra.check_same(&m2.algebra)?;
    let blocks = m1.algebra.structure()?.blocks.len();
    Ok((0..blocks).all(|c| m1.multiplicity_of(c) == m2.multiplicity_of(c)))
}

#[cfg(test)]
mod tests;
