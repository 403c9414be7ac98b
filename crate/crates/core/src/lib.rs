//! Finite-dimensional unital C*-algebras, their representations and positive
//! functionals, and the model theory of Hilbert spaces as modules over them.
//!
//! Everything is concrete: an algebra is a unital *-subalgebra of `M_n`, a
//! representation is a list of matrices indexed by the algebra basis, and a
//! model is a finite list of irreducible blocks whose multiplicities may be
//! the symbolic infinite [`Multiplicity::Omega`]. Model-theoretic relations
//! (types, closures, forking, canonical bases, orthogonality and domination of
//! types) are decided as linear-algebra predicates on those objects.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

mod error;

pub mod algebra;
pub mod decomp;
pub mod linalg;
pub mod model;
pub mod rep;
pub mod sample;
pub mod states;

pub use algebra::{AlgElement, Algebra, AlgebraStructure, CanonicalBlock};
pub use decomp::{
    cyclic_isometric_isomorphic, cyclic_isometry, decompose, rank_profile, unitary_equivalent, DecomposedBlock,
    Decomposition, IrreducibleBlock,
};
pub use error::{Error, Result};
pub use linalg::{CMatrix, Tolerance, C64};
pub use model::{AutomorphismWitness, ExtendedModel, ModelBlock, ModelRank, ModelVector, Multiplicity, TypeHandle};
pub use rep::{IntertwinerSpace, Representation};
pub use states::{BlockDensity, Functional};
