use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operands belong to different algebras")]
    AlgebraMismatch,

    #[error("not a homomorphism: worst basis pair ({i}, {j}) has residual {residual:e}")]
    NotHomomorphism { i: usize, j: usize, residual: f64 },

    #[error("not a *-map: worst basis element {i} has residual {residual:e}")]
    NotStar { i: usize, residual: f64 },

    #[error("degenerate representation: pi(e) differs from the identity by {residual:e}")]
    Degenerate { residual: f64 },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("functional is not Hermitian (max deviation {deviation:e})")]
    NotHermitianFunctional { deviation: f64 },

    #[error("functional is not positive (min Gram eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("functionals are not orthogonal")]
    NotOrthogonal,

    #[error("block {block}: copy index {copy} is out of range for multiplicity {multiplicity}")]
    CopyOutOfRange { block: usize, copy: usize, multiplicity: usize },

    #[error("block {block} has finite multiplicity and no unused copy is left")]
    InsufficientMultiplicity { block: usize },

    #[error("the two vectors do not have the same type over the base")]
    TypesDiffer,

    #[error("block {block} is not irreducible (commutant dimension {commutant_dim})")]
    NotIrreducible { block: usize, commutant_dim: usize },

    #[error("blocks {first} and {second} are unitarily equivalent")]
    EquivalentBlocks { first: usize, second: usize },

    #[error("invalid input: {0}")]
    Invalid(String),
}
