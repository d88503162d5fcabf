use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid ring: {0}")]
    InvalidRing(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("not a group: {reason} (witness {witness:?})")]
    NotAGroup { reason: String, witness: Vec<usize> },

    #[error("element {element} has order {order}, which is not a power of {ell}")]
    NotEllGroup { element: usize, order: usize, ell: u64 },

    #[error("generators do not generate the group ({reached} of {order} elements reached)")]
    GeneratorsDontGenerate { reached: usize, order: usize },

    #[error("inconsistent class-2 presentation: {0}")]
    InconsistentPresentation(String),

    #[error("subgroup is not normal: {conjugator} * {element} * {conjugator}^-1 leaves it")]
    NotNormal { conjugator: usize, element: usize },

    #[error("quotient is not a free Z/{modulus}-module (invariant factors {factors:?})")]
    QuotientNotFree { modulus: u64, factors: Vec<u64> },

    #[error("unknown catalog entry: {0}")]
    UnknownCatalogEntry(String),

    #[error("group ring requires a free abelian quotient: {0}")]
    NotFreeModule(String),

    #[error("invalid module: {0}")]
    InvalidModule(String),

    #[error("cochain is not a cocycle")]
    NotACocycle,

    #[error("section is not a linear right inverse of the projection")]
    SectionNotLinear,

    #[error("pairing does not match the cochain coefficients: {0}")]
    PairingMismatch(String),

    #[error("map is not G-equivariant: generator {sigma}, basis element {basis}")]
    NotEquivariant { sigma: usize, basis: usize },

    #[error("gamma does not lie in J_{level}")]
    GammaNotInSocleLevel { level: usize },

    #[error("the generator-sum formula needs level 2, got {0}")]
    WrongLevel(usize),

    #[error("size bound exceeded: {0}")]
    SizeBound(String),

    #[error("H_phi is not normal (conjugator {conjugator}, element {element})")]
    NormalityFailure { conjugator: usize, element: usize },

    #[error("parse error: {0}")]
    Parse(String),
}
