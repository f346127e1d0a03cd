use thiserror::Error;

/// Hard errors. Divergence and failed checks are data, not errors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("natural number overflow in pairing")]
    Overflow,
    #[error("triple component {0} is not a bit")]
    NotABit(u8),
    #[error("malformed tag in inspection window")]
    MalformedTag,
    #[error("inconsistent table: {0}")]
    InconsistentTable(String),
    #[error("duplicate instance in problem {0}")]
    DuplicateInstance(String),
    #[error("empty solution set in problem {0}")]
    EmptySolutionSet(String),
    #[error("empty mass problem")]
    EmptyMassProblem,
    #[error("instances of {0} are not distinguishable within {1} bits")]
    Indistinguishable(String, usize),
    #[error("problem {0} cannot be enumerated")]
    NotEnumerable(String),
    #[error("realizer count {0} exceeds cap {1}")]
    RealizerCap(u128, usize),
    #[error("witness kind mismatch: {0}")]
    KindMismatch(String),
    #[error("source/target mismatch: {0}")]
    SourceTargetMismatch(String),
    #[error("not a Medvedev reduction: {0}")]
    NotAMedvedevReduction(String),
    #[error("search space of {0} candidates exceeds ceiling {1}")]
    BoundsTooLarge(u128, u128),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("problem {0} must have exactly one instance")]
    NotSingleInstance(String),
    #[error("unknown problem {0}")]
    UnknownProblem(String),
}
