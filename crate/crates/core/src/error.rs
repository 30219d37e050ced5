use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid modulus {0}: must lie in [2, 2^31]")]
    InvalidModulus(u64),

    #[error("{m} is not a unit modulo {n}")]
    NotAUnit { m: u64, n: u64 },

    #[error("term {term} is outside [1, {n}]")]
    TermOutOfRange { term: u64, n: u64 },

    #[error("a sequence needs at least one term")]
    EmptySequence,

    #[error("sequence is not a minimal zero-sum sequence")]
    NotMinimalZeroSum,

    #[error("sequence has length {0}, expected 4")]
    NotLength4(usize),

    #[error("content of the sequence is {0}, expected 1")]
    ContentNotOne(u64),

    #[error("content of the sequence is 1, nothing to reduce")]
    TrivialContent,

    #[error("n1 + n4 = n in the sum-2n orientation; impossible for a minimal sequence")]
    Degenerate,

    #[error("a term equals n/2, which is fixed by every unit; no normal form exists")]
    HalfTerm,

    #[error("prime-power structure violated: {0}")]
    StructureViolation(String),

    #[error("{what} not found within the search bound {bound}")]
    NotFound { what: &'static str, bound: u64 },

    #[error("invalid normal form: {0}")]
    InvalidNormalForm(String),

    #[error("certificate failed re-verification: {0}")]
    UnsoundCertificate(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
