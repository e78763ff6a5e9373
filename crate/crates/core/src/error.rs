use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("modulus must be positive")]
    EmptyModulus,
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: usize, right: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("modulus {0} must be odd")]
    EvenModulus(usize),
    #[error("function is not 1-bounded: |f({index})| = {magnitude}")]
    Unbounded { index: usize, magnitude: f64 },
    #[error("work estimate {estimate} exceeds budget {budget}")]
    BudgetExceeded { estimate: u128, budget: u128 },
    #[error("function does not vanish outside [1, {n}] (residue {residue})")]
    SupportViolation { n: usize, residue: usize },
    #[error("averaged product has imaginary part {0:e}")]
    NonRealAverage(f64),
    #[error("set contains the 3-term progression {0:?}")]
    ContainsProgression([u64; 3]),
    #[error("length {n} is below the floor {floor}")]
    BelowLengthFloor { n: u64, floor: u64 },
    #[error("progression escapes [1, {n}]")]
    ProgressionOutOfRange { n: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("polynomial reconstruction failed at x = {x}: table {expected}, polynomial {got}")]
    ReconstructionMismatch { x: u64, expected: u64, got: u64 },
    #[error("empty support: {0}")]
    EmptySupport(String),
}
