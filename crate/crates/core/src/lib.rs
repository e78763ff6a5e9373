//! Higher-order Fourier analysis on cyclic groups.
//!
//! The crate is organised around [`ring::CyclicFunction`], a complex-valued
//! function on `Z/MZ`. On top of it sit the arithmetic progression counts
//! ([`progressions`]), Gowers uniformity norms ([`uniformity`]), the `U²`
//! inverse theorem and the `F_p` toy inverse problem ([`inverse`]), the
//! extremal examples ([`constructions`]), nilsequences on the Heisenberg
//! nilmanifold ([`nilseq`]) and the Roth density-increment engine ([`roth`]).
//!
//! Every fast path has a brute-force counterpart that the test-suite uses as
//! an oracle. Data-parallel loops go through [`par`], which falls back to
//! sequential iteration when the `parallel` feature is disabled. Reductions
//! are always performed in index order, so results do not depend on the
//! number of worker threads.

pub mod constructions;
pub mod error;
pub mod inverse;
pub mod nilseq;
pub mod par;
pub mod progressions;
pub mod ring;
pub mod roth;
pub mod uniformity;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use ring::{CyclicFunction, Indicator, NormKind, Spectrum};
