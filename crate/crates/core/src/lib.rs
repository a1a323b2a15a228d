//! Exact computation with Whitehead Gamma-sequences of finitely generated
//! abelian groups.
//!
//! The building blocks are canonical-form f.g. abelian groups and integer
//! matrices ([`abgroup`]), the quadratic Gamma functor and its mod-2
//! replacement for higher dimensions ([`gamma`]), exact sequences
//! `H_{n+2} -> Gamma_n^1(H_n) -> pi_{n+1} -> H_{n+1} -> 0` together with
//! their groups of self-equivalences ([`gseq`]), executable witness
//! constructions for even-order and infinite-order equivalences
//! ([`analysis`]), and bounded exhaustive searches over all such sequences
//! ([`search`]).
//!
//! All arithmetic is exact: arbitrary-precision integers throughout, no
//! floating point anywhere.

pub mod abgroup;
pub mod analysis;
pub mod doc;
pub mod gamma;
pub mod gseq;
pub mod search;

use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure surfaces of the
/// public operations; everything else is a hard internal error (panic).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("not a well-defined homomorphism: {0}")]
    IllDefined(String),
    #[error("automorphism group is infinite (free rank >= 2)")]
    InfiniteAutGroup,
    #[error("hom-set is infinite (free generators on both sides)")]
    InfiniteHomSet,
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("invalid group literal: {0}")]
    BadLiteral(String),
    #[error("invalid canonical form: {0}")]
    BadCanonicalForm(String),
    #[error("invalid sequence: {0}")]
    InvalidSequence(String),
    #[error("B-group not enumerable: {0}")]
    NotEnumerable(String),
    #[error("element does not have order 4")]
    NotOrder4,
    #[error("no stabilizing involution exists: {0}")]
    NoInvolution(String),
    #[error("invalid split certificate: {0}")]
    InvalidCertificate(String),
    #[error("operation requires n >= 3")]
    WrongN,
    #[error("campaign bounds too large: {0}")]
    BoundsTooLarge(String),
    #[error("malformed document: {0}")]
    BadDocument(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
