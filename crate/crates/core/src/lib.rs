//! Exact and numeric engine for multiplier and length spectra of rational
//! maps of the projective line over `Q`.

pub mod arith;
pub mod budget;
pub mod error;
pub mod map;
pub mod numeric;
pub mod pcf;
pub mod rog;
pub mod poly;
pub mod serial;
pub mod sieve;
pub mod spectrum;

pub use budget::Budget;
pub use error::{Error, ErrorCategory, Result};
pub use poly::{Factorization, FpkElem, IntPoly, RatPoly};
pub use map::{BinaryForm, Mobius, ProjPoint, RationalMap};
pub use spectrum::{AlgebraicClass, SpectrumEngine};
