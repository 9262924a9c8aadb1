//! Intersection sizes of k-flats with point sets in the binary affine space
//! AG(n, 2).
//!
//! The crate covers the linear algebra of F_2^n ([`gf2`]), a small GF(2^e)
//! for the Bose Sidon sets ([`field`]), digit statistics and the Ψ / Takagi
//! machinery ([`numerals`]), set constructions that avoid prescribed
//! intersection sizes ([`constructions`]), exhaustive spectra and additive
//! energy ([`analysis`]), and hypercube cut bounds ([`hypercube`]).

pub mod analysis;
pub mod constructions;
pub mod error;
pub mod field;
pub mod gf2;
pub mod hypercube;
pub mod numerals;
pub mod orbit;
pub mod verify;

pub use error::{Error, Result};
pub use gf2::{Flat, Point, PointSet};
