//! Numerical construction and certification of embedded eigenvalues for
//! operators `T(D) + V` with decaying potentials.

pub mod cli;
pub mod constructions;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod newton;
pub mod plot;
pub mod poly;
pub mod special;
pub mod symbols;
pub mod verify;
pub mod weights;

pub use error::{Error, Result};
