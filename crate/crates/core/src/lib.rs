//! Symbolic graded calculus on split supermanifolds.

pub mod berezin;
pub mod checks;
pub mod error;
pub mod exec;
pub mod harmonic;
pub mod jets;
pub mod linalg;
pub mod random;
pub mod sgeometry;
pub mod superalg;
pub mod symscalar;
pub mod variational;

pub use error::{Error, Result};
