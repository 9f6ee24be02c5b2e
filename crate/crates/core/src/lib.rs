//! Normal forms of vector-variable polynomials and straightening of Clifford
//! bracket polynomials in three-dimensional orthogonal geometry.

pub mod cli;
pub mod error;
pub mod gbasis;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod parser;
pub mod straighten;
pub mod unibracket;
pub mod verify;

pub use error::{Error, Result};
