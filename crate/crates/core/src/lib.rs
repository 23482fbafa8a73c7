pub mod cli;
pub mod error;
pub mod linalg;
pub mod parampoly;
pub mod parse;
pub mod presburger;
pub mod qpmatrix;
pub mod qpoly;
pub mod ratgen;

pub use error::{Error, Result};
