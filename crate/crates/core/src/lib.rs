//! Numerical laboratory for Cauchy integrals on Lipschitz graphs and their
//! commutators with BMO symbols, measured on Morrey spaces.

pub mod compactness;
pub mod constructions;
pub mod curve;
pub mod error;
pub mod experiment;
pub mod factorization;
pub mod grid;
pub mod operators;
pub mod spaces;

pub use curve::LipschitzCurve;
pub use error::{Error, Result};
pub use grid::{CellSet, Grid, GridFunction, Interval};
