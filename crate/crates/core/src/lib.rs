//! Exact Eilenberg–Zilber operads over the rationals, homotopy transfer of Lie,
//! commutative and conformal structures from cosimplicial algebras, and exact checks of
//! the Jacobi, skew-symmetry and Borcherds identities together with their homotopy
//! (secondary) versions.

pub mod cech;
pub mod conformal;
pub mod cosimp;
pub mod error;
pub mod input;
pub mod exactlin;
pub mod operad;
pub mod report;
pub mod simplexcat;
pub mod transfer;

pub use error::{Error, Result};
pub use exactlin::{q, qf, FiniteComplex, LinComb, QMatrix, SparseVec, Q};
pub use simplexcat::MonotoneMap;
