//! Numerical toolkit for subconvexity experiments on GL(3) L-functions twisted by Dirichlet
//! characters: arithmetic helpers, character and exponential sums, oscillatory integrals, the
//! GL(3) Bessel kernel, Voronoi summation, and the amplified-sum decomposition.

pub mod arith;
pub mod bessel3;
pub mod characters;
pub mod decomposition;
pub mod error;
pub mod expsums;
pub mod oscint;
pub mod quad;
pub mod special;
pub mod voronoi;

pub use error::{Error, Result};
