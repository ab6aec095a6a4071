//! Abelian sandpiles on finite windows of `Z^d`, the lattice Green function of
//! the discrete Laplacian, and the equivariant maps `xi_g` from sandpile
//! configurations onto the harmonic model.
//!
//! Floating point code is generic over [`Real`] (`f32`, `f64`); polynomial
//! code is generic over [`Coefficient`] (machine integers or `BigInt`). The
//! aliases below fix the types used by the command-line tool.

pub mod green;
pub mod harmonic;
pub mod laurent;
pub mod sandpile;
pub mod scalar;
pub mod window;

pub use scalar::{Coefficient, Real};
pub use window::BoxWindow;

/// Laurent polynomial with arbitrary-precision coefficients.
pub type Poly = laurent::LaurentPoly<num_bigint::BigInt>;

/// Green function table in double precision.
pub type GreenTable64 = green::GreenTable<f64>;
