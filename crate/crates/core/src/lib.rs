//! Resonance counting, uniformity norms and cubic Schrödinger dynamics on the
//! two-torus.

pub mod acceptance;
pub mod error;
pub mod io;
pub mod lattice;
pub mod nls;
pub mod parallelogram;
pub mod quad;
pub mod resonance;
pub mod rng;
pub mod schrodinger;
pub mod uniformity;

pub use error::{Error, Result};
