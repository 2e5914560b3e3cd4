//! Solvable multistate Landau-Zener models.
//!
//! The crate builds the linear-in-time Hamiltonians `H(t) = A + B t` of several
//! solvable families, checks their integrability conditions, and computes
//! transition probability matrices three ways: semiclassical path sums,
//! truncated scattering-matrix products and direct numerical propagation.

// `!(x > 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod families;
pub mod integrability;
pub mod model;
pub mod mtlz;
pub mod phases;
pub mod propagator;
pub mod semiclassics;
pub mod spec;
pub mod spectra;
pub mod sweep;
pub mod transition;

pub use error::{MlzError, Result};
pub use model::{lz_probability, MlzModel};
pub use mtlz::{check_mtlz, pullback_contour, MtlzFamily, MtlzReport};
pub use transition::TransitionMatrix;
