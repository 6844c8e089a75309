//! Six-component photon spinor toolkit.
//!
//! The electromagnetic field is packed into a (1,0)⊕(0,1) spinor, either in the
//! chiral layout `(F_R, F_L)` with `F_{R/L} = (E ± iH)/2`, or in the standard layout
//! `(E, iH)/√2`. On top of the fixed matrices this crate provides polarization
//! bases and mode spinors, grid fields with finite-difference residuals, the
//! discrete/continuous symmetry transforms, the Dirac-like operator in a linear
//! medium, and the tetrad construction for diagonal metrics together with the
//! Schwarzschild circular-orbit results.
//!
//! Units: ħ = c = 1 (and G = 1 for the gravity module); metric signature (−,+,+,+).

// Tensor code reads best with explicit indices, and `!(x > 0.0)` is used on
// purpose so that NaN lands in the rejecting branch.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod error;
pub mod expr;
pub mod field;
pub mod gravity;
pub mod grid_io;
pub mod medium;
pub mod polarization;
pub mod report;
pub mod roots;
pub mod symmetries;

pub use algebra::{Mat3, Mat6, MatrixSet, Representation, Spinor, C64};
pub use error::{Error, Result};
pub use report::Check;
