//! Generalized angles and orthogonality in L^p, L1 Fourier-energy
//! accounting for signal decompositions, and l^p-optimal circulant
//! preconditioners for Toeplitz systems.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod fft;
pub mod geometry;
pub mod io;
pub mod manifest;
pub mod signal;
pub mod toeplitz;

pub use error::{Error, Result};
pub use geometry::{DiscreteFunction, GeometryResult, PExponent};
pub use signal::{Decomposition, EnergyReport, Signal, Spectrum};
pub use toeplitz::{CirculantMatrix, ModelSymbol, SolveReport, SolveStatus, ToeplitzOperator, ToeplitzSymbol};
