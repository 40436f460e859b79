//! A numerical laboratory for the quantized cat map.
//!
//! The crate computes fluctuations of diagonal matrix elements over short
//! spectral windows. Every closed-form fast path (the Weil-representation
//! trace formula, the folded exponential-sum variance, complete character
//! sums) has a dense-matrix or brute-force counterpart so the two can be
//! checked against each other.

pub mod arithmetic;
pub mod charsums;
pub mod error;
pub mod modular;
pub mod numeric;
pub mod observables;
pub mod quantization;
pub mod spectra;
pub mod variance;
pub mod windows;

pub use arithmetic::{
    GroupElement, PrimeContext, PrimeKind, QuadExtElement, QuadraticForm, ToralAutomorphism,
};
pub use error::{CatError, Result};
pub use observables::Observable;
pub use quantization::{DenseOperator, QuantumState};
pub use windows::{Window, WindowKind};
