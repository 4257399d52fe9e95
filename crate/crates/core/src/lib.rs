//! Numerics for the bandlimited Klein-Gordon vacuum.
//!
//! Units are fixed to `ħ = c = k_c = 1`, so every quantity is a function of
//! the cutoff ratio `λ = Λ/k_c` held in [`ModelParams`].

// `!(x > 0.0)` guards are kept because they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bogoliubov;
pub mod error;
pub mod field;
pub mod fit;
pub mod fock;
pub mod gaussian;
pub mod moments;
pub mod oracle;
pub mod povm;
pub mod quadrature;
pub mod sampling;

pub use error::{Error, Result};
pub use field::{CutoffShape, KernelSign, ModelParams};
