//! Weighted band-limited majorants: construction and verification.

pub mod bessel;
pub mod cli;
pub mod error;
pub mod expr;
pub mod hilbert;
pub mod linefft;
pub mod majorize;
pub mod onedim_bm;
pub mod pipeline;
pub mod quadrature;
pub mod radial_ft;
pub mod sampled;
pub mod weights;

pub use error::{BmError, Result};
