//! Photon statistics of two coupled, coherently driven Kerr cavities.
//!
//! The crate provides exact master-equation steady states on a truncated
//! two-mode Fock space, the weak-drive amplitude hierarchy, closed-form and
//! numerically optimized antibunching conditions, and a sweep/figure pipeline
//! that writes CSV datasets.

pub mod amplitude;
pub mod cli;
pub mod error;
pub mod figures;
pub mod fock;
pub mod lindblad;
mod minimize;
pub mod model;
pub mod optimal;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
