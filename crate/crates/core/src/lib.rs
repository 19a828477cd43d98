//! Steady-state photoluminescence of a coherently driven quantum dot coupled
//! to a cavity mode and an acoustic-phonon bath, in the polaron frame.

pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod master_eq;
pub mod params;
pub mod phonon;
pub mod quadrature;
pub mod solver;
pub mod units;

pub use error::{Error, Result};
pub use params::{AlphaConvention, BathParams, DriveKind, ModelVariant, SystemParams};
