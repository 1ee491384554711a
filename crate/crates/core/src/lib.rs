//! Simulation toolkit for widely linear multiuser transmit precoding of
//! one-dimensional (PAM) signals over a MISO broadcast channel, including
//! semi-orthogonal user selection and link-level Monte Carlo sweeps.

pub mod channel;
pub mod config;
pub mod error;
pub mod modulation;
pub mod numerics;
pub mod precoding;
pub mod selection;
pub mod simulate;

pub use error::{Result, WlbcError};
