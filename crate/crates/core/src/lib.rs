//! Simulation and learning for interference-aware cellular-connected UAV
//! networks.

pub mod agent;
pub mod baseline;
pub mod channel;
pub mod deep_esn;
pub mod error;
pub mod game;
pub mod harness;
pub mod oracle;
pub mod scenario;
pub mod units;

pub use error::{Error, Result};
