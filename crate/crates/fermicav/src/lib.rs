//! Fermion-to-qubit compilation and simulation with cavity-mediated
//! string gates, a local-gate reference backend, and the estimation
//! protocols built on top of them.

pub mod backends;
pub mod circuit;
pub mod dense;
pub mod device;
pub mod encoding;
pub mod error;
pub mod models;
pub mod pauli;
pub mod protocols;
pub mod scheduler;
pub mod simulator;
