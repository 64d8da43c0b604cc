//! Dynamical flow networks with distributed routing.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod dynamics;
pub mod flows;
pub mod network;
pub mod ode;
pub mod resilience;
pub mod routing;
pub mod scenario;
pub mod topology;

pub use network::FlowNetwork;
