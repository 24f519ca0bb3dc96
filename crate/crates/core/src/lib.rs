//! Quaternion adaptive backstepping and terminal sliding-mode control of a quadrotor.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocator;
pub mod attitude;
pub mod baseline;
pub mod dynamics;
pub mod error;
pub mod filter;
pub mod metrics;
pub mod position;
pub mod quat;
pub mod reference;
pub mod sim;

pub use error::{Error, Result};
pub use metrics::{compute_metrics, RunMetrics};
pub use sim::{run, Controller, RunOutcome, Scenario, SimSettings, TraceRow};
