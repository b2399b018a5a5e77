//! Interpretable value-based argumentation agents extracted from
//! multi-agent trajectory data.
//!
//! The pipeline: log trajectories ([`trajectories`]), build an argument
//! preference graph and turn it into a value ordering ([`extraction`]), then
//! run, inspect and score the resulting agents ([`agents`], [`evaluation`]).
//! [`environments`] provides Mountain Car and a synthetic takeaway feature
//! domain to exercise all of it.

pub mod agents;
pub mod argumentation;
pub mod environments;
pub mod error;
pub mod evaluation;
pub mod extraction;
pub mod trajectories;

pub use error::{Error, ErrorClass, Result};
