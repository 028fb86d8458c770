//! Exact symbolic engine for the Fedosov-resolution route to the formality
//! quasi-isomorphism on `R^d` with polynomial data.

pub mod brackets;
pub mod commands;
pub mod equivariance;
pub mod error;
pub mod fedosov;
pub mod graded;
pub mod kontsevich;
pub mod linfinity;
pub mod pipeline;
pub mod poly;
pub mod random;
pub mod report;
pub mod spec;
pub mod suites;

pub use error::{Error, Result};
