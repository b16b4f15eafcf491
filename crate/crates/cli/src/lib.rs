//! HTTP service and command-line front end for `bqr-core`.
//!
//! Both share [`api`], so a recommendation served over HTTP and one printed by
//! `bqr recommend` come from the same code path.

pub mod api;
pub mod cli;
pub mod service;
pub mod snapshot;

pub use snapshot::{DataPaths, Snapshot};
