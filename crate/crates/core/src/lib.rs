//! Temporal motif mining and motif-driven cache placement for V2V networks.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod caching;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod motif;
pub mod radio;
pub mod seeds;
pub mod simulator;
pub mod temporal_graph;

pub use error::{Error, Result};
