//! Multi-surface IRS-aided point-to-point MIMO: orthogonal surface
//! placement, closed-form passive beamforming and joint element and power
//! allocation, with the experiment runner behind the `irs-mimo` binary.

// Comparisons such as `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod analysis;
pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod placement;

pub use config::SystemConfig;
pub use error::{Error, Result};
