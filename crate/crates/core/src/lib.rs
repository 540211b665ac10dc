//! Edge-cache redundancy tradeoff model.
//!
//! Base stations each cache `M` files: the `R` most popular files are cached
//! everywhere, the rest of each cache holds files no other station has. Small
//! `R` maximizes the number of distinct files near users (less backhaul
//! traffic) at the price of inter-station transfers; large `R` serves more
//! requests locally but pushes more misses to the backhaul.
//!
//! - [`popularity`]: Zipf catalog, tail masses and inverse-CDF sampling.
//! - [`layout`]: serpentine placement of BS-specific files and closed-form hit masses.
//! - [`cost`]: RAN/backhaul cost accounting and cost curves.
//! - [`optimizer`]: exhaustive search over `R` and particle swarm search over `eta = R/M`.
//! - [`simulator`]: Monte-Carlo request streams checking the analytic costs.
//! - [`experiments`]: parameter sweeps with CSV/JSON output.

pub mod cli;
pub mod cost;
mod error;
pub mod experiments;
pub mod layout;
pub mod optimizer;
pub mod popularity;
pub mod simulator;

pub use cost::{AccountingMode, CostBreakdown, CostParams, Instance};
pub use error::{Error, Result};
pub use layout::{CacheLayout, LayoutParams};
pub use optimizer::{OptimResult, PsoConfig};
pub use popularity::Catalog;
pub use simulator::{SimConfig, TrialResult};
