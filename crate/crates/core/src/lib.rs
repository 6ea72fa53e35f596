//! Cournot competition between two spectrum-sharing providers whose coverage
//! areas partially overlap.
//!
//! The market splits into three sub-markets (SP1 only, both, SP2 only). Each
//! provider picks how many users to serve in the sub-markets it covers; prices
//! clear from linear demand and every user pays a congestion cost driven by
//! all traffic within range of its access point(s). The crate computes the
//! unique Nash equilibrium (closed form for symmetric markets, exact
//! best-response iteration otherwise), the cooperation counterfactual where
//! both providers stay out of the overlap, and bandwidth sweeps of revenue,
//! consumer surplus and welfare.
//!
//! ```
//! use spectrum_cournot::{equilibrium, MarketConfig};
//!
//! let cfg = MarketConfig::new(0.4, 0.2, 0.4, 0.4).unwrap();
//! let eq = equilibrium::solve_numeric(&cfg).unwrap();
//! let cf = equilibrium::closed_form_symmetric(&cfg).unwrap();
//! assert!(eq.alloc.distance(&cf.alloc) < 1e-8);
//! ```

pub mod analysis;
pub mod cli;
pub mod equilibrium;
mod error;
pub mod model;
pub mod output;
pub mod potential;
pub mod sampling;
pub mod scenario;
pub mod verify;

pub use error::{Constraint, Error, Result};
pub use model::{Allocation, MarketConfig, MarketOutcome, Sp};
