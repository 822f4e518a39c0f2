//! Routing-informed analytical placement for photonic integrated circuits.
//!
//! The engine places mixed-size photonic components on a single-layer die by
//! minimizing a bending-aware wirelength together with a routing-spacing
//! penalty and an electrostatic density term, then legalizes the result and
//! reports routability-proxy metrics (crossings, bending angle, insertion
//! loss, spacing violations).

pub mod benchgen;
pub mod cli;
pub mod constraints;
pub mod density;
pub mod frames;
pub mod geom;
pub mod legalize;
pub mod metrics;
pub mod netlist;
pub mod optimizer;
pub mod placer;
pub mod spacing;
pub mod spectral;
pub mod wirelength;

pub use netlist::{Design, NetlistError};
pub use placer::{run_global, RunConfig, RunStatus};
