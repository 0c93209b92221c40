//! Multi-core execution: routes between cores, the modeled fabric hierarchy,
//! and the system container format.

mod container;
mod routing;
mod system;

use thiserror::Error;

pub use container::{emit_system, load_any, load_system, SYSTEM_MAGIC};
pub use routing::{
    build_routing, derive_routes, exchange, Level, Route, RoutingTable, StepTraffic, Topology, TrafficStats, LEVELS,
};
pub use system::{run_system, System, SystemOutput, SystemStep};

use crate::runtime::RuntimeError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouterError {
    #[error("{cores} cores do not fit a topology with room for {capacity}")]
    TopologyMismatch { cores: usize, capacity: u64 },
    #[error("relay axon on core {core} names unknown neuron '{key}'")]
    UnresolvedRelay { core: usize, key: String },
    #[error("invalid route: {0}")]
    InvalidRoute(String),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}
