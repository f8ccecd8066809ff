//! Event-driven simulation of both queueing systems with exact sawtooth AoI
//! accounting. A single replication runs sequentially; replications are
//! independent given their seeds.

mod events;
mod multistream;
mod tandem;
mod trace;

use thiserror::Error;

pub use events::EventQueue;
pub use multistream::{simulate_multistream, FlowCounters, MultistreamRun};
pub use tandem::{simulate_tandem, simulated_node_loads, TandemCounters, TandemRun};
pub use trace::{accumulate_aoi, renewal_identity_residual, AoIStats, DeliveryRecord, DeliveryTrace, RENEWAL_MIN_RECORDS};

/// Fewer deliveries than this per flow and a run refuses to report statistics.
pub const MIN_DELIVERIES: usize = 100;

#[derive(Debug, Error)]
pub enum DesError {
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("invalid simulation input: {0}")]
    InvalidInput(String),
    #[error("node {node} unstable: offered load {load} >= service rate {mu}")]
    Unstable { node: usize, load: f64, mu: f64 },
    #[error("horizon too short: flow {flow} has {deliveries} deliveries (need {MIN_DELIVERIES})")]
    HorizonTooShort { flow: usize, deliveries: usize, partial: Vec<DeliveryTrace> },
    #[error("need at least {need} deliveries, have {have}")]
    InsufficientDeliveries { have: usize, need: usize },
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("trace csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace io: {0}")]
    Io(#[from] std::io::Error),
}

impl PartialEq for DesError {
    fn eq(&self, other: &Self) -> bool {
        use DesError::*;
        match (self, other) {
            (InvalidHorizon(a), InvalidHorizon(b)) => a == b,
            (InvalidInput(a), InvalidInput(b)) | (InvalidTrace(a), InvalidTrace(b)) => a == b,
            (Unstable { node: a, .. }, Unstable { node: b, .. }) => a == b,
            (HorizonTooShort { flow: a, deliveries: x, .. }, HorizonTooShort { flow: b, deliveries: y, .. }) => a == b && x == y,
            (InsufficientDeliveries { have: a, need: x }, InsufficientDeliveries { have: b, need: y }) => a == b && x == y,
            _ => false,
        }
    }
}
