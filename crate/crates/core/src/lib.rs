//! Age-of-Information (AoI) modeling for non-terrestrial status-update networks.
//!
//! Two delivery paths are covered:
//!
//! - **Air-ground**: a UAV serves several ground nodes as a multi-stream
//!   M/G/1/1 blocking queue, with each completed service succeeding with the
//!   SINR-driven probability `p_sj`.
//! - **Satellite relay**: a chain of `K` LEO satellites forms a tandem of FCFS
//!   M/M/1 queues with cross traffic, per-link loss and a visibility
//!   probability `p_a`.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`spatial`] | PPP / Poisson-cluster ground patterns, nearest-UAV association, scheduling probability |
//! | [`channel`] | SINR under Rayleigh fading, Monte Carlo success probability |
//! | [`analytic`] | Closed-form AoI for the multi-stream queue and the satellite chain |
//! | [`des`] | Event-driven simulators and exact sawtooth AoI accounting |
//! | [`harness`] | Scenario files, parameter sweeps, CSV output, discrepancy reports |
//!
//! All randomness is derived from a single root seed through [`seed`], so every
//! result is reproducible independent of thread count.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod des;
pub mod harness;
pub mod seed;
pub mod spatial;

pub use analytic::{FlowSet, SatelliteChain, SatelliteNode, ServiceDist, ServiceSpec};
pub use channel::{ChannelConfig, LinkSample};
pub use des::{AoIStats, DeliveryRecord, DeliveryTrace};
pub use harness::{ResultRow, ScenarioConfig};
pub use spatial::{AssociationMap, Origin, PointPattern, SpatialConfig, Window};
