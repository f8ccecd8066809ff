//! Closed-form AoI expressions for the UAV multi-stream queue and the
//! satellite relay chain.
//!
//! Expressions are evaluated exactly as derived, without algebraic repair;
//! agreement with simulation is measured by [`crate::harness`], not assumed.

mod chain;
mod multistream;
mod service;

use thiserror::Error;

pub use chain::{
    chain_aoi_approx, chain_aoi_upper, chain_success_probability, cross_traffic_rate, node_arrival_rate,
    node_response_rate, SatelliteChain, SatelliteNode,
};
pub use multistream::{
    mg11_average_aoi, mg11_peak_aoi, mgf_departure_mg11, mgf_departure_mm11, mgf_derivative_check,
    mm11_average_aoi, mm11_departure_moments, DepartureMoments, DerivativeCheck, FlowSet,
    FIRST_DERIVATIVE_STEP, SECOND_DERIVATIVE_STEP,
};
pub use service::{ServiceDist, ServiceSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("invalid service: {0}")]
    InvalidService(String),
    #[error("invalid flows: {0}")]
    InvalidFlows(String),
    #[error("invalid chain: {0}")]
    InvalidChain(String),
    #[error("invalid source rate {0}")]
    InvalidRate(f64),
    #[error("flow index {index} out of range ({count} flows)")]
    FlowIndex { index: usize, count: usize },
    #[error("node index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("service is not exponential (scv = {scv})")]
    NotExponential { scv: f64 },
    #[error("MGF pole at s = {0}")]
    PoleAt(f64),
    #[error("node {node} unstable (alpha = {alpha})")]
    Unstable { node: usize, alpha: f64 },
    #[error("end-to-end success probability is zero")]
    ZeroSuccessProbability,
    #[error("offered load rho = {rho} is not below 1")]
    Overloaded { rho: f64 },
}
