//! Multi-stream M/G/1/1 blocking queue with Bernoulli delivery success.

use rand::Rng;
use rand_distr::Exp1;
use rand_pcg::Pcg64;

use super::{accumulate_aoi, AoIStats, DeliveryRecord, DeliveryTrace, DesError, MIN_DELIVERIES};
use crate::analytic::FlowSet;
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FlowCounters {
    pub arrivals: usize,
    /// Arrivals that found the server busy.
    pub blocked: usize,
    /// Services that ended in a transmission error.
    pub failed: usize,
    pub delivered: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistreamRun {
    pub stats: Vec<AoIStats>,
    pub traces: Vec<DeliveryTrace>,
    pub counters: Vec<FlowCounters>,
    /// A packet still in service at the horizon.
    pub in_service_at_end: Option<usize>,
}

enum Event {
    Arrival(usize),
    Departure,
}

/// Checks what the simulator needs. Success probabilities of exactly 0 or 1
/// are allowed here; only the closed forms degenerate there.
fn check(flows: &FlowSet, horizon: f64) -> Result<(), DesError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(DesError::InvalidHorizon(horizon));
    }
    if flows.rates.is_empty() || flows.rates.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(DesError::InvalidInput("flow rates must be positive".into()));
    }
    if !(0.0..=1.0).contains(&flows.p_success) {
        return Err(DesError::InvalidInput(format!("success probability {} outside [0, 1]", flows.p_success)));
    }
    flows.service.validate().map_err(|e| DesError::InvalidInput(e.to_string()))
}

/// Simulates every flow on `[0, horizon]`. Each flow's arrival process, the
/// service times and the success draws use separate seeded streams.
pub fn simulate_multistream(flows: &FlowSet, horizon: f64, seed: u64) -> Result<MultistreamRun, DesError> {
    check(flows, horizon)?;
    let m = flows.rates.len();
    let mut arrival_rngs: Vec<Pcg64> = (0..m).map(|i| seed::rng(seed, Stream::Multistream, i as u64)).collect();
    let mut service_rng = seed::rng(seed, Stream::Multistream, m as u64);
    let mut success_rng = seed::rng(seed, Stream::Multistream, m as u64 + 1);

    let mut queue = super::EventQueue::new();
    for (i, rng) in arrival_rngs.iter_mut().enumerate() {
        let gap: f64 = rng.sample(Exp1);
        queue.schedule(gap / flows.rates[i], Event::Arrival(i));
    }

    let mut counters = vec![FlowCounters::default(); m];
    let mut records: Vec<Vec<DeliveryRecord>> = vec![Vec::new(); m];
    // (flow, generation time) of the packet in service
    let mut in_service: Option<(usize, f64)> = None;

    while let Some((now, event)) = queue.pop_until(horizon) {
        match event {
            Event::Arrival(i) => {
                let gap: f64 = arrival_rngs[i].sample(Exp1);
                queue.schedule_in(gap / flows.rates[i], Event::Arrival(i));
                counters[i].arrivals += 1;
                if in_service.is_some() {
                    counters[i].blocked += 1;
                } else {
                    in_service = Some((i, now));
                    queue.schedule_in(flows.service.sample(&mut service_rng), Event::Departure);
                }
            }
            Event::Departure => {
                let (i, generated) = in_service.take().expect("departure with idle server");
                if success_rng.random::<f64>() < flows.p_success {
                    counters[i].delivered += 1;
                    records[i].push(DeliveryRecord { generation: generated, delivery: now, flow: i });
                } else {
                    counters[i].failed += 1;
                }
            }
        }
    }

    let traces: Vec<DeliveryTrace> = records.into_iter().map(|r| DeliveryTrace { records: r, horizon }).collect();
    if let Some((flow, c)) = counters.iter().enumerate().find(|(_, c)| c.delivered < MIN_DELIVERIES) {
        return Err(DesError::HorizonTooShort { flow, deliveries: c.delivered, partial: traces });
    }
    let stats = traces
        .iter()
        .zip(&counters)
        .map(|(t, c)| {
            let mut s = accumulate_aoi(t)?;
            s.drops = c.blocked + c.failed;
            Ok(s)
        })
        .collect::<Result<_, DesError>>()?;
    Ok(MultistreamRun { stats, traces, counters, in_service_at_end: in_service.map(|(i, _)| i) })
}
