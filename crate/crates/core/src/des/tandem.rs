//! Satellite relay chain: `K` FCFS single-server queues in series with
//! exponential service, cross traffic and lossy links.
//!
//! After service at node `k` a packet crosses link `k` and is lost with
//! probability `ε_k`; link `K` is the downlink to the destination. A source
//! packet surviving it is delivered only if the satellite is visible to the
//! destination, drawn once per packet with probability `p_a`. Cross-traffic
//! packets entering at node `k` leave after service at node `i >= k` with
//! probability `ψ_i`, and always leave after node `K`.

use std::collections::VecDeque;

use rand::Rng;
use rand_distr::Exp1;
use rand_pcg::Pcg64;

use super::{accumulate_aoi, AoIStats, DeliveryRecord, DeliveryTrace, DesError, EventQueue, MIN_DELIVERIES};
use crate::analytic::{cross_traffic_rate, SatelliteChain};
use crate::seed::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Packet {
    Source { generated: f64 },
    Cross,
}

enum Event {
    SourceArrival,
    CrossArrival(usize),
    Completion(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TandemCounters {
    pub source_arrivals: usize,
    /// Source packets that reached the destination link while the
    /// satellite was not visible.
    pub invisible: usize,
    /// Source packets lost on each link.
    pub lost_on_link: Vec<usize>,
    pub delivered: usize,
    pub cross_arrivals: usize,
    /// Source packets served by each node, in service-completion order.
    pub source_served: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TandemRun {
    pub stats: AoIStats,
    pub trace: DeliveryTrace,
    pub counters: TandemCounters,
}

/// Long-run arrival rate at each node as simulated: the source stream thinned
/// by the links before the node, plus cross traffic. Visibility acts after the
/// last node and does not change any load.
pub fn simulated_node_loads(chain: &SatelliteChain, xi: f64) -> Vec<f64> {
    let mut surviving = xi;
    (1..=chain.len())
        .map(|k| {
            let load = surviving + cross_traffic_rate(chain, k).expect("node index within chain");
            surviving *= 1.0 - chain.nodes[k - 1].eps;
            load
        })
        .collect()
}

fn check(chain: &SatelliteChain, xi: f64, horizon: f64) -> Result<(), DesError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(DesError::InvalidHorizon(horizon));
    }
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(DesError::InvalidInput(format!("source rate {xi} must be positive")));
    }
    if chain.nodes.is_empty() || !(0.0..=1.0).contains(&chain.p_a) {
        return Err(DesError::InvalidInput("chain needs nodes and p_a in [0, 1]".into()));
    }
    for (j, n) in chain.nodes.iter().enumerate() {
        let ok = n.mu > 0.0 && n.mu.is_finite() && (0.0..=1.0).contains(&n.eps) && n.theta >= 0.0 && n.theta.is_finite() && (0.0..=1.0).contains(&n.psi);
        if !ok {
            return Err(DesError::InvalidInput(format!("node {} has out-of-range parameters", j + 1)));
        }
    }
    for (j, (load, n)) in simulated_node_loads(chain, xi).iter().zip(&chain.nodes).enumerate() {
        if *load >= n.mu {
            return Err(DesError::Unstable { node: j + 1, load: *load, mu: n.mu });
        }
    }
    Ok(())
}

struct Rngs {
    source: Pcg64,
    cross: Vec<Pcg64>,
    service: Vec<Pcg64>,
    visibility: Pcg64,
    routing: Pcg64,
}

#[inline]
fn exp(rng: &mut Pcg64, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Simulates the chain on `[0, horizon]` with source rate `xi`.
pub fn simulate_tandem(chain: &SatelliteChain, xi: f64, horizon: f64, seed: u64) -> Result<TandemRun, DesError> {
    check(chain, xi, horizon)?;
    let k_nodes = chain.len();
    let stream = |i: usize| seed::rng(seed, Stream::Tandem, i as u64);
    let mut rng = Rngs {
        source: stream(0),
        visibility: stream(1),
        routing: stream(2),
        cross: (0..k_nodes).map(|k| stream(3 + k)).collect(),
        service: (0..k_nodes).map(|k| stream(3 + k_nodes + k)).collect(),
    };

    let mut queue = EventQueue::new();
    queue.schedule(exp(&mut rng.source, xi), Event::SourceArrival);
    for (k, node) in chain.nodes.iter().enumerate() {
        if node.theta > 0.0 {
            queue.schedule(exp(&mut rng.cross[k], node.theta), Event::CrossArrival(k));
        }
    }

    let mut buffers: Vec<VecDeque<Packet>> = vec![VecDeque::new(); k_nodes];
    let mut counters = TandemCounters {
        lost_on_link: vec![0; k_nodes],
        source_served: vec![0; k_nodes],
        ..Default::default()
    };
    let mut records = Vec::new();

    // Enqueue at node k (0-based); an idle server starts at once.
    let enqueue = |k: usize, pkt: Packet, buffers: &mut Vec<VecDeque<Packet>>, queue: &mut EventQueue<Event>, service: &mut Vec<Pcg64>| {
        buffers[k].push_back(pkt);
        if buffers[k].len() == 1 {
            queue.schedule_in(exp(&mut service[k], chain.nodes[k].mu), Event::Completion(k));
        }
    };

    while let Some((now, event)) = queue.pop_until(horizon) {
        match event {
            Event::SourceArrival => {
                queue.schedule_in(exp(&mut rng.source, xi), Event::SourceArrival);
                counters.source_arrivals += 1;
                enqueue(0, Packet::Source { generated: now }, &mut buffers, &mut queue, &mut rng.service);
            }
            Event::CrossArrival(k) => {
                queue.schedule_in(exp(&mut rng.cross[k], chain.nodes[k].theta), Event::CrossArrival(k));
                counters.cross_arrivals += 1;
                enqueue(k, Packet::Cross, &mut buffers, &mut queue, &mut rng.service);
            }
            Event::Completion(k) => {
                let pkt = buffers[k].pop_front().expect("completion at an empty node");
                if !buffers[k].is_empty() {
                    queue.schedule_in(exp(&mut rng.service[k], chain.nodes[k].mu), Event::Completion(k));
                }
                let node = &chain.nodes[k];
                let last = k + 1 == k_nodes;
                match pkt {
                    Packet::Source { generated } => {
                        counters.source_served[k] += 1;
                        if rng.routing.random::<f64>() < node.eps {
                            counters.lost_on_link[k] += 1;
                        } else if last {
                            if rng.visibility.random::<f64>() < chain.p_a {
                                counters.delivered += 1;
                                records.push(DeliveryRecord { generation: generated, delivery: now, flow: 0 });
                            } else {
                                counters.invisible += 1;
                            }
                        } else {
                            enqueue(k + 1, pkt, &mut buffers, &mut queue, &mut rng.service);
                        }
                    }
                    Packet::Cross => {
                        if last || rng.routing.random::<f64>() < node.psi {
                            continue;
                        }
                        if rng.routing.random::<f64>() >= node.eps {
                            enqueue(k + 1, pkt, &mut buffers, &mut queue, &mut rng.service);
                        }
                    }
                }
            }
        }
    }

    let trace = DeliveryTrace { records, horizon };
    if counters.delivered < MIN_DELIVERIES {
        return Err(DesError::HorizonTooShort { flow: 0, deliveries: counters.delivered, partial: vec![trace] });
    }
    let mut stats = accumulate_aoi(&trace)?;
    stats.drops = counters.invisible + counters.lost_on_link.iter().sum::<usize>();
    Ok(TandemRun { stats, trace, counters })
}
