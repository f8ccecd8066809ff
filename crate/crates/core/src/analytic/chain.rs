//! LEO relay chain modeled as `K` FCFS M/M/1 queues in series.
//!
//! Nodes and hops are numbered from 1, matching the product and sum limits
//! of the chain formulas: node `k` forwards over link `k` to node `k+1`
//! (link `K` is the final downlink).

use super::AnalyticError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteNode {
    /// Service rate `μ_j`.
    pub mu: f64,
    /// Loss probability of the outgoing link `ε_j`.
    pub eps: f64,
    /// Exogenous cross-traffic rate `θ_j`.
    pub theta: f64,
    /// Fraction of cross traffic leaving the chain after this node, `ψ_j`.
    pub psi: f64,
    /// Exponent `n_j` applied to `α_j` and `μ_j` in the chain AoI terms.
    pub servers: u32,
}

impl SatelliteNode {
    pub fn new(mu: f64, eps: f64, theta: f64, psi: f64) -> Self {
        Self { mu, eps, theta, psi, servers: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteChain {
    pub nodes: Vec<SatelliteNode>,
    /// Visibility probability, applied once end to end.
    pub p_a: f64,
}

impl SatelliteChain {
    pub fn new(nodes: Vec<SatelliteNode>, p_a: f64) -> Result<Self, AnalyticError> {
        let chain = Self { nodes, p_a };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<(), AnalyticError> {
        let bad = |msg: String| Err(AnalyticError::InvalidChain(msg));
        if self.nodes.is_empty() {
            return bad("chain needs at least one node".into());
        }
        if !(0.0..=1.0).contains(&self.p_a) {
            return bad(format!("p_a = {} outside [0, 1]", self.p_a));
        }
        for (j, n) in self.nodes.iter().enumerate() {
            let k = j + 1;
            if !(n.mu > 0.0 && n.mu.is_finite()) {
                return bad(format!("node {k}: mu = {} must be positive", n.mu));
            }
            if !(0.0..1.0).contains(&n.eps) {
                return bad(format!("node {k}: eps = {} outside [0, 1)", n.eps));
            }
            if !(n.theta >= 0.0 && n.theta.is_finite()) {
                return bad(format!("node {k}: theta = {} must be >= 0", n.theta));
            }
            if !(0.0..=1.0).contains(&n.psi) {
                return bad(format!("node {k}: psi = {} outside [0, 1]", n.psi));
            }
            if n.servers == 0 {
                return bad(format!("node {k}: servers must be >= 1"));
            }
        }
        Ok(())
    }

    /// `K`.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn node(&self, k: usize) -> Result<&SatelliteNode, AnalyticError> {
        if k == 0 || k > self.nodes.len() {
            return Err(AnalyticError::IndexOutOfRange { index: k, len: self.nodes.len() });
        }
        Ok(&self.nodes[k - 1])
    }
}

/// Cross traffic reaching node `k`:
/// `θ̄_k = Σ_{j≤k} θ_j Π_{i=j}^{k-1} (1-ψ_i)(1-ε_i)`.
pub fn cross_traffic_rate(chain: &SatelliteChain, k: usize) -> Result<f64, AnalyticError> {
    chain.node(k)?;
    let mut total = 0.0;
    for j in 1..=k {
        let survive: f64 = (j..k).map(|i| {
            let n = &chain.nodes[i - 1];
            (1.0 - n.psi) * (1.0 - n.eps)
        }).product();
        total += chain.nodes[j - 1].theta * survive;
    }
    Ok(total)
}

/// `p_r(j) = Π_{i≤j} (1-ε_i) · p_a`.
pub fn chain_success_probability(chain: &SatelliteChain, j: usize) -> Result<f64, AnalyticError> {
    chain.node(j)?;
    Ok(chain.nodes[..j].iter().map(|n| 1.0 - n.eps).product::<f64>() * chain.p_a)
}

/// `ξ_j = p_r(j) ξ + θ̄_j`.
pub fn node_arrival_rate(chain: &SatelliteChain, j: usize, xi: f64) -> Result<f64, AnalyticError> {
    Ok(chain_success_probability(chain, j)? * xi + cross_traffic_rate(chain, j)?)
}

/// `α_j = μ_j - ξ_j`. A non-positive value comes back inside
/// [`AnalyticError::Unstable`].
pub fn node_response_rate(chain: &SatelliteChain, j: usize, xi: f64) -> Result<f64, AnalyticError> {
    let alpha = chain.node(j)?.mu - node_arrival_rate(chain, j, xi)?;
    if alpha > 0.0 {
        Ok(alpha)
    } else {
        Err(AnalyticError::Unstable { node: j, alpha })
    }
}

struct ChainTerms {
    p_end: f64,
    /// `(μ_j^{n_j}, α_j^{n_j})` per node.
    powered: Vec<(f64, f64)>,
}

fn chain_terms(chain: &SatelliteChain, xi: f64) -> Result<ChainTerms, AnalyticError> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(AnalyticError::InvalidRate(xi));
    }
    let p_end = chain_success_probability(chain, chain.len())?;
    if p_end <= 0.0 {
        return Err(AnalyticError::ZeroSuccessProbability);
    }
    let powered = (1..=chain.len())
        .map(|j| {
            let alpha = node_response_rate(chain, j, xi)?;
            let n = chain.nodes[j - 1].servers as i32;
            Ok((chain.nodes[j - 1].mu.powi(n), alpha.powi(n)))
        })
        .collect::<Result<_, AnalyticError>>()?;
    Ok(ChainTerms { p_end, powered })
}

/// Independence approximation of the chain AoI:
/// `Σ_j 1/(p_r(K) α_j^{n_j}) + 1/(ξ p_r(K)) + (1-p_r(K))²/(ξ p_r(K)²)`.
pub fn chain_aoi_approx(chain: &SatelliteChain, xi: f64) -> Result<f64, AnalyticError> {
    let t = chain_terms(chain, xi)?;
    let p = t.p_end;
    let queueing: f64 = t.powered.iter().map(|&(_, a)| 1.0 / (p * a)).sum();
    Ok(queueing + 1.0 / (xi * p) + (1.0 - p).powi(2) / (xi * p * p))
}

/// Upper bound on the chain AoI:
/// `ξ ( Σ (1/ξ)(μ^n+α^n)/(μ^n α^n) + Σ (1-p_r(K))/(p_r(K) α^n ξ)
///      + 1/(ξ² p_r(K)) + ((1-p_r(K))/(ξ p_r(K)))² )`.
pub fn chain_aoi_upper(chain: &SatelliteChain, xi: f64) -> Result<f64, AnalyticError> {
    let t = chain_terms(chain, xi)?;
    let p = t.p_end;
    let sojourn: f64 = t.powered.iter().map(|&(m, a)| (1.0 / xi) * (m + a) / (m * a)).sum();
    let loss: f64 = t.powered.iter().map(|&(_, a)| (1.0 - p) / (p * a * xi)).sum();
    Ok(xi * (sojourn + loss + 1.0 / (xi * xi * p) + ((1.0 - p) / (xi * p)).powi(2)))
}
