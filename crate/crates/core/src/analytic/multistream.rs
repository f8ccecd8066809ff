//! Multi-stream M/G/1/1 blocking queue: one server, no waiting room, a
//! packet finishing service is delivered with probability `p`.
//!
//! Formulas are evaluated exactly as derived for this model, including the
//! `(1-p)` factors that make them degenerate as `p -> 1`.

use std::fmt;

use super::{AnalyticError, ServiceSpec};

/// `M` status-update flows sharing one server.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSet {
    /// Per-flow Poisson rates `ξ_i`.
    pub rates: Vec<f64>,
    /// Per-service success probability `p_sj`, strictly inside (0, 1).
    pub p_success: f64,
    pub service: ServiceSpec,
}

impl FlowSet {
    pub fn new(rates: Vec<f64>, p_success: f64, service: ServiceSpec) -> Result<Self, AnalyticError> {
        let flows = Self { rates, p_success, service };
        flows.validate()?;
        Ok(flows)
    }

    pub fn validate(&self) -> Result<(), AnalyticError> {
        if self.rates.is_empty() {
            return Err(AnalyticError::InvalidFlows("at least one flow is required".into()));
        }
        if let Some(r) = self.rates.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(AnalyticError::InvalidFlows(format!("flow rate {r} must be positive")));
        }
        if !(self.p_success > 0.0 && self.p_success < 1.0) {
            return Err(AnalyticError::InvalidFlows(format!(
                "success probability {} must lie strictly inside (0, 1)",
                self.p_success
            )));
        }
        self.service.validate()
    }

    /// `ξ = Σ ξ_i`.
    pub fn total(&self) -> f64 {
        self.rates.iter().sum()
    }

    /// `ρ = ξ/μ`.
    pub fn utilization(&self) -> f64 {
        self.total() / self.service.rate
    }

    pub fn require_stable(&self) -> Result<(), AnalyticError> {
        let rho = self.utilization();
        if rho < 1.0 {
            Ok(())
        } else {
            Err(AnalyticError::Overloaded { rho })
        }
    }

    fn rate(&self, i: usize) -> Result<f64, AnalyticError> {
        self.rates.get(i).copied().ok_or(AnalyticError::FlowIndex { index: i, count: self.rates.len() })
    }

    fn require_exponential(&self) -> Result<(), AnalyticError> {
        if self.service.scv == 1.0 {
            Ok(())
        } else {
            Err(AnalyticError::NotExponential { scv: self.service.scv })
        }
    }
}

/// First and second moments of flow `i`'s inter-delivery time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepartureMoments {
    pub ey: f64,
    pub ey2: f64,
}

/// Exponential-service departure moments:
/// `E[Y] = (ξ(1-p)+μ)/(μ ξ_i p)`,
/// `E[Y²] = (2(ξp+μ)² - 2μ ξ_i p²) / ((1-p)² (μ ξ_i)²)`.
pub fn mm11_departure_moments(flows: &FlowSet, i: usize) -> Result<DepartureMoments, AnalyticError> {
    flows.require_exponential()?;
    let xi_i = flows.rate(i)?;
    let (xi, mu, p) = (flows.total(), flows.service.rate, flows.p_success);
    let ey = (xi * (1.0 - p) + mu) / (mu * xi_i * p);
    let ey2 = (2.0 * (xi * p + mu).powi(2) - 2.0 * mu * xi_i * p * p) / ((1.0 - p).powi(2) * (mu * xi_i).powi(2));
    Ok(DepartureMoments { ey, ey2 })
}

/// `E[T] + E[Y²]/(2E[Y])` with `E[T] = 1/μ`.
pub fn mm11_average_aoi(flows: &FlowSet, i: usize) -> Result<f64, AnalyticError> {
    let m = mm11_departure_moments(flows, i)?;
    Ok(flows.service.first_moment() + m.ey2 / (2.0 * m.ey))
}

fn pole_check(s: f64, denom: f64, scale: f64) -> Result<(), AnalyticError> {
    if denom.abs() <= 1e-12 * scale {
        Err(AnalyticError::PoleAt(s))
    } else {
        Ok(())
    }
}

/// Inter-delivery MGF for exponential service:
/// `μ ξ_i (1-p) / (s² p - (ξp+μ) s + μ ξ_i)`.
pub fn mgf_departure_mm11(s: f64, flows: &FlowSet, i: usize) -> Result<f64, AnalyticError> {
    let xi_i = flows.rate(i)?;
    let (xi, mu, p) = (flows.total(), flows.service.rate, flows.p_success);
    let (a, b, c) = (s * s * p, (xi * p + mu) * s, mu * xi_i);
    let denom = a - b + c;
    pole_check(s, denom, a.abs() + b.abs() + c.abs())?;
    Ok(mu * xi_i * (1.0 - p) / denom)
}

/// Inter-delivery MGF for general service:
/// `p ξ_i M(s) / ((ξ - s p²) - (ξ - ξ_i) M(s) p (1-p))` with `M` the service MGF.
pub fn mgf_departure_mg11(s: f64, flows: &FlowSet, i: usize) -> Result<f64, AnalyticError> {
    let xi_i = flows.rate(i)?;
    let (xi, p) = (flows.total(), flows.p_success);
    let m = flows.service.mgf(s).ok_or(AnalyticError::PoleAt(s))?;
    let (a, b) = (xi - s * p * p, (xi - xi_i) * m * p * (1.0 - p));
    let denom = a - b;
    pole_check(s, denom, a.abs() + b.abs())?;
    Ok(p * xi_i * m / denom)
}

/// `(ξE[T]+1)/(ξ_i (1-p) p) + ξ E[T²] p² / (2(ξ p E[T] + 1))`.
pub fn mg11_average_aoi(flows: &FlowSet, i: usize) -> Result<f64, AnalyticError> {
    let xi_i = flows.rate(i)?;
    let (xi, p) = (flows.total(), flows.p_success);
    let (et, et2) = (flows.service.first_moment(), flows.service.second_moment());
    Ok((xi * et + 1.0) / (xi_i * (1.0 - p) * p) + xi * et2 * p * p / (2.0 * (xi * p * et + 1.0)))
}

/// `((ξp + ξ_i) E[T] + 1) / (ξ_i p)`.
pub fn mg11_peak_aoi(flows: &FlowSet, i: usize) -> Result<f64, AnalyticError> {
    let xi_i = flows.rate(i)?;
    let (xi, p) = (flows.total(), flows.p_success);
    Ok(((xi * p + xi_i) * flows.service.first_moment() + 1.0) / (xi_i * p))
}

/// Finite-difference derivatives of [`mgf_departure_mm11`] at `s = 0` set
/// against the closed-form departure moments.
///
/// For a proper MGF `φ(0) = 1`, `φ'(0) = E[Y]` and `φ''(0) = E[Y²]`; the
/// report records how far the printed expressions are from that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub flow: usize,
    pub mgf_at_zero: f64,
    pub numeric_first: f64,
    pub closed_form_ey: f64,
    pub numeric_second: f64,
    pub closed_form_ey2: f64,
}

pub const FIRST_DERIVATIVE_STEP: f64 = 1e-6;
pub const SECOND_DERIVATIVE_STEP: f64 = 1e-4;

pub fn mgf_derivative_check(flows: &FlowSet, i: usize) -> Result<DerivativeCheck, AnalyticError> {
    let phi = |s: f64| mgf_departure_mm11(s, flows, i);
    let h1 = FIRST_DERIVATIVE_STEP;
    let h2 = SECOND_DERIVATIVE_STEP;
    let at_zero = phi(0.0)?;
    let numeric_first = (phi(h1)? - phi(-h1)?) / (2.0 * h1);
    let numeric_second = (phi(h2)? - 2.0 * at_zero + phi(-h2)?) / (h2 * h2);
    let m = mm11_departure_moments(flows, i)?;
    Ok(DerivativeCheck {
        flow: i,
        mgf_at_zero: at_zero,
        numeric_first,
        closed_form_ey: m.ey,
        numeric_second,
        closed_form_ey2: m.ey2,
    })
}

impl fmt::Display for DerivativeCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = |a: f64, b: f64| (a - b) / b;
        writeln!(f, "departure MGF cross-check (flow {})", self.flow)?;
        writeln!(f, "  phi(0)                 = {} (a proper MGF gives 1)", self.mgf_at_zero)?;
        writeln!(
            f,
            "  phi'(0) numeric        = {}   closed-form E[Y]   = {}   rel diff = {}",
            self.numeric_first,
            self.closed_form_ey,
            rel(self.numeric_first, self.closed_form_ey)
        )?;
        write!(
            f,
            "  phi''(0) numeric       = {}   closed-form E[Y^2] = {}   rel diff = {}",
            self.numeric_second,
            self.closed_form_ey2,
            rel(self.numeric_second, self.closed_form_ey2)
        )
    }
}
