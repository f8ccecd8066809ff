use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma};

use super::AnalyticError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServiceDist {
    Exponential,
    /// Shape `1/c²`, scale `c²/μ`; the mean stays `1/μ` for every `c²`.
    Gamma,
}

/// Service-time law of a queue, parameterized by rate and squared
/// coefficient of variation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceSpec {
    pub dist: ServiceDist,
    /// `μ`, services per unit time.
    pub rate: f64,
    /// `c²`; exactly 1 for the exponential law.
    pub scv: f64,
}

impl ServiceSpec {
    pub fn exponential(rate: f64) -> Result<Self, AnalyticError> {
        let s = Self { dist: ServiceDist::Exponential, rate, scv: 1.0 };
        s.validate()?;
        Ok(s)
    }

    pub fn gamma(rate: f64, scv: f64) -> Result<Self, AnalyticError> {
        let s = Self { dist: ServiceDist::Gamma, rate, scv };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), AnalyticError> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(AnalyticError::InvalidService(format!("rate = {} must be positive", self.rate)));
        }
        if !(self.scv > 0.0 && self.scv.is_finite()) {
            return Err(AnalyticError::InvalidService(format!("scv = {} must be positive", self.scv)));
        }
        if self.dist == ServiceDist::Exponential && self.scv != 1.0 {
            return Err(AnalyticError::InvalidService(format!("exponential service has scv 1, got {}", self.scv)));
        }
        Ok(())
    }

    /// `E[T] = 1/μ`.
    pub fn first_moment(&self) -> f64 {
        1.0 / self.rate
    }

    /// `E[T²] = (1 + c²)/μ²`.
    pub fn second_moment(&self) -> f64 {
        (1.0 + self.scv) / (self.rate * self.rate)
    }

    pub fn variance(&self) -> f64 {
        self.scv / (self.rate * self.rate)
    }

    /// `E[e^{sT}]`, defined for `s < μ/c²`.
    pub fn mgf(&self, s: f64) -> Option<f64> {
        let scale = self.scv / self.rate;
        (s * scale < 1.0).then(|| (1.0 - s * scale).powf(-1.0 / self.scv))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.dist {
            ServiceDist::Exponential => {
                let e: f64 = rng.sample(Exp1);
                e / self.rate
            }
            ServiceDist::Gamma => Gamma::new(1.0 / self.scv, self.scv / self.rate)
                .expect("validated gamma parameters")
                .sample(rng),
        }
    }
}
