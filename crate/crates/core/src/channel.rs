//! Uplink SINR under path loss `r^-α` and unit-mean Rayleigh power fading.
//!
//! Transmit power is unity; `noise` is the noise power normalized by it.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use thiserror::Error;

use crate::seed::{self, Stream};
use crate::spatial::{AssociationMap, PointPattern};

/// Monte Carlo samples per independently seeded chunk.
const CHUNK: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid channel config: {0}")]
    InvalidConfig(String),
    #[error("invalid link sample: {0}")]
    InvalidLink(String),
    #[error("SINR undefined: no noise and no interference")]
    DegenerateChannel,
    #[error("source node {0} has no serving UAV")]
    UnassociatedSource(usize),
    #[error("need at least one Monte Carlo sample")]
    NoSamples,
    #[error("activity probability {0} outside [0, 1]")]
    InvalidActivity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    /// Path-loss exponent, > 2.
    pub alpha: f64,
    /// Normalized noise power `W`.
    pub noise: f64,
    /// Linear SINR threshold.
    pub theta: f64,
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            return Err(ChannelError::InvalidConfig(format!("alpha = {} must exceed 2", self.alpha)));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(ChannelError::InvalidConfig(format!("noise = {} must be >= 0", self.noise)));
        }
        if !(self.theta > 0.0) {
            return Err(ChannelError::InvalidConfig(format!("theta = {} must be > 0", self.theta)));
        }
        Ok(())
    }

    #[inline]
    pub fn path_gain(&self, r: f64) -> f64 {
        r.powf(-self.alpha)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    /// Meters.
    pub distance: f64,
    /// Power fading draw `h`.
    pub fading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    pub serving: Link,
    pub interferers: Vec<Link>,
}

impl LinkSample {
    pub fn validate(&self) -> Result<(), ChannelError> {
        for (i, l) in std::iter::once(&self.serving).chain(&self.interferers).enumerate() {
            if !(l.distance > 0.0) {
                return Err(ChannelError::InvalidLink(format!("link {i}: distance {} must be > 0", l.distance)));
            }
            if !(l.fading >= 0.0) {
                return Err(ChannelError::InvalidLink(format!("link {i}: fading {} must be >= 0", l.fading)));
            }
        }
        Ok(())
    }
}

/// `h0 r0^-α / (Σ h_i r_i^-α + W)`.
pub fn sinr(link: &LinkSample, cfg: &ChannelConfig) -> Result<f64, ChannelError> {
    link.validate()?;
    let signal = link.serving.fading * cfg.path_gain(link.serving.distance);
    let interference: f64 = link.interferers.iter().map(|l| l.fading * cfg.path_gain(l.distance)).sum();
    let denom = interference + cfg.noise;
    if denom <= 0.0 {
        return Err(ChannelError::DegenerateChannel);
    }
    Ok(signal / denom)
}

/// `P{SINR > θ}` with no interferers: `exp(-θ W r0^α)`.
pub fn noise_only_success_probability(r0: f64, cfg: &ChannelConfig) -> f64 {
    (-cfg.theta * cfg.noise * r0.powf(cfg.alpha)).exp()
}

/// Which other ground nodes transmit in a given slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activity {
    /// Every other node is active independently with this probability.
    Fixed(f64),
    /// Each node outside the source's cell is active with its own cell's
    /// scheduling probability `1/N_j`; nodes sharing the source's cell are
    /// silent because the source holds that cell's slot.
    Scheduled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessEstimate {
    pub p_hat: f64,
    /// 95% normal-approximation half-width.
    pub ci_halfwidth: f64,
    pub samples: usize,
}

impl SuccessEstimate {
    fn from_counts(successes: u64, samples: usize) -> Self {
        let n = samples as f64;
        let p_hat = successes as f64 / n;
        Self { p_hat, ci_halfwidth: 1.96 * (p_hat * (1.0 - p_hat) / n).sqrt(), samples }
    }
}

/// Monte Carlo estimate of the conditional success probability of `source`
/// given the realized ground and UAV patterns.
///
/// Fading is redrawn for every sample. The estimate is independent of the
/// rayon pool size because each fixed-size chunk has its own seed.
#[allow(clippy::too_many_arguments)]
pub fn estimate_success_probability(
    ground: &PointPattern,
    uavs: &PointPattern,
    assoc: &AssociationMap,
    source: usize,
    cfg: &ChannelConfig,
    activity: Activity,
    n_samples: usize,
    seed: u64,
) -> Result<SuccessEstimate, ChannelError> {
    cfg.validate()?;
    if n_samples == 0 {
        return Err(ChannelError::NoSamples);
    }
    if let Activity::Fixed(p) = activity {
        if !(0.0..=1.0).contains(&p) {
            return Err(ChannelError::InvalidActivity(p));
        }
    }
    let cell = assoc.uav_of(source).ok_or(ChannelError::UnassociatedSource(source))?;
    let receiver = *uavs.points.get(cell).ok_or(ChannelError::UnassociatedSource(source))?;
    let r0 = ground.points[source].dist(receiver);
    if !(r0 > 0.0) {
        return Err(ChannelError::InvalidLink("source coincides with its UAV".into()));
    }
    let signal_gain = cfg.path_gain(r0);

    // (activity probability, path gain to the serving UAV)
    let interferers: Vec<(f64, f64)> = ground
        .points
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != source)
        .filter_map(|(i, &p)| {
            let prob = match activity {
                Activity::Fixed(q) => q,
                Activity::Scheduled => {
                    let j = assoc.assignment[i];
                    if j == cell {
                        0.0
                    } else {
                        1.0 / assoc.load[j] as f64
                    }
                }
            };
            let d = p.dist(receiver);
            (prob > 0.0 && d > 0.0).then(|| (prob, cfg.path_gain(d)))
        })
        .collect();

    let chunks = n_samples.div_ceil(CHUNK);
    let successes: u64 = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed::rng(seed, Stream::Channel, k as u64);
            let len = CHUNK.min(n_samples - k * CHUNK);
            let mut hits = 0u64;
            for _ in 0..len {
                let h0: f64 = rng.sample(Exp1);
                let mut interference = 0.0;
                for &(prob, gain) in &interferers {
                    if prob >= 1.0 || rng.random::<f64>() < prob {
                        let h: f64 = rng.sample(Exp1);
                        interference += h * gain;
                    }
                }
                if h0 * signal_gain > cfg.theta * (interference + cfg.noise) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    Ok(SuccessEstimate::from_counts(successes, n_samples))
}
