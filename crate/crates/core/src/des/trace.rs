//! Sawtooth AoI accounting over a delivery trace.

use std::io::{Read, Write};

use super::DesError;

/// One successfully delivered status packet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeliveryRecord {
    pub generation: f64,
    pub delivery: f64,
    pub flow: usize,
}

impl DeliveryRecord {
    /// System time `T = delivery - generation`.
    pub fn system_time(&self) -> f64 {
        self.delivery - self.generation
    }
}

/// Deliveries ordered by delivery time, plus the simulated horizon.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeliveryTrace {
    pub records: Vec<DeliveryRecord>,
    pub horizon: f64,
}

impl DeliveryTrace {
    pub fn new(records: Vec<DeliveryRecord>, horizon: f64) -> Result<Self, DesError> {
        let trace = Self { records, horizon };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<(), DesError> {
        for (k, r) in self.records.iter().enumerate() {
            if !(r.delivery > r.generation) {
                return Err(DesError::InvalidTrace(format!("record {k}: delivery {} not after generation {}", r.delivery, r.generation)));
            }
        }
        if let Some(k) = self.records.windows(2).position(|w| !(w[1].delivery > w[0].delivery)) {
            return Err(DesError::InvalidTrace(format!("record {}: delivery times not strictly increasing", k + 1)));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `generation_time,delivery_time,flow_id`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DesError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["generation_time", "delivery_time", "flow_id"])?;
        for r in &self.records {
            w.write_record([r.generation.to_string(), r.delivery.to_string(), r.flow.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads records written by [`DeliveryTrace::write_csv`].
    pub fn read_csv<R: Read>(input: R, horizon: f64) -> Result<Self, DesError> {
        let mut rd = csv::Reader::from_reader(input);
        let mut records = Vec::new();
        for row in rd.records() {
            let row = row?;
            let field = |i: usize| -> Result<&str, DesError> {
                row.get(i).ok_or_else(|| DesError::InvalidTrace(format!("row has {} fields", row.len())))
            };
            let num = |s: &str| s.parse::<f64>().map_err(|e| DesError::InvalidTrace(format!("{s:?}: {e}")));
            records.push(DeliveryRecord {
                generation: num(field(0)?)?,
                delivery: num(field(1)?)?,
                flow: field(2)?.parse().map_err(|e| DesError::InvalidTrace(format!("flow id: {e}")))?,
            });
        }
        Self::new(records, horizon)
    }
}

/// Age statistics of one flow, or of several replications once merged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AoIStats {
    pub time_avg_aoi: f64,
    pub mean_peak_aoi: f64,
    pub deliveries: usize,
    pub drops: usize,
    /// 95% half-width across replications; zero for a single run.
    pub ci_halfwidth: f64,
}

/// Integrates the age sawtooth between the first and the last delivery.
///
/// Age drops at a delivery only if that packet is fresher than the freshest
/// one seen so far; peaks are taken just before each such drop.
pub fn accumulate_aoi(trace: &DeliveryTrace) -> Result<AoIStats, DesError> {
    let recs = &trace.records;
    let (first, rest) = recs.split_first().ok_or(DesError::InsufficientDeliveries { have: 0, need: 2 })?;
    let mut freshest = first.generation;
    let mut t = first.delivery;
    let mut area = 0.0;
    let mut peak_sum = 0.0;
    let mut peaks = 0usize;
    for r in rest {
        let (a0, a1) = (t - freshest, r.delivery - freshest);
        area += 0.5 * (a0 + a1) * (r.delivery - t);
        t = r.delivery;
        if r.generation > freshest {
            peak_sum += a1;
            peaks += 1;
            freshest = r.generation;
        }
    }
    if peaks == 0 {
        return Err(DesError::InsufficientDeliveries { have: 1, need: 2 });
    }
    Ok(AoIStats {
        time_avg_aoi: area / (t - first.delivery),
        mean_peak_aoi: peak_sum / peaks as f64,
        deliveries: recs.len(),
        drops: 0,
        ci_halfwidth: 0.0,
    })
}

pub const RENEWAL_MIN_RECORDS: usize = 1000;

/// Relative gap between the sawtooth integral and the renewal moment form
/// `(N/T)(mean(Y²)/2 + mean(Y T))`, where each inter-delivery gap `Y_k` is
/// paired with the system time of the delivery that opened it and `T` is the
/// trace horizon.
pub fn renewal_identity_residual(trace: &DeliveryTrace) -> Result<f64, DesError> {
    if trace.len() < RENEWAL_MIN_RECORDS {
        return Err(DesError::InsufficientDeliveries { have: trace.len(), need: RENEWAL_MIN_RECORDS });
    }
    let integral = accumulate_aoi(trace)?.time_avg_aoi;

    let mut fresh = trace.records.iter().scan(f64::NEG_INFINITY, |best, r| {
        let keep = r.generation > *best;
        if keep {
            *best = r.generation;
        }
        Some(keep.then_some(r))
    }).flatten();
    let mut prev = fresh.next().expect("non-empty trace");
    let (mut n, mut sum_y2, mut sum_yt) = (0usize, 0.0, 0.0);
    for r in fresh {
        let y = r.delivery - prev.delivery;
        sum_y2 += y * y;
        sum_yt += y * prev.system_time();
        n += 1;
        prev = r;
    }
    let nf = n as f64;
    let moment = nf / trace.horizon * (sum_y2 / nf / 2.0 + sum_yt / nf);
    Ok((moment - integral).abs() / integral)
}
