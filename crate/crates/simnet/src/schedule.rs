//! Delay models. Every delay lies in (0, 1] simulated units; the fifo model
//! additionally never lets a later send on the same ordered link deliver
//! before an earlier one.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleModel {
    /// Every message takes exactly one unit.
    UnitDelay,
    /// Uniform delays in (0, 1]; per-link reordering allowed.
    UniformRandom { seed: u64 },
    /// Extreme seeded delays (near-zero or the full unit) clamped to keep
    /// per-link FIFO order, maximizing reordering across links.
    AdversarialFifo { seed: u64 },
}

impl ScheduleModel {
    pub fn sampler(&self) -> Sampler {
        let rng = match self {
            ScheduleModel::UnitDelay => None,
            ScheduleModel::UniformRandom { seed } | ScheduleModel::AdversarialFifo { seed } => {
                Some(ChaCha8Rng::seed_from_u64(*seed))
            }
        };
        Sampler { model: *self, rng, last_on_link: BTreeMap::new() }
    }
}

pub struct Sampler {
    model: ScheduleModel,
    rng: Option<ChaCha8Rng>,
    last_on_link: BTreeMap<(NodeId, NodeId), f64>,
}

impl Sampler {
    /// Delivery time for a message sent now on the ordered link (from, to).
    pub fn delay(&mut self, now: f64, from: NodeId, to: NodeId) -> f64 {
        match self.model {
            ScheduleModel::UnitDelay => now + 1.0,
            ScheduleModel::UniformRandom { .. } => {
                let r: f64 = self.rng.as_mut().unwrap().gen();
                now + (1.0 - r) // (0, 1]
            }
            ScheduleModel::AdversarialFifo { .. } => {
                let rng = self.rng.as_mut().unwrap();
                let d = if rng.gen_bool(0.5) { 0.01 } else { 1.0 };
                let t = now + d;
                let key = (from, to);
                let clamped = match self.last_on_link.get(&key) {
                    Some(&last) if last > t => last,
                    _ => t,
                };
                self.last_on_link.insert(key, clamped);
                clamped
            }
        }
    }
}
