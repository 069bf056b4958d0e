use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::ChainRng;

/// Order in which one sweep visits the `D` coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScheduleKind {
    /// Deterministic-update: `0, 1, …, D−1` every sweep.
    Dugs,
    /// Random-scan: `D` independent uniform coordinate draws per sweep.
    Rsgs,
    /// Random-permutation: a fresh uniform permutation per sweep.
    Rpgs,
}

impl std::str::FromStr for ScheduleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dugs" => Ok(ScheduleKind::Dugs),
            "rsgs" => Ok(ScheduleKind::Rsgs),
            "rpgs" => Ok(ScheduleKind::Rpgs),
            other => Err(format!("unknown schedule {other:?} (dugs|rsgs|rpgs)")),
        }
    }
}

/// A sweep schedule with its own random stream.
#[derive(Debug, Clone)]
pub struct SweepSchedule {
    kind: ScheduleKind,
    rng: ChainRng,
    order: Vec<usize>,
}

impl SweepSchedule {
    pub fn new(kind: ScheduleKind, dim: usize, rng: ChainRng) -> Self {
        SweepSchedule {
            kind,
            rng,
            order: (0..dim).collect(),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// Coordinates to visit during the next sweep.
    pub fn next_sweep(&mut self) -> &[usize] {
        let dim = self.order.len();
        match self.kind {
            ScheduleKind::Dugs => {
                for (k, slot) in self.order.iter_mut().enumerate() {
                    *slot = k;
                }
            }
            ScheduleKind::Rpgs => {
                for (k, slot) in self.order.iter_mut().enumerate() {
                    *slot = k;
                }
                self.order.shuffle(&mut self.rng);
            }
            ScheduleKind::Rsgs => {
                for slot in self.order.iter_mut() {
                    *slot = self.rng.random_range(0..dim);
                }
            }
        }
        &self.order
    }
}
