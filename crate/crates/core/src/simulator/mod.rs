//! Monte Carlo engines.
//!
//! Every replica owns a ChaCha8 stream derived from `(seed, replica)`, so results
//! do not depend on how replicas are spread over threads. Replica outputs are
//! collected in replica order.

mod block;
mod branching;
mod fixation;
mod lookdown;
mod partition;
mod sampling;

pub use block::{sim_block_counting, sim_depth};
pub use branching::{sim_bs_branching, sim_bs_depth, BranchingSample, BS_EXACT_LIMIT, BS_HARD_CAP};
pub use fixation::sim_fixation_line;
pub use lookdown::{sim_lookdown, LookdownEvent, LookdownRun, LookdownState};
pub use partition::{sim_partition_coalescent, PartitionRun};
pub use sampling::{positive_stable_log, BlockJumpSampler, FixationJumpSampler, Landing, ALIAS_CAP};

use crate::error::{Error, Result};
use crate::rates::LambdaMeasure;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Generator used by every replica.
pub type ReplicaRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_REPLICAS: usize = 100_000;

/// Parameters shared by all simulation entry points.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub measure: LambdaMeasure,
    pub seed: u64,
    pub replicas: usize,
    /// `n` for the block-counting chain, `N` for partitions and lookdown, the level
    /// cap for the fixation line.
    pub size: usize,
    /// Starting level of the fixation line.
    pub start: usize,
    /// Time horizon for the lookdown model; `None` runs until level 1 fixes.
    pub horizon: Option<f64>,
    /// Record holding times; off gives the embedded chain only.
    pub holding_times: bool,
}

impl SimConfig {
    pub fn new(measure: LambdaMeasure, size: usize) -> Self {
        Self {
            measure,
            seed: DEFAULT_SEED,
            replicas: DEFAULT_REPLICAS,
            size,
            start: 1,
            horizon: None,
            holding_times: true,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn replicas(mut self, replicas: usize) -> Self {
        self.replicas = replicas;
        self
    }

    pub fn start(mut self, start: usize) -> Self {
        self.start = start;
        self
    }

    pub fn horizon(mut self, horizon: f64) -> Self {
        self.horizon = Some(horizon);
        self
    }

    pub fn embedded_only(mut self) -> Self {
        self.holding_times = false;
        self
    }

    pub(crate) fn validate(&self, min_size: usize) -> Result<()> {
        if self.replicas < 1 {
            return Err(Error::Simulation("replicas must be at least 1".into()));
        }
        if self.size < min_size {
            return Err(Error::Simulation(format!(
                "size must be at least {min_size}, got {}",
                self.size
            )));
        }
        if let Some(t) = self.horizon {
            if !(t > 0.0) {
                return Err(Error::Simulation(format!("horizon must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// Path of a monotone jump chain.
///
/// `holding_times[k]` is the time spent in `states[k]`; the final state has none.
/// When `overshoot` is set the final state is a lower bound (the chain left the
/// window and its exact landing point was not resolved).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub holding_times: Option<Vec<f64>>,
    pub overshoot: bool,
}

impl Trajectory {
    pub fn start(&self) -> usize {
        self.states[0]
    }

    pub fn end(&self) -> usize {
        *self.states.last().expect("trajectory is never empty")
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    /// Whether the chain visited `state`.
    pub fn visits(&self, state: usize) -> bool {
        let increasing = self.states.len() < 2 || self.states[1] > self.states[0];
        if increasing {
            self.states.binary_search(&state).is_ok()
        } else {
            self.states.binary_search_by(|s| state.cmp(s)).is_ok()
        }
    }

    /// Time of arrival in the final state.
    pub fn absorption_time(&self) -> Option<f64> {
        self.holding_times.as_ref().map(|h| h.iter().sum())
    }

    /// Time of the first visit to a state satisfying `pred`.
    pub fn first_time(&self, pred: impl Fn(usize) -> bool) -> Option<f64> {
        let h = self.holding_times.as_ref()?;
        let k = self.states.iter().position(|&s| pred(s))?;
        Some(h[..k].iter().sum())
    }

    /// `(from, to)` of the final jump.
    pub fn last_jump(&self) -> Option<(usize, usize)> {
        let n = self.states.len();
        (n >= 2).then(|| (self.states[n - 2], self.states[n - 1]))
    }
}

/// Stream of replica `r` under `seed`.
pub fn replica_rng(seed: u64, replica: usize) -> ReplicaRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica as u64);
    rng
}

/// Runs `f` once per replica on the current rayon pool; output is in replica order.
pub fn run_replicas<T, F>(seed: u64, replicas: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ReplicaRng) -> Result<T> + Sync,
{
    (0..replicas)
        .into_par_iter()
        .map(|r| f(&mut replica_rng(seed, r)))
        .collect()
}
