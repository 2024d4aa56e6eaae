use super::sampling::BlockJumpSampler;
use super::{run_replicas, ReplicaRng, SimConfig, Trajectory};
use crate::error::Result;
use rand::seq::index;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

/// One run of the `N`-coalescent on labelled blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionRun {
    /// `τ_1^n` at index `n` for `1 <= n <= N`; index 0 is unused.
    pub depths: Vec<f64>,
    /// Records in `{2..N}`, increasing.
    pub records: Vec<usize>,
    /// Block count of the whole `N`-coalescent.
    pub blocks: Trajectory,
}

impl PartitionRun {
    pub fn depth(&self, n: usize) -> f64 {
        self.depths[n]
    }

    pub fn is_record(&self, n: usize) -> bool {
        self.records.binary_search(&n).is_ok()
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn partition_run(sampler: &BlockJumpSampler, big_n: usize, rng: &mut ReplicaRng) -> Result<PartitionRun> {
    // element e stands for individual e + 1
    let mut parent: Vec<usize> = (0..big_n).collect();
    let mut blocks: Vec<usize> = (0..big_n).collect();
    let mut depths = vec![0.0; big_n + 1];
    // individuals 1..=watermark share a block
    let mut watermark = 1;
    let mut t = 0.0;
    let mut states = vec![big_n];
    let mut holding = Vec::new();
    while blocks.len() > 1 {
        let b = blocks.len();
        let e: f64 = rng.sample(Exp1);
        let dt = e / sampler.total_rate(b)?;
        t += dt;
        holding.push(dt);
        let k = b - sampler.destination(b, rng)? + 1;
        let mut chosen = index::sample(rng, b, k).into_vec();
        chosen.sort_unstable();
        let root = blocks[chosen[0]];
        for &pos in &chosen[1..] {
            parent[blocks[pos]] = root;
        }
        for &pos in chosen[1..].iter().rev() {
            blocks.swap_remove(pos);
        }
        states.push(blocks.len());
        let top = find(&mut parent, 0);
        while watermark < big_n && find(&mut parent, watermark) == top {
            watermark += 1;
            depths[watermark] = t;
        }
    }
    let records = (2..=big_n).filter(|&n| depths[n] > depths[n - 1]).collect();
    Ok(PartitionRun {
        depths,
        records,
        blocks: Trajectory {
            states,
            holding_times: Some(holding),
            overshoot: false,
        },
    })
}

/// Natural coupling of all `n`-coalescents, `n <= N = cfg.size`.
pub fn sim_partition_coalescent(cfg: &SimConfig) -> Result<Vec<PartitionRun>> {
    cfg.validate(2)?;
    let sampler = BlockJumpSampler::new(&cfg.measure, cfg.size)?;
    run_replicas(cfg.seed, cfg.replicas, |rng| partition_run(&sampler, cfg.size, rng))
}
