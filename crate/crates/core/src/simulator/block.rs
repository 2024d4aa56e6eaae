use super::sampling::BlockJumpSampler;
use super::{run_replicas, ReplicaRng, SimConfig, Trajectory};
use crate::error::Result;
use rand::Rng;
use rand_distr::Exp1;

pub(crate) fn block_path(
    sampler: &BlockJumpSampler,
    n: usize,
    with_times: bool,
    rng: &mut ReplicaRng,
) -> Result<Trajectory> {
    let mut states = vec![n];
    let mut times = with_times.then(Vec::new);
    let mut j = n;
    while j > 1 {
        if let Some(t) = times.as_mut() {
            let e: f64 = rng.sample(Exp1);
            t.push(e / sampler.total_rate(j)?);
        }
        j = sampler.destination(j, rng)?;
        states.push(j);
    }
    Ok(Trajectory {
        states,
        holding_times: times,
        overshoot: false,
    })
}

/// `τ_j^n` without storing the path.
pub(crate) fn depth_only(sampler: &BlockJumpSampler, n: usize, j: usize, rng: &mut ReplicaRng) -> Result<f64> {
    let mut t = 0.0;
    let mut b = n;
    while b > j {
        let e: f64 = rng.sample(Exp1);
        t += e / sampler.total_rate(b)?;
        b = sampler.destination(b, rng)?;
    }
    Ok(t)
}

/// Block-counting chain `X^n` from `n = cfg.size`, one trajectory per replica.
pub fn sim_block_counting(cfg: &SimConfig) -> Result<Vec<Trajectory>> {
    cfg.validate(2)?;
    let sampler = BlockJumpSampler::new(&cfg.measure, cfg.size)?;
    run_replicas(cfg.seed, cfg.replicas, |rng| block_path(&sampler, cfg.size, cfg.holding_times, rng))
}

/// Samples of `τ_j^n` with `n = cfg.size`.
pub fn sim_depth(cfg: &SimConfig, j: usize) -> Result<Vec<f64>> {
    cfg.validate(2)?;
    if j < 1 || j > cfg.size {
        return Err(crate::Error::Simulation(format!(
            "depth level must satisfy 1 <= j <= n, got j = {j}, n = {}",
            cfg.size
        )));
    }
    let sampler = BlockJumpSampler::new(&cfg.measure, cfg.size)?;
    run_replicas(cfg.seed, cfg.replicas, |rng| depth_only(&sampler, cfg.size, j, rng))
}
