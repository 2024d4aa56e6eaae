use super::sampling::{FixationJumpSampler, Landing};
use super::{run_replicas, ReplicaRng, SimConfig, Trajectory};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::Exp1;

/// Fixation line from `start` until it reaches `sampler.limit()` or beyond.
pub(crate) fn fixation_path(
    sampler: &FixationJumpSampler,
    start: usize,
    with_times: bool,
    rng: &mut ReplicaRng,
) -> Trajectory {
    let limit = sampler.limit();
    let mut states = vec![start];
    let mut times = with_times.then(Vec::new);
    let mut i = start;
    let mut overshoot = false;
    while i < limit {
        if let Some(t) = times.as_mut() {
            let e: f64 = rng.sample(Exp1);
            t.push(e / sampler.rate(i));
        }
        i = match sampler.jump(i, rng) {
            Landing::At(k) => k,
            Landing::Beyond => {
                overshoot = true;
                limit
            }
        };
        states.push(i);
    }
    Trajectory {
        states,
        holding_times: times,
        overshoot,
    }
}

/// Fixation line `L_j` from `j = cfg.start`, stopped at the first level `>= cfg.size`.
pub fn sim_fixation_line(cfg: &SimConfig) -> Result<Vec<Trajectory>> {
    cfg.validate(2)?;
    if cfg.start < 1 || cfg.start > cfg.size {
        return Err(Error::Simulation(format!(
            "start level must satisfy 1 <= j <= cap, got j = {}, cap = {}",
            cfg.start, cfg.size
        )));
    }
    let sampler = FixationJumpSampler::new(&cfg.measure, cfg.size)?;
    run_replicas(cfg.seed, cfg.replicas, |rng| {
        Ok(fixation_path(&sampler, cfg.start, cfg.holding_times, rng))
    })
}
