//! The α = 1 fixation line seen as a branching process.
//!
//! From level `i` the line waits an exponential time of rate `i` and jumps by `D`
//! with `P(D = d) = 1/(d(d+1))`, i.e. each of `i` particles branches at rate 1 into
//! `d + 1` children.

use super::block::depth_only;
use super::sampling::{open_unit, positive_stable_log, BlockJumpSampler};
use super::{run_replicas, ReplicaRng, SimConfig};
use crate::error::{Error, Result};
use crate::rates::LambdaMeasure;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

/// Population at which the exact chain hands over to the stable continuation.
pub const BS_EXACT_LIMIT: f64 = 1e5;

/// Populations above this are reported in log scale only and flagged.
pub const BS_HARD_CAP: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchingSample {
    /// `L_1(t)` when known exactly and below the hard cap.
    pub population: Option<u64>,
    pub log_population: f64,
    /// `e^{-t} log L_1(t)`.
    pub statistic: f64,
    /// The exact chain ran all the way to `t`.
    pub exact: bool,
    /// The population exceeded [`BS_HARD_CAP`].
    pub over_cap: bool,
}

fn branching_run(t: f64, rng: &mut ReplicaRng) -> BranchingSample {
    let mut i = 1.0f64;
    let mut now = 0.0;
    let log_population = loop {
        let e: f64 = rng.sample(Exp1);
        let hold = e / i;
        if now + hold >= t {
            break None;
        }
        now += hold;
        i += (1.0 / open_unit(rng)).floor();
        if i >= BS_EXACT_LIMIT {
            // i particles over the remaining time r: sum of i Sibuya(e^{-r}) laws,
            // close to i^{e^r} S with S positive stable of index e^{-r}
            let r = t - now;
            let beta = (-r).exp();
            break Some(i.ln() / beta + positive_stable_log(beta, rng));
        }
    };
    let (log_population, exact) = match log_population {
        Some(l) => (l, false),
        None => (i.ln(), true),
    };
    let over_cap = log_population > BS_HARD_CAP.ln();
    BranchingSample {
        population: (exact && !over_cap).then_some(i as u64),
        log_population,
        statistic: (-t).exp() * log_population,
        exact,
        over_cap,
    }
}

/// Samples of `L_1(t)` at α = 1.
pub fn sim_bs_branching(t: f64, cfg: &SimConfig) -> Result<Vec<BranchingSample>> {
    require_bs(&cfg.measure)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Simulation(format!("time must be finite and non-negative, got {t}")));
    }
    cfg.validate(0)?;
    run_replicas(cfg.seed, cfg.replicas, |rng| Ok(branching_run(t, rng)))
}

/// Samples of `τ_1^n - log log n` at α = 1.
pub fn sim_bs_depth(n: usize, cfg: &SimConfig) -> Result<Vec<f64>> {
    require_bs(&cfg.measure)?;
    if n < 3 {
        return Err(Error::Simulation(format!("bs depth requires n >= 3, got {n}")));
    }
    cfg.validate(0)?;
    let sampler = BlockJumpSampler::new(&cfg.measure, n)?;
    let shift = (n as f64).ln().ln();
    run_replicas(cfg.seed, cfg.replicas, |rng| Ok(depth_only(&sampler, n, 1, rng)? - shift))
}

fn require_bs(m: &LambdaMeasure) -> Result<()> {
    if m.alpha() == Some(1.0) {
        Ok(())
    } else {
        Err(Error::Simulation(format!("the branching representation needs alpha = 1, got {m:?}")))
    }
}
