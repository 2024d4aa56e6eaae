use super::sampling::BlockJumpSampler;
use super::{run_replicas, ReplicaRng, SimConfig, Trajectory};
use crate::error::Result;
use rand::seq::index;
use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

/// Lowest `N` levels of the lookdown population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookdownState {
    pub levels: usize,
    /// `ancestors[i - 1]` is the time-0 level of the individual now at level `i`.
    pub ancestors: Vec<usize>,
    pub time: f64,
}

impl LookdownState {
    pub fn new(levels: usize) -> Self {
        Self {
            levels,
            ancestors: (1..=levels).collect(),
            time: 0.0,
        }
    }

    /// Reproduction event among the (sorted, 1-based) levels `participants`.
    ///
    /// Levels in the set other than the lowest receive offspring of the lowest;
    /// everybody else keeps their order and moves up, and whoever is pushed past
    /// the top level leaves the window.
    pub fn apply(&mut self, participants: &[usize]) {
        let parent = self.ancestors[participants[0] - 1];
        let old = std::mem::take(&mut self.ancestors);
        let mut queue = old.iter();
        let mut next_offspring = participants[1..].iter().peekable();
        self.ancestors = (1..=self.levels)
            .map(|level| {
                if next_offspring.peek() == Some(&&level) {
                    next_offspring.next();
                    parent
                } else {
                    *queue.next().expect("at most N old individuals are needed")
                }
            })
            .collect();
    }

    /// `L_j` for `j = 1..N-1`; `None` once all `N` levels descend from levels `<= j`.
    pub fn fixation_lines(&self) -> Vec<Option<usize>> {
        let prefix_max: Vec<usize> = self
            .ancestors
            .iter()
            .scan(0, |m, &a| {
                *m = a.max(*m);
                Some(*m)
            })
            .collect();
        // L_j = min{i : A_i >= j + 1} - 1 = number of leading levels with prefix max <= j
        (1..self.levels)
            .map(|j| {
                let l = prefix_max.partition_point(|&m| m <= j);
                (l < self.levels).then_some(l)
            })
            .collect()
    }

    /// Whether, for every prefix `1..n`, the number of distinct ancestors equals
    /// the largest ancestor label, and the labels are sane.
    ///
    /// That identity makes `#ancestors(1..n) > j` and `L_j < n` the same event for
    /// all `j` and `n`.
    pub fn coupling_holds(&self) -> bool {
        let mut seen = vec![false; self.levels + 1];
        let mut distinct = 0;
        let mut max = 0;
        for (idx, &a) in self.ancestors.iter().enumerate() {
            if a == 0 || a > idx + 1 {
                return false;
            }
            if !seen[a] {
                seen[a] = true;
                distinct += 1;
            }
            max = max.max(a);
            if distinct != max {
                return false;
            }
        }
        self.ancestors[0] == 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookdownEvent {
    pub time: f64,
    /// Participating levels, increasing, 1-based.
    pub levels: Vec<usize>,
}

/// One lookdown run restricted to the lowest `N` levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookdownRun {
    pub events: Vec<LookdownEvent>,
    /// `L_j` for `j = 1..N-1` at index `j - 1`, stopped on reaching level `N`.
    pub lines: Vec<Trajectory>,
    /// The coupling identity held after every event.
    pub coupling_holds: bool,
    pub state: LookdownState,
}

impl LookdownRun {
    /// `α_j^n` read from the run, if reached.
    pub fn hitting_time(&self, j: usize, n: usize) -> Option<f64> {
        self.lines[j - 1].first_time(|s| s >= n)
    }
}

fn lookdown_run(
    sampler: &BlockJumpSampler,
    big_n: usize,
    horizon: Option<f64>,
    rng: &mut ReplicaRng,
) -> Result<LookdownRun> {
    let rate = sampler.total_rate(big_n)?;
    let mut state = LookdownState::new(big_n);
    let mut events = Vec::new();
    let mut coupling = state.coupling_holds();
    let mut lines: Vec<Trajectory> = (1..big_n)
        .map(|j| Trajectory {
            states: vec![j],
            holding_times: Some(Vec::new()),
            overshoot: false,
        })
        .collect();
    let mut entered = vec![0.0; big_n];
    loop {
        let e: f64 = rng.sample(Exp1);
        let t = state.time + e / rate;
        if horizon.is_some_and(|h| t > h) {
            break;
        }
        let k = big_n - sampler.destination(big_n, rng)? + 1;
        let mut levels: Vec<usize> = index::sample(rng, big_n, k).into_iter().map(|l| l + 1).collect();
        levels.sort_unstable();
        state.apply(&levels);
        state.time = t;
        debug_assert!(state.ancestors[0] == 1);
        coupling &= state.coupling_holds();
        for (idx, value) in state.fixation_lines().into_iter().enumerate() {
            let line = &mut lines[idx];
            if line.overshoot || line.end() == big_n {
                continue;
            }
            let level = value.unwrap_or(big_n);
            if level != line.end() {
                if let Some(h) = line.holding_times.as_mut() {
                    h.push(t - entered[idx]);
                }
                entered[idx] = t;
                line.states.push(level);
                line.overshoot = value.is_none();
            }
        }
        events.push(LookdownEvent { time: t, levels });
        if lines[0].end() == big_n {
            break;
        }
    }
    Ok(LookdownRun {
        events,
        lines,
        coupling_holds: coupling,
        state,
    })
}

/// Lookdown model on `N = cfg.size` levels up to `cfg.horizon`, or until level 1 fixes.
pub fn sim_lookdown(cfg: &SimConfig) -> Result<Vec<LookdownRun>> {
    cfg.validate(2)?;
    let sampler = BlockJumpSampler::new(&cfg.measure, cfg.size)?;
    run_replicas(cfg.seed, cfg.replicas, |rng| lookdown_run(&sampler, cfg.size, cfg.horizon, rng))
}
