//! Jump samplers for the block-counting chain and the fixation line.

use super::ReplicaRng;
use crate::error::{Error, Result};
use crate::rates::{
    beta_merge_size_ratio, beta_pair_merge_prob, beta_total_rate, interarrival_tail, LambdaMeasure,
    RateTable,
};
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use std::f64::consts::PI;

/// Rows with at most this many blocks get an alias table; larger rows use inversion.
pub const ALIAS_CAP: usize = 2048;

/// Uniform on (0, 1].
#[inline]
pub(crate) fn open_unit(rng: &mut ReplicaRng) -> f64 {
    1.0 - rng.random::<f64>()
}

/// `floor(1/U)` with `U` uniform on `(lo, 1]`; has law `1/(m(m+1))` given `m < 1/lo`.
#[inline]
fn inverse_uniform_floor(rng: &mut ReplicaRng, lo: f64) -> f64 {
    let u = lo + (1.0 - lo) * open_unit(rng);
    (1.0 / u).floor()
}

fn alias(weights: Vec<f64>) -> Result<WeightedAliasIndex<f64>> {
    WeightedAliasIndex::new(weights).map_err(|e| Error::Simulation(format!("alias table: {e}")))
}

#[derive(Debug, Clone, Copy)]
enum Family {
    // α = 1 has a closed-form inverse
    BolthausenSznitman,
    Beta(f64),
    Generic,
}

fn family(m: &LambdaMeasure) -> Family {
    match m.alpha() {
        Some(a) if a == 1.0 => Family::BolthausenSznitman,
        Some(a) => Family::Beta(a),
        None => Family::Generic,
    }
}

/// Destination sampler for the embedded block-counting chain.
pub struct BlockJumpSampler {
    family: Family,
    table: RateTable,
    alias: Vec<Option<WeightedAliasIndex<f64>>>,
}

impl std::fmt::Debug for BlockJumpSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlockJumpSampler").field("table", &self.table).finish()
    }
}

impl BlockJumpSampler {
    /// Builds every table needed for states up to `max_state`.
    pub fn new(measure: &LambdaMeasure, max_state: usize) -> Result<Self> {
        let family = family(measure);
        let cap = match family {
            Family::BolthausenSznitman => 2,
            _ => max_state.max(2),
        };
        let table = RateTable::new(measure.clone(), cap)?;
        let mut alias_tables = Vec::new();
        if !matches!(family, Family::BolthausenSznitman) {
            let top = cap.min(ALIAS_CAP);
            alias_tables.reserve(top + 1);
            alias_tables.push(None);
            alias_tables.push(None);
            for j in 2..=top {
                alias_tables.push(Some(alias(table.embedded_row(j)?.to_vec())?));
            }
        }
        Ok(Self {
            family,
            table,
            alias: alias_tables,
        })
    }

    /// `Λ_j`.
    pub fn total_rate(&self, j: usize) -> Result<f64> {
        match self.family {
            Family::BolthausenSznitman => Ok(j as f64 - 1.0),
            _ => self.table.total_rate(j),
        }
    }

    /// Next state of the embedded chain from `j >= 2` blocks.
    pub fn destination(&self, j: usize, rng: &mut ReplicaRng) -> Result<usize> {
        debug_assert!(j >= 2);
        if let Family::BolthausenSznitman = self.family {
            // P(j -> j - m) = j / ((j - 1) m (m + 1)) for m = 1..j-1
            let m = inverse_uniform_floor(rng, 1.0 / j as f64).clamp(1.0, j as f64 - 1.0);
            return Ok(j - m as usize);
        }
        if let Some(Some(table)) = self.alias.get(j) {
            return Ok(table.sample(rng) + 1);
        }
        let mut u = rng.random::<f64>();
        match self.family {
            Family::Beta(alpha) => {
                let mut p = beta_pair_merge_prob(alpha, j, beta_total_rate(alpha, j));
                for k in 2..j {
                    if u < p {
                        return Ok(j - k + 1);
                    }
                    u -= p;
                    p *= beta_merge_size_ratio(alpha, j, k);
                }
                Ok(1)
            }
            _ => {
                let row = self.table.embedded_row(j)?;
                for i in (2..j).rev() {
                    let p = row[i - 1];
                    if u < p {
                        return Ok(i);
                    }
                    u -= p;
                }
                Ok(1)
            }
        }
    }
}

/// Where a fixation-line jump lands relative to the level window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Landing {
    At(usize),
    /// At or beyond the window edge, exact level not resolved.
    Beyond,
}

enum FixationMode {
    BolthausenSznitman,
    // P(D >= m) for m = 1..=limit at index m - 1
    Beta { tail: Vec<f64> },
    // per level i < limit: weights of i+1..limit-1 then the overshoot bucket
    Generic { rows: Vec<Option<WeightedAliasIndex<f64>>> },
}

/// Jump and holding-rate sampler for the fixation line below a level `limit`.
pub struct FixationJumpSampler {
    mode: FixationMode,
    limit: usize,
    // Λ_{i+1} at index i
    rates: Vec<f64>,
}

impl std::fmt::Debug for FixationJumpSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FixationJumpSampler").field("limit", &self.limit).finish()
    }
}

impl FixationJumpSampler {
    pub fn new(measure: &LambdaMeasure, limit: usize) -> Result<Self> {
        if limit < 2 {
            return Err(Error::Simulation(format!("level cap must be at least 2, got {limit}")));
        }
        let (mode, rates) = match family(measure) {
            Family::BolthausenSznitman => {
                (FixationMode::BolthausenSznitman, (0..limit).map(|i| i as f64).collect())
            }
            Family::Beta(alpha) => {
                let tail = (1..=limit)
                    .map(|m| interarrival_tail(alpha, m))
                    .collect::<Result<Vec<_>>>()?;
                let rates = (0..limit)
                    .map(|i| if i == 0 { 0.0 } else { beta_total_rate(alpha, i + 1) })
                    .collect();
                (FixationMode::Beta { tail }, rates)
            }
            Family::Generic => {
                // duality: Γ̃_{i,≥k} = Λ_{k,≤i}, read from cumulative block rows
                let table = RateTable::new(measure.clone(), limit)?;
                let mut cum: Vec<Vec<f64>> = vec![Vec::new(); limit + 1];
                for k in 2..=limit {
                    let total = table.total_rate(k)?;
                    let row = table.embedded_row(k)?;
                    let mut acc = 0.0;
                    let mut c = Vec::with_capacity(k);
                    c.push(0.0);
                    for p in row.iter() {
                        acc += p * total;
                        c.push(acc);
                    }
                    cum[k] = c;
                }
                let mut rows = vec![None];
                let mut rates = vec![0.0];
                for i in 1..limit {
                    let mut w: Vec<f64> = (i + 1..limit)
                        .map(|k| (cum[k][i] - cum[k + 1][i]).max(0.0))
                        .collect();
                    w.push(cum[limit][i]);
                    rates.push(table.total_rate(i + 1)?);
                    rows.push(Some(alias(w)?));
                }
                (FixationMode::Generic { rows }, rates)
            }
        };
        Ok(Self { mode, limit, rates })
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    /// Holding rate `Λ_{i+1}` at level `1 <= i < limit`.
    pub fn rate(&self, i: usize) -> f64 {
        self.rates[i]
    }

    /// Next level from `1 <= i < limit`.
    pub fn jump(&self, i: usize, rng: &mut ReplicaRng) -> Landing {
        match &self.mode {
            FixationMode::BolthausenSznitman => {
                // exact below 2^53, far past any usable window
                let d = inverse_uniform_floor(rng, 0.0).min(9.0e15);
                Landing::At(i.saturating_add(d as usize))
            }
            FixationMode::Beta { tail } => {
                let u = open_unit(rng);
                if u <= tail[tail.len() - 1] {
                    return Landing::Beyond;
                }
                // largest m with P(D >= m) >= u
                let m = tail.partition_point(|&t| t >= u);
                Landing::At(i + m)
            }
            FixationMode::Generic { rows } => {
                let table = rows[i].as_ref().expect("row exists below the cap");
                let idx = table.sample(rng);
                let k = i + 1 + idx;
                if k >= self.limit {
                    Landing::Beyond
                } else {
                    Landing::At(k)
                }
            }
        }
    }
}

/// `log S` for `S` positive stable with `E exp(-λS) = exp(-λ^β)`, `0 < β <= 1`.
///
/// Kanter's representation `S = (A(U)/E)^{(1-β)/β}`, written in a form that stays
/// finite as `β -> 1`.
pub fn positive_stable_log(beta: f64, rng: &mut ReplicaRng) -> f64 {
    if beta >= 1.0 {
        return 0.0;
    }
    let u = open_unit(rng) * (1.0 - f64::EPSILON) + 0.5 * f64::EPSILON;
    let e = -open_unit(rng).ln();
    let c = (1.0 - beta) / beta;
    (beta * PI * u).sin().ln() + c * ((1.0 - beta) * PI * u).sin().ln() - (PI * u).sin().ln() / beta
        - c * e.ln()
}
