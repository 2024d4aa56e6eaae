//! Discrete renewal measure `u_k = P(k ∈ S)` from an interarrival law on `{1, 2, ...}`.

use serde::{Deserialize, Serialize};

/// Which interarrival law produced a renewal sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RenewalSource {
    Beta { alpha: f64 },
    Generic,
}

/// Renewal probabilities `u[0..=m_max]` with `u[0] = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalSequence {
    pub source: RenewalSource,
    u: Vec<f64>,
    /// `1 - Σ_{j ≤ m_max} η{j}`: interarrival mass not seen by the recursion.
    pub eta_tail_mass: f64,
}

impl RenewalSequence {
    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.u.get(k).copied()
    }

    pub fn m_max(&self) -> usize {
        self.u.len() - 1
    }

    /// Renewal measure of the Beta(2-α, α) fixation line.
    pub fn beta(alpha: f64, m_max: usize) -> crate::Result<Self> {
        let eta = crate::rates::interarrival_table(alpha, m_max)?;
        let mut seq = renewal_sequence(|j| eta[j], m_max);
        seq.source = RenewalSource::Beta { alpha };
        Ok(seq)
    }
}

/// Runs `u_k = Σ_{j=1..k} η{j} u_{k-j}` forward from `u_0 = 1`.
///
/// `eta` is called for `j` in `1..=m_max` only.
pub fn renewal_sequence<F>(eta: F, m_max: usize) -> RenewalSequence
where
    F: Fn(usize) -> f64,
{
    let eta: Vec<f64> = std::iter::once(0.0).chain((1..=m_max).map(&eta)).collect();
    let mut u = Vec::with_capacity(m_max + 1);
    u.push(1.0);
    for k in 1..=m_max {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += eta[j] * u[k - j];
        }
        u.push(acc);
    }
    let eta_tail_mass = 1.0 - eta.iter().sum::<f64>();
    RenewalSequence {
        source: RenewalSource::Generic,
        u,
        eta_tail_mass,
    }
}
