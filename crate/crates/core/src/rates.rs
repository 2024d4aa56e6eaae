//! The driving measure and the transition rates of the block-counting process and
//! the fixation line.
//!
//! For the Beta(2-α, α) family every rate has a closed form in Gamma ratios. A
//! generic density goes through quadrature against the same kernels.

use crate::error::{domain, Error, Result};
use crate::numerics::{integrate_01_split, integrate_01_split_rel, log_beta, log_binomial, log_gamma, log_gamma_ratio_unchecked};
use std::fmt;
use std::sync::{Arc, OnceLock};

/// Density of a generic measure, called as `density(x, 1 - x)`.
pub type Density = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Relative accuracy requested from quadrature for generic-measure rates.
pub const GENERIC_RATE_REL_TOL: f64 = 1e-13;

/// Allowed deviation of a generic density's total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-8;

#[derive(Clone)]
enum Kind {
    Beta {
        alpha: f64,
        // log(Γ(2-α) Γ(α))
        log_norm: f64,
    },
    Generic {
        density: Density,
        label: String,
    },
}

/// The measure Λ driving the coalescent: a probability measure on (0, 1) without atoms.
#[derive(Clone)]
pub struct LambdaMeasure {
    kind: Kind,
    /// Total mass as computed at construction (1 for Beta).
    pub normalization: f64,
}

impl fmt::Debug for LambdaMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Beta { alpha, .. } => write!(f, "LambdaMeasure::Beta {{ alpha: {alpha} }}"),
            Kind::Generic { label, .. } => write!(f, "LambdaMeasure::Generic {{ {label} }}"),
        }
    }
}

impl LambdaMeasure {
    /// Beta(2-α, α) with α in (0, 2).
    pub fn beta(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::Measure(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        Ok(Self {
            kind: Kind::Beta {
                alpha,
                log_norm: log_gamma(2.0 - alpha)? + log_gamma(alpha)?,
            },
            normalization: 1.0,
        })
    }

    /// A measure with the given density on (0, 1). The density must integrate to 1
    /// within [`MASS_TOLERANCE`].
    pub fn generic(density: Density, label: impl Into<String>) -> Result<Self> {
        let mass = Self::mass_of(&density)?;
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Measure(format!(
                "density integrates to {mass}, expected 1 within {MASS_TOLERANCE:e}"
            )));
        }
        Ok(Self {
            kind: Kind::Generic {
                density,
                label: label.into(),
            },
            normalization: mass,
        })
    }

    /// Like [`LambdaMeasure::generic`] but divides the density by its mass first.
    pub fn generic_normalized(density: Density, label: impl Into<String>) -> Result<Self> {
        let mass = Self::mass_of(&density)?;
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Measure(format!("density has non-positive mass {mass}")));
        }
        let inner = density.clone();
        let scaled: Density = Arc::new(move |x, c| inner(x, c) / mass);
        Self::generic(scaled, label)
    }

    fn mass_of(density: &Density) -> Result<f64> {
        let q = integrate_01_split(|x, c| density(x, c), 1e-12)
            .map_err(|e| Error::Measure(format!("cannot integrate density: {e}")))?;
        Ok(q.value)
    }

    /// `Some(α)` for the Beta family.
    pub fn alpha(&self) -> Option<f64> {
        match self.kind {
            Kind::Beta { alpha, .. } => Some(alpha),
            Kind::Generic { .. } => None,
        }
    }

    pub fn is_beta(&self) -> bool {
        self.alpha().is_some()
    }

    /// Short human-readable tag, e.g. `beta(alpha=1.5)`.
    pub fn label(&self) -> String {
        match &self.kind {
            Kind::Beta { alpha, .. } => format!("beta(alpha={alpha})"),
            Kind::Generic { label, .. } => label.clone(),
        }
    }

    /// Density at `x`, given also `1 - x`.
    pub fn density(&self, x: f64, complement: f64) -> f64 {
        match &self.kind {
            Kind::Beta { alpha, log_norm, .. } => {
                ((1.0 - alpha) * x.ln() + (alpha - 1.0) * complement.ln() - log_norm).exp()
            }
            Kind::Generic { density, .. } => density(x, complement),
        }
    }

    /// `∫ x^a (1-x)^b Λ(dx)` for a generic density.
    fn generic_moment(&self, a: f64, b: f64) -> Result<f64> {
        let q = integrate_01_split_rel(
            |x, c| {
                let d = self.density(x, c);
                if d == 0.0 {
                    0.0
                } else {
                    d * (a * x.ln() + b * c.ln()).exp()
                }
            },
            GENERIC_RATE_REL_TOL,
        )?;
        Ok(q.value)
    }
}

fn check_pair(lo: usize, hi: usize, what: &str) -> Result<()> {
    if lo < 1 || lo >= hi {
        return domain(format!("{what} requires 1 <= i < j, got i = {lo}, j = {hi}"));
    }
    Ok(())
}

/// `Λ_{j,i}`: rate at which the block-counting process jumps from `j` to `i` blocks.
pub fn block_rate(m: &LambdaMeasure, j: usize, i: usize) -> Result<f64> {
    check_pair(i, j, "block_rate")?;
    let k = (j - i + 1) as f64;
    let lc = log_binomial(j as f64, k);
    match &m.kind {
        Kind::Beta { alpha, log_norm, .. } => {
            let lb = log_beta(k - alpha, i as f64 - 1.0 + alpha)?;
            Ok((lc + lb - log_norm).exp())
        }
        Kind::Generic { .. } => Ok(lc.exp() * m.generic_moment(k - 2.0, i as f64 - 1.0)?),
    }
}

/// `Γ̃_{i,j}`: rate at which the fixation line jumps from level `i` to level `j`.
pub fn fixation_rate(m: &LambdaMeasure, i: usize, j: usize) -> Result<f64> {
    check_pair(i, j, "fixation_rate")?;
    match m.alpha() {
        Some(alpha) => Ok(total_rate(m, i + 1)? * interarrival(alpha, j - i)?),
        None => {
            let k = (j - i + 1) as f64;
            let lc = log_binomial(j as f64, k);
            Ok(lc.exp() * m.generic_moment(k - 2.0, i as f64)?)
        }
    }
}

/// `Λ_j`: total jump rate of the block-counting process from `j` blocks.
pub fn total_rate(m: &LambdaMeasure, j: usize) -> Result<f64> {
    if j < 2 {
        return domain(format!("total_rate requires j >= 2, got {j}"));
    }
    match m.alpha() {
        Some(alpha) => Ok(beta_total_rate(alpha, j)),
        // Λ_j = Γ̃_{j-1,≥j}: one integral instead of j - 1
        None => fixation_tail_rate(m, j - 1, j),
    }
}

pub(crate) fn beta_total_rate(alpha: f64, j: usize) -> f64 {
    // Γ(j-1+α) / (α Γ(α) Γ(j-1)) = Γ(j-1+α) / (Γ(1+α) Γ(j-1))
    let jm = (j - 1) as f64;
    (log_gamma_ratio_unchecked(jm + alpha, jm) - log_gamma_ratio_unchecked(1.0 + alpha, 1.0)).exp()
}

/// `Γ̃_{i,≥j}`: rate at which the fixation line jumps from `i` to some level `>= j`.
pub fn fixation_tail_rate(m: &LambdaMeasure, i: usize, j: usize) -> Result<f64> {
    check_pair(i, j, "fixation_tail_rate")?;
    match m.alpha() {
        Some(alpha) => Ok(total_rate(m, i + 1)? * interarrival_tail(alpha, j - i)?),
        None => {
            let q = integrate_01_split_rel(
                |x, c| {
                    let d = m.density(x, c);
                    if d == 0.0 {
                        0.0
                    } else {
                        d * (negative_binomial_upper_tail(i, j - i, x, c) / x / x)
                    }
                },
                GENERIC_RATE_REL_TOL,
            )?;
            Ok(q.value)
        }
    }
}

/// `Σ_{k > m} C(k+i-1, k) x^k (1-x)^i`, the probability that a negative binomial
/// count of failures before the `i`-th success exceeds `m`.
fn negative_binomial_upper_tail(i: usize, m: usize, x: f64, c: f64) -> f64 {
    let (lx, lc) = (x.ln(), c.ln());
    let fi = i as f64;
    let term = |k: f64| (log_binomial(k + fi - 1.0, k) + k * lx + fi * lc).exp();
    let mut partial = 0.0;
    for k in 0..=m {
        partial += term(k as f64);
    }
    if partial < 0.9 {
        return (1.0 - partial).max(0.0);
    }
    // small remaining mass: sum the decreasing tail directly
    let mut t = term((m + 1) as f64);
    let mut sum = 0.0f64;
    let mut k = (m + 1) as f64;
    while t > 1e-18 * sum.max(f64::MIN_POSITIVE) {
        sum += t;
        t *= x * (k + fi) / (k + 1.0);
        k += 1.0;
        if k > 1e7 {
            break;
        }
    }
    sum
}

/// `Λ_{j,≤i} = Σ_{k≤i} Λ_{j,k}`: rate at which `j` blocks drop to at most `i`.
pub fn block_tail_rate(m: &LambdaMeasure, j: usize, i: usize) -> Result<f64> {
    check_pair(i, j, "block_tail_rate")?;
    (1..=i).map(|k| block_rate(m, j, k)).sum()
}

/// `P_{ji} = Λ_{j,i} / Λ_j`: transition probability of the embedded block-counting chain.
pub fn embedded_transition(m: &LambdaMeasure, j: usize, i: usize) -> Result<f64> {
    check_pair(i, j, "embedded_transition")?;
    Ok(block_rate(m, j, i)? / total_rate(m, j)?)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    Ok(())
}

/// `η{j}`: interarrival law of the translated fixation-line range for Beta(2-α, α).
pub fn interarrival(alpha: f64, j: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if j < 1 {
        return domain("interarrival requires j >= 1");
    }
    let jf = j as f64;
    Ok(alpha * (log_gamma_ratio_unchecked(jf + 1.0 - alpha, jf + 2.0) - log_gamma(2.0 - alpha)?).exp())
}

/// `Σ_{d ≥ m} η{d} = Γ(m+1-α) / (Γ(2-α) Γ(m+1))`.
pub fn interarrival_tail(alpha: f64, m: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if m < 1 {
        return domain("interarrival_tail requires m >= 1");
    }
    let mf = m as f64;
    Ok((log_gamma_ratio_unchecked(mf + 1.0 - alpha, mf + 1.0) - log_gamma(2.0 - alpha)?).exp())
}

/// `η{0..=m_max}` with a zero in slot 0.
pub fn interarrival_table(alpha: f64, m_max: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let mut eta = Vec::with_capacity(m_max + 1);
    eta.push(0.0);
    for j in 1..=m_max {
        eta.push(interarrival(alpha, j)?);
    }
    Ok(eta)
}

/// `Λ_{j,1}` for Beta(2-α, α): `Γ(j-α) / (Γ(2-α) Γ(j))`.
pub(crate) fn beta_rate_to_one(alpha: f64, j: usize) -> f64 {
    let jf = j as f64;
    (log_gamma_ratio_unchecked(jf - alpha, jf) - log_gamma_ratio_unchecked(2.0 - alpha, 1.0)).exp()
}

/// Cached rates up to a state cap.
///
/// Totals and rates to one block are computed eagerly; embedded-chain rows are
/// built on first use. States above the cap are computed on the fly.
pub struct RateTable {
    measure: LambdaMeasure,
    cap: usize,
    totals: Vec<f64>,
    to_one: Vec<f64>,
    rows: Vec<OnceLock<Arc<[f64]>>>,
}

impl fmt::Debug for RateTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RateTable")
            .field("measure", &self.measure)
            .field("cap", &self.cap)
            .finish()
    }
}

/// Default state cap of a [`RateTable`].
pub const DEFAULT_CAP: usize = 10_000;

impl RateTable {
    pub fn new(measure: LambdaMeasure, cap: usize) -> Result<Self> {
        if cap < 2 {
            return domain(format!("rate table cap must be at least 2, got {cap}"));
        }
        let mut totals = vec![0.0; cap + 1];
        let mut to_one = vec![0.0; cap + 1];
        let rows: Vec<OnceLock<Arc<[f64]>>> = (0..=cap).map(|_| OnceLock::new()).collect();
        match measure.alpha() {
            Some(alpha) => {
                for j in 2..=cap {
                    totals[j] = beta_total_rate(alpha, j);
                    to_one[j] = beta_rate_to_one(alpha, j);
                }
            }
            None => {
                for j in 2..=cap {
                    let rates = generic_rate_row(&measure, j)?;
                    totals[j] = rates.iter().sum();
                    to_one[j] = rates[0];
                    let probs: Vec<f64> = rates.iter().map(|r| r / totals[j]).collect();
                    let _ = rows[j].set(probs.into());
                }
            }
        }
        Ok(Self {
            measure,
            cap,
            totals,
            to_one,
            rows,
        })
    }

    pub fn measure(&self) -> &LambdaMeasure {
        &self.measure
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// `Λ_j`.
    pub fn total_rate(&self, j: usize) -> Result<f64> {
        if j < 2 {
            return domain(format!("total_rate requires j >= 2, got {j}"));
        }
        if j <= self.cap {
            Ok(self.totals[j])
        } else {
            total_rate(&self.measure, j)
        }
    }

    /// `Λ_{j,1}`.
    pub fn rate_to_one(&self, j: usize) -> Result<f64> {
        if j < 2 {
            return domain(format!("rate_to_one requires j >= 2, got {j}"));
        }
        if j <= self.cap {
            Ok(self.to_one[j])
        } else {
            block_rate(&self.measure, j, 1)
        }
    }

    /// `P_{j,i}` for `i = 1..j-1`, stored at index `i - 1`.
    pub fn embedded_row(&self, j: usize) -> Result<Arc<[f64]>> {
        if j < 2 {
            return domain(format!("embedded_row requires j >= 2, got {j}"));
        }
        if j <= self.cap {
            if let Some(row) = self.rows[j].get() {
                return Ok(row.clone());
            }
            let row = self.compute_row(j)?;
            Ok(self.rows[j].get_or_init(|| row).clone())
        } else {
            self.compute_row(j)
        }
    }

    fn compute_row(&self, j: usize) -> Result<Arc<[f64]>> {
        match self.measure.alpha() {
            Some(alpha) => Ok(beta_embedded_row(alpha, j).into()),
            None => {
                let rates = generic_rate_row(&self.measure, j)?;
                let total: f64 = rates.iter().sum();
                Ok(rates.iter().map(|r| r / total).collect::<Vec<_>>().into())
            }
        }
    }

    /// `P_{j,i}`.
    pub fn embedded_transition(&self, j: usize, i: usize) -> Result<f64> {
        check_pair(i, j, "embedded_transition")?;
        Ok(self.embedded_row(j)?[i - 1])
    }
}

fn generic_rate_row(m: &LambdaMeasure, j: usize) -> Result<Vec<f64>> {
    (1..j).map(|i| block_rate(m, j, i)).collect()
}

/// Probability that the next merger from `j` blocks involves exactly two of them.
pub(crate) fn beta_pair_merge_prob(alpha: f64, j: usize, total: f64) -> f64 {
    let jf = j as f64;
    let log_norm = log_gamma_ratio_unchecked(2.0 - alpha, 1.0) + log_gamma_ratio_unchecked(alpha, 1.0);
    (log_binomial(jf, 2.0) + log_gamma_ratio_unchecked(2.0 - alpha, jf)
        + log_gamma_ratio_unchecked(jf - 2.0 + alpha, 1.0)
        - log_norm)
        .exp()
        / total
}

/// `p_{k+1} / p_k` for merge sizes from `j` blocks.
#[inline]
pub(crate) fn beta_merge_size_ratio(alpha: f64, j: usize, k: usize) -> f64 {
    let (jf, kf) = (j as f64, k as f64);
    (jf - kf) * (kf - alpha) / ((kf + 1.0) * (jf - kf - 1.0 + alpha))
}

/// Embedded row for Beta(2-α, α), built by the ratio of consecutive merge sizes.
///
/// With `k = j - i + 1` merging blocks, `p_k ∝ C(j,k) B(k-α, j-k+α)` and
/// `p_{k+1}/p_k = (j-k)(k-α) / ((k+1)(j-k-1+α))`.
pub(crate) fn beta_embedded_row(alpha: f64, j: usize) -> Vec<f64> {
    let total = beta_total_rate(alpha, j);
    let mut row = vec![0.0; j - 1];
    let mut p = beta_pair_merge_prob(alpha, j, total);
    for k in 2..=j {
        row[j - k] = p;
        if k < j {
            p *= beta_merge_size_ratio(alpha, j, k);
        }
    }
    // the last entry (all blocks merge) is recomputed directly to stop drift
    row[0] = beta_rate_to_one(alpha, j) / total;
    row
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn beta_rejects_out_of_range_alpha() {
        assert!(LambdaMeasure::beta(0.0).is_err());
        assert!(LambdaMeasure::beta(2.0).is_err());
        assert!(LambdaMeasure::beta(f64::NAN).is_err());
    }

    #[test]
    fn beta_embedded_row_matches_direct_rates() {
        for &alpha in &[0.3, 1.0, 1.7] {
            let m = LambdaMeasure::beta(alpha).unwrap();
            for &j in &[2usize, 3, 17, 300] {
                let row = beta_embedded_row(alpha, j);
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() < 1e-12, "alpha={alpha} j={j} sum={sum}");
                for i in 1..j {
                    let want = embedded_transition(&m, j, i).unwrap();
                    assert_relative_eq!(row[i - 1], want, max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn negative_binomial_tail_matches_complement() {
        for &(i, m, x) in &[(1usize, 1usize, 0.3), (3, 2, 0.01), (10, 4, 0.7), (50, 20, 0.2)] {
            let c = 1.0 - x;
            let mut partial = 0.0;
            for k in 0..=m {
                partial += (log_binomial((k + i - 1) as f64, k as f64)
                    + k as f64 * f64::ln(x)
                    + i as f64 * f64::ln(c))
                .exp();
            }
            let got = negative_binomial_upper_tail(i, m, x, c);
            assert!((got - (1.0 - partial)).abs() < 1e-13, "{i} {m} {x}: {got} vs {}", 1.0 - partial);
        }
    }

    #[test]
    fn generic_mass_is_checked() {
        let half: Density = Arc::new(|_, _| 0.5);
        assert!(matches!(LambdaMeasure::generic(half.clone(), "half"), Err(Error::Measure(_))));
        let m = LambdaMeasure::generic_normalized(half, "half").unwrap();
        assert!((total_rate(&m, 2).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn table_rows_are_cached() {
        let t = RateTable::new(LambdaMeasure::beta(1.0).unwrap(), 50).unwrap();
        let a = t.embedded_row(40).unwrap();
        let b = t.embedded_row(40).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_relative_eq!(t.embedded_transition(4, 1).unwrap(), 1.0 / 9.0, max_relative = 1e-13);
        // beyond the cap: computed, not cached
        assert_relative_eq!(t.total_rate(80).unwrap(), 79.0, max_relative = 1e-12);
    }
}
