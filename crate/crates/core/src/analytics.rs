//! Exact laws: records of the natural coupling, expected depth, the block count of the
//! last coalescence (finite `n` and `n → ∞`), hitting probabilities of the
//! block-counting process, and transitions of the time-reversed chain.
//!
//! Limits are available for the Beta(2-α, α) family only. Finite-`n` quantities
//! also accept a generic measure.

use crate::error::{domain, Error, Result};
use crate::numerics::{integrate_01_split_mixed, integrate_01_split_rel, log_gamma, RenewalSequence};
use crate::rates::{self, beta_rate_to_one, beta_total_rate, LambdaMeasure};
use serde::{Deserialize, Serialize};

/// Relative accuracy requested from quadrature in this module.
pub const QUAD_REL_TOL: f64 = 1e-13;

/// Absolute accuracy of the truncation mass in the limiting distribution.
pub const TRUNCATION_ABS_TOL: f64 = 1e-14;

/// Largest `j` for which the alternating log-sum at α = 1 is evaluated.
pub const ALTERNATING_SUM_MAX_J: usize = 40;

/// A law on `{support_start, support_start + 1, ...}` computed on a finite window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    pub support_start: usize,
    pub probabilities: Vec<f64>,
    /// Mass beyond the last computed point, never folded back into the window.
    pub truncation_mass: f64,
}

impl DiscreteDistribution {
    /// Probability of `j`, zero outside the computed window.
    pub fn prob(&self, j: usize) -> f64 {
        j.checked_sub(self.support_start)
            .and_then(|k| self.probabilities.get(k))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn support_end(&self) -> usize {
        self.support_start + self.probabilities.len() - 1
    }

    /// Sum over the window plus the truncation mass.
    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum::<f64>() + self.truncation_mass
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probabilities
            .iter()
            .enumerate()
            .map(move |(k, &p)| (self.support_start + k, p))
    }
}

/// Finite `n` or the `n → ∞` limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Horizon {
    Finite(usize),
    Limit,
}

/// `j ↦ P(j ∈ ℛ^n)` for `j = 2..=j_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingProfile {
    pub n: Horizon,
    /// Entry `k` holds the probability for `j = k + 2`.
    pub values: Vec<f64>,
}

impl HittingProfile {
    pub fn get(&self, j: usize) -> Option<f64> {
        j.checked_sub(2).and_then(|k| self.values.get(k)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(|(k, &v)| (k + 2, v))
    }
}

/// Value of a generating function that may diverge at `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GfValue {
    Finite(f64),
    Infinite,
}

impl GfValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            GfValue::Finite(v) => Some(v),
            GfValue::Infinite => None,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return domain(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    Ok(())
}

fn integrate(f: impl Fn(f64, f64) -> f64) -> Result<f64> {
    Ok(integrate_01_split_rel(f, QUAD_REL_TOL)?.value)
}

/// `ln x` given `x` and `1 - x`, accurate at both ends.
fn ln_split(x: f64, c: f64) -> f64 {
    if x < 0.5 {
        x.ln()
    } else {
        (-c).ln_1p()
    }
}

/// `ln(1 - x)` given `x` and `1 - x`.
fn ln_complement(x: f64, c: f64) -> f64 {
    if x < 0.5 {
        (-x).ln_1p()
    } else {
        c.ln()
    }
}

// ----------------------------------------------------------------------------
// Records and depth
// ----------------------------------------------------------------------------

/// `P(i ∈ 𝒯)`: probability that adding the `i`-th individual deepens the genealogy.
pub fn record_prob(alpha: f64, i: usize) -> Result<f64> {
    if i < 2 {
        return domain(format!("record_prob requires i >= 2, got {i}"));
    }
    Ok(*record_probs(alpha, i)?.last().expect("non-empty"))
}

/// `P(i ∈ 𝒯)` for `i = 2..=i_max`, entry `k` holding `i = k + 2`.
pub fn record_probs(alpha: f64, i_max: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if i_max < 2 {
        return domain(format!("record_probs requires i_max >= 2, got {i_max}"));
    }
    let u = RenewalSequence::beta(alpha, i_max - 2)?;
    let mut out = Vec::with_capacity(i_max - 1);
    out.push(1.0);
    for i in 3..=i_max {
        out.push(u.values()[i - 2] / beta_total_rate(alpha, i));
    }
    Ok(out)
}

/// `(1-y) φ_{η*}(y)` where `φ_{η*}(y) = Σ_k u_k y^k = -(α-1) y / ((1-y)^α - (1-y))`,
/// given `y` and `ln(1 - y)`.
fn scaled_renewal_gf(alpha: f64, y: f64, ln_cy: f64) -> f64 {
    if y == 0.0 {
        return 1.0;
    }
    if alpha == 1.0 {
        -y / ln_cy
    } else {
        -(alpha - 1.0) * y / ((alpha - 1.0) * ln_cy).exp_m1()
    }
}

/// `Σ_{i≥2} P(i ∈ 𝒯) s^i` for `s ∈ [0, 1]`. At `s = 1` this is the expected depth,
/// infinite when α ≤ 1.
pub fn record_gf(alpha: f64, s: f64) -> Result<GfValue> {
    check_alpha(alpha)?;
    if !(0.0..=1.0).contains(&s) {
        return domain(format!("record_gf requires s in [0, 1], got {s}"));
    }
    if s == 0.0 {
        return Ok(GfValue::Finite(0.0));
    }
    if s == 1.0 && alpha <= 1.0 {
        return Ok(GfValue::Infinite);
    }
    let value = if alpha > 1.0 {
        // w = (1-x)^{α-1}, x = 1 - w^p with p = 1/(α-1)
        let p = 1.0 / (alpha - 1.0);
        integrate(|w, cw| {
            let ln_wp = p * ln_split(w, cw);
            let wp = ln_wp.exp();
            let x = -ln_wp.exp_m1();
            let y = s * x;
            let cy = (1.0 - s) + s * wp;
            // at s = 1, 1 - y = w^p exactly and may underflow; keep it in log form
            let (ratio, ln_cy) = if s == 1.0 {
                (1.0, ln_wp)
            } else {
                (wp / cy, ln_complement(y, cy))
            };
            alpha * p * s * s * ratio * scaled_renewal_gf(alpha, y, ln_cy)
        })?
    } else {
        // v = 1 - (1-x)^α
        integrate(|v, cv| {
            let lc = ln_complement(v, cv) / alpha;
            let cx = lc.exp();
            let x = -lc.exp_m1();
            let y = s * x;
            let cy = (1.0 - s) + s * cx;
            s * s * scaled_renewal_gf(alpha, y, ln_complement(y, cy)) / cy
        })?
    };
    Ok(GfValue::Finite(value))
}

/// `E(τ_1)`, the expected time to the most recent common ancestor of the whole
/// population. Finite exactly when the coalescent comes down from infinity.
pub fn expected_depth(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha <= 1.0 {
        return Err(Error::StaysInfinite { alpha });
    }
    // v = (1-x)^{α-1} turns the integrand into α (1 - v^p)/(1 - v), p = 1/(α-1)
    let p = 1.0 / (alpha - 1.0);
    integrate(|v, cv| {
        let one_minus_vp = -(p * ln_split(v, cv)).exp_m1();
        alpha * one_minus_vp / cv
    })
}

// ----------------------------------------------------------------------------
// Hitting times of the fixation line
// ----------------------------------------------------------------------------

/// `E(α_j^n)`: expected time for the fixation line started at `j` to reach level `n`.
pub fn expected_hitting_time(m: &LambdaMeasure, j: usize, n: usize) -> Result<f64> {
    if j < 1 || j > n {
        return domain(format!("expected_hitting_time requires 1 <= j <= n, got j = {j}, n = {n}"));
    }
    if j == n {
        return Ok(0.0);
    }
    match m.alpha() {
        Some(alpha) => {
            let u = RenewalSequence::beta(alpha, n - 1 - j)?;
            Ok((j..n)
                .map(|i| u.values()[i - j] / beta_total_rate(alpha, i + 1))
                .sum())
        }
        None => {
            // forward occupancy of the embedded fixation-line chain, absorbed at >= n
            let mut occ = vec![0.0; n];
            occ[j] = 1.0;
            let mut e = 0.0;
            for i in j..n {
                if occ[i] == 0.0 {
                    continue;
                }
                let total = rates::total_rate(m, i + 1)?;
                e += occ[i] / total;
                for k in i + 1..n {
                    occ[k] += occ[i] * rates::fixation_rate(m, i, k)? / total;
                }
            }
            Ok(e)
        }
    }
}

/// `D_j = E(α^n_{j-1}) - E(α^n_j)` for `j = 2..=n`, stored at index `j`.
fn hitting_differences(m: &LambdaMeasure, n: usize) -> Result<Vec<f64>> {
    let mut d = vec![0.0; n + 1];
    match m.alpha() {
        Some(alpha) => {
            let u = RenewalSequence::beta(alpha, n - 2)?;
            let u = u.values();
            let inv_total: Vec<f64> = (0..=n)
                .map(|i| if i < 2 { 0.0 } else { 1.0 / beta_total_rate(alpha, i) })
                .collect();
            // 1/Λ_i - 1/Λ_{i+1} = α / ((i-1+α) Λ_i)
            let gap: Vec<f64> = (0..=n)
                .map(|i| if i < 2 { 0.0 } else { alpha * inv_total[i] / (i as f64 - 1.0 + alpha) })
                .collect();
            for j in 2..=n {
                let mut acc = u[n - j] * inv_total[n];
                for i in j..n {
                    acc += u[i - j] * gap[i];
                }
                d[j] = acc;
            }
        }
        None => {
            // first-step analysis: E_i = (1 + Σ_{i<k<n} Γ̃_{i,k} E_k) / Λ_{i+1}
            let mut e = vec![0.0; n + 1];
            for i in (1..n).rev() {
                let mut acc = 1.0;
                for k in i + 1..n {
                    acc += rates::fixation_rate(m, i, k)? * e[k];
                }
                e[i] = acc / rates::total_rate(m, i + 1)?;
            }
            for j in 2..=n {
                d[j] = e[j - 1] - e[j];
            }
        }
    }
    Ok(d)
}

fn rate_to_one(m: &LambdaMeasure, j: usize) -> Result<f64> {
    match m.alpha() {
        Some(alpha) => Ok(beta_rate_to_one(alpha, j)),
        None => rates::block_rate(m, j, 1),
    }
}

fn total(m: &LambdaMeasure, j: usize) -> Result<f64> {
    match m.alpha() {
        Some(alpha) => Ok(beta_total_rate(alpha, j)),
        None => rates::total_rate(m, j),
    }
}

// ----------------------------------------------------------------------------
// Last coalescence and hitting probabilities at finite n
// ----------------------------------------------------------------------------

/// Law of the number of blocks merged in the last coalescence of the `n`-coalescent.
pub fn last_coalescence_finite(m: &LambdaMeasure, n: usize) -> Result<DiscreteDistribution> {
    if n < 2 {
        return domain(format!("last_coalescence_finite requires n >= 2, got {n}"));
    }
    let d = hitting_differences(m, n)?;
    let probabilities = (2..=n)
        .map(|j| Ok(rate_to_one(m, j)? * d[j]))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteDistribution {
        support_start: 2,
        probabilities,
        truncation_mass: 0.0,
    })
}

/// `P(j ∈ ℛ^n)` for `j = 2..=n`.
pub fn hitting_profile_finite(m: &LambdaMeasure, n: usize) -> Result<HittingProfile> {
    if n < 2 {
        return domain(format!("hitting_profile_finite requires n >= 2, got {n}"));
    }
    let d = hitting_differences(m, n)?;
    let mut values = (2..=n)
        .map(|j| Ok((total(m, j)? * d[j]).min(1.0)))
        .collect::<Result<Vec<_>>>()?;
    *values.last_mut().expect("n >= 2") = 1.0;
    Ok(HittingProfile {
        n: Horizon::Finite(n),
        values,
    })
}

/// `P(j ∈ ℛ^n)`: probability that the block-counting process started at `n` visits `j`.
pub fn hitting_prob_finite(m: &LambdaMeasure, n: usize, j: usize) -> Result<f64> {
    if j < 2 || j > n {
        return domain(format!("hitting_prob_finite requires 2 <= j <= n, got j = {j}, n = {n}"));
    }
    if j == n {
        return Ok(1.0);
    }
    Ok(hitting_profile_finite(m, n)?.values[j - 2])
}

/// Transition `i ← j` of the time-reversed block-counting chain of the `n`-coalescent:
/// `P(j ∈ ℛ^n) P_{ji} / P(i ∈ ℛ^n)`, with `P(1 ∈ ℛ^n) = 1`.
pub fn reversed_transition(m: &LambdaMeasure, n: usize, i: usize, j: usize) -> Result<f64> {
    if i < 1 || i >= j || j > n {
        return domain(format!(
            "reversed_transition requires 1 <= i < j <= n, got i = {i}, j = {j}, n = {n}"
        ));
    }
    let profile = hitting_profile_finite(m, n)?;
    let hit = |k: usize| if k == 1 { 1.0 } else { profile.values[k - 2] };
    let p_ji = match m.alpha() {
        Some(alpha) => rates::beta_embedded_row(alpha, j)[i - 1],
        None => rates::embedded_transition(m, j, i)?,
    };
    Ok(hit(j) * p_ji / hit(i))
}

// ----------------------------------------------------------------------------
// Limits n → ∞ for Beta(2-α, α)
// ----------------------------------------------------------------------------

/// `K(x) = (1-α) / (1 - (1-x)^{1-α})`, and `-1/ln(1-x)` at α = 1.
fn limit_kernel(alpha: f64, x: f64, c: f64) -> f64 {
    let l = ln_complement(x, c);
    if alpha == 1.0 {
        -1.0 / l
    } else {
        (1.0 - alpha) / -((1.0 - alpha) * l).exp_m1()
    }
}

/// `∫ x^{j-1} K(x) dx`.
fn kernel_moment(alpha: f64, j: usize) -> Result<f64> {
    let e = (j - 1) as f64;
    integrate(|x, c| (e * ln_split(x, c)).exp() * limit_kernel(alpha, x, c))
}

/// `P̃_{1j} = lim_n P̃^n_{1j}`.
pub fn last_coalescence_limit(alpha: f64, j: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if j < 2 {
        return domain(format!("last_coalescence_limit requires j >= 2, got {j}"));
    }
    Ok(alpha * beta_rate_to_one(alpha, j) * kernel_moment(alpha, j)?)
}

// log p as an unevaluated sum hi + lo
const LOG_PRIMES: [(u32, f64, f64); 13] = [
    (2, std::f64::consts::LN_2, 2.3190468138462996e-17),
    (3, 1.0986122886681098, -9.07129723500153e-17),
    (5, 1.6094379124341003, 9.280081691085902e-17),
    (7, 1.9459101490553132, 7.323586207904907e-17),
    (11, 2.3978952727983707, -1.253584211423161e-16),
    (13, 2.5649493574615367, -2.5580975097208856e-18),
    (17, 2.833213344056216, -8.500696635386325e-17),
    (19, 2.9444389791664403, 1.9776172119535626e-16),
    (23, 3.1354942159291497, 1.5758359867283186e-17),
    (29, 3.367295829986474, -1.1553104240685565e-16),
    (31, 3.4339872044851463, -2.5863763694297672e-17),
    (37, 3.6109179126442243, 9.643918385970854e-17),
    (41, 3.713572066704308, -1.4628004942704776e-16),
];

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `P̃_{1j}` at α = 1 from `(1/(j-1)) Σ_{k=1}^{j-1} C(j-1,k) (-1)^{k+1} log(k+1)`.
///
/// The terms cancel to many digits, so `log(k+1)` is split over prime factors: the
/// integer weight of each `log p` is accumulated exactly and the final combination
/// is done in double-double arithmetic. Limited to `j <= 40`.
pub fn last_coalescence_limit_alternating_sum(j: usize) -> Result<f64> {
    if !(2..=ALTERNATING_SUM_MAX_J).contains(&j) {
        return domain(format!(
            "alternating sum is evaluated for 2 <= j <= {ALTERNATING_SUM_MAX_J}, got {j}"
        ));
    }
    let n = (j - 1) as u32;
    let mut weights = [0i128; LOG_PRIMES.len()];
    let mut binom: i128 = 1;
    for k in 1..=n {
        binom = binom * (n - k + 1) as i128 / k as i128;
        let sign: i128 = if k % 2 == 1 { 1 } else { -1 };
        let mut m = k + 1;
        for (slot, &(p, _, _)) in LOG_PRIMES.iter().enumerate() {
            while m % p == 0 {
                weights[slot] += sign * binom;
                m /= p;
            }
        }
        debug_assert_eq!(m, 1);
    }
    let (mut hi, mut lo) = (0.0f64, 0.0f64);
    for (w, &(_, lh, ll)) in weights.iter().zip(LOG_PRIMES.iter()) {
        let wf = *w as f64; // exact: |w| < 2^53
        let p = wf * lh;
        let perr = wf.mul_add(lh, -p);
        let (s, e) = two_sum(hi, p);
        hi = s;
        lo += e + perr + wf * ll;
    }
    Ok((hi + lo) / n as f64)
}

/// `Σ_{m ≥ J} Λ_{m+1,1} x^m`, the generating tail of the rates to one block.
fn rate_to_one_tail(alpha: f64, big_j: usize, x: f64, c: f64) -> f64 {
    let l = ln_complement(x, c);
    // whole series Σ_{m≥1}: ((1-x)^{α-1} - 1)/(1-α), or -ln(1-x) at α = 1
    let whole = if alpha == 1.0 {
        -l
    } else {
        ((alpha - 1.0) * l).exp_m1() / (1.0 - alpha)
    };
    // term_m = Λ_{m+1,1} x^m, term_{m+1}/term_m = x (m+1-α)/(m+1)
    let mut term = x; // m = 1: Λ_{2,1} = 1
    let mut partial = 0.0;
    for m in 1..big_j {
        partial += term;
        term *= x * (m as f64 + 1.0 - alpha) / (m as f64 + 1.0);
    }
    // near x = 1 the direct tail converges too slowly; the difference is then safe
    // because the tail is not small against the whole series
    if x > 0.9 || partial < 0.5 * whole {
        return (whole - partial).max(0.0);
    }
    let mut sum = 0.0f64;
    let mut m = big_j as f64;
    while term > 1e-18 * sum || sum == 0.0 {
        sum += term;
        term *= x * (m + 1.0 - alpha) / (m + 1.0);
        m += 1.0;
        if term == 0.0 {
            break;
        }
    }
    sum
}

/// `P̃_{1j}` for `j = 2..=j_max` with the tail mass `Σ_{j>j_max} P̃_{1j}` computed as
/// its own integral.
pub fn last_coalescence_limit_distribution(alpha: f64, j_max: usize) -> Result<DiscreteDistribution> {
    check_alpha(alpha)?;
    if j_max < 2 {
        return domain(format!("j_max must be at least 2, got {j_max}"));
    }
    let probabilities = (2..=j_max)
        .map(|j| last_coalescence_limit(alpha, j))
        .collect::<Result<Vec<_>>>()?;
    // a share of a unit total, so an absolute floor is the meaningful accuracy
    let truncation_mass = alpha
        * integrate_01_split_mixed(
            |x, c| rate_to_one_tail(alpha, j_max, x, c) * limit_kernel(alpha, x, c),
            TRUNCATION_ABS_TOL,
            QUAD_REL_TOL,
        )?
        .value;
    Ok(DiscreteDistribution {
        support_start: 2,
        probabilities,
        truncation_mass,
    })
}

/// `Σ_{j≥2} P̃_{1j} s^j` for `s ∈ [0, 1]`.
pub fn last_coalescence_gf(alpha: f64, s: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(0.0..=1.0).contains(&s) {
        return domain(format!("last_coalescence_gf requires s in [0, 1], got {s}"));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    integrate(|x, c| {
        let y = s * x;
        let cy = (1.0 - s) + s * c;
        let ly = ln_complement(y, cy);
        let lx = ln_complement(x, c);
        let ratio = if alpha == 1.0 {
            ly / lx
        } else {
            ((alpha - 1.0) * ly).exp_m1() / -((1.0 - alpha) * lx).exp_m1()
        };
        let scale = if alpha == 1.0 { s } else { alpha * s };
        scale * ratio
    })
}

/// `lim_n P(j ∈ ℛ^n)`.
pub fn hitting_prob_limit(alpha: f64, j: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if j < 2 {
        return domain(format!("hitting_prob_limit requires j >= 2, got {j}"));
    }
    Ok(alpha * beta_total_rate(alpha, j) * kernel_moment(alpha, j)?)
}

/// `lim_n P(j ∈ ℛ^n)` for `j = 2..=j_max`.
pub fn hitting_profile_limit(alpha: f64, j_max: usize) -> Result<HittingProfile> {
    check_alpha(alpha)?;
    if j_max < 2 {
        return domain(format!("j_max must be at least 2, got {j_max}"));
    }
    let values = (2..=j_max)
        .map(|j| hitting_prob_limit(alpha, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(HittingProfile {
        n: Horizon::Limit,
        values,
    })
}

/// Large-`j` behaviour of `lim_n P(j ∈ ℛ^n)`: `α - 1` for α > 1,
/// `(1-α)/Γ(α) j^{α-1}` for α < 1 and `1/ln j` at α = 1.
pub fn hitting_asymptote(alpha: f64, j: usize) -> Result<f64> {
    check_alpha(alpha)?;
    if j < 2 {
        return domain(format!("hitting_asymptote requires j >= 2, got {j}"));
    }
    let jf = j as f64;
    Ok(if alpha > 1.0 {
        alpha - 1.0
    } else if alpha < 1.0 {
        (1.0 - alpha) * ((alpha - 1.0) * jf.ln() - log_gamma(alpha)?).exp()
    } else {
        1.0 / jf.ln()
    })
}
