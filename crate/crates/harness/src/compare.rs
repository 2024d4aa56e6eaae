use crate::cli::CompareQuantity;
use crate::report::{GofTest, Row, P_THRESHOLD};
use crate::simulate::EULER_GAMMA;
use crate::{Ctx, HarnessError, Result};
use coalesce_core::analytics;
use coalesce_core::numerics::{log_gamma, RenewalSequence};
use coalesce_core::simulator::{
    sim_block_counting, sim_bs_branching, sim_bs_depth, sim_depth, sim_fixation_line, sim_partition_coalescent,
};
use coalesce_core::stats::{
    binomial_se, chi_square, exponential_cdf, gumbel_cdf, ks_one_sample, ks_two_sample, mean_and_se,
};

/// Largest `n` for which the exact finite-`n` mean depth is computed (quadratic cost).
pub const EXACT_DEPTH_MAX_N: usize = 20_000;

/// Engineering tolerance on the centred Bolthausen-Sznitman depth mean.
pub const GUMBEL_MEAN_TOLERANCE: f64 = 0.15;

/// Cells expected to hold fewer counts than this are pooled before χ².
const MIN_EXPECTED: f64 = 5.0;

/// Row with a binomial standard error taken from the exact probability.
fn probability_row(j: usize, exact: f64, hits: usize, replicas: usize) -> Row {
    let p = hits as f64 / replicas as f64;
    Row::indexed(j)
        .exact(exact)
        .empirical(p, binomial_se(exact, replicas))
        .scored()
}

fn p_test(name: &str, statistic: f64, p_value: f64) -> GofTest {
    GofTest {
        name: name.into(),
        statistic,
        p_value: Some(p_value),
        rule: format!("p >= {P_THRESHOLD}"),
        pass: p_value >= P_THRESHOLD,
    }
}

/// χ² over cells with enough expected mass, the rest pooled into one cell.
fn pooled_chi_square(counts: &[u64], probs: &[f64]) -> Result<GofTest> {
    let total: u64 = counts.iter().sum();
    let mut oc = Vec::new();
    let mut pc = Vec::new();
    let (mut o_pool, mut p_pool) = (0u64, 0.0);
    for (&o, &p) in counts.iter().zip(probs) {
        if p * total as f64 >= MIN_EXPECTED {
            oc.push(o);
            pc.push(p);
        } else {
            o_pool += o;
            p_pool += p;
        }
    }
    if o_pool > 0 || p_pool > 0.0 {
        oc.push(o_pool);
        pc.push(p_pool);
    }
    if oc.len() < 2 {
        return Ok(GofTest {
            name: "chi-square".into(),
            statistic: 0.0,
            p_value: Some(1.0),
            rule: "single cell, nothing to test".into(),
            pass: true,
        });
    }
    let res = chi_square(&oc, &pc)?;
    Ok(p_test("chi-square", res.statistic, res.p_value))
}

fn sibuya_cdf(beta: f64, m: f64) -> Result<f64> {
    // P(L > m) = Γ(m+1-β) / (Γ(1-β) Γ(m+1))
    Ok(1.0 - (log_gamma(m + 1.0 - beta)? - log_gamma(1.0 - beta)? - log_gamma(m + 1.0)?).exp())
}

pub(crate) fn run(q: CompareQuantity, ctx: &mut Ctx) -> Result<(Vec<Row>, Vec<GofTest>, Vec<String>)> {
    let r = ctx.config.replicas;
    let mut notes = Vec::new();
    let mut tests = Vec::new();
    let rows = match q {
        CompareQuantity::LastCoalescence => {
            let n = ctx.n();
            let exact = analytics::last_coalescence_finite(&ctx.measure, n)?;
            let runs = sim_block_counting(&ctx.sim(n).embedded_only())?;
            let mut counts = vec![0u64; n + 1];
            for t in &runs {
                counts[t.last_jump().expect("n >= 2").0] += 1;
            }
            let probs: Vec<f64> = (2..=n).map(|j| exact.prob(j)).collect();
            tests.push(pooled_chi_square(&counts[2..], &probs)?);
            (2..=n)
                .map(|j| probability_row(j, exact.prob(j), counts[j] as usize, r))
                .collect()
        }
        CompareQuantity::Hitting => {
            let n = ctx.n();
            let profile = analytics::hitting_profile_finite(&ctx.measure, n)?;
            let runs = sim_block_counting(&ctx.sim(n).embedded_only())?;
            let alpha = ctx.measure.alpha();
            (2..=n)
                .map(|j| {
                    let hits = runs.iter().filter(|t| t.visits(j)).count();
                    let mut row = probability_row(j, profile.get(j).expect("2 <= j <= n"), hits, r);
                    row.reference = alpha.and_then(|a| analytics::hitting_asymptote(a, j).ok());
                    row
                })
                .collect()
        }
        CompareQuantity::Records => {
            let alpha = ctx.alpha()?;
            let big_n = ctx.levels();
            let exact = analytics::record_probs(alpha, big_n)?;
            let runs = sim_partition_coalescent(&ctx.sim(big_n))?;
            (2..=big_n)
                .map(|i| {
                    let hits = runs.iter().filter(|run| run.is_record(i)).count();
                    probability_row(i, exact[i - 2], hits, r)
                })
                .collect()
        }
        CompareQuantity::Renewal => {
            let alpha = ctx.alpha()?;
            let kmax = ctx.kmax();
            let u = RenewalSequence::beta(alpha, kmax)?;
            let runs = sim_fixation_line(&ctx.sim(kmax + 2).embedded_only())?;
            notes.push("rows compare u_k with the frequency of level 1 + k in the fixation line from 1".into());
            (0..=kmax)
                .map(|k| {
                    let hits = runs.iter().filter(|t| t.visits(1 + k)).count();
                    probability_row(k, u.values()[k], hits, r)
                })
                .collect()
        }
        CompareQuantity::Depth => {
            let n = ctx.n();
            if n > EXACT_DEPTH_MAX_N {
                return Err(HarnessError::Usage(format!(
                    "compare depth computes the exact mean up to n = {EXACT_DEPTH_MAX_N}"
                )));
            }
            let exact = analytics::expected_hitting_time(&ctx.measure, 1, n)?;
            let samples = sim_depth(&ctx.sim(n), 1)?;
            let (m, se) = mean_and_se(&samples);
            let mut rows = vec![Row::indexed(n).exact(exact).empirical(m, se).scored()];
            if let Some(alpha) = ctx.measure.alpha() {
                rows.push(if alpha > 1.0 {
                    Row::default().exact(analytics::expected_depth(alpha)?).flag("limit")
                } else {
                    Row::default().flag("stays infinite")
                });
            }
            rows
        }
        CompareQuantity::TauVsAlpha => {
            let j = ctx.j();
            let n = ctx.n();
            if j < 1 || j >= n {
                return Err(HarnessError::Usage(format!("tau-vs-alpha needs 1 <= j < n, got j = {j}, n = {n}")));
            }
            let taus: Vec<f64> = sim_partition_coalescent(&ctx.sim(n))?
                .iter()
                .map(|run| run.blocks.first_time(|b| b <= j).expect("the chain reaches one block"))
                .collect();
            // an independent stream family for the fixation line
            let cfg = ctx.sim(n).start(j).seed(ctx.config.seed ^ 0x5DEE_CE66_D1CE_4E5B);
            let alphas: Vec<f64> = sim_fixation_line(&cfg)?
                .iter()
                .map(|t| t.first_time(|s| s >= n).expect("the line reaches the cap"))
                .collect();
            let ks = ks_two_sample(&taus, &alphas)?;
            tests.push(p_test("two-sample KS", ks.statistic, ks.p_value));
            let exact = analytics::expected_hitting_time(&ctx.measure, j, n)?;
            let (mt, st) = mean_and_se(&taus);
            let (ma, sa) = mean_and_se(&alphas);
            vec![
                Row::indexed(j).exact(exact).empirical(mt, st).scored().flag("tau"),
                Row::indexed(j).exact(exact).empirical(ma, sa).scored().flag("alpha"),
            ]
        }
        CompareQuantity::BsBranching => {
            let t = ctx.t();
            let out = sim_bs_branching(t, &ctx.sim(2))?;
            let beta = (-t).exp();
            let stats: Vec<f64> = out.iter().map(|s| s.statistic).collect();
            let ks = ks_one_sample(&stats, exponential_cdf)?;
            notes.push(format!(
                "KS distance of e^(-t) log L_1(t) to its Exp(1) limit: {:.6} (the exact law has an atom e^(-t) = {:.6} at 0)",
                ks.statistic, beta
            ));
            notes.push("rows compare P(L_1(t) <= m) with the exact Sibuya law of index e^(-t)".into());
            [1usize, 2, 3, 5, 10, 100, 1000, 10_000]
                .iter()
                .map(|&m| {
                    let hits = out
                        .iter()
                        .filter(|s| s.exact && s.population.is_some_and(|p| p as usize <= m))
                        .count();
                    Ok(probability_row(m, sibuya_cdf(beta, m as f64)?, hits, r))
                })
                .collect::<Result<Vec<_>>>()?
        }
        CompareQuantity::BsDepth => {
            let n = ctx.n();
            if n < 3 {
                return Err(HarnessError::Usage("bs-depth needs --n >= 3".into()));
            }
            if ctx.measure.alpha() != Some(1.0) {
                return Err(HarnessError::Usage("bs-depth needs --alpha 1".into()));
            }
            let out = sim_bs_depth(n, &ctx.sim(n))?;
            let (m, se) = mean_and_se(&out);
            let ks = ks_one_sample(&out, gumbel_cdf)?;
            notes.push(format!("KS distance to the standard Gumbel: {:.6}", ks.statistic));
            let shift = (n as f64).ln().ln();
            let mut row = Row::indexed(n).empirical(m, se);
            row.reference = Some(EULER_GAMMA);
            if n <= EXACT_DEPTH_MAX_N {
                row = row
                    .exact(analytics::expected_hitting_time(&ctx.measure, 1, n)? - shift)
                    .scored();
            } else {
                tests.push(GofTest {
                    name: "Gumbel mean".into(),
                    statistic: (m - EULER_GAMMA).abs(),
                    p_value: None,
                    rule: format!("|mean - γ| <= {GUMBEL_MEAN_TOLERANCE}"),
                    pass: (m - EULER_GAMMA).abs() <= GUMBEL_MEAN_TOLERANCE,
                });
            }
            vec![row]
        }
    };
    Ok((rows, tests, notes))
}
