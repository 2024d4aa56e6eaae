use crate::cli::Model;
use crate::report::{GofTest, Row};
use crate::{Ctx, HarnessError, Result};
use coalesce_core::simulator::{
    sim_block_counting, sim_bs_branching, sim_bs_depth, sim_fixation_line, sim_lookdown, sim_partition_coalescent,
};
use coalesce_core::stats::{binomial_se, exponential_cdf, gumbel_cdf, ks_one_sample, mean_and_se};
use std::fmt::Write as _;
use std::path::Path;

pub(crate) const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Frequency row with a Wald standard error (floored at `1/R`).
pub(crate) fn frequency_row(j: usize, hits: usize, replicas: usize) -> Row {
    let p = hits as f64 / replicas as f64;
    Row::indexed(j).empirical(p, binomial_se(p, replicas))
}

fn mean_row(row: Row, samples: &[f64]) -> Row {
    let (m, se) = mean_and_se(samples);
    row.empirical(m, se)
}

fn write_samples(path: Option<&Path>, lines: impl Iterator<Item = String>) -> Result<()> {
    if let Some(p) = path {
        let mut text = String::new();
        for l in lines {
            let _ = writeln!(text, "{l}");
        }
        std::fs::write(p, text)?;
    }
    Ok(())
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

pub(crate) fn run(model: Model, ctx: &mut Ctx, samples: Option<&Path>) -> Result<(Vec<Row>, Vec<GofTest>, Vec<String>)> {
    let r = ctx.config.replicas;
    let mut notes = Vec::new();
    let mut tests = Vec::new();
    let rows = match model {
        Model::BlockCounting => {
            let n = ctx.n();
            let runs = sim_block_counting(&ctx.sim(n))?;
            let depths: Vec<f64> = runs.iter().map(|t| t.absorption_time().unwrap_or(0.0)).collect();
            write_samples(
                samples,
                runs.iter().map(|t| {
                    let path: Vec<String> = t.states.iter().map(|s| s.to_string()).collect();
                    format!("{} {}", real(t.absorption_time().unwrap_or(0.0)), path.join(" "))
                }),
            )?;
            let (m, se) = mean_and_se(&depths);
            notes.push(format!("mean depth τ_1^{n} = {m:.6} ± {se:.6}"));
            notes.push("rows hold the frequency of visiting j".into());
            (1..=n)
                .map(|j| frequency_row(j, runs.iter().filter(|t| t.visits(j)).count(), r))
                .collect()
        }
        Model::Partition => {
            let big_n = ctx.levels();
            let runs = sim_partition_coalescent(&ctx.sim(big_n))?;
            write_samples(
                samples,
                runs.iter().map(|run| {
                    let recs: Vec<String> = run.records.iter().map(|s| s.to_string()).collect();
                    recs.join(" ")
                }),
            )?;
            notes.push("rows hold the frequency of i being a record".into());
            (2..=big_n)
                .map(|i| frequency_row(i, runs.iter().filter(|run| run.is_record(i)).count(), r))
                .collect()
        }
        Model::FixationLine => {
            let start = ctx.j();
            let cap = ctx.levels();
            let runs = sim_fixation_line(&ctx.sim(cap).start(start))?;
            let hits: Vec<f64> = runs.iter().filter_map(|t| t.first_time(|s| s >= cap)).collect();
            write_samples(samples, hits.iter().map(|&h| real(h)))?;
            let (m, se) = mean_and_se(&hits);
            notes.push(format!("mean hitting time of level {cap} from {start} = {m:.6} ± {se:.6}"));
            notes.push("rows hold the frequency of visiting level j".into());
            (start..cap)
                .map(|j| frequency_row(j, runs.iter().filter(|t| t.visits(j)).count(), r))
                .collect()
        }
        Model::Lookdown => {
            let big_n = ctx.levels();
            let mut cfg = ctx.sim(big_n);
            if let Some(t) = ctx.config.t {
                cfg = cfg.horizon(t);
            }
            let runs = sim_lookdown(&cfg)?;
            let broken = runs.iter().filter(|run| !run.coupling_holds).count();
            tests.push(GofTest {
                name: "lookdown coupling".into(),
                statistic: broken as f64,
                p_value: None,
                rule: "no run violates the coupling".into(),
                pass: broken == 0,
            });
            write_samples(
                samples,
                runs.iter().map(|run| {
                    let times: Vec<String> = (1..big_n)
                        .map(|j| run.hitting_time(j, big_n).map(real).unwrap_or_else(|| "-".into()))
                        .collect();
                    times.join(" ")
                }),
            )?;
            notes.push(format!("rows hold the mean time for L_j to reach level {big_n}, over runs that reach it"));
            (1..big_n)
                .map(|j| {
                    let times: Vec<f64> = runs.iter().filter_map(|run| run.hitting_time(j, big_n)).collect();
                    let row = Row::indexed(j);
                    if times.len() < 2 {
                        return row.flag("not reached");
                    }
                    let row = mean_row(row, &times);
                    if times.len() < r {
                        row.flag(format!("reached in {} runs", times.len()))
                    } else {
                        row
                    }
                })
                .collect()
        }
        Model::BsBranching => {
            let t = ctx.t();
            let out = sim_bs_branching(t, &ctx.sim(2))?;
            let stats: Vec<f64> = out.iter().map(|s| s.statistic).collect();
            write_samples(samples, out.iter().map(|s| real(s.log_population)))?;
            let continued = out.iter().filter(|s| !s.exact).count();
            let capped = out.iter().filter(|s| s.over_cap).count();
            let ks = ks_one_sample(&stats, exponential_cdf)?;
            notes.push(format!("KS distance of e^(-t) log L_1(t) to Exp(1): {:.6}", ks.statistic));
            notes.push(format!("{continued} runs used the stable continuation, {capped} exceeded the hard cap"));
            notes.push("rows hold the empirical CDF of e^(-t) log L_1(t) at x".into());
            (0..=20)
                .map(|k| {
                    let x = 0.25 * k as f64;
                    let hits = stats.iter().filter(|&&v| v <= x).count();
                    let p = hits as f64 / r as f64;
                    let mut row = Row::at(x).empirical(p, binomial_se(p, r));
                    row.reference = Some(exponential_cdf(x));
                    row
                })
                .collect()
        }
        Model::BsDepth => {
            let n = ctx.n();
            if n < 3 {
                return Err(HarnessError::Usage("bs-depth needs --n >= 3".into()));
            }
            let out = sim_bs_depth(n, &ctx.sim(n))?;
            write_samples(samples, out.iter().map(|&v| real(v)))?;
            let ks = ks_one_sample(&out, gumbel_cdf)?;
            notes.push(format!("KS distance of τ_1^n - log log n to the standard Gumbel: {:.6}", ks.statistic));
            let mut row = mean_row(Row::indexed(n), &out);
            row.reference = Some(EULER_GAMMA);
            vec![row]
        }
    };
    Ok((rows, tests, notes))
}
