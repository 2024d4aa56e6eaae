use crate::cli::ExactQuantity;
use crate::report::Row;
use crate::{Ctx, HarnessError, Result};
use coalesce_core::analytics::{self, GfValue};
use coalesce_core::numerics::RenewalSequence;
use coalesce_core::rates::RateTable;

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Usage(msg.into()))
}

pub(crate) fn run(q: ExactQuantity, ctx: &mut Ctx) -> Result<(Vec<Row>, Vec<String>)> {
    let mut notes = Vec::new();
    let rows = match q {
        ExactQuantity::Rates => {
            let jmax = ctx.jmax();
            if jmax < 2 {
                return usage("--jmax must be at least 2");
            }
            let table = RateTable::new(ctx.measure.clone(), jmax)?;
            let mut rows = Vec::new();
            for j in 2..=jmax {
                let total = table.total_rate(j)?;
                let row = table.embedded_row(j)?;
                for i in 1..j {
                    let mut r = Row::indexed(j).exact(total * row[i - 1]);
                    r.i = Some(i as u64);
                    rows.push(r);
                }
            }
            notes.push("rows hold Λ_{j,i}: rate at which j blocks become i".into());
            rows
        }
        ExactQuantity::Renewal => {
            let alpha = ctx.alpha()?;
            let kmax = ctx.kmax();
            let u = RenewalSequence::beta(alpha, kmax)?;
            u.values().iter().enumerate().map(|(k, &v)| Row::indexed(k).exact(v)).collect()
        }
        ExactQuantity::Records => {
            let alpha = ctx.alpha()?;
            let imax = ctx.imax();
            if imax < 2 {
                return usage("--imax must be at least 2");
            }
            analytics::record_probs(alpha, imax)?
                .into_iter()
                .enumerate()
                .map(|(k, p)| Row::indexed(k + 2).exact(p))
                .collect()
        }
        ExactQuantity::RecordGf => {
            let alpha = ctx.alpha()?;
            let mut rows = Vec::new();
            for s in ctx.s() {
                let r = Row::at(s);
                rows.push(match analytics::record_gf(alpha, s)? {
                    GfValue::Finite(v) => r.exact(v),
                    GfValue::Infinite => r.flag("infinite"),
                });
            }
            rows
        }
        ExactQuantity::Depth => {
            let mut rows = Vec::new();
            if let Some(alpha) = ctx.measure.alpha() {
                rows.push(if alpha > 1.0 {
                    Row::default().exact(analytics::expected_depth(alpha)?).flag("limit")
                } else {
                    Row::default().flag("stays infinite")
                });
            }
            if let Some(n) = ctx.config.n {
                rows.push(Row::indexed(n).exact(analytics::expected_hitting_time(&ctx.measure, 1, n)?));
            }
            if rows.is_empty() {
                return usage("exact depth of a generic measure needs --n");
            }
            rows
        }
        ExactQuantity::LastCoalescence => {
            let n = ctx.n();
            analytics::last_coalescence_finite(&ctx.measure, n)?
                .iter()
                .map(|(j, p)| Row::indexed(j).exact(p))
                .collect()
        }
        ExactQuantity::LastCoalescenceLimit => {
            let alpha = ctx.alpha()?;
            let jmax = ctx.jmax();
            let d = analytics::last_coalescence_limit_distribution(alpha, jmax)?;
            let mut rows: Vec<Row> = d.iter().map(|(j, p)| Row::indexed(j).exact(p)).collect();
            rows.push(Row::default().exact(d.truncation_mass).flag(format!("mass above {jmax}")));
            rows
        }
        ExactQuantity::Hitting => {
            let n = ctx.n();
            analytics::hitting_profile_finite(&ctx.measure, n)?
                .iter()
                .map(|(j, p)| Row::indexed(j).exact(p))
                .collect()
        }
        ExactQuantity::HittingLimit => {
            let alpha = ctx.alpha()?;
            let jmax = ctx.jmax();
            let profile = analytics::hitting_profile_limit(alpha, jmax)?;
            profile
                .iter()
                .map(|(j, p)| {
                    let mut r = Row::indexed(j).exact(p);
                    r.reference = analytics::hitting_asymptote(alpha, j).ok();
                    r
                })
                .collect()
        }
        ExactQuantity::HittingAsymptote => {
            let alpha = ctx.alpha()?;
            let jmax = ctx.jmax();
            if jmax < 2 {
                return usage("--jmax must be at least 2");
            }
            (2..=jmax)
                .map(|j| Ok(Row::indexed(j).exact(analytics::hitting_asymptote(alpha, j)?)))
                .collect::<Result<Vec<_>>>()?
        }
        ExactQuantity::Reversed => {
            let n = ctx.n();
            let js: Vec<usize> = match ctx.config.j {
                Some(j) => vec![j],
                None => (2..=n).collect(),
            };
            let mut rows = Vec::new();
            for j in js {
                for i in 1..j {
                    let mut r = Row::indexed(j).exact(analytics::reversed_transition(&ctx.measure, n, i, j)?);
                    r.i = Some(i as u64);
                    rows.push(r);
                }
            }
            notes.push("rows hold the probability that the chain entered i from j, given that it visits i".into());
            rows
        }
    };
    Ok((rows, notes))
}
