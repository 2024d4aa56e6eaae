use coalesce_core::analytics::{hitting_prob_finite, record_prob};
use coalesce_core::numerics::{gamma_q, log_gamma, RenewalSequence};
use coalesce_core::rates::{embedded_transition, LambdaMeasure};
use coalesce_core::simulator::*;
use coalesce_core::stats::{binomial_se, chi_square, exponential_cdf, ks_one_sample, ks_two_sample, mean_and_se};
use proptest::prelude::*;
use std::sync::Arc;

fn beta(alpha: f64) -> LambdaMeasure {
    LambdaMeasure::beta(alpha).unwrap()
}

fn freq(hits: usize, replicas: usize) -> f64 {
    hits as f64 / replicas as f64
}

fn within_sigma(exact: f64, hits: usize, replicas: usize, sigmas: f64) -> bool {
    let z = (freq(hits, replicas) - exact) / binomial_se(exact, replicas);
    z.abs() <= sigmas
}

#[test]
fn two_blocks_absorb_in_one_step() {
    let cfg = SimConfig::new(beta(1.0), 2).replicas(50);
    for t in sim_block_counting(&cfg).unwrap() {
        assert_eq!(t.states, vec![2, 1]);
        assert!(t.holding_times.unwrap()[0] > 0.0);
    }
}

#[test]
fn last_jump_from_three_at_alpha_one() {
    let r = 100_000;
    let cfg = SimConfig::new(beta(1.0), 3).replicas(r).seed(11).embedded_only();
    let runs = sim_block_counting(&cfg).unwrap();
    let hits = runs.iter().filter(|t| t.last_jump() == Some((3, 1))).count();
    assert!(within_sigma(0.25, hits, r, 3.0), "{}", freq(hits, r));
    assert!(runs.iter().all(|t| t.holding_times.is_none()));
}

#[test]
fn block_counting_paths_are_strictly_decreasing() {
    for &alpha in &[0.3, 1.0, 1.7] {
        let cfg = SimConfig::new(beta(alpha), 3000).replicas(30).seed(3);
        for t in sim_block_counting(&cfg).unwrap() {
            assert_eq!(t.start(), 3000);
            assert_eq!(t.end(), 1);
            assert!(t.states.windows(2).all(|w| w[1] < w[0]));
            assert!(t.holding_times.as_ref().unwrap().iter().all(|&h| h > 0.0));
        }
    }
}

#[test]
fn hitting_frequency_at_fifty() {
    let r = 100_000;
    let m = beta(1.0);
    let cfg = SimConfig::new(m.clone(), 50).replicas(r).seed(5).embedded_only();
    let runs = sim_block_counting(&cfg).unwrap();
    for j in [2usize, 3, 10, 25, 49] {
        let hits = runs.iter().filter(|t| t.visits(j)).count();
        let exact = hitting_prob_finite(&m, 50, j).unwrap();
        assert!(within_sigma(exact, hits, r, 4.0), "j={j}: {} vs {exact}", freq(hits, r));
    }
}

/// χ² of 10^6 draws from state `j` on the first 50 destinations plus a tail bucket.
fn jump_law_check(alpha: f64, j: usize) {
    let m = beta(alpha);
    let sampler = BlockJumpSampler::new(&m, j).unwrap();
    let mut rng = replica_rng(99, 0);
    let cells = 50.min(j - 2);
    let mut counts = vec![0u64; cells + 1];
    for _ in 0..1_000_000 {
        let i = sampler.destination(j, &mut rng).unwrap();
        assert!(i >= 1 && i < j);
        let k = j - i - 1;
        counts[k.min(cells)] += 1;
    }
    let mut probs: Vec<f64> = (0..cells).map(|k| embedded_transition(&m, j, j - 1 - k).unwrap()).collect();
    probs.push(1.0 - probs.iter().sum::<f64>());
    let res = chi_square(&counts, &probs).unwrap();
    assert!(res.p_value > 1e-3, "alpha={alpha} j={j}: {res:?}");
}

#[test]
fn heavy_tailed_rows_are_sampled_exactly() {
    jump_law_check(0.5, 1000);
    jump_law_check(0.5, 5000);
    jump_law_check(1.0, 10_000);
    jump_law_check(1.5, 3000);
}

fn record_three_halves(i: usize) -> f64 {
    let i = i as f64;
    1.5 / ((2.0 * i - 1.0) * (2.0 * i - 3.0))
        + 0.75
            * (log_gamma(1.5).unwrap() + log_gamma(i - 1.0).unwrap() - log_gamma(i + 0.5).unwrap()).exp()
}

#[test]
fn records_of_two_blocks() {
    let cfg = SimConfig::new(beta(0.8), 2).replicas(20);
    for run in sim_partition_coalescent(&cfg).unwrap() {
        assert_eq!(run.records, vec![2]);
    }
}

#[test]
fn record_frequencies_match_closed_forms() {
    let r = 100_000;
    for &alpha in &[0.5, 1.5] {
        let cfg = SimConfig::new(beta(alpha), 10).replicas(r).seed(7);
        let runs = sim_partition_coalescent(&cfg).unwrap();
        for i in 2..=10usize {
            let exact = if alpha == 0.5 {
                0.5 * (1.0 / (2.0 * i as f64 - 3.0) + if i == 2 { 1.0 } else { 0.0 })
            } else {
                record_three_halves(i)
            };
            let hits = runs.iter().filter(|run| run.is_record(i)).count();
            assert!(within_sigma(exact, hits, r, 4.0), "alpha={alpha} i={i}: {} vs {exact}", freq(hits, r));
            if i == 2 {
                assert_eq!(hits, r);
            }
        }
    }
}

#[test]
fn partition_runs_are_pathwise_consistent() {
    let cfg = SimConfig::new(beta(0.7), 40).replicas(500).seed(1);
    for run in sim_partition_coalescent(&cfg).unwrap() {
        assert_eq!(run.depth(1), 0.0);
        assert!(run.depths[1..].windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(run.records[0], 2);
        assert_eq!(run.blocks.end(), 1);
        assert_eq!(run.blocks.absorption_time().unwrap(), run.depth(40));
    }
}

#[test]
fn first_fixation_jump_at_alpha_one() {
    let r = 100_000;
    let sampler = FixationJumpSampler::new(&beta(1.0), 1000).unwrap();
    let mut counts = vec![0u64; 21];
    let mut rng = replica_rng(8, 0);
    for _ in 0..r {
        match sampler.jump(1, &mut rng) {
            Landing::At(k) => counts[(k - 1 - 1).min(20)] += 1,
            Landing::Beyond => panic!("alpha = 1 jumps are always resolved"),
        }
    }
    // P(G = g) = 1/(g(g+1)), tail P(G > 20) = 1/21
    let mut probs: Vec<f64> = (1..=20).map(|g| 1.0 / (g as f64 * (g as f64 + 1.0))).collect();
    probs.push(1.0 / 21.0);
    let res = chi_square(&counts, &probs).unwrap();
    assert!(res.p_value > 1e-3, "{res:?}");
}

#[test]
fn mean_hitting_time_of_three() {
    let cfg = SimConfig::new(beta(1.0), 3).replicas(100_000).seed(12);
    let times: Vec<f64> = sim_fixation_line(&cfg)
        .unwrap()
        .iter()
        .map(|t| t.first_time(|s| s >= 3).unwrap())
        .collect();
    let (mean, se) = mean_and_se(&times);
    // 1/Λ_2 + P(visit 2)/Λ_3 = 1 + (1/2)/2
    assert!((mean - 1.25).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn fixation_range_is_the_renewal_measure() {
    let r = 100_000;
    for &alpha in &[0.5, 1.0, 1.5] {
        let cfg = SimConfig::new(beta(alpha), 32).replicas(r).seed(21).embedded_only();
        let runs = sim_fixation_line(&cfg).unwrap();
        let u = RenewalSequence::beta(alpha, 30).unwrap();
        for k in 0..=30usize {
            let hits = runs.iter().filter(|t| t.visits(1 + k)).count();
            assert!(within_sigma(u.values()[k], hits, r, 4.0), "alpha={alpha} k={k}");
        }
        for t in &runs {
            assert!(t.states.windows(2).all(|w| w[1] > w[0]));
            assert!(t.end() >= 32);
        }
    }
}

#[test]
fn depth_and_hitting_time_share_a_law() {
    for &alpha in &[0.5, 1.0, 1.5] {
        let m = beta(alpha);
        let taus: Vec<f64> = sim_partition_coalescent(&SimConfig::new(m.clone(), 3).replicas(20_000).seed(1))
            .unwrap()
            .iter()
            .map(|run| run.depth(3))
            .collect();
        let alphas: Vec<f64> = sim_fixation_line(&SimConfig::new(m.clone(), 3).replicas(20_000).seed(2))
            .unwrap()
            .iter()
            .map(|t| t.first_time(|s| s >= 3).unwrap())
            .collect();
        let res = ks_two_sample(&taus, &alphas).unwrap();
        assert!(res.p_value > 0.01, "alpha={alpha}: {res:?}");
        if alpha == 1.0 {
            let (mt, st) = mean_and_se(&taus);
            let (ma, sa) = mean_and_se(&alphas);
            assert!((mt - 1.25).abs() < 4.0 * st && (ma - 1.25).abs() < 4.0 * sa);
        }
    }
}

#[test]
fn lookdown_rate_and_coupling() {
    let sampler = BlockJumpSampler::new(&beta(1.0), 2).unwrap();
    assert_eq!(sampler.total_rate(2).unwrap(), 1.0);
    for &alpha in &[0.5, 1.0, 1.5] {
        let cfg = SimConfig::new(beta(alpha), 12).replicas(2000).seed(4);
        for run in sim_lookdown(&cfg).unwrap() {
            assert!(run.coupling_holds);
            assert_eq!(run.state.ancestors[0], 1);
            for line in &run.lines {
                assert!(line.states.windows(2).all(|w| w[1] > w[0]));
            }
            assert_eq!(run.lines[0].end(), 12);
        }
    }
}

#[test]
fn lookdown_hitting_times_match_the_fixation_line() {
    let m = beta(0.8);
    let from_lookdown: Vec<f64> = sim_lookdown(&SimConfig::new(m.clone(), 6).replicas(20_000).seed(5))
        .unwrap()
        .iter()
        .map(|run| run.hitting_time(2, 6).unwrap())
        .collect();
    let direct: Vec<f64> = sim_fixation_line(&SimConfig::new(m, 6).start(2).replicas(20_000).seed(6))
        .unwrap()
        .iter()
        .map(|t| t.first_time(|s| s >= 6).unwrap())
        .collect();
    let res = ks_two_sample(&from_lookdown, &direct).unwrap();
    assert!(res.p_value > 0.01, "{res:?}");
}

#[test]
fn lookdown_respects_the_horizon() {
    let cfg = SimConfig::new(beta(1.2), 8).replicas(200).seed(9).horizon(0.3);
    for run in sim_lookdown(&cfg).unwrap() {
        assert!(run.events.iter().all(|e| e.time <= 0.3));
        assert!(run.events.windows(2).all(|w| w[1].time > w[0].time));
        assert!(run.coupling_holds);
    }
}

#[test]
fn lookdown_event_update() {
    let mut s = LookdownState::new(5);
    s.apply(&[2, 4]);
    assert_eq!(s.ancestors, vec![1, 2, 3, 2, 4]);
    assert_eq!(s.fixation_lines(), vec![Some(1), Some(2), Some(4), None]);
    assert!(s.coupling_holds());
    s.apply(&[1, 2, 3]);
    assert_eq!(s.ancestors, vec![1, 1, 1, 2, 3]);
    assert!(s.coupling_holds());
}

#[test]
fn branching_at_time_zero() {
    let cfg = SimConfig::new(beta(1.0), 2).replicas(10);
    for s in sim_bs_branching(0.0, &cfg).unwrap() {
        assert_eq!(s.population, Some(1));
        assert_eq!(s.statistic, 0.0);
    }
    assert!(sim_bs_branching(1.0, &SimConfig::new(beta(0.5), 2).replicas(1)).is_err());
}

/// `P(L_1(t) > m) = Γ(m+1-β) / (Γ(1-β) Γ(m+1))`, `β = e^{-t}`.
fn sibuya_tail(beta: f64, m: f64) -> f64 {
    (log_gamma(m + 1.0 - beta).unwrap() - log_gamma(1.0 - beta).unwrap() - log_gamma(m + 1.0).unwrap()).exp()
}

#[test]
fn branching_population_law() {
    let r = 100_000;
    for &t in &[0.5f64, 1.0] {
        let b = (-t).exp();
        let cfg = SimConfig::new(beta(1.0), 2).replicas(r).seed(13);
        let samples = sim_bs_branching(t, &cfg).unwrap();
        for m in [1.0f64, 2.0, 5.0, 50.0, 1000.0] {
            let exact = 1.0 - sibuya_tail(b, m);
            let hits = samples
                .iter()
                .filter(|s| s.exact && s.population.unwrap() as f64 <= m)
                .count();
            assert!(within_sigma(exact, hits, r, 4.0), "t={t} m={m}: {} vs {exact}", freq(hits, r));
        }
        // single-particle survival: P(L_1(t) = 1) = e^{-t}
        let ones = samples.iter().filter(|s| s.population == Some(1)).count();
        assert!(within_sigma(b, ones, r, 4.0));
    }
}

#[test]
fn branching_growth_statistic_is_near_exponential() {
    let cfg = SimConfig::new(beta(1.0), 2).replicas(10_000).seed(42);
    let stats: Vec<f64> = sim_bs_branching(3.0, &cfg).unwrap().iter().map(|s| s.statistic).collect();
    let res = ks_one_sample(&stats, exponential_cdf).unwrap();
    // the exact law puts mass e^{-t} on 0, which dominates the distance to Exp(1)
    let atom = (-3f64).exp();
    assert!((res.statistic - atom).abs() <= 4.0 * binomial_se(atom, 10_000), "{res:?}");
    let zeros = stats.iter().filter(|&&x| x == 0.0).count();
    assert!((res.statistic - freq(zeros, 10_000)).abs() < 1e-12);
}

#[test]
fn positive_stable_half_matches_levy() {
    // index 1/2: P(S <= x) = erfc(1/(2√x)) = Q(1/2, 1/(4x))
    let mut rng = replica_rng(17, 0);
    let samples: Vec<f64> = (0..50_000).map(|_| positive_stable_log(0.5, &mut rng).exp()).collect();
    let res = ks_one_sample(&samples, |x| gamma_q(0.5, 0.25 / x).unwrap()).unwrap();
    assert!(res.p_value > 1e-3, "{res:?}");
    assert_eq!(positive_stable_log(1.0, &mut rng), 0.0);
}

#[test]
fn positive_stable_laplace_transform() {
    let mut rng = replica_rng(18, 0);
    for &b in &[0.2f64, 0.7, 0.999] {
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| positive_stable_log(b, &mut rng)).collect();
        for &lambda in &[0.5f64, 1.0, 3.0] {
            let vals: Vec<f64> = samples.iter().map(|&l| (-lambda * l.exp()).exp()).collect();
            let (mean, se) = mean_and_se(&vals);
            let want = (-lambda.powf(b)).exp();
            assert!((mean - want).abs() <= 4.0 * se.max(1e-6), "beta={b} lambda={lambda}: {mean} vs {want}");
        }
    }
}

#[test]
fn bs_depth_of_three() {
    let cfg = SimConfig::new(beta(1.0), 3).replicas(100_000).seed(14);
    let shift = 3f64.ln().ln();
    let samples: Vec<f64> = sim_bs_depth(3, &cfg).unwrap().iter().map(|x| x + shift).collect();
    let (mean, se) = mean_and_se(&samples);
    assert!((mean - 1.25).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn depth_means_approach_the_limit_for_alpha_three_halves() {
    let m = beta(1.5);
    let mut prev = 0.0;
    for n in [10usize, 100, 1000] {
        let exact = coalesce_core::analytics::expected_hitting_time(&m, 1, n).unwrap();
        assert!(exact > prev && exact < 2.25);
        prev = exact;
        let samples = sim_depth(&SimConfig::new(m.clone(), n).replicas(20_000).seed(15), 1).unwrap();
        let (mean, se) = mean_and_se(&samples);
        assert!((mean - exact).abs() <= 4.0 * se, "n={n}: {mean} vs {exact}");
    }
}

#[test]
fn generic_measure_runs_the_same_chain() {
    let norm = (log_gamma(0.7).unwrap() + log_gamma(1.3).unwrap()).exp();
    let density: coalesce_core::rates::Density =
        Arc::new(move |x: f64, c: f64| x.powf(-0.3) * c.powf(0.3) / norm);
    let generic = LambdaMeasure::generic(density, "beta 1.3 as a density").unwrap();
    let r = 50_000;
    let runs = sim_block_counting(&SimConfig::new(generic, 12).replicas(r).seed(16).embedded_only()).unwrap();
    let exact = coalesce_core::analytics::last_coalescence_finite(&beta(1.3), 12).unwrap();
    let mut counts = vec![0u64; 11];
    for t in &runs {
        counts[t.last_jump().unwrap().0 - 2] += 1;
    }
    let probs: Vec<f64> = (2..=12).map(|j| exact.prob(j)).collect();
    let res = chi_square(&counts, &probs).unwrap();
    assert!(res.p_value > 1e-3, "{res:?}");
}

#[test]
fn generic_fixation_line_matches_beta() {
    let norm = (log_gamma(1.4).unwrap() + log_gamma(0.6).unwrap()).exp();
    let density: coalesce_core::rates::Density =
        Arc::new(move |x: f64, c: f64| x.powf(0.4) * c.powf(-0.4) / norm);
    let generic = LambdaMeasure::generic(density, "beta 0.6 as a density").unwrap();
    let r = 50_000;
    let runs = sim_fixation_line(&SimConfig::new(generic, 15).replicas(r).seed(17).embedded_only()).unwrap();
    let u = RenewalSequence::beta(0.6, 13).unwrap();
    for k in 0..=13usize {
        let hits = runs.iter().filter(|t| t.visits(1 + k)).count();
        assert!(within_sigma(u.values()[k], hits, r, 4.0), "k={k}");
    }
}

#[test]
fn record_probability_oracle_agrees_with_display() {
    for i in 2..=10 {
        assert!((record_prob(1.5, i).unwrap() - record_three_halves(i)).abs() < 1e-12);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = SimConfig::new(beta(0.6), 40).replicas(300).seed(77);
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = one.install(|| sim_partition_coalescent(&cfg).unwrap());
    let b = three.install(|| sim_partition_coalescent(&cfg).unwrap());
    assert_eq!(a, b);
    let c = three.install(|| sim_partition_coalescent(&cfg.clone().seed(78)).unwrap());
    assert_ne!(a, c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn identical_configs_are_bit_identical(alpha in 0.1f64..1.9, n in 2usize..60, seed in any::<u64>()) {
        let cfg = SimConfig::new(beta(alpha), n).replicas(5).seed(seed);
        prop_assert_eq!(sim_block_counting(&cfg).unwrap(), sim_block_counting(&cfg).unwrap());
        prop_assert_eq!(sim_fixation_line(&cfg).unwrap(), sim_fixation_line(&cfg).unwrap());
    }

    #[test]
    fn lookdown_invariants_hold(alpha in 0.1f64..1.9, n in 2usize..25, seed in any::<u64>()) {
        let cfg = SimConfig::new(beta(alpha), n).replicas(3).seed(seed);
        for run in sim_lookdown(&cfg).unwrap() {
            prop_assert!(run.coupling_holds);
            for (idx, line) in run.lines.iter().enumerate() {
                prop_assert_eq!(line.start(), idx + 1);
                prop_assert!(line.states.windows(2).all(|w| w[1] > w[0]));
            }
        }
    }

    #[test]
    fn partition_depths_are_monotone(alpha in 0.1f64..1.9, n in 2usize..80, seed in any::<u64>()) {
        let cfg = SimConfig::new(beta(alpha), n).replicas(3).seed(seed);
        for run in sim_partition_coalescent(&cfg).unwrap() {
            prop_assert!(run.depths[1..].windows(2).all(|w| w[1] >= w[0]));
            prop_assert_eq!(run.records[0], 2);
        }
    }
}
