use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use contention_core::channel::{unique_maximizer, ChannelModel};
use contention_core::codebook::{CodeEntry, RootOverride};
use contention_core::oracles::{discrete_exact_delay, mc_event_frequency};
use contention_core::sim::{for_each_slot, run_batch, run_on_sample, BatchConfig};
use contention_core::strategy::{MpaStrategy, StrategyKind};
use contention_core::{success_prob, Codebook, CodebookBuilder, Error, Region};

#[test]
fn winners_are_the_strongest_users() {
    let ch = ChannelModel::iid(5).unwrap();
    let mut resolved = 0u64;
    for_each_slot(
        &ch,
        StrategyKind::Osa,
        BatchConfig::new(1_000_000, 64, 11),
        |i, s, t| {
            if let Some(w) = t.winner {
                resolved += 1;
                assert_eq!(Some(w), unique_maximizer(&s.gains), "slot {i}");
            }
        },
    )
    .unwrap();
    assert_eq!(resolved, 1_000_000);

    let ch = ChannelModel::iid(3).unwrap();
    for_each_slot(
        &ch,
        StrategyKind::Mpa,
        BatchConfig::new(200_000, 64, 12),
        |i, s, t| {
            assert_eq!(t.winner, unique_maximizer(&s.gains), "slot {i}");
        },
    )
    .unwrap();
}

#[test]
fn constant_channel_elects_an_isolated_user() {
    let ch = ChannelModel::constant(3).unwrap();
    for_each_slot(
        &ch,
        StrategyKind::TwoSided,
        BatchConfig::new(100_000, 64, 4),
        |i, s, t| {
            let w = t.winner.expect("resolved");
            let last = &t.probes.last().unwrap().set;
            let aux = s.aux.as_ref().unwrap();
            assert!(last.contains(aux[w]), "slot {i}");
            assert_eq!(
                aux.iter().filter(|&&v| last.contains(v)).count(),
                1,
                "slot {i}"
            );
        },
    )
    .unwrap();
}

#[test]
fn resolve_agrees_with_simulated_mpa() {
    for n in [2u32, 3, 5] {
        let cb = CodebookBuilder::new(n).build().unwrap();
        let ch = ChannelModel::iid(n as usize).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(n));
        let mut skipped = 0;
        for _ in 0..100_000 {
            let sample = ch.sample(&mut rng);
            let (y2, y1) = sample.top_two();
            let trace = run_on_sample(&sample, &mut MpaStrategy::new(n).unwrap(), 256);
            match cb.resolve(y2, y1) {
                Ok(entry) => {
                    assert_eq!(entry.codeword, trace.codeword(), "pair ({y2}, {y1})");
                    let last = trace.probes.last().unwrap().set.first.lo;
                    assert!((entry.threshold - last).abs() <= 1e-12);
                    assert!(entry.region.contains(y2, y1));
                }
                Err(Error::UnresolvedAtCutoff { .. }) => skipped += 1,
                Err(e) => panic!("{e}"),
            }
        }
        assert!(skipped < 100, "N={n}: {skipped} pairs beyond the cutoff");
    }
}

#[test]
fn batch_is_independent_of_thread_count() {
    let ch = ChannelModel::iid(6).unwrap();
    let cfg = BatchConfig::new(50_000, 64, 99);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let single = pool
        .install(|| run_batch(&ch, StrategyKind::Mpa, cfg))
        .unwrap();
    let many = run_batch(&ch, StrategyKind::Mpa, cfg).unwrap();
    assert_eq!(single, many);
}

#[test]
fn discrete_replay_matches_simulation() {
    let ch = ChannelModel::correlated(1e-6).unwrap();
    for kind in [StrategyKind::DiscreteMpa, StrategyKind::DiscreteBisect] {
        let exact = discrete_exact_delay(&ch, kind).unwrap().expected_delay;
        let sim = run_batch(&ch, kind, BatchConfig::new(100_000, 64, 8)).unwrap();
        assert_eq!(sim.success_rate, 1.0);
        assert!(
            (sim.mean_delay_charged - exact).abs() < 3.0 * sim.delay_std_error,
            "{kind}: {exact} vs {sim:?}"
        );
    }
}

#[test]
fn discrete_strategies_on_longer_chains() {
    for k in [3usize, 9, 15] {
        let ch = ChannelModel::chain(k, 0.0).unwrap();
        let greedy = discrete_exact_delay(&ch, StrategyKind::DiscreteMpa).unwrap();
        let bisect = discrete_exact_delay(&ch, StrategyKind::DiscreteBisect).unwrap();
        for r in [&greedy, &bisect] {
            for s in &r.states {
                assert_eq!(s.winner, unique_maximizer(&s.gains), "k={k} {}", r.strategy);
            }
        }
        // the greedy walk charges 1..k-1 and k-1 again for the last state
        let walk = ((k * (k - 1) / 2 + k - 1) as f64) / k as f64;
        assert!((greedy.expected_delay - walk).abs() < 1e-12, "k={k}");
        assert!(bisect.expected_delay <= greedy.expected_delay, "k={k}");
        assert!(bisect.expected_delay <= (k as f64).log2().ceil());
    }
}

#[test]
fn monte_carlo_agrees_with_success_probability() {
    let region = Region::new(0.3, 0.9, 4).unwrap();
    let exact = success_prob(&region, 0.6).unwrap();
    let ch = ChannelModel::iid(4).unwrap();
    let est = mc_event_frequency(
        |s| {
            let (y2, y1) = s.top_two();
            0.3 < y2 && y2 <= 0.6 && 0.6 < y1 && y1 <= 0.9
        },
        &ch,
        10_000_000,
        21,
    );
    assert!(
        (est.frequency - exact).abs() < 4.0 * est.std_error,
        "{exact} vs {est:?}"
    );
}

#[test]
fn ten_user_entropy_matches_transcripts() {
    let cb = CodebookBuilder::new(10).build().unwrap();
    let ch = ChannelModel::iid(10).unwrap();
    let sim = run_batch(&ch, StrategyKind::Mpa, BatchConfig::new(1_000_000, 64, 42)).unwrap();
    let h = cb.entropy().estimate_bits;
    assert!(
        (sim.empirical_codeword_entropy - h).abs() < 0.02,
        "{h} vs {sim:?}"
    );
}

#[test]
fn sixteen_user_delay_matches_simulation() {
    let cb = CodebookBuilder::new(16).build().unwrap();
    let ch = ChannelModel::iid(16).unwrap();
    let sim = run_batch(
        &ch,
        StrategyKind::Mpa,
        BatchConfig::new(1_000_000, 4096, 42),
    )
    .unwrap();
    let d = cb.expected_delay();
    assert_eq!(sim.success_rate, 1.0);
    assert!(
        (sim.mean_delay_charged - d.estimate).abs() < 0.01,
        "{d:?} vs {sim:?}"
    );
    assert!(d.lower <= d.estimate && d.estimate <= d.upper);
}

#[test]
fn mpa_is_no_slower_than_osa() {
    for n in 3..=6 {
        let cb = CodebookBuilder::new(n as u32).build().unwrap();
        let ch = ChannelModel::iid(n).unwrap();
        let osa = run_batch(&ch, StrategyKind::Osa, BatchConfig::new(200_000, 64, 3)).unwrap();
        let d = cb.expected_delay().estimate;
        assert!(
            d <= osa.mean_delay_charged + 3.0 * osa.delay_std_error,
            "N={n}"
        );
    }
}

#[test]
fn greedy_order_and_code_invariants() {
    for n in 2..=12u32 {
        let cb = CodebookBuilder::new(n).epsilon(1e-6).build().unwrap();
        let mut by_construction: Vec<&CodeEntry> = cb.entries().iter().collect();
        by_construction.sort_by_key(|e| e.construction_index);
        for w in by_construction.windows(2) {
            assert!(
                w[1].probability <= w[0].probability * (1.0 + 1e-12),
                "N={n}"
            );
        }
        let total: f64 = cb.entries().iter().map(|e| e.probability).sum();
        assert!((total + cb.residual_mass() - 1.0).abs() < 1e-10, "N={n}");
        let thresholds: HashSet<u64> = cb.entries().iter().map(|e| e.threshold.to_bits()).collect();
        assert_eq!(thresholds.len(), cb.entries().len(), "N={n}");
        // tree paths: every codeword is a distinct node, so none is a prefix
        // of another once the terminal 1 is stripped
        let words: HashSet<String> = cb
            .entries()
            .iter()
            .map(|e| e.codeword.to_string())
            .collect();
        assert_eq!(words.len(), cb.entries().len());
        assert!(words.iter().all(|w| w.find('1') == Some(w.len() - 1)));
    }
}

/// The analytic tail makes estimates insensitive to where enumeration stops.
#[test]
fn estimates_do_not_depend_on_entry_budget() {
    for n in [3u32, 5, 9] {
        let small = CodebookBuilder::new(n)
            .max_entries(1 << 12)
            .build()
            .unwrap();
        let large = CodebookBuilder::new(n).build().unwrap();
        assert!(small.residual_mass() > large.residual_mass());
        let (ds, dl) = (small.expected_delay(), large.expected_delay());
        assert!(
            (ds.estimate - dl.estimate).abs() < 1e-5,
            "N={n}: {ds:?} {dl:?}"
        );
        assert!(ds.lower <= dl.lower && dl.upper <= ds.upper);
        let (hs, hl) = (small.entropy(), large.entropy());
        assert!((hs.estimate_bits - hl.estimate_bits).abs() < 1e-5, "N={n}");
    }
}

#[test]
fn moving_only_the_root_costs_delay_and_entropy() {
    for x in [0.45, 0.49, 0.51, 0.55] {
        let rule = RootOverride(x);
        let cb = CodebookBuilder::new(2).rule(&rule).build().unwrap();
        let d = cb.expected_delay().estimate;
        let h = cb.entropy().estimate_bits;
        assert!(d > 2.0 && h > 3.0, "x={x}: {d} {h}");
        // the root succeeds with q = 2x(1-x); each child is an optimal code
        // costing two more minislots on average
        let q = 2.0 * x * (1.0 - x);
        assert!((d - (3.0 - 2.0 * q)).abs() < 1e-6, "x={x}: {d}");
    }
}

#[test]
fn single_entry_code() {
    let full = Region::full(2).unwrap();
    let entry = CodeEntry {
        threshold: 0.5,
        codeword: "1".parse().unwrap(),
        probability: 1.0,
        depth: 1,
        region: full,
        construction_index: 0,
    };
    let cb = Codebook::from_entries(2, vec![entry]);
    assert_eq!(cb.entropy().estimate_bits, 0.0);
    assert_eq!(cb.expected_delay().estimate, 1.0);
    assert_eq!(cb.residual_mass(), 0.0);
}
