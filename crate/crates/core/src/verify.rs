//! The acceptance gate. Each check returns a [`Criterion`] with what it
//! expected, what it got and the tolerance used; nothing panics.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{unique_maximizer, ChannelModel};
use crate::codebook::{CodebookBuilder, FixedFraction, Mpa, SplitRule, DEFAULT_EPSILON};
use crate::oracles::{discrete_exact_delay, n2_delay, n2_entropy};
use crate::prob::{optimal_threshold, region_mass, success_prob, Region};
use crate::sim::{run_batch, BatchConfig, DEFAULT_MAX_MINISLOTS};
use crate::strategy::StrategyKind;

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<4} {} ({:.2}s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub slots: u64,
    pub seed: u64,
    pub max_minislots: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            slots: 1_000_000,
            seed: 42,
            max_minislots: DEFAULT_MAX_MINISLOTS,
        }
    }
}

impl VerifyConfig {
    fn batch(&self) -> BatchConfig {
        BatchConfig::new(self.slots, self.max_minislots, self.seed)
    }
}

/// Collects sub-check failures for one criterion.
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn close(&mut self, what: &str, actual: f64, expected: f64, tol: f64) {
        let within = (actual - expected).abs() <= tol;
        if !within {
            self.failures
                .push(format!("{what}: expected {expected} ± {tol}, got {actual}"));
        }
    }

    fn holds(&mut self, what: impl Into<String>, ok: bool) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    fn finish(self, id: &'static str, title: &'static str, started: Instant) -> Criterion {
        let passed = self.failures.is_empty();
        let detail = if passed {
            self.notes.join("; ")
        } else {
            self.failures.join("; ")
        };
        Criterion {
            id,
            title,
            passed,
            detail,
            elapsed: started.elapsed(),
        }
    }
}

pub const TABLE_ONE: [(f64, &str, f64); 7] = [
    (0.5, "1", 0.5),
    (0.75, "e1", 0.125),
    (0.25, "01", 0.125),
    (0.875, "ee1", 0.03125),
    (0.625, "e01", 0.03125),
    (0.375, "0e1", 0.03125),
    (0.125, "001", 0.03125),
];

/// The two-user head of the code, built with `rule` (MPA in the real gate).
pub fn table_one(rule: &dyn SplitRule) -> Criterion {
    let t = Instant::now();
    let mut c = Checks::new();
    match CodebookBuilder::new(2).rule(rule).build() {
        Ok(cb) => {
            let built = t.elapsed();
            c.holds("fewer than 7 entries", cb.entries().len() >= 7);
            for (i, (e, (y, word, p))) in cb.entries().iter().zip(TABLE_ONE).enumerate() {
                c.close(&format!("threshold {i}"), e.threshold, y, 1e-12);
                c.holds(
                    format!("codeword {i}: expected {word}, got {}", e.codeword),
                    e.codeword.to_string() == word,
                );
                c.holds(
                    format!("probability {i}: expected {p}, got {}", e.probability),
                    e.probability == p,
                );
            }
            c.holds(
                format!("build took {built:?}, limit 1s"),
                built < Duration::from_secs(1),
            );
            c.note(format!(
                "7 rows exact, built in {:.3}s",
                built.as_secs_f64()
            ));
        }
        Err(e) => c.holds(format!("build failed: {e}"), false),
    }
    c.finish("AC1", "two-user code table", t)
}

pub fn two_user_optimum() -> Criterion {
    let t = Instant::now();
    let mut c = Checks::new();
    match CodebookBuilder::new(2).epsilon(DEFAULT_EPSILON).build() {
        Ok(cb) => {
            let h = cb.entropy().estimate_bits;
            let d = cb.expected_delay().estimate;
            c.close("codebook entropy", h, 3.0, 1e-6);
            c.close("codebook delay", d, 2.0, 1e-6);
            c.note(format!("entropy {h}, delay {d}"));
        }
        Err(e) => c.holds(format!("build failed: {e}"), false),
    }
    c.holds("n2_delay(0.5) != 2", n2_delay(0.5).ok() == Some(2.0));
    c.holds("n2_entropy(0.5) != 3", n2_entropy(0.5).ok() == Some(3.0));
    let grid: Vec<f64> = (1..1000).map(|i| i as f64 * 1e-3).collect();
    for (name, f) in [
        ("n2_delay", n2_delay as fn(f64) -> crate::Result<f64>),
        ("n2_entropy", n2_entropy),
    ] {
        let argmin = grid
            .iter()
            .copied()
            .min_by(|a, b| f(*a).unwrap().total_cmp(&f(*b).unwrap()))
            .unwrap();
        c.close(&format!("{name} grid argmin"), argmin, 0.5, 1e-3);
    }
    c.finish("AC2", "two-user entropy 3 and delay 2", t)
}

pub const OSA_BOUND: f64 = 2.5070;

pub fn osa_bound(cfg: &VerifyConfig) -> Criterion {
    let t = Instant::now();
    let mut c = Checks::new();
    let mut seen = Vec::new();
    for n in [2, 4, 8, 16, 32, 64] {
        let stats =
            ChannelModel::iid(n).and_then(|ch| run_batch(&ch, StrategyKind::Osa, cfg.batch()));
        match stats {
            Ok(s) => {
                c.holds(
                    format!(
                        "N={n}: mean delay {} not below {OSA_BOUND}",
                        s.mean_delay_charged
                    ),
                    s.mean_delay_charged < OSA_BOUND,
                );
                seen.push(format!("{n}:{:.4}", s.mean_delay_charged));
            }
            Err(e) => c.holds(format!("N={n}: {e}"), false),
        }
    }
    c.holds(
        format!("took {:?}, limit 120s", t.elapsed()),
        t.elapsed() < Duration::from_secs(120),
    );
    c.note(seen.join(" "));
    c.finish("AC3", "OSA delay below 2.5070", t)
}

/// `threshold` is the solver under test.
pub fn first_threshold(threshold: &dyn Fn(&Region) -> f64) -> Criterion {
    let t = Instant::now();
    let mut c = Checks::new();
    for n in 2..=64u32 {
        match Region::full(n) {
            Ok(r) => c.close(
                &format!("N={n}"),
                threshold(&r),
                1.0 - 1.0 / n as f64,
                1e-12,
            ),
            Err(e) => c.holds(e.to_string(), false),
        }
    }
    c.note("N = 2..64 within 1e-12");
    c.finish("AC4", "first threshold 1 - 1/N", t)
}

pub fn constant_three(cfg: &VerifyConfig) -> Criterion {
    let t = Instant::now();
    let mut c = Checks::new();
    let ch = ChannelModel::constant(3).expect("three users");
    let osa = run_batch(&ch, StrategyKind::Osa, cfg.batch());
    let two = run_batch(&ch, StrategyKind::TwoSided, cfg.batch());
    match (osa, two) {
        (Ok(o), Ok(w)) => {
            c.close("OSA mean delay", o.mean_delay_charged, 2.12, 0.03);
            c.close("two-sided mean delay", w.mean_delay_charged, 1.89, 0.03);
            c.holds(
                format!(
                    "two-sided entropy {} not below OSA {}",
                    w.empirical_codeword_entropy, o.empirical_codeword_entropy
                ),
                w.empirical_codeword_entropy < o.empirical_codeword_entropy,
            );
            c.note(format!(
                "OSA {:.4} ({:.3} bits), two-sided {:.4} ({:.3} bits)",
                o.mean_delay_charged,
                o.empirical_codeword_entropy,
                w.mean_delay_charged,
                w.empirical_codeword_entropy
            ));
        }
        (o, w) => {
            for e in [o.err(), w.err()].into_iter().flatten() {
                c.holds(e.to_string(), false);
            }
        }
    }
    c.finish("AC5", "constant three-user channel", t)
}

pub fn correlated_channel() -> Criterion {
    let t = Instant::now();
    let mut c = Checks::new();
    let ch = ChannelModel::correlated(1e-6).expect("valid table");
    match (
        discrete_exact_delay(&ch, StrategyKind::DiscreteMpa),
        discrete_exact_delay(&ch, StrategyKind::DiscreteBisect),
    ) {
        (Ok(g), Ok(b)) => {
            let mut depths = g.per_state_depth();
            depths.reverse();
            c.holds(
                format!("discrete-mpa depths from the top state: {depths:?}"),
                depths == [1, 2, 3, 4, 5, 6, 6],
            );
            c.close("discrete-mpa delay", g.expected_delay, 27.0 / 7.0, 1e-3);
            c.holds(
                format!("discrete-bisect delay {} not below 27/7", b.expected_delay),
                b.expected_delay < 27.0 / 7.0,
            );
            c.close("discrete-bisect delay", b.expected_delay, 7f64.log2(), 0.5);
            for r in [&g, &b] {
                for s in &r.states {
                    c.holds(
                        format!("{} names {:?} in state {}", r.strategy, s.winner, s.state),
                        s.winner.is_some() && s.winner == unique_maximizer(&s.gains),
                    );
                }
            }
            c.note(format!(
                "discrete-mpa {:.6} {:?}, discrete-bisect {:.6} {:?}",
                g.expected_delay,
                depths,
                b.expected_delay,
                b.per_state_depth()
            ));
        }
        (g, b) => {
            for e in [g.err(), b.err()].into_iter().flatten() {
                c.holds(e.to_string(), false);
            }
        }
    }
    c.finish("AC6", "correlated discrete channel", t)
}

/// Parent mass equals resolved mass plus both children, on random splits.
pub fn conservation(seed: u64, instances: usize) -> Criterion {
    let t = Instant::now();
    let mut c = Checks::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < instances {
        let n = rng.random_range(2..=10u32);
        let (u, v): (f64, f64) = (rng.random(), rng.random());
        let (mut a, b) = (u.min(v), u.max(v));
        if rng.random_bool(0.2) {
            a = 0.0;
        }
        let Ok(region) = Region::new(a, b, n) else {
            continue;
        };
        let y = a + (b - a) * rng.random::<f64>();
        let Ok(p) = success_prob(&region, y) else {
            continue;
        };
        let parts =
            p + region_mass(&region.collision_child(y)) + region_mass(&region.idle_child(y));
        let gap = (region_mass(&region) - parts).abs();
        worst = worst.max(gap);
        c.holds(format!("({a}, {b}] N={n} y={y}: gap {gap:e}"), gap <= 1e-12);
        done += 1;
    }
    c.failures.truncate(5);
    c.note(format!("{instances} splits, worst gap {worst:e}"));
    c.finish("AC7", "tree mass conservation", t)
}

pub fn code_matches_simulation(cfg: &VerifyConfig) -> Criterion {
    let t = Instant::now();
    let mut c = Checks::new();
    for n in [2u32, 4, 8] {
        let cb = match CodebookBuilder::new(n).build() {
            Ok(cb) => cb,
            Err(e) => {
                c.holds(e.to_string(), false);
                continue;
            }
        };
        let stats = ChannelModel::iid(n as usize)
            .and_then(|ch| run_batch(&ch, StrategyKind::Mpa, cfg.batch()));
        match stats {
            Ok(s) => {
                let d = cb.expected_delay().estimate;
                let h = cb.entropy().estimate_bits;
                c.close(&format!("N={n} delay"), s.mean_delay_charged, d, 0.01);
                c.close(
                    &format!("N={n} entropy"),
                    s.empirical_codeword_entropy,
                    h,
                    0.02,
                );
                c.note(format!(
                    "N={n}: {d:.4}/{:.4} min, {h:.4}/{:.4} bits",
                    s.mean_delay_charged, s.empirical_codeword_entropy
                ));
            }
            Err(e) => c.holds(e.to_string(), false),
        }
    }
    c.finish("AC8", "exact code vs simulated MPA", t)
}

pub fn binary_expansion() -> Criterion {
    let t = Instant::now();
    let mut c = Checks::new();
    match CodebookBuilder::new(2).build() {
        Ok(cb) => {
            let mut bad = 0;
            for e in cb.entries() {
                if (e.threshold - e.codeword.binary_value()).abs() > 1e-12 {
                    bad += 1;
                    if bad <= 3 {
                        c.holds(
                            format!(
                                "{} -> {} but threshold {}",
                                e.codeword,
                                e.codeword.binary_value(),
                                e.threshold
                            ),
                            false,
                        );
                    }
                }
            }
            c.holds(format!("{bad} entries disagree"), bad == 0);
            c.note(format!("{} entries checked", cb.entries().len()));
        }
        Err(e) => c.holds(e.to_string(), false),
    }
    c.finish("AC9", "two-user binary expansion", t)
}

pub fn perturbed_first_split() -> Criterion {
    let t = Instant::now();
    let mut c = Checks::new();
    for x in [0.45, 0.49, 0.51, 0.55] {
        let (h, d) = (n2_entropy(x).unwrap(), n2_delay(x).unwrap());
        c.holds(format!("n2_entropy({x}) = {h} not above 3"), h > 3.0);
        c.holds(format!("n2_delay({x}) = {d} not above 2"), d > 2.0);
        let rule = FixedFraction(x);
        match CodebookBuilder::new(2).rule(&rule).build() {
            Ok(cb) => {
                c.close(
                    &format!("x={x} entropy"),
                    cb.entropy().estimate_bits,
                    h,
                    1e-4,
                );
                c.close(
                    &format!("x={x} delay"),
                    cb.expected_delay().estimate,
                    d,
                    1e-4,
                );
            }
            Err(e) => c.holds(e.to_string(), false),
        }
    }
    c.note("closed forms above the optimum, rebuilt codes agree within 1e-4");
    c.finish("AC10", "perturbed two-user splits", t)
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<Criterion> {
    vec![
        table_one(&Mpa),
        two_user_optimum(),
        osa_bound(cfg),
        first_threshold(&optimal_threshold),
        constant_three(cfg),
        correlated_channel(),
        conservation(cfg.seed, 10_000),
        code_matches_simulation(cfg),
        binary_expansion(),
        perturbed_first_split(),
    ]
}
