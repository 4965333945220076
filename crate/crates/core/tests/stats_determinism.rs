use longrange::genrand::{generate, validate, GenConfig, Status, Variant};
use longrange::jumps::JumpRule;
use longrange::stats::{run_sampling, run_terminal_map, staircase_bound};
use proptest::prelude::*;

#[test]
fn generated_sequences_are_legal() {
    let configs = [
        (4, "square"),
        (5, "square"),
        (3, "cube"),
        (3, "linear:2"),
        (4, "factorial"),
        (3, "geom:2"),
        (2, "odd"),
        (5, "explicit:[1,3,4,9]"),
    ];
    for (d, rule) in configs {
        let rule: JumpRule = rule.parse().unwrap();
        for variant in [Variant::V20, Variant::V21] {
            for k in 0..10_000u64 {
                let cfg = GenConfig::new(d, rule.clone(), 300, 1234 ^ k, variant);
                let out = generate(&cfg).unwrap();
                let seq = out.sequence.unwrap();
                assert!(validate(&seq, &rule), "d={d} {rule} {variant:?} seed={}", cfg.seed);
                assert_eq!(seq.len(), out.length);
                if out.status == Status::FullLength {
                    assert_eq!(out.length, 300);
                }
            }
        }
    }
}

#[test]
fn histograms_do_not_depend_on_workers() {
    let cfg = GenConfig::new(6, JumpRule::square(), 2000, 77, Variant::V20);
    let reference = run_sampling(&cfg, 20_000, 1).unwrap();
    for workers in [2, 3, 8] {
        assert_eq!(run_sampling(&cfg, 20_000, workers).unwrap(), reference, "workers={workers}");
    }
    let cfg = GenConfig::new(6, JumpRule::square(), 2000, 77, Variant::V21);
    let reference = run_terminal_map(&cfg, 20_000, 1).unwrap();
    for workers in [2, 5] {
        assert_eq!(run_terminal_map(&cfg, 20_000, workers).unwrap(), reference);
    }
}

#[test]
fn sample_k_matches_a_single_run() {
    // sample k of base seed s is the single run with seed s ^ k
    let base = 0xfeed;
    let h = run_sampling(&GenConfig::new(4, JumpRule::square(), 2000, base, Variant::V20), 5, 1).unwrap();
    let mut counts = vec![0u64; h.counts.len()];
    for k in 0..5u64 {
        let cfg = GenConfig::new(4, JumpRule::square(), 2000, base ^ k, Variant::V20);
        counts[generate(&cfg).unwrap().halt_site.unwrap()] += 1;
    }
    assert_eq!(h.counts, counts);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn staircase_holds_for_any_seed(d in 3usize..8, seed in any::<u64>()) {
        let cfg = GenConfig::new(d, JumpRule::square(), 4000, seed, Variant::V21);
        let m = run_terminal_map(&cfg, 500, 1).unwrap();
        for (&(i, n), _) in &m.counts {
            prop_assert!(i >= staircase_bound(d, n), "d={} i={} n={}", d, i, n);
        }
    }

    #[test]
    fn halting_sites_follow_the_first_jump(d in 2usize..8, seed in any::<u64>()) {
        // a site is blocked only once d jumps fit below it
        let cfg = GenConfig::new(d, JumpRule::square(), 4000, seed, Variant::V20);
        let out = generate(&cfg).unwrap();
        if let Some(j) = out.halt_site {
            prop_assert!(j > d * d);
        }
    }
}
