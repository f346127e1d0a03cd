//! Acceptance criteria 1 to 11 on the standard corpus, one line per criterion.

use std::time::{Duration, Instant};

use swjoin::harness::{SearchBounds, VerifyConfig};
use swjoin::suite::{default_grid, Verdict, IDENTITY_BITS, VALIDITY_BOUND};
use swjoin::{corpus, Corpus, Suite};

const DEPTH: usize = 48;
const FUEL: u64 = 1_000_000;

/// Wall-clock limit per criterion, in seconds.
const LIMITS: [(u8, u64); 11] = [
    (1, 10),
    (2, 10),
    (3, 60),
    (4, 60),
    (5, 5),
    (6, 60),
    (7, 120),
    (8, 30),
    (9, 30),
    (10, 120),
    (11, 5),
];

fn config() -> VerifyConfig {
    VerifyConfig {
        depth: DEPTH,
        fuel: FUEL,
        ..VerifyConfig::default()
    }
}

#[test]
fn pinned_parameters() {
    assert_eq!(IDENTITY_BITS, 256);
    assert_eq!(VALIDITY_BOUND, 512);
    let cfg = VerifyConfig::default();
    assert_eq!((cfg.depth, cfg.fuel), (DEPTH, FUEL));
    let grid = default_grid();
    assert_eq!(grid.len(), 9);
    for u in 1..=3 {
        for d in 1..=3 {
            assert!(grid.iter().any(|b: &SearchBounds| b.use_bound == u && b.output_depth == d));
        }
    }
    let c = corpus();
    assert!(c.atoms.len() >= 6);
    assert!(c.total_pairs.len() >= 10);
}

#[test]
fn acceptance() {
    let mut suite = Suite::new(corpus(), config());
    let mut failures = Vec::new();
    for (id, secs) in LIMITS {
        let start = Instant::now();
        let r = suite.criterion(id);
        let took = start.elapsed();
        let in_time = took < Duration::from_secs(secs);
        let pass = r.verdict == Verdict::Pass && in_time;
        println!(
            "criterion {id:>2} {:<16} {} ({:?}, {} checks, {} ms of {} s)",
            r.title,
            if pass { "PASS" } else { "FAIL" },
            r.verdict,
            r.checked,
            took.as_millis(),
            secs
        );
        if !pass {
            for d in &r.details {
                println!("    {d}");
            }
            failures.push(id);
        }
    }
    assert!(failures.is_empty(), "failing criteria: {failures:?}");
}

#[test]
fn exclusion_is_recorded() {
    let mut suite = Suite::new(corpus(), config());
    let r = suite.criterion(11);
    assert_eq!(r.verdict, Verdict::Pass);
    assert!(r.details.iter().any(|d| d.contains("excluded")));
}

#[test]
fn shallow_depth_is_unknown() {
    let cfg = VerifyConfig {
        depth: 1,
        ..config()
    };
    let s = swjoin::run_suite(corpus(), cfg, false);
    assert_eq!(s.overall, Verdict::Unknown);
    assert!(s.criteria.iter().any(|c| c.verdict == Verdict::Unknown));
    assert!(s.criteria.iter().all(|c| c.verdict != Verdict::Fail));
}

#[test]
fn empty_corpus_has_nothing_to_check() {
    let s = swjoin::run_suite(Corpus::empty(), config(), false);
    assert_eq!(s.overall, Verdict::NothingToCheck);
}

#[test]
fn summaries_are_deterministic() {
    let a = swjoin::run_suite(corpus(), config(), false);
    let b = swjoin::run_suite(corpus(), config(), false);
    assert_eq!(a.render(), b.render());
    assert_eq!(a.to_json(), b.to_json());
}
