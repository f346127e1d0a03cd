use proptest::prelude::*;

use swjoin::approx::{approx_of, check_prefix_valid, eval, eval_scan, Validity};
use swjoin::harness::{brute_force_search, verify_witness, SearchBounds, SearchOutcome, VerifyConfig};
use swjoin::problem::{decode_completed, Completed, CompletedSpace};
use swjoin::witness::{self, WitnessKind};
use swjoin::{corpus, decode_triple, pair_nat, triple_nat, unpair_nat, BitOutcome, Functional, Stream, Verdict};

const FUEL: u64 = 1_000_000;

fn ec() -> impl Strategy<Value = Stream> {
    (prop::collection::vec(0u8..2, 0..12), 0u8..2).prop_map(|(p, t)| Stream::eventually_constant(&p, t).unwrap())
}

/// Total streams built from the stream combinators.
fn stream() -> impl Strategy<Value = Stream> {
    ec().prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Stream::interleave(&a, &b)),
            (0u8..2, inner.clone()).prop_map(|(i, a)| Stream::tag(i, &a)),
            (0u8..2, inner.clone()).prop_map(|(i, a)| a.project(i)),
            inner.prop_map(|a| eval(&approx_of(&Functional::identity(), &a))),
        ]
    })
}

/// Functionals that are total on every oracle.
fn functional() -> impl Strategy<Value = Functional> {
    let leaf = prop_oneof![
        Just(Functional::identity()),
        (0u8..2).prop_map(Functional::project),
        (0u8..2).prop_map(Functional::tag),
        ec().prop_map(|q| Functional::constant(&q)),
    ];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, g)| Functional::compose(&f, &g)),
            (inner.clone(), inner).prop_map(|(f, g)| Functional::interleave(&f, &g)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pairing_inverts(x in 0u128..1 << 40, y in 0u128..1 << 40) {
        let m = pair_nat(x, y).unwrap();
        prop_assert_eq!(unpair_nat(m), (x, y));
    }

    #[test]
    fn triples_invert(n in 0u128..1 << 30, s in 0u128..1 << 30, i in 0u8..2) {
        let m = triple_nat(n, s, i).unwrap();
        prop_assert_eq!(decode_triple(m), Some((n, s, i)));
    }

    #[test]
    fn queries_are_deterministic(s in stream(), n in 0u128..64) {
        prop_assert_eq!(s.query(n, FUEL), s.query(n, FUEL));
    }

    #[test]
    fn fuel_is_monotone(s in stream(), n in 0u128..64, f in 1u64..2000, extra in 0u64..100_000) {
        let lo = s.query(n, f);
        if !matches!(lo, BitOutcome::DivergedWithinFuel(_)) {
            prop_assert_eq!(s.query(n, f + extra), lo);
        }
    }

    #[test]
    fn interleave_projects_back(a in stream(), b in stream()) {
        let j = Stream::interleave(&a, &b);
        prop_assert_eq!(j.project(0).prefix(64, FUEL).unwrap(), a.prefix(64, FUEL).unwrap());
        prop_assert_eq!(j.project(1).prefix(64, FUEL).unwrap(), b.prefix(64, FUEL).unwrap());
    }

    #[test]
    fn tag_untags(i in 0u8..2, a in stream()) {
        let (j, body) = Stream::tag(i, &a).untag(8, FUEL).unwrap();
        prop_assert_eq!(j, i);
        prop_assert_eq!(body.prefix(64, FUEL).unwrap(), a.prefix(64, FUEL).unwrap());
    }

    #[test]
    fn traces_follow_the_convention(phi in functional(), p in ec()) {
        let t = phi.trace(&p, 128, FUEL);
        prop_assert_eq!(t.entries.len(), 128);
        prop_assert!(t.satisfies_convention());
    }

    #[test]
    fn use_is_sound(phi in functional(), p in ec(), q in ec(), n in 0u128..32) {
        let (_, bit, use_) = phi.converged_at(&p, n, FUEL).unwrap();
        let head = p.prefix(use_ as usize, FUEL).unwrap();
        let tail: Vec<u8> = q.prefix(64, FUEL).unwrap();
        let spliced = Stream::eventually_constant(&[head, tail].concat(), q.as_ec().unwrap().1).unwrap();
        let (_, bit2, _) = phi.converged_at(&spliced, n, FUEL).unwrap();
        prop_assert_eq!(bit, bit2);
    }

    #[test]
    fn eval_inverts_approx(phi in functional(), p in stream()) {
        let a = approx_of(&phi, &p);
        let direct = phi.apply(&p).prefix(64, FUEL).unwrap();
        prop_assert_eq!(eval_scan(&a).prefix(64, FUEL).unwrap(), direct.clone());
        prop_assert_eq!(eval(&a).prefix(64, FUEL).unwrap(), direct);
    }

    #[test]
    fn approximations_are_valid_and_uniform(phi in functional(), p in ec()) {
        let a = approx_of(&phi, &p);
        prop_assert_eq!(check_prefix_valid(&a, 128, FUEL).unwrap(), Validity::Valid);
        prop_assert_eq!(a.prefix(256, FUEL).unwrap(), approx_of(&phi, &p).prefix(256, FUEL).unwrap());
    }

    #[test]
    fn completion_is_stable_under_fuel(p in stream(), extra in 0u64..1_000_000) {
        let space = CompletedSpace::cantor(16);
        let a = decode_completed(&space, &p, FUEL);
        let b = decode_completed(&space, &p, FUEL + extra);
        let clash = matches!((&a, &b), (Completed::Point(_), Completed::Infinity) | (Completed::Infinity, Completed::Point(_)));
        prop_assert!(!clash);
    }

    #[test]
    fn checker_verdicts_are_monotone(
        f in 0usize..6,
        g in 0usize..6,
        op in 0usize..3,
        ix in 0usize..4,
        cand in stream(),
        d in 1usize..24,
        extra in 0usize..40,
    ) {
        let c = corpus();
        let mut r = c.registry();
        let name = format!(
            "{}({},{})",
            ["coproduct", "meet", "boxplus"][op],
            c.atoms[f].name(),
            c.atoms[g].name()
        );
        let p = r.resolve(&name).unwrap();
        let ix = ix % p.instances().len();
        let lo = p.check(ix, &cand, d, FUEL);
        let hi = p.check(ix, &cand, d + extra, FUEL);
        // Yes is relative to the depth read; No is definitive.
        if let Verdict::No { .. } = lo {
            prop_assert!(matches!(hi, Verdict::No { .. }), "{:?}", hi);
        }
        if hi.is_yes() {
            prop_assert!(!matches!(lo, Verdict::No { .. }), "{:?}", lo);
        }
        if let Verdict::No { bit: Some(b), .. } = &hi {
            prop_assert!((*b as usize) < d + extra);
        }
        // More fuel never undoes a determined verdict.
        let small = p.check(ix, &cand, d, 200);
        if !matches!(small, Verdict::Unknown { .. }) {
            prop_assert_eq!(small.is_yes(), lo.is_yes());
            prop_assert!(!matches!(lo, Verdict::Unknown { .. }), "{:?}", lo);
        }
    }

    #[test]
    fn canonical_solutions_pass(f in 0usize..6, g in 0usize..6) {
        let c = corpus();
        let p = swjoin::boxplus(&c.atoms[f], &c.atoms[g]);
        for ix in 0..p.instances().len() {
            for s in p.canonical_solutions(ix) {
                prop_assert!(p.check(ix, &s, 64, FUEL).is_yes());
            }
        }
    }

    #[test]
    fn strong_witnesses_pass_weakly(f in 0usize..6, g in 0usize..6, side in 0usize..2) {
        let c = corpus();
        let mut r = c.registry();
        let (a, b) = (&c.atoms[f], &c.atoms[g]);
        let (w0, w1) = witness::sw_boxplus_injections(a, b);
        let w = if side == 0 { w0 } else { w1 };
        let src = r.resolve(&w.source).unwrap();
        let tgt = r.resolve(&w.target).unwrap();
        let cfg = VerifyConfig::default();
        prop_assert!(verify_witness(&w, &src, &tgt, &cfg).unwrap().pass());
        let weak = w.weaken();
        prop_assert_eq!(weak.kind, WitnessKind::Weak);
        prop_assert!(verify_witness(&weak, &src, &tgt, &cfg).unwrap().pass());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pigeonhole_has_no_witness(use_bound in 1usize..4, stage_bound in 1usize..5, output_depth in 1usize..4, weak in any::<bool>()) {
        let c = corpus();
        let (f, g) = c.pigeonhole.unwrap();
        let kind = if weak { WitnessKind::Weak } else { WitnessKind::Strong };
        let b = SearchBounds { use_bound, stage_bound, output_depth };
        let out = brute_force_search(&f, &g, kind, b, &VerifyConfig::default()).unwrap();
        // The weak backward map may copy the instance, so only the strong search is empty.
        match kind {
            WitnessKind::Strong => prop_assert!(matches!(out, SearchOutcome::NoneWithinBounds { .. }), "{:?}", out),
            WitnessKind::Weak => prop_assert!(matches!(out, SearchOutcome::Found(_)), "{:?}", out),
        }
    }

    #[test]
    fn found_witnesses_reverify(use_bound in 1usize..4, output_depth in 1usize..4) {
        let c = corpus();
        let (f, g) = c.search_match.unwrap();
        let cfg = VerifyConfig::default();
        let b = SearchBounds { use_bound, stage_bound: 4, output_depth };
        match brute_force_search(&f, &g, WitnessKind::Strong, b, &cfg).unwrap() {
            SearchOutcome::Found(w) => prop_assert!(verify_witness(&w, &f, &g, &cfg).unwrap().pass()),
            SearchOutcome::NoneWithinBounds { .. } => prop_assert!(false, "matching pair not found"),
        }
    }
}
