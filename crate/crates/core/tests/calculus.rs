use swjoin::corpus::Corpus;
use swjoin::harness::{verify_equivalence, verify_witness, VerifyConfig};
use swjoin::witness::{self, compose_witnesses, ReductionWitness};
use swjoin::{boxplus, corpus, meet, Overall, Problem, Registry};

fn check(reg: &mut Registry, w: &ReductionWitness) -> Overall {
    let f = reg.resolve(&w.source).unwrap();
    let g = reg.resolve(&w.target).unwrap();
    verify_witness(w, &f, &g, &VerifyConfig::default()).unwrap().overall
}

fn setup() -> (Corpus, Registry) {
    let c = corpus();
    let r = c.registry();
    (c, r)
}

fn atoms(c: &Corpus, names: &[&str]) -> Vec<Problem> {
    names.iter().map(|n| c.atom(n).unwrap().clone()).collect()
}

#[test]
fn commute_both_directions() {
    let (c, mut r) = setup();
    for f in &c.atoms {
        for g in &c.atoms {
            assert_eq!(check(&mut r, &witness::sw_commute(f, g)), Overall::Pass, "{} {}", f.name(), g.name());
        }
    }
}

#[test]
fn assoc_both_directions() {
    let (c, mut r) = setup();
    for t in [["A", "B", "D"], ["id2", "C", "K"], ["D", "id2", "D"]] {
        let [f, g, h] = <[Problem; 3]>::try_from(atoms(&c, &t)).unwrap();
        assert_eq!(check(&mut r, &witness::sw_assoc(&f, &g, &h)), Overall::Pass, "{t:?}");
        assert_eq!(check(&mut r, &witness::sw_assoc_inverse(&f, &g, &h)), Overall::Pass, "{t:?}");
    }
}

#[test]
fn meet_is_a_lower_bound_and_greatest() {
    let (c, mut r) = setup();
    for f in &c.atoms {
        for g in &c.atoms {
            assert_eq!(check(&mut r, &witness::sw_meet_lower(f, g, 0)), Overall::Pass);
            assert_eq!(check(&mut r, &witness::sw_meet_lower(f, g, 1)), Overall::Pass);
        }
    }
    // k ≤ f and k ≤ g for single-instance k gives k ≤ f⊓g.
    let [k, f, g] = <[Problem; 3]>::try_from(atoms(&c, &["A", "id2", "D"])).unwrap();
    let w0 = witness::constant_base(&k, &f, 0).unwrap();
    let w1 = witness::constant_base(&k, &g, 0).unwrap();
    let w = witness::sw_meet_universal(&k, &f, &g, &w0, &w1).unwrap();
    assert_eq!(check(&mut r, &w), Overall::Pass);
    let same = witness::sw_meet_universal(&k, &f, &f, &w0, &w0).unwrap();
    assert_eq!(check(&mut r, &same), Overall::Pass);
}

#[test]
fn coproduct_injections_and_weak_universal() {
    let (c, mut r) = setup();
    for f in &c.atoms {
        for g in &c.atoms {
            let (i0, i1) = witness::w_coproduct_injections(f, g);
            assert_eq!(check(&mut r, &i0), Overall::Pass);
            assert_eq!(check(&mut r, &i1), Overall::Pass);
            let u = witness::w_coproduct_universal(f, g, &i0, &i1).unwrap();
            assert_eq!(check(&mut r, &u), Overall::Pass);
        }
    }
}

#[test]
fn strong_witnesses_pass_when_weakened() {
    let (c, mut r) = setup();
    for f in &c.atoms {
        for g in &c.atoms {
            let (i0, _) = witness::sw_boxplus_injections(f, g);
            let down = witness::sw_boxplus_le_coproduct(f, g);
            for w in [i0, down] {
                assert_eq!(check(&mut r, &w), Overall::Pass);
                assert_eq!(check(&mut r, &w.weaken()), Overall::Pass);
            }
        }
    }
}

#[test]
fn composition_preserves_passing() {
    let (c, mut r) = setup();
    let [f, g] = <[Problem; 2]>::try_from(atoms(&c, &["id2", "D"])).unwrap();
    let (i0, _) = witness::sw_boxplus_injections(&f, &g);
    let down = witness::sw_boxplus_le_coproduct(&f, &g);
    let chain = compose_witnesses(&i0, &down).unwrap();
    assert_eq!(chain.kind, witness::WitnessKind::Strong);
    assert_eq!(check(&mut r, &chain), Overall::Pass);

    let (w1, w2) = witness::sw_simplejoin_iso(&f, &g);
    let self_map = compose_witnesses(&w1, &w2).unwrap();
    assert_eq!(check(&mut r, &self_map), Overall::Pass);

    let (j0, _) = witness::w_coproduct_injections(&f, &g);
    let up = witness::w_coproduct_universal(&f, &g, &i0.weaken(), &witness::sw_boxplus_injections(&f, &g).1).unwrap();
    let mixed = compose_witnesses(&j0, &up).unwrap();
    assert_eq!(mixed.kind, witness::WitnessKind::Weak);
    assert_eq!(check(&mut r, &mixed), Overall::Pass);

    let id = witness::identity(&f);
    assert_eq!(check(&mut r, &compose_witnesses(&id, &i0).unwrap()), Overall::Pass);
}

#[test]
fn universal_with_identity_base() {
    let (c, mut r) = setup();
    let [f, g] = <[Problem; 2]>::try_from(atoms(&c, &["id2", "K"])).unwrap();
    let wf = witness::identity(&f);
    let wg = witness::constant_base(&g, &f, 1).unwrap();
    let w = witness::sw_boxplus_universal(&f, &g, &wf, &wg).unwrap();
    assert_eq!(check(&mut r, &w), Overall::Pass);
}

#[test]
fn medvedev_isomorphisms() {
    let (c, _) = setup();
    let (d_a, d_b) = c.medvedev.clone().unwrap();
    let cfg = VerifyConfig::default();
    let (join, down, up) = witness::medvedev_join_iso(&d_a, &d_b).unwrap();
    let r = verify_equivalence(&join, &boxplus(&d_a, &d_b), &down, &up, &cfg).unwrap();
    assert_eq!(r.overall, Overall::Pass);
    let (prod, down, up) = witness::medvedev_meet_iso(&d_a, &d_b).unwrap();
    let r = verify_equivalence(&meet(&d_a, &d_b), &prod, &down, &up, &cfg).unwrap();
    assert_eq!(r.overall, Overall::Pass);
}

#[test]
fn broken_witnesses_fail() {
    let (c, mut r) = setup();
    let [a, b, d] = <[Problem; 3]>::try_from(atoms(&c, &["A", "B", "D"])).unwrap();
    let mut w = witness::sw_commute(&a, &b);
    w.backward = swjoin::Functional::identity();
    assert_eq!(check(&mut r, &w), Overall::Fail);
    let mut w = witness::sw_assoc(&a, &b, &d);
    w.backward = swjoin::Functional::project(1);
    assert_eq!(check(&mut r, &w), Overall::Fail);
    let mut w = witness::sw_distrib_meet_boxplus(&a, &b, &d);
    w.forward = swjoin::Functional::identity();
    assert_eq!(check(&mut r, &w), Overall::Fail);
    // Injection into the wrong side of the join.
    let (mut w, _) = witness::sw_boxplus_injections(&a, &b);
    w.backward = swjoin::Functional::chain(&[swjoin::Functional::eval(), swjoin::Functional::project(1)]);
    assert_eq!(check(&mut r, &w), Overall::Fail);
    // A junk component is not a valid answer.
    let (mut w, _) = witness::sw_boxplus_injections(&a, &b);
    w.backward = swjoin::Functional::project(0);
    assert_eq!(check(&mut r, &w), Overall::Fail);
}
