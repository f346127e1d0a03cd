//! Reduction witnesses and their constructors.

use serde::Serialize;

use crate::error::Error;
use crate::functional::Functional;
use crate::ops::{boxplus, coproduct, meet};
use crate::problem::{medvedev_problem, Problem};
use crate::stream::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WitnessKind {
    /// The backward functional sees only the solution.
    Strong,
    /// The backward functional sees `interleave(instance, solution)`.
    Weak,
}

impl WitnessKind {
    pub fn keyword(self) -> &'static str {
        match self {
            WitnessKind::Strong => "sw",
            WitnessKind::Weak => "w",
        }
    }
}

/// A claimed reduction `source ≤ target` given by forward and backward functionals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionWitness {
    pub kind: WitnessKind,
    pub forward: Functional,
    pub backward: Functional,
    pub source: String,
    pub target: String,
}

fn f_id() -> Functional {
    Functional::identity()
}
fn p(side: u8) -> Functional {
    Functional::project(side)
}
fn tag(i: u8) -> Functional {
    Functional::tag(i)
}
fn untag() -> Functional {
    Functional::untag()
}
fn e() -> Functional {
    Functional::eval()
}
fn chain(parts: &[Functional]) -> Functional {
    Functional::chain(parts)
}
fn pair(a: &Functional, b: &Functional) -> Functional {
    Functional::interleave(a, b)
}
fn approx(phi: &Functional) -> Functional {
    Functional::approx(phi)
}
fn case(sel: &Functional, f0: &Functional, f1: &Functional) -> Functional {
    Functional::case(sel, f0, f1)
}

impl ReductionWitness {
    pub fn strong(source: &Problem, target: &Problem, forward: Functional, backward: Functional) -> Self {
        ReductionWitness {
            kind: WitnessKind::Strong,
            forward,
            backward,
            source: source.name().to_string(),
            target: target.name().to_string(),
        }
    }

    /// The same reduction with a backward functional that ignores the instance track.
    pub fn weaken(&self) -> Self {
        match self.kind {
            WitnessKind::Weak => self.clone(),
            WitnessKind::Strong => ReductionWitness {
                kind: WitnessKind::Weak,
                backward: self.weak_backward(),
                ..self.clone()
            },
        }
    }

    /// Backward functional in the form that consumes `interleave(instance, solution)`.
    fn weak_backward(&self) -> Functional {
        match self.kind {
            WitnessKind::Weak => self.backward.clone(),
            WitnessKind::Strong => Functional::compose(&self.backward, &p(1)),
        }
    }
}

fn expect_strong(w: &ReductionWitness) -> Result<(), Error> {
    match w.kind {
        WitnessKind::Strong => Ok(()),
        WitnessKind::Weak => Err(Error::KindMismatch(format!("{} ≤ {} is not strong", w.source, w.target))),
    }
}

fn expect_ends(w: &ReductionWitness, source: &str, target: &str) -> Result<(), Error> {
    if w.source == source && w.target == target {
        Ok(())
    } else {
        Err(Error::SourceTargetMismatch(format!(
            "expected {source} ≤ {target}, got {} ≤ {}",
            w.source, w.target
        )))
    }
}

/// `id : f ≤sW f`.
pub fn identity(f: &Problem) -> ReductionWitness {
    ReductionWitness::strong(f, f, f_id(), f_id())
}

/// `f ≤sW g` for single-instance `f`: send the instance anywhere in `g`, answer with a fixed solution.
pub fn constant_base(f: &Problem, g: &Problem, target_instance: usize) -> Result<ReductionWitness, Error> {
    if f.instances().len() != 1 {
        return Err(Error::NotSingleInstance(f.name().to_string()));
    }
    let sol = f.canonical_solutions(0)[0].clone();
    let inst = g
        .instances()
        .get(target_instance)
        .ok_or_else(|| Error::UnknownProblem(format!("{}[{target_instance}]", g.name())))?
        .clone();
    Ok(ReductionWitness::strong(f, g, Functional::constant(&inst), Functional::constant(&sol)))
}

/// `f ≤sW f⊞g` and `g ≤sW f⊞g`: tag forward, `e` of the matching component backward.
pub fn sw_boxplus_injections(f: &Problem, g: &Problem) -> (ReductionWitness, ReductionWitness) {
    let h = boxplus(f, g);
    let inj = |src: &Problem, i: u8| ReductionWitness::strong(src, &h, tag(i), chain(&[e(), p(i)]));
    (inj(f, 0), inj(g, 1))
}

/// From `f ≤sW h` and `g ≤sW h`, build `f⊞g ≤sW h`.
pub fn sw_boxplus_universal(
    f: &Problem,
    g: &Problem,
    w_f: &ReductionWitness,
    w_g: &ReductionWitness,
) -> Result<ReductionWitness, Error> {
    expect_strong(w_f)?;
    expect_strong(w_g)?;
    expect_ends(w_f, f.name(), &w_f.target)?;
    expect_ends(w_g, g.name(), &w_f.target)?;
    let forward = case(
        &f_id(),
        &Functional::compose(&w_f.forward, &untag()),
        &Functional::compose(&w_g.forward, &untag()),
    );
    let backward = pair(&approx(&w_f.backward), &approx(&w_g.backward));
    Ok(ReductionWitness {
        kind: WitnessKind::Strong,
        forward,
        backward,
        source: boxplus(f, g).name().to_string(),
        target: w_f.target.clone(),
    })
}

/// `f⊓g ≤sW f` (side 0) or `f⊓g ≤sW g` (side 1).
pub fn sw_meet_lower(f: &Problem, g: &Problem, side: u8) -> ReductionWitness {
    let target = if side == 0 { f } else { g };
    ReductionWitness::strong(&meet(f, g), target, p(side), tag(side))
}

/// From `k ≤sW f` and `k ≤sW g`, build `k ≤sW f⊓g`.
pub fn sw_meet_universal(
    k: &Problem,
    f: &Problem,
    g: &Problem,
    w0: &ReductionWitness,
    w1: &ReductionWitness,
) -> Result<ReductionWitness, Error> {
    expect_strong(w0)?;
    expect_strong(w1)?;
    expect_ends(w0, k.name(), f.name())?;
    expect_ends(w1, k.name(), g.name())?;
    let backward = case(
        &f_id(),
        &Functional::compose(&w0.backward, &untag()),
        &Functional::compose(&w1.backward, &untag()),
    );
    Ok(ReductionWitness::strong(k, &meet(f, g), pair(&w0.forward, &w1.forward), backward))
}

/// `f ≤W f⊔g` and `g ≤W f⊔g`.
pub fn w_coproduct_injections(f: &Problem, g: &Problem) -> (ReductionWitness, ReductionWitness) {
    let h = coproduct(f, g);
    let inj = |src: &Problem, i: u8| ReductionWitness {
        kind: WitnessKind::Weak,
        forward: tag(i),
        backward: chain(&[untag(), p(1)]),
        source: src.name().to_string(),
        target: h.name().to_string(),
    };
    (inj(f, 0), inj(g, 1))
}

/// From `f ≤W h` and `g ≤W h` (strong witnesses are weakened), build `f⊔g ≤W h`.
pub fn w_coproduct_universal(
    f: &Problem,
    g: &Problem,
    w_f: &ReductionWitness,
    w_g: &ReductionWitness,
) -> Result<ReductionWitness, Error> {
    expect_ends(w_f, f.name(), &w_f.target)?;
    expect_ends(w_g, g.name(), &w_f.target)?;
    let forward = case(
        &f_id(),
        &Functional::compose(&w_f.forward, &untag()),
        &Functional::compose(&w_g.forward, &untag()),
    );
    // On interleave(tag(i,p), q) run branch i on interleave(p, q) and tag the answer.
    let reshape = pair(&chain(&[untag(), p(0)]), &p(1));
    let branch = |w: &ReductionWitness, i: u8| chain(&[tag(i), w.weak_backward(), reshape.clone()]);
    let backward = case(&p(0), &branch(w_f, 0), &branch(w_g, 1));
    Ok(ReductionWitness {
        kind: WitnessKind::Weak,
        forward,
        backward,
        source: coproduct(f, g).name().to_string(),
        target: w_f.target.clone(),
    })
}

/// `f⊞g ≤sW f⊔g`: identity forward; backward approximates the tagged answer and pads with `0^ω`.
pub fn sw_boxplus_le_coproduct(f: &Problem, g: &Problem) -> ReductionWitness {
    let zero = Functional::constant(&Stream::zeros());
    let a = approx(&untag());
    let backward = case(&f_id(), &pair(&a, &zero), &pair(&zero, &a));
    ReductionWitness::strong(&boxplus(f, g), &coproduct(f, g), f_id(), backward)
}

/// `(f⊓h)⊞(g⊓h) ≤sW (f⊞g)⊓h`.
pub fn sw_distrib_meet_boxplus(f: &Problem, g: &Problem, h: &Problem) -> ReductionWitness {
    let source = boxplus(&meet(f, h), &meet(g, h));
    let target = meet(&boxplus(f, g), h);
    let forward = pair(&pair(&p(0), &chain(&[p(0), p(1)])), &chain(&[p(1), p(1)]));
    let left = |side: u8| approx(&chain(&[tag(0), e(), p(side), untag()]));
    let backward = case(
        &f_id(),
        &pair(&left(0), &left(1)),
        &pair(&approx(&f_id()), &approx(&f_id())),
    );
    ReductionWitness::strong(&source, &target, forward, backward)
}

/// `(f⊔g)⊓h ≤sW (f⊓h)⊔(g⊓h)`.
pub fn sw_distrib_coproduct_meet(f: &Problem, g: &Problem, h: &Problem) -> ReductionWitness {
    let source = meet(&coproduct(f, g), h);
    let target = coproduct(&meet(f, h), &meet(g, h));
    let forward = pair(&chain(&[p(0), p(0)]), &pair(&chain(&[p(1), p(0)]), &p(1)));
    let chi0 = Functional::constant(&Stream::chi(0));
    let backward = case(&untag(), &pair(&chi0, &pair(&p(0), &chain(&[p(1), untag()]))), &untag());
    ReductionWitness::strong(&source, &target, forward, backward)
}

/// Both directions of the equivalence between the two presentations of `f⊞g`.
pub fn sw_simplejoin_iso(f: &Problem, g: &Problem) -> (ReductionWitness, ReductionWitness) {
    let h = boxplus(f, g);
    (identity(&h), identity(&h))
}

/// `f⊞g ≤sW g⊞f`.
pub fn sw_commute(f: &Problem, g: &Problem) -> ReductionWitness {
    let forward = case(&f_id(), &chain(&[tag(1), untag()]), &chain(&[tag(0), untag()]));
    ReductionWitness::strong(&boxplus(f, g), &boxplus(g, f), forward, pair(&p(1), &p(0)))
}

/// `(f⊞g)⊞h ≤sW f⊞(g⊞h)`.
pub fn sw_assoc(f: &Problem, g: &Problem, h: &Problem) -> ReductionWitness {
    let source = boxplus(&boxplus(f, g), h);
    let target = boxplus(f, &boxplus(g, h));
    let forward = case(
        &f_id(),
        &case(
            &untag(),
            &chain(&[tag(0), untag(), untag()]),
            &chain(&[tag(1), tag(0), untag(), untag()]),
        ),
        &chain(&[tag(1), tag(1), untag()]),
    );
    // interleave(a, b) with e(b) = interleave(a', b')  ↦  interleave(a_{interleave(a, a')}, b')
    let backward = pair(
        &approx(&pair(&p(0), &chain(&[p(0), e(), p(1)]))),
        &chain(&[p(1), e(), p(1)]),
    );
    ReductionWitness::strong(&source, &target, forward, backward)
}

/// `f⊞(g⊞h) ≤sW (f⊞g)⊞h`.
pub fn sw_assoc_inverse(f: &Problem, g: &Problem, h: &Problem) -> ReductionWitness {
    let source = boxplus(f, &boxplus(g, h));
    let target = boxplus(&boxplus(f, g), h);
    let forward = case(
        &f_id(),
        &chain(&[tag(0), tag(0), untag()]),
        &case(
            &untag(),
            &chain(&[tag(0), tag(1), untag(), untag()]),
            &chain(&[tag(1), untag(), untag()]),
        ),
    );
    // interleave(A, b') with e(A) = interleave(a, a')  ↦  interleave(a, a_{interleave(a', b')})
    let backward = pair(
        &chain(&[p(0), e(), p(0)]),
        &approx(&pair(&chain(&[p(1), e(), p(0)]), &p(1))),
    );
    ReductionWitness::strong(&source, &target, forward, backward)
}

/// Transitivity. Strong composed with strong stays strong; otherwise the instance track is threaded.
pub fn compose_witnesses(w1: &ReductionWitness, w2: &ReductionWitness) -> Result<ReductionWitness, Error> {
    if w1.target != w2.source {
        return Err(Error::SourceTargetMismatch(format!(
            "{} ≤ {} cannot be followed by {} ≤ {}",
            w1.source, w1.target, w2.source, w2.target
        )));
    }
    let forward = Functional::compose(&w2.forward, &w1.forward);
    let (kind, backward) = match (w1.kind, w2.kind) {
        (WitnessKind::Strong, WitnessKind::Strong) => {
            (WitnessKind::Strong, Functional::compose(&w1.backward, &w2.backward))
        }
        _ => {
            // interleave(p, r) ↦ Ψ1(interleave(p, Ψ2(interleave(Φ1(p), r))))
            let inner = Functional::compose(&w2.weak_backward(), &pair(&Functional::compose(&w1.forward, &p(0)), &p(1)));
            (WitnessKind::Weak, Functional::compose(&w1.weak_backward(), &pair(&p(0), &inner)))
        }
    };
    Ok(ReductionWitness {
        kind,
        forward,
        backward,
        source: w1.source.clone(),
        target: w2.target.clone(),
    })
}

const MEMBERSHIP_FUEL: u64 = 1 << 16;
const MEMBERSHIP_HORIZON: usize = 256;

/// Whether `phi` sends every instance of `d_b` onto some instance of `d_a` (compared on a long prefix).
pub fn medvedev_reflects(phi: &Functional, d_a: &Problem, d_b: &Problem) -> Result<(), Error> {
    let targets: Vec<Vec<u8>> = d_a
        .instances()
        .iter()
        .filter_map(|q| q.prefix(MEMBERSHIP_HORIZON, MEMBERSHIP_FUEL).ok())
        .collect();
    for (ix, x) in d_b.instances().iter().enumerate() {
        let image = phi.apply(x).prefix(MEMBERSHIP_HORIZON, MEMBERSHIP_FUEL).ok();
        if !image.is_some_and(|bits| targets.contains(&bits)) {
            return Err(Error::NotAMedvedevReduction(format!(
                "element {ix} of {} is not sent into {}",
                d_b.name(),
                d_a.name()
            )));
        }
    }
    Ok(())
}

/// `d_B ≤sW d_A` via `Φ_M` and the identity.
pub fn medvedev_embed(phi_m: &Functional, d_a: &Problem, d_b: &Problem) -> Result<ReductionWitness, Error> {
    medvedev_reflects(phi_m, d_a, d_b)?;
    Ok(ReductionWitness::strong(d_b, d_a, phi_m.clone(), f_id()))
}

/// `d_{A⊔B}` together with witnesses for `d_{A⊔B} ≤sW d_A⊞d_B` and back.
pub fn medvedev_join_iso(
    d_a: &Problem,
    d_b: &Problem,
) -> Result<(Problem, ReductionWitness, ReductionWitness), Error> {
    let mut elements: Vec<Stream> = d_a.instances().iter().map(|x| Stream::tag(0, x)).collect();
    elements.extend(d_b.instances().iter().map(|x| Stream::tag(1, x)));
    let join = medvedev_problem(&format!("mjoin({},{})", d_a.name(), d_b.name()), elements)?;
    let zero = Functional::constant(&Stream::zeros());
    let h = boxplus(d_a, d_b);
    let down = ReductionWitness::strong(&join, &h, f_id(), zero.clone());
    let w0 = ReductionWitness::strong(d_a, &join, tag(0), zero.clone());
    let w1 = ReductionWitness::strong(d_b, &join, tag(1), zero);
    let up = sw_boxplus_universal(d_a, d_b, &w0, &w1)?;
    Ok((join, down, up))
}

/// `d_{A×B}` together with witnesses for `d_A⊓d_B ≤sW d_{A×B}` and back.
pub fn medvedev_meet_iso(
    d_a: &Problem,
    d_b: &Problem,
) -> Result<(Problem, ReductionWitness, ReductionWitness), Error> {
    let mut elements = Vec::new();
    for x in d_a.instances() {
        for y in d_b.instances() {
            elements.push(Stream::interleave(x, y));
        }
    }
    let product = medvedev_problem(&format!("mprod({},{})", d_a.name(), d_b.name()), elements)?;
    let m = meet(d_a, d_b);
    let down = ReductionWitness::strong(&m, &product, f_id(), Functional::constant(&Stream::tag(0, &Stream::zeros())));
    let w0 = ReductionWitness::strong(&product, d_a, p(0), f_id());
    let w1 = ReductionWitness::strong(&product, d_b, p(1), f_id());
    let up = sw_meet_universal(&product, d_a, d_b, &w0, &w1)?;
    Ok((product, down, up))
}
