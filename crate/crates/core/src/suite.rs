//! The acceptance criteria as executable checks over a corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::Serialize;

use crate::approx::{approx_of, check_prefix_valid, eval_scan, Validity};
use crate::corpus::{Corpus, Registry};
use crate::error::Error;
use crate::harness::{
    brute_force_search, verify_equivalence, verify_witness, Overall, Report, SearchBounds, SearchOutcome,
    VerifyConfig,
};
use crate::ops::{boxplus, meet};
use crate::problem::Problem;
use crate::stream::Stream;
use crate::witness::{self, ReductionWitness, WitnessKind};

/// Prefix length compared by the `e ∘ a` identity check.
pub const IDENTITY_BITS: usize = 256;
/// Member bound for approximation validity.
pub const VALIDITY_BOUND: u128 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Verdict {
    Pass,
    NothingToCheck,
    Unknown,
    Fail,
    ConfigError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub title: String,
    pub verdict: Verdict,
    /// Number of individual checks performed.
    pub checked: usize,
    /// Failing or unknown checks, and notes.
    pub details: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub depth: usize,
    pub fuel: u64,
    pub criteria: Vec<CriterionResult>,
    pub overall: Verdict,
}

impl Summary {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            out.push_str(&format!("criterion {:>2} {:<16} {:?} ({} checks)", c.id, c.title, c.verdict, c.checked));
            if let Some(ms) = c.elapsed_ms {
                out.push_str(&format!(" {ms} ms"));
            }
            out.push('\n');
            for d in &c.details {
                out.push_str(&format!("    {d}\n"));
            }
        }
        out.push_str(&format!("overall {:?}\n", self.overall));
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary is plain data")
    }
}

/// Overall verdict: the worst criterion, with all-empty meaning nothing was checked.
pub fn overall(criteria: &[CriterionResult]) -> Verdict {
    criteria
        .iter()
        .map(|c| c.verdict)
        .filter(|&v| v != Verdict::NothingToCheck)
        .max()
        .unwrap_or(Verdict::NothingToCheck)
}

/// Accumulates check outcomes for one criterion.
#[derive(Debug, Default)]
struct Tally {
    checked: usize,
    overall: Option<Overall>,
    config_error: bool,
    details: Vec<String>,
}

const MAX_DETAILS: usize = 8;

impl Tally {
    fn record(&mut self, label: &str, o: Overall, why: impl FnOnce() -> String) {
        self.checked += 1;
        self.overall = Some(self.overall.unwrap_or(Overall::Pass).combine(o));
        if o != Overall::Pass && self.details.len() < MAX_DETAILS {
            self.details.push(format!("{label}: {:?}: {}", o, why()));
        }
    }

    fn ok(&mut self, label: &str, pass: bool, why: impl FnOnce() -> String) {
        self.record(label, if pass { Overall::Pass } else { Overall::Fail }, why);
    }

    fn report(&mut self, label: &str, r: &Result<Report, Error>) -> bool {
        match r {
            Ok(r) => {
                self.record(label, r.overall, || r.render().trim_end().to_string());
                r.pass()
            }
            Err(e) => {
                self.error(label, e);
                false
            }
        }
    }

    fn error(&mut self, label: &str, e: &Error) {
        self.checked += 1;
        self.config_error = true;
        if self.details.len() < MAX_DETAILS {
            self.details.push(format!("{label}: {e}"));
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.details.push(s.into());
    }

    fn verdict(&self) -> Verdict {
        if self.config_error {
            return Verdict::ConfigError;
        }
        match self.overall {
            None => Verdict::NothingToCheck,
            Some(Overall::Pass) => Verdict::Pass,
            Some(Overall::Fail) => Verdict::Fail,
            Some(Overall::Unknown) => Verdict::Unknown,
        }
    }
}

/// Upper-bound edges collected while checking the join criteria.
#[derive(Debug, Default)]
struct Order {
    nodes: BTreeSet<String>,
    edges: BTreeSet<(String, String)>,
    /// Witnesses whose verdict was not decided; their edges may be missing.
    undecided: usize,
    filled: bool,
}

/// Runs criteria against one corpus and configuration, sharing work between them.
pub struct Suite {
    pub corpus: Corpus,
    pub cfg: VerifyConfig,
    /// Bound grid for the search criterion.
    pub grid: Vec<SearchBounds>,
    pub timing: bool,
    registry: Registry,
    order: Order,
    done: BTreeMap<u8, Verdict>,
}

/// `use_bound ∈ {1,2,3}` × `output_depth ∈ {1,2,3}`.
pub fn default_grid() -> Vec<SearchBounds> {
    let mut g = Vec::new();
    for use_bound in 1..=3 {
        for output_depth in 1..=3 {
            g.push(SearchBounds {
                use_bound,
                stage_bound: 4,
                output_depth,
            });
        }
    }
    g
}

pub const TITLES: [&str; 11] = [
    "e-identity",
    "validity",
    "injections",
    "universality",
    "supremum",
    "boxplus-vs-join",
    "distributivity",
    "h-form",
    "medvedev",
    "search",
    "exclusions",
];

impl Suite {
    pub fn new(corpus: Corpus, cfg: VerifyConfig) -> Self {
        let registry = corpus.registry();
        Suite {
            corpus,
            cfg,
            grid: default_grid(),
            timing: false,
            registry,
            order: Order::default(),
            done: BTreeMap::new(),
        }
    }

    /// Run one criterion (1 to 11).
    pub fn criterion(&mut self, id: u8) -> CriterionResult {
        let start = Instant::now();
        let tally = match id {
            1 => self.c1_identity(),
            2 => self.c2_validity(),
            3 => self.c3_injections(),
            4 => self.c4_universality(),
            5 => self.c5_supremum(),
            6 => self.c6_boxplus_vs_join(),
            7 => self.c7_distributivity(),
            8 => self.c8_hform(),
            9 => self.c9_medvedev(),
            10 => self.c10_search(),
            11 => self.c11_exclusions(),
            _ => {
                let mut t = Tally::default();
                t.error("criterion", &Error::InvalidBounds(format!("no criterion {id}")));
                t
            }
        };
        self.done.insert(id, tally.verdict());
        CriterionResult {
            id,
            title: TITLES.get(id as usize - 1).unwrap_or(&"?").to_string(),
            verdict: tally.verdict(),
            checked: tally.checked,
            details: tally.details,
            elapsed_ms: self.timing.then(|| start.elapsed().as_millis() as u64),
        }
    }

    pub fn run(&mut self) -> Summary {
        let criteria: Vec<CriterionResult> = (1..=11).map(|id| self.criterion(id)).collect();
        Summary {
            depth: self.cfg.depth,
            fuel: self.cfg.fuel,
            overall: overall(&criteria),
            criteria,
        }
    }

    fn pairs(&self) -> Vec<(Problem, Problem)> {
        let a = &self.corpus.atoms;
        a.iter().flat_map(|f| a.iter().map(move |g| (f.clone(), g.clone()))).collect()
    }

    fn triples(&self) -> Vec<(Problem, Problem, Problem)> {
        let a = &self.corpus.atoms;
        let mut out = Vec::new();
        for f in a {
            for g in a {
                for h in a {
                    out.push((f.clone(), g.clone(), h.clone()));
                }
            }
        }
        out
    }

    fn check(&mut self, t: &mut Tally, w: &ReductionWitness) -> bool {
        let label = format!("{} {} <= {}", w.kind.keyword(), w.source, w.target);
        let r = self
            .registry
            .resolve(&w.source)
            .and_then(|f| Ok((f, self.registry.resolve(&w.target)?)))
            .and_then(|(f, g)| verify_witness(w, &f, &g, &self.cfg));
        t.report(&label, &r)
    }

    /// Check `w` and record its edge in the order when it passes.
    fn check_edge(&mut self, t: &mut Tally, w: &ReductionWitness) {
        let label = format!("{} {} <= {}", w.kind.keyword(), w.source, w.target);
        let r = self
            .registry
            .resolve(&w.source)
            .and_then(|f| Ok((f, self.registry.resolve(&w.target)?)))
            .and_then(|(f, g)| verify_witness(w, &f, &g, &self.cfg));
        match r.as_ref().map(|r| r.overall) {
            Ok(Overall::Pass) => {
                self.order.edges.insert((w.source.clone(), w.target.clone()));
            }
            Ok(Overall::Fail) => {}
            _ => self.order.undecided += 1,
        }
        t.report(&label, &r);
    }

    fn c1_identity(&mut self) -> Tally {
        let mut t = Tally::default();
        for (k, (phi, p)) in self.corpus.total_pairs.iter().enumerate() {
            let direct = phi.apply(p).prefix(IDENTITY_BITS, self.cfg.fuel);
            let scanned = eval_scan(&approx_of(phi, p)).prefix(IDENTITY_BITS, self.cfg.fuel);
            let label = format!("pair {k} {phi}");
            match (direct, scanned) {
                (Ok(x), Ok(y)) => t.ok(&label, x == y, || {
                    let at = x.iter().zip(&y).position(|(a, b)| a != b).unwrap_or(0);
                    format!("first difference at bit {at}")
                }),
                (Err(d), _) | (_, Err(d)) => {
                    t.record(&label, Overall::Unknown, || format!("diverged at bit {} after {} steps", d.at, d.spent))
                }
            }
        }
        t
    }

    fn c2_validity(&mut self) -> Tally {
        let mut t = Tally::default();
        let all = self.corpus.total_pairs.iter().chain(&self.corpus.partial_pairs);
        for (k, (phi, p)) in all.enumerate() {
            let label = format!("pair {k} {phi}");
            match check_prefix_valid(&approx_of(phi, p), VALIDITY_BOUND, self.cfg.fuel) {
                Ok(v) => t.ok(&label, v == Validity::Valid, || format!("{v:?}")),
                Err(d) => t.record(&label, Overall::Unknown, || format!("diverged after {} steps", d.spent)),
            }
        }
        t
    }

    fn c3_injections(&mut self) -> Tally {
        let mut t = Tally::default();
        for (f, g) in self.pairs() {
            let h = boxplus(&f, &g);
            let (w0, w1) = witness::sw_boxplus_injections(&f, &g);
            for w in [w0, w1] {
                self.check_edge(&mut t, &w);
            }
            self.order.nodes.insert(h.name().to_string());
        }
        t
    }

    /// A witness `f ≤sW h` from the base constructions, if one applies.
    fn base_witness(&self, f: &Problem, h: &Problem) -> Option<ReductionWitness> {
        if f.name() == h.name() {
            return Some(witness::identity(f));
        }
        if let Some((crate::problem::Operator::BoxPlus, x, y)) = h.operator() {
            if x.name() == f.name() {
                return Some(witness::sw_boxplus_injections(x, y).0);
            }
            if y.name() == f.name() {
                return Some(witness::sw_boxplus_injections(x, y).1);
            }
        }
        if f.instances().len() == 1 {
            return witness::constant_base(f, h, 0).ok();
        }
        None
    }

    fn c4_universality(&mut self) -> Tally {
        let mut t = Tally::default();
        let atoms = self.corpus.atoms.clone();
        let mut nodes: Vec<Problem> = atoms.clone();
        for (f, g) in self.pairs() {
            nodes.push(boxplus(&f, &g));
        }
        for n in &nodes {
            self.order.nodes.insert(n.name().to_string());
        }
        // Base witnesses f ≤ h, verified once.
        let mut base: BTreeMap<(String, String), ReductionWitness> = BTreeMap::new();
        let mut base_failures = 0;
        for f in &atoms {
            for h in &nodes {
                let Some(w) = self.base_witness(f, h) else { continue };
                let r = verify_witness(&w, f, h, &self.cfg);
                match r.as_ref().map(|r| r.overall) {
                    Ok(Overall::Pass) => {
                        self.order.edges.insert((f.name().to_string(), h.name().to_string()));
                        base.insert((f.name().to_string(), h.name().to_string()), w);
                    }
                    Ok(Overall::Fail) => base_failures += 1,
                    _ => {
                        base_failures += 1;
                        self.order.undecided += 1;
                    }
                }
            }
        }
        if base_failures > 0 {
            t.note(format!("{base_failures} base witnesses did not pass and were skipped"));
        }
        for (f, g) in self.pairs() {
            for h in &nodes {
                let key = |x: &Problem| (x.name().to_string(), h.name().to_string());
                let (Some(wf), Some(wg)) = (base.get(&key(&f)), base.get(&key(&g))) else {
                    continue;
                };
                match witness::sw_boxplus_universal(&f, &g, wf, wg) {
                    Ok(w) => {
                        self.check_edge(&mut t, &w);
                    }
                    Err(e) => t.error(&format!("universal {} {} {}", f.name(), g.name(), h.name()), &e),
                }
            }
        }
        self.order.filled = true;
        t
    }

    fn c5_supremum(&mut self) -> Tally {
        if !self.order.filled {
            self.c3_injections();
            self.c4_universality();
        }
        let mut t = Tally::default();
        let names: Vec<String> = self.order.nodes.iter().cloned().collect();
        let ix: BTreeMap<&str, usize> = names.iter().enumerate().map(|(k, n)| (n.as_str(), k)).collect();
        let n = names.len();
        let mut le = vec![vec![false; n]; n];
        for (k, row) in le.iter_mut().enumerate() {
            row[k] = true;
        }
        for (a, b) in &self.order.edges {
            if let (Some(&i), Some(&j)) = (ix.get(a.as_str()), ix.get(b.as_str())) {
                le[i][j] = true;
            }
        }
        for k in 0..n {
            let via = le[k].clone();
            for row in le.iter_mut().filter(|row| row[k]) {
                for (x, &y) in row.iter_mut().zip(&via) {
                    *x |= y;
                }
            }
        }
        for (f, g) in self.pairs() {
            let s = boxplus(&f, &g);
            let (Some(&fi), Some(&gi), Some(&si)) =
                (ix.get(f.name()), ix.get(g.name()), ix.get(s.name()))
            else {
                continue;
            };
            let label = s.name().to_string();
            let undecided = self.order.undecided;
            let judge = |t: &mut Tally, pass: bool, why: String| {
                let o = match (pass, undecided) {
                    (true, _) => Overall::Pass,
                    (false, 0) => Overall::Fail,
                    (false, _) => Overall::Unknown,
                };
                t.record(&label, o, || why);
            };
            judge(&mut t, le[fi][si] && le[gi][si], "not an upper bound".into());
            let missing: Vec<&str> = (0..n)
                .filter(|&h| le[fi][h] && le[gi][h] && !le[si][h])
                .map(|h| names[h].as_str())
                .collect();
            judge(&mut t, missing.is_empty(), format!("not below {}", missing.join(", ")));
        }
        t
    }

    fn c6_boxplus_vs_join(&mut self) -> Tally {
        let mut t = Tally::default();
        for (f, g) in self.pairs() {
            let down = witness::sw_boxplus_le_coproduct(&f, &g);
            self.check(&mut t, &down);
            let (i0, i1) = witness::sw_boxplus_injections(&f, &g);
            match witness::w_coproduct_universal(&f, &g, &i0.weaken(), &i1.weaken()) {
                Ok(up) => {
                    self.check(&mut t, &up);
                }
                Err(e) => t.error(&format!("join {} {}", f.name(), g.name()), &e),
            }
        }
        t
    }

    fn c7_distributivity(&mut self) -> Tally {
        let mut t = Tally::default();
        for (f, g, h) in self.triples() {
            self.check(&mut t, &witness::sw_distrib_meet_boxplus(&f, &g, &h));
            self.check(&mut t, &witness::sw_distrib_coproduct_meet(&f, &g, &h));
        }
        t
    }

    fn c8_hform(&mut self) -> Tally {
        let mut t = Tally::default();
        for (f, g) in self.pairs() {
            let (w1, w2) = witness::sw_simplejoin_iso(&f, &g);
            let h = boxplus(&f, &g);
            let r = verify_equivalence(&h, &h, &w1, &w2, &self.cfg);
            let label = format!("{} == h-form", h.name());
            match r {
                Ok(r) => t.record(&label, r.overall, || {
                    format!("{}{}", r.forward.render(), r.backward.render()).trim_end().to_string()
                }),
                Err(e) => t.error(&label, &e),
            }
        }
        t
    }

    fn c9_medvedev(&mut self) -> Tally {
        let mut t = Tally::default();
        let Some((d_a, d_b)) = self.corpus.medvedev.clone() else {
            return t;
        };
        let id = crate::functional::Functional::identity();
        match witness::medvedev_embed(&id, &d_a, &d_b) {
            Ok(w) => {
                if self.check(&mut t, &w) {
                    let reflected = witness::medvedev_reflects(&w.forward, &d_a, &d_b).is_ok();
                    t.ok("order reflection", reflected, || "forward leaves A".into());
                }
            }
            Err(e) => t.error("order preservation", &e),
        }
        t.ok("non-inclusion refused", witness::medvedev_embed(&id, &d_b, &d_a).is_err(), || {
            "identity accepted although A is not a subset of B".into()
        });
        let isos = [
            witness::medvedev_join_iso(&d_a, &d_b).map(|(p, w1, w2)| (p, boxplus(&d_a, &d_b), w1, w2)),
            witness::medvedev_meet_iso(&d_a, &d_b).map(|(p, w1, w2)| (meet(&d_a, &d_b), p, w1, w2)),
        ];
        for iso in isos {
            match iso {
                Ok((x, y, w1, w2)) => {
                    self.registry.insert(x.clone());
                    self.registry.insert(y.clone());
                    let label = format!("{} == {}", x.name(), y.name());
                    match verify_equivalence(&x, &y, &w1, &w2, &self.cfg) {
                        Ok(r) => t.record(&label, r.overall, || {
                            format!("{}{}", r.forward.render(), r.backward.render()).trim_end().to_string()
                        }),
                        Err(e) => t.error(&label, &e),
                    }
                }
                Err(e) => t.error("isomorphism", &e),
            }
        }
        t
    }

    fn c10_search(&mut self) -> Tally {
        let mut t = Tally::default();
        let grid = self.grid.clone();
        if let Some((f, g)) = self.corpus.search_match.clone() {
            for b in &grid {
                let label = format!("{} <= {} at {b:?}", f.name(), g.name());
                match brute_force_search(&f, &g, WitnessKind::Strong, *b, &self.cfg) {
                    Ok(SearchOutcome::Found(w)) => {
                        let again = verify_witness(&w, &f, &g, &self.cfg).is_ok_and(|r| r.pass());
                        t.ok(&label, again, || "found witness does not re-verify".into());
                    }
                    Ok(SearchOutcome::NoneWithinBounds { tried }) => {
                        t.ok(&label, false, || format!("nothing found among {tried} candidates"))
                    }
                    Err(e) => t.error(&label, &e),
                }
            }
        }
        if let Some((f, g)) = self.corpus.pigeonhole.clone() {
            for b in &grid {
                let label = format!("{} <= {} at {b:?}", f.name(), g.name());
                match brute_force_search(&f, &g, WitnessKind::Strong, *b, &self.cfg) {
                    Ok(SearchOutcome::NoneWithinBounds { .. }) => t.ok(&label, true, String::new),
                    Ok(SearchOutcome::Found(w)) => {
                        t.ok(&label, false, || format!("impossible witness found: {} / {}", w.forward, w.backward))
                    }
                    Err(e) => t.error(&label, &e),
                }
            }
        }
        t
    }

    fn c11_exclusions(&mut self) -> Tally {
        let mut t = Tally::default();
        if self.corpus.is_empty() {
            return t;
        }
        t.note(
            "excluded: the non-distributivity counterexample needs oracles that are not computable \
             from one another, so it cannot be reproduced; criteria 7 and 10 stand in for it",
        );
        for id in [7, 10] {
            let v = match self.done.get(&id) {
                Some(&v) => v,
                None => self.criterion(id).verdict,
            };
            let o = match v {
                Verdict::Pass => Overall::Pass,
                Verdict::Unknown => Overall::Unknown,
                Verdict::NothingToCheck => continue,
                _ => Overall::Fail,
            };
            t.record(&format!("criterion {id}"), o, || format!("{v:?}"));
        }
        t
    }
}

/// Run every criterion with the standard settings for `corpus`.
pub fn run_suite(corpus: Corpus, cfg: VerifyConfig, timing: bool) -> Summary {
    let mut s = Suite::new(corpus, cfg);
    s.timing = timing;
    s.run()
}

/// Streams tested as unconstrained components; exposed for reports.
pub fn describe_junk(cfg: &VerifyConfig) -> Vec<String> {
    cfg.junk_tails.iter().map(Stream::to_string).collect()
}

