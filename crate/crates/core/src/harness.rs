//! Checking witnesses against every enumerated realizer, and bounded witness search.

use serde::Serialize;

use crate::error::Error;
use crate::functional::{Functional, Schedule, TableEntry};
use crate::problem::{Problem, Verdict};
use crate::stream::{bits_to_string, Stream};
use crate::witness::{ReductionWitness, WitnessKind};

/// Knobs shared by every verification.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Bits read by solution checkers.
    pub depth: usize,
    /// Work units per evaluation.
    pub fuel: u64,
    /// Streams used for unconstrained solution components.
    pub junk_tails: Vec<Stream>,
    /// Largest realizer count a target problem may have.
    pub realizer_cap: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            depth: 48,
            fuel: 1_000_000,
            junk_tails: default_junk_tails(),
            realizer_cap: 1 << 20,
        }
    }
}

/// `0^ω`, `1^ω` and a total approximation of `1^ω`.
pub fn default_junk_tails() -> Vec<Stream> {
    vec![
        Stream::zeros(),
        Stream::ones(),
        crate::approx::make_total_approx(&Stream::ones(), 0).expect("offset 0 never overflows"),
    ]
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Pass,
    Fail { bit: Option<u64>, reason: String },
    Unknown { spent: u64 },
}

impl From<Verdict> for Outcome {
    fn from(v: Verdict) -> Self {
        match v {
            Verdict::Yes => Outcome::Pass,
            Verdict::No { bit, reason } => Outcome::Fail { bit, reason },
            Verdict::Unknown { spent } => Outcome::Unknown { spent },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Overall {
    Pass,
    Fail,
    Unknown,
}

impl Overall {
    /// Fail dominates Unknown, which dominates Pass.
    pub fn combine(self, other: Overall) -> Overall {
        match (self, other) {
            (Overall::Fail, _) | (_, Overall::Fail) => Overall::Fail,
            (Overall::Unknown, _) | (_, Overall::Unknown) => Overall::Unknown,
            _ => Overall::Pass,
        }
    }
}

/// One (instance, realizer) check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub instance: usize,
    /// `target_instance:option`, or `-` when no realizer was reached.
    pub realizer: String,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub source: String,
    pub target: String,
    pub kind: WitnessKind,
    pub cells: Vec<Cell>,
    pub overall: Overall,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.overall == Overall::Pass
    }

    fn finish(mut self) -> Self {
        self.overall = self.cells.iter().fold(Overall::Pass, |acc, c| {
            acc.combine(match c.outcome {
                Outcome::Pass => Overall::Pass,
                Outcome::Fail { .. } => Overall::Fail,
                Outcome::Unknown { .. } => Overall::Unknown,
            })
        });
        if self.note.is_some() {
            self.overall = self.overall.combine(Overall::Unknown);
        }
        self
    }

    /// First failing or unknown cell, for diagnostics.
    pub fn first_problem(&self) -> Option<&Cell> {
        self.cells.iter().find(|c| c.outcome != Outcome::Pass)
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{} {} <= {}: {:?} ({} cells)\n",
            self.kind.keyword(),
            self.source,
            self.target,
            self.overall,
            self.cells.len()
        );
        if let Some(n) = &self.note {
            out.push_str(&format!("  note: {n}\n"));
        }
        for c in &self.cells {
            match &c.outcome {
                Outcome::Pass => {}
                Outcome::Fail { bit, reason } => {
                    let at = bit.map(|b| format!(" at bit {b}")).unwrap_or_default();
                    out.push_str(&format!("  instance {} realizer {}: fail{at}: {reason}\n", c.instance, c.realizer));
                }
                Outcome::Unknown { spent } => {
                    out.push_str(&format!("  instance {} realizer {}: unknown after {spent} steps\n", c.instance, c.realizer));
                }
            }
        }
        out
    }
}

/// Check `w : f ≤ g` against every enumerated realizer of `g`.
///
/// Realizers are prefix-dispatch functionals, so on an instance identified as `g`'s instance `j`
/// a realizer's output is its option at `j`. One realizer per option at `j` covers every output
/// the full enumeration can produce there.
pub fn verify_witness(w: &ReductionWitness, f: &Problem, g: &Problem, cfg: &VerifyConfig) -> Result<Report, Error> {
    if w.source != f.name() || w.target != g.name() {
        return Err(Error::SourceTargetMismatch(format!(
            "witness {} ≤ {} checked against {} ≤ {}",
            w.source,
            w.target,
            f.name(),
            g.name()
        )));
    }
    let count = g.realizer_count(&cfg.junk_tails);
    if count > cfg.realizer_cap as u128 {
        return Err(Error::RealizerCap(count, cfg.realizer_cap));
    }
    let mut report = Report {
        source: w.source.clone(),
        target: w.target.clone(),
        kind: w.kind,
        cells: Vec::new(),
        overall: Overall::Pass,
        note: None,
    };
    let need = f.d_id().max(g.d_id());
    if cfg.depth < need {
        report.note = Some(format!("depth {} is below identification depth {need}", cfg.depth));
        return Ok(report.finish());
    }
    let options: Vec<Vec<Stream>> = (0..g.instances().len()).map(|j| g.options(j, &cfg.junk_tails)).collect();
    if options.iter().any(Vec::is_empty) {
        return Err(Error::NotEnumerable(g.name().to_string()));
    }
    for (ix, p) in f.instances().iter().enumerate() {
        let x = w.forward.apply(p);
        let key = match x.prefix(g.d_id(), cfg.fuel) {
            Ok(k) => k,
            Err(d) => {
                report.cells.push(Cell {
                    instance: ix,
                    realizer: "-".into(),
                    outcome: Outcome::Unknown { spent: d.spent },
                });
                continue;
            }
        };
        let Some(j) = g.identify(&key) else {
            report.cells.push(Cell {
                instance: ix,
                realizer: "-".into(),
                outcome: Outcome::Fail {
                    bit: None,
                    reason: format!("forward output {}… is not an instance of {}", bits_to_string(&key), g.name()),
                },
            });
            continue;
        };
        let mut choice = vec![0; options.len()];
        for k in 0..options[j].len() {
            choice[j] = k;
            let realizer = g.realizer(&options, &choice);
            let sol = realizer.apply(&x);
            let input = match w.kind {
                WitnessKind::Strong => sol,
                WitnessKind::Weak => Stream::interleave(p, &sol),
            };
            let out = w.backward.apply(&input);
            report.cells.push(Cell {
                instance: ix,
                realizer: format!("{j}:{k}"),
                outcome: f.check(ix, &out, cfg.depth, cfg.fuel).into(),
            });
        }
    }
    Ok(report.finish())
}

/// Both directions of `f ≡ g`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub forward: Report,
    pub backward: Report,
    pub overall: Overall,
}

pub fn verify_equivalence(
    f: &Problem,
    g: &Problem,
    w_fg: &ReductionWitness,
    w_gf: &ReductionWitness,
    cfg: &VerifyConfig,
) -> Result<EquivalenceReport, Error> {
    let forward = verify_witness(w_fg, f, g, cfg)?;
    let backward = verify_witness(w_gf, g, f, cfg)?;
    let overall = forward.overall.combine(backward.overall);
    Ok(EquivalenceReport {
        forward,
        backward,
        overall,
    })
}

/// Limits for brute-force search over table functionals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    /// Oracle bits a table may read.
    pub use_bound: usize,
    /// Latest stage at which a table output may appear.
    pub stage_bound: usize,
    /// Explicit output bits before the constant tail.
    pub output_depth: usize,
}

/// Largest number of candidate witnesses a search may enumerate.
pub const SEARCH_CEILING: u128 = 1 << 22;

#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Found(ReductionWitness),
    NoneWithinBounds { tried: u64 },
}

/// Every table output: `output_depth` bits then a tail bit.
fn table_outputs(b: &SearchBounds) -> Vec<(Vec<u8>, u8)> {
    let mut out = Vec::new();
    for code in 0u32..(1 << (b.output_depth + 1)) {
        let bits = (0..b.output_depth).map(|k| ((code >> k) & 1) as u8).collect();
        out.push((bits, ((code >> b.output_depth) & 1) as u8));
    }
    out
}

fn distinct_prefixes(streams: &[Stream], u: usize, fuel: u64) -> Vec<Vec<u8>> {
    let mut keys: Vec<Vec<u8>> = streams.iter().filter_map(|s| s.prefix(u, fuel).ok()).collect();
    keys.sort();
    keys.dedup();
    keys
}

/// Table on `keys`, choosing output `choice[k]` for key `k`.
fn table(keys: &[Vec<u8>], outs: &[(Vec<u8>, u8)], choice: &[usize], u: usize, stages: usize) -> Functional {
    let entries = keys
        .iter()
        .zip(choice)
        .map(|(k, &c)| TableEntry {
            prefix: k.clone(),
            output: outs[c].0.clone(),
            tail: Some(outs[c].1),
        })
        .collect();
    let last = outs.first().map_or(0, |o| o.0.len()).min(stages) as u128;
    let schedule = Schedule::Explicit((0..=last).collect());
    Functional::from_prefix_table(entries, u, schedule).expect("keys are distinct prefixes of one length")
}

/// Advance a mixed-radix counter; false once it wraps.
fn advance(choice: &mut [usize], radix: usize) -> bool {
    for c in choice.iter_mut() {
        *c += 1;
        if *c < radix {
            return true;
        }
        *c = 0;
    }
    false
}

/// Enumerate forward and backward tables within `bounds` and return the first passing witness.
pub fn brute_force_search(
    f: &Problem,
    g: &Problem,
    kind: WitnessKind,
    bounds: SearchBounds,
    cfg: &VerifyConfig,
) -> Result<SearchOutcome, Error> {
    if bounds.use_bound == 0 || bounds.stage_bound == 0 || bounds.output_depth == 0 {
        return Err(Error::InvalidBounds(format!("{bounds:?}")));
    }
    if bounds.output_depth > 16 {
        return Err(Error::BoundsTooLarge(1u128 << 17, SEARCH_CEILING));
    }
    let u = bounds.use_bound;
    let outs = table_outputs(&bounds);
    let radix = outs.len();
    let f_keys = distinct_prefixes(f.instances(), u, cfg.fuel);
    let g_options: Vec<Stream> = (0..g.instances().len())
        .flat_map(|j| g.options(j, &cfg.junk_tails))
        .collect();
    let back_inputs: Vec<Stream> = match kind {
        WitnessKind::Strong => g_options.clone(),
        WitnessKind::Weak => f
            .instances()
            .iter()
            .flat_map(|p| g_options.iter().map(move |s| Stream::interleave(p, s)))
            .collect(),
    };
    let b_keys = distinct_prefixes(&back_inputs, u, cfg.fuel);
    let estimate = (radix as u128)
        .checked_pow((f_keys.len() + b_keys.len()) as u32)
        .unwrap_or(u128::MAX);
    if estimate > SEARCH_CEILING {
        return Err(Error::BoundsTooLarge(estimate, SEARCH_CEILING));
    }
    let mut tried = 0u64;
    let mut fc = vec![0usize; f_keys.len()];
    loop {
        let forward = table(&f_keys, &outs, &fc, u, bounds.stage_bound);
        let lands = f.instances().iter().all(|p| {
            forward
                .apply(p)
                .prefix(g.d_id(), cfg.fuel)
                .ok()
                .and_then(|k| g.identify(&k))
                .is_some()
        });
        if lands {
            let mut bc = vec![0usize; b_keys.len()];
            loop {
                tried += 1;
                let w = ReductionWitness {
                    kind,
                    forward: forward.clone(),
                    backward: table(&b_keys, &outs, &bc, u, bounds.stage_bound),
                    source: f.name().to_string(),
                    target: g.name().to_string(),
                };
                if verify_witness(&w, f, g, cfg)?.pass() {
                    return Ok(SearchOutcome::Found(w));
                }
                if !advance(&mut bc, radix) {
                    break;
                }
            }
        }
        if !advance(&mut fc, radix) {
            return Ok(SearchOutcome::NoneWithinBounds { tried });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::boxplus;
    use crate::problem::finite_problem;
    use crate::witness::{identity, sw_boxplus_injections};

    fn ec(p: &str, t: u8) -> Stream {
        Stream::from_bits(p, t).unwrap()
    }

    fn atom(name: &str, inst: &str, it: u8, sol: &str, st: u8) -> Problem {
        finite_problem(name, 1, vec![(ec(inst, it), vec![ec(sol, st)])]).unwrap()
    }

    fn id2() -> Problem {
        finite_problem(
            "id2",
            1,
            vec![(Stream::zeros(), vec![Stream::zeros()]), (Stream::ones(), vec![Stream::ones()])],
        )
        .unwrap()
    }

    #[test]
    fn injections_pass() {
        let (f, g) = (atom("f", "1", 0, "11", 0), atom("g", "", 1, "", 0));
        let (w0, w1) = sw_boxplus_injections(&f, &g);
        let h = boxplus(&f, &g);
        let cfg = VerifyConfig::default();
        assert!(verify_witness(&w0, &f, &h, &cfg).unwrap().pass());
        assert!(verify_witness(&w1, &g, &h, &cfg).unwrap().pass());
    }

    #[test]
    fn corrupted_backward_fails_at_bit_zero() {
        let (f, g) = (atom("f", "1", 0, "0", 1), atom("g", "", 1, "", 0));
        let (mut w0, _) = sw_boxplus_injections(&f, &g);
        w0.backward = Functional::constant(&Stream::ones());
        let r = verify_witness(&w0, &f, &boxplus(&f, &g), &VerifyConfig::default()).unwrap();
        assert_eq!(r.overall, Overall::Fail);
        assert!(matches!(r.first_problem().unwrap().outcome, Outcome::Fail { bit: Some(0), .. }));
    }

    #[test]
    fn mismatched_names_rejected() {
        let f = id2();
        let g = atom("g", "", 1, "", 0);
        let w = identity(&f);
        assert!(matches!(
            verify_witness(&w, &f, &g, &VerifyConfig::default()),
            Err(Error::SourceTargetMismatch(_))
        ));
    }

    #[test]
    fn shallow_depth_is_unknown() {
        let f = id2();
        let h = boxplus(&f, &f);
        let (w0, _) = sw_boxplus_injections(&f, &f);
        let cfg = VerifyConfig {
            depth: 1,
            ..VerifyConfig::default()
        };
        assert_eq!(verify_witness(&w0, &f, &h, &cfg).unwrap().overall, Overall::Unknown);
    }

    #[test]
    fn search_examples() {
        let cfg = VerifyConfig::default();
        let b = SearchBounds {
            use_bound: 1,
            stage_bound: 2,
            output_depth: 1,
        };
        let id = id2();
        assert!(matches!(
            brute_force_search(&id, &id, WitnessKind::Strong, b, &cfg).unwrap(),
            SearchOutcome::Found(_)
        ));
        let k = atom("K", "", 0, "", 0);
        assert!(matches!(
            brute_force_search(&id, &k, WitnessKind::Strong, b, &cfg).unwrap(),
            SearchOutcome::NoneWithinBounds { .. }
        ));
        let c = atom("C", "", 1, "", 0);
        match brute_force_search(&c, &k, WitnessKind::Strong, b, &cfg).unwrap() {
            SearchOutcome::Found(w) => assert!(verify_witness(&w, &c, &k, &cfg).unwrap().pass()),
            other => panic!("{other:?}"),
        }
    }
}
