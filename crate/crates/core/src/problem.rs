//! Problems on Cantor space: instances, three-valued solution checkers and realizers.

use std::sync::Arc;

use serde::Serialize;

use crate::approx::{self, check_prefix_valid, totality_by_descriptor, Totality, Validity};
use crate::error::Error;
use crate::eval::{self, Ctx};
use crate::functional::{Dispatch, Functional};
use crate::pairing::Idx;
use crate::stream::{read_tag, Stream};

/// Outcome of checking one candidate solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Yes,
    /// Definitive rejection; `bit` is the candidate position that settled it, when there is one.
    No { bit: Option<u64>, reason: String },
    /// Fuel ran out before a decision.
    Unknown { spent: u64 },
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes)
    }

    fn no(bit: Option<u64>, reason: impl Into<String>) -> Self {
        Verdict::No {
            bit,
            reason: reason.into(),
        }
    }

    /// Re-express bit positions of a component sitting on one track of an interleaving.
    fn on_track(self, side: u64) -> Self {
        match self {
            Verdict::No { bit, reason } => Verdict::No {
                bit: bit.map(|b| 2 * b + side),
                reason,
            },
            v => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Operator {
    Coproduct,
    Meet,
    BoxPlus,
}

impl Operator {
    pub fn keyword(self) -> &'static str {
        match self {
            Operator::Coproduct => "coproduct",
            Operator::Meet => "meet",
            Operator::BoxPlus => "boxplus",
        }
    }
}

pub(crate) enum Kind {
    Finite { solutions: Vec<Vec<Stream>>, medvedev: bool },
    Composite(Operator, Problem, Problem),
}

pub(crate) struct PNode {
    pub(crate) name: String,
    pub(crate) d_id: usize,
    pub(crate) instances: Vec<Stream>,
    pub(crate) kind: Kind,
}

/// An immutable problem with a finite instance list. Cloning is cheap.
#[derive(Clone)]
pub struct Problem(pub(crate) Arc<PNode>);

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Problem({}, {} instances)", self.name(), self.instances().len())
    }
}

/// Fuel spent identifying instances and comparing streams at construction time.
const SETUP_FUEL: u64 = 1 << 16;

/// Longest prefix compared when looking for the first difference of two instances.
const SEPARATION_HORIZON: usize = 1024;

impl Problem {
    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn d_id(&self) -> usize {
        self.0.d_id
    }

    pub fn instances(&self) -> &[Stream] {
        &self.0.instances
    }

    pub fn operator(&self) -> Option<(Operator, &Problem, &Problem)> {
        match &self.0.kind {
            Kind::Composite(op, f, g) => Some((*op, f, g)),
            Kind::Finite { .. } => None,
        }
    }

    pub fn is_medvedev(&self) -> bool {
        matches!(self.0.kind, Kind::Finite { medvedev: true, .. })
    }

    /// Listed solutions of a finite problem.
    pub fn listed_solutions(&self, ix: usize) -> Option<&[Stream]> {
        match &self.0.kind {
            Kind::Finite { solutions, .. } => solutions.get(ix).map(Vec::as_slice),
            Kind::Composite(..) => None,
        }
    }

    /// Same problem under another name.
    pub fn renamed(&self, name: &str) -> Problem {
        let kind = match &self.0.kind {
            Kind::Finite { solutions, medvedev } => Kind::Finite {
                solutions: solutions.clone(),
                medvedev: *medvedev,
            },
            Kind::Composite(op, f, g) => Kind::Composite(*op, f.clone(), g.clone()),
        };
        Problem(Arc::new(PNode {
            name: name.to_string(),
            d_id: self.0.d_id,
            instances: self.0.instances.clone(),
            kind,
        }))
    }

    /// The `d_id`-bit prefix that identifies instance `ix`.
    pub fn instance_key(&self, ix: usize) -> Vec<u8> {
        self.0.instances[ix]
            .prefix(self.0.d_id, SETUP_FUEL)
            .expect("instance prefixes are checked at construction")
    }

    /// Index of the instance whose identifying prefix is `key`.
    pub fn identify(&self, key: &[u8]) -> Option<usize> {
        (0..self.0.instances.len()).find(|&ix| self.instance_key(ix) == key)
    }

    /// Canonical solutions of instance `ix`.
    pub fn canonical_solutions(&self, ix: usize) -> Vec<Stream> {
        self.options(ix, &[Stream::zeros()])
    }

    /// Solutions of instance `ix` with every unconstrained component drawn from `junk`.
    pub fn options(&self, ix: usize, junk: &[Stream]) -> Vec<Stream> {
        match &self.0.kind {
            Kind::Finite { solutions, .. } => solutions[ix].clone(),
            Kind::Composite(op, f, g) => match op {
                Operator::Coproduct => {
                    let (side, sub, j) = split_sum(f, g, ix);
                    sub.options(j, junk).iter().map(|o| Stream::tag(side, o)).collect()
                }
                Operator::Meet => {
                    let (i, j) = split_product(g, ix);
                    let left = f.options(i, junk).into_iter().map(|o| Stream::tag(0, &o));
                    let right = g.options(j, junk).into_iter().map(|o| Stream::tag(1, &o));
                    left.chain(right).collect()
                }
                Operator::BoxPlus => {
                    let (side, sub, j) = split_sum(f, g, ix);
                    let mut out = Vec::new();
                    for o in sub.options(j, junk) {
                        let a = approx::make_total_approx(&o, 0)
                            .expect("offset 0 never overflows");
                        for t in junk {
                            out.push(if side == 0 {
                                Stream::interleave(&a, t)
                            } else {
                                Stream::interleave(t, &a)
                            });
                        }
                    }
                    out
                }
            },
        }
    }

    /// Three-valued check of `candidate` against instance `ix`, reading `depth` bits.
    pub fn check(&self, ix: usize, candidate: &Stream, depth: usize, fuel: u64) -> Verdict {
        match &self.0.kind {
            Kind::Finite { solutions, .. } => agree_with_any(candidate, &solutions[ix], depth, fuel),
            Kind::Composite(Operator::Coproduct, f, g) => {
                let (side, sub, j) = split_sum(f, g, ix);
                let mut ctx = Ctx::new(fuel);
                for k in 0..depth as Idx {
                    let b = match eval::bit(&mut ctx, candidate, 2 * k) {
                        Ok(b) => b,
                        Err(d) => return Verdict::Unknown { spent: d.spent },
                    };
                    if b != (k == side as Idx) as u8 {
                        return Verdict::no(Some(2 * k as u64), format!("tag {side} expected"));
                    }
                }
                sub.check(j, &candidate.project(1), depth, fuel).on_track(1)
            }
            Kind::Composite(Operator::Meet, f, g) => {
                let (i, j) = split_product(g, ix);
                let mut ctx = Ctx::new(fuel);
                let mut even = Vec::with_capacity(depth);
                for k in 0..depth.max(2) as Idx {
                    match eval::bit(&mut ctx, candidate, 2 * k) {
                        Ok(b) => even.push(b),
                        Err(d) => return Verdict::Unknown { spent: d.spent },
                    }
                }
                let body = candidate.project(1);
                match read_tag(&even) {
                    Some(0) => f.check(i, &body, depth, fuel).on_track(1),
                    Some(_) => g.check(j, &body, depth, fuel).on_track(1),
                    None => Verdict::no(None, "malformed tag"),
                }
            }
            Kind::Composite(Operator::BoxPlus, f, g) => {
                let (side, sub, j) = split_sum(f, g, ix);
                let a = candidate.project(side);
                match check_prefix_valid(&a, depth as Idx, fuel) {
                    Ok(Validity::Valid) => {}
                    Ok(Validity::ViolationAt { index, clause }) => {
                        return Verdict::no(
                            Some(2 * index as u64 + side as u64),
                            format!("not a monotone approximation (clause {clause})"),
                        )
                    }
                    Err(d) => return Verdict::Unknown { spent: d.spent },
                }
                if totality_by_descriptor(&a) == Totality::NotTotal {
                    return Verdict::no(None, "approximation is not total");
                }
                match sub.check(j, &approx::eval(&a), depth, fuel) {
                    Verdict::No { reason, .. } => Verdict::no(None, format!("e(a): {reason}")),
                    v => v,
                }
            }
        }
    }

    /// Number of realizers `enumerate_realizers` would produce.
    pub fn realizer_count(&self, junk: &[Stream]) -> u128 {
        (0..self.instances().len())
            .map(|ix| self.options(ix, junk).len() as u128)
            .fold(1u128, |acc, n| acc.saturating_mul(n))
    }

    /// The realizer choosing option `choice[ix]` on each instance.
    pub fn realizer(&self, options: &[Vec<Stream>], choice: &[usize]) -> Functional {
        let entries = choice
            .iter()
            .enumerate()
            .map(|(ix, &c)| (self.instance_key(ix), options[ix][c].clone()))
            .collect();
        Functional::dispatch(Dispatch {
            depth: self.d_id(),
            entries,
        })
    }
}

fn split_sum<'a>(f: &'a Problem, g: &'a Problem, ix: usize) -> (u8, &'a Problem, usize) {
    let nf = f.instances().len();
    if ix < nf {
        (0, f, ix)
    } else {
        (1, g, ix - nf)
    }
}

fn split_product(g: &Problem, ix: usize) -> (usize, usize) {
    let ng = g.instances().len();
    (ix / ng, ix % ng)
}

/// Yes iff the candidate agrees with some solution on `depth` bits.
fn agree_with_any(candidate: &Stream, solutions: &[Stream], depth: usize, fuel: u64) -> Verdict {
    let mut ctx = Ctx::new(fuel);
    let mut alive: Vec<&Stream> = solutions.iter().collect();
    for k in 0..depth as Idx {
        let c = match eval::bit(&mut ctx, candidate, k) {
            Ok(b) => b,
            Err(d) => return Verdict::Unknown { spent: d.spent },
        };
        let mut keep = Vec::with_capacity(alive.len());
        for s in alive {
            match eval::bit(&mut ctx, s, k) {
                Ok(b) if b == c => keep.push(s),
                Ok(_) => {}
                Err(d) => return Verdict::Unknown { spent: d.spent },
            }
        }
        if keep.is_empty() {
            return Verdict::no(Some(k as u64), "disagrees with every solution");
        }
        alive = keep;
    }
    Verdict::Yes
}

/// First position where two streams differ, looking at most `horizon` bits ahead.
fn first_difference(a: &Stream, b: &Stream, horizon: usize) -> Option<usize> {
    let pa = a.prefix(horizon, SETUP_FUEL).ok()?;
    let pb = b.prefix(horizon, SETUP_FUEL).ok()?;
    pa.iter().zip(&pb).position(|(x, y)| x != y)
}

fn validate_instances(name: &str, instances: &[Stream], d_id: usize) -> Result<(), Error> {
    let mut keys = Vec::with_capacity(instances.len());
    for p in instances {
        let key = p
            .prefix(d_id, SETUP_FUEL)
            .map_err(|_| Error::Indistinguishable(name.to_string(), d_id))?;
        keys.push(key);
    }
    for a in 0..instances.len() {
        for b in a + 1..instances.len() {
            if keys[a] == keys[b] {
                return Err(match first_difference(&instances[a], &instances[b], SEPARATION_HORIZON) {
                    None => Error::DuplicateInstance(name.to_string()),
                    Some(_) => Error::Indistinguishable(name.to_string(), d_id),
                });
            }
        }
    }
    Ok(())
}

/// Least depth that separates all instances (at least 1).
pub fn separating_depth(instances: &[Stream]) -> Option<usize> {
    let mut d = 1;
    for a in 0..instances.len() {
        for b in a + 1..instances.len() {
            d = d.max(first_difference(&instances[a], &instances[b], SEPARATION_HORIZON)? + 1);
        }
    }
    Some(d)
}

/// A problem given by finitely many instances, each with a nonempty solution list.
pub fn finite_problem(name: &str, d_id: usize, pairs: Vec<(Stream, Vec<Stream>)>) -> Result<Problem, Error> {
    if pairs.iter().any(|(_, sols)| sols.is_empty()) {
        return Err(Error::EmptySolutionSet(name.to_string()));
    }
    let (instances, solutions): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    validate_instances(name, &instances, d_id)?;
    Ok(Problem(Arc::new(PNode {
        name: name.to_string(),
        d_id,
        instances,
        kind: Kind::Finite {
            solutions,
            medvedev: false,
        },
    })))
}

/// `d_A`: every element of `A` is an instance with the single solution `0^ω`.
pub fn medvedev_problem(name: &str, elements: Vec<Stream>) -> Result<Problem, Error> {
    if elements.is_empty() {
        return Err(Error::EmptyMassProblem);
    }
    let d_id = separating_depth(&elements).ok_or_else(|| Error::DuplicateInstance(name.to_string()))?;
    validate_instances(name, &elements, d_id)?;
    let solutions = vec![vec![Stream::zeros()]; elements.len()];
    Ok(Problem(Arc::new(PNode {
        name: name.to_string(),
        d_id,
        instances: elements,
        kind: Kind::Finite {
            solutions,
            medvedev: true,
        },
    })))
}

pub(crate) fn composite(op: Operator, name: String, f: &Problem, g: &Problem) -> Problem {
    let (instances, d_id) = match op {
        Operator::Coproduct | Operator::BoxPlus => {
            let mut v: Vec<Stream> = f.instances().iter().map(|p| Stream::tag(0, p)).collect();
            v.extend(g.instances().iter().map(|p| Stream::tag(1, p)));
            (v, 2 * f.d_id().max(g.d_id()).max(1))
        }
        Operator::Meet => {
            let mut v = Vec::with_capacity(f.instances().len() * g.instances().len());
            for p in f.instances() {
                for q in g.instances() {
                    v.push(Stream::interleave(p, q));
                }
            }
            (v, 2 * f.d_id().max(g.d_id()).max(1))
        }
    };
    Problem(Arc::new(PNode {
        name,
        d_id,
        instances,
        kind: Kind::Composite(op, f.clone(), g.clone()),
    }))
}

/// Per-instance outcomes of running a functional as a realizer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealizerReport {
    pub problem: String,
    pub cells: Vec<Verdict>,
}

impl RealizerReport {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(Verdict::is_yes)
    }
}

/// Run `F` on every instance of `f` and check each output.
pub fn check_realizer(realizer: &Functional, f: &Problem, depth: usize, fuel: u64) -> RealizerReport {
    let cells = f
        .instances()
        .iter()
        .enumerate()
        .map(|(ix, p)| f.check(ix, &realizer.apply(p), depth, fuel))
        .collect();
    RealizerReport {
        problem: f.name().to_string(),
        cells,
    }
}

/// Every selection of one option per instance, as prefix-dispatch functionals.
pub fn enumerate_realizers(f: &Problem, junk: &[Stream], cap: usize) -> Result<Vec<Functional>, Error> {
    let options: Vec<Vec<Stream>> = (0..f.instances().len()).map(|ix| f.options(ix, junk)).collect();
    if options.iter().any(Vec::is_empty) {
        return Err(Error::NotEnumerable(f.name().to_string()));
    }
    let count = f.realizer_count(junk);
    if count > cap as u128 {
        return Err(Error::RealizerCap(count, cap));
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut choice = vec![0usize; options.len()];
    loop {
        out.push(f.realizer(&options, &choice));
        let mut k = 0;
        loop {
            if k == choice.len() {
                return Ok(out);
            }
            choice[k] += 1;
            if choice[k] < options[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Cantor space with the identity representation; points are compared on `depth` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepresentedSpace {
    pub depth: usize,
}

impl RepresentedSpace {
    pub fn decode(&self, p: &Stream, fuel: u64) -> Option<Vec<u8>> {
        p.prefix(self.depth, fuel).ok()
    }
}

/// A represented space extended with the point ∞, decoded through `e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletedSpace {
    pub base: RepresentedSpace,
    /// Member indices examined when looking for a validity violation.
    pub scan_bound: Idx,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Completed {
    Point(Vec<u8>),
    Infinity,
    Unknown,
}

impl CompletedSpace {
    pub fn cantor(depth: usize) -> Self {
        CompletedSpace {
            base: RepresentedSpace { depth },
            scan_bound: 512,
        }
    }
}

pub fn decode_completed(space: &CompletedSpace, p: &Stream, fuel: u64) -> Completed {
    match totality_by_descriptor(p) {
        Totality::Total => match space.base.decode(&approx::eval(p), fuel) {
            Some(bits) => Completed::Point(bits),
            None => Completed::Unknown,
        },
        Totality::NotTotal => Completed::Infinity,
        Totality::Unknown => match check_prefix_valid(p, space.scan_bound, fuel) {
            Ok(Validity::ViolationAt { .. }) => Completed::Infinity,
            _ => Completed::Unknown,
        },
    }
}
