//! Oracle functionals with stage and use tracking.

use std::sync::Arc;

use crate::error::Error;
use crate::eval::{self, Ctx};
use crate::pairing::Idx;
use crate::stream::{SNode, Stream};

/// Stage numbers of the normalized computation.
pub type Stage = u128;

/// Inspection window for tags read by `untag` and `case`.
pub const TAG_WINDOW: usize = 8;

/// An immutable functional description. Cloning is cheap.
#[derive(Clone, PartialEq, Eq)]
pub struct Functional(pub(crate) Arc<FNode>);

#[derive(PartialEq, Eq)]
pub enum FNode {
    Id,
    Const(Stream),
    Project(u8),
    Tag(u8),
    Untag,
    Interleave(Functional, Functional),
    /// `outer ∘ inner`
    Compose(Functional, Functional),
    /// The evaluation functional. Certified descriptors are looked up directly.
    E,
    /// The evaluation functional restricted to its scanning algorithm.
    EScan,
    /// `p ↦ a_{Φ(p)}`
    Approx(Functional),
    /// Read the tag of `sel(p)`, then run the matching branch on `p`.
    Case(Functional, Functional, Functional),
    Table(Table),
    Dispatch(Dispatch),
}

/// Finite truth table: oracle prefix ↦ output prefix, optionally continued by a tail bit.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Table {
    pub use_bound: usize,
    pub entries: Vec<TableEntry>,
    pub schedule: Schedule,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TableEntry {
    pub prefix: Vec<u8>,
    pub output: Vec<u8>,
    pub tail: Option<u8>,
}

/// Raw stage at which each output of a table first appears.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Schedule {
    /// Everything at stage 0; normalization spreads outputs one per stage.
    Canonical,
    /// Output n at `stages[n]`; past the list, one stage after the last.
    Explicit(Vec<Stage>),
}

impl Schedule {
    pub(crate) fn stage(&self, n: Idx) -> Stage {
        match self {
            Schedule::Canonical => 0,
            Schedule::Explicit(v) => {
                if (n as usize) < v.len() && n < usize::MAX as Idx {
                    v[n as usize]
                } else {
                    let last = v.last().copied().unwrap_or(0);
                    last.saturating_add(n - v.len() as Idx + 1)
                }
            }
        }
    }
}

/// Realizer shape: identify the oracle by its first `depth` bits and emit a fixed stream.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Dispatch {
    pub depth: usize,
    pub entries: Vec<(Vec<u8>, Stream)>,
}

impl Functional {
    fn new(node: FNode) -> Self {
        Functional(Arc::new(node))
    }

    pub fn node(&self) -> &FNode {
        &self.0
    }

    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn identity() -> Self {
        Self::new(FNode::Id)
    }

    pub fn constant(q: &Stream) -> Self {
        Self::new(FNode::Const(q.clone()))
    }

    pub fn project(side: u8) -> Self {
        Self::new(FNode::Project(side.min(1)))
    }

    pub fn tag(i: u8) -> Self {
        Self::new(FNode::Tag(i.min(1)))
    }

    pub fn untag() -> Self {
        Self::new(FNode::Untag)
    }

    pub fn interleave(f: &Functional, g: &Functional) -> Self {
        Self::new(FNode::Interleave(f.clone(), g.clone()))
    }

    pub fn compose(outer: &Functional, inner: &Functional) -> Self {
        Self::new(FNode::Compose(outer.clone(), inner.clone()))
    }

    /// Compose a chain, outermost first.
    pub fn chain(parts: &[Functional]) -> Self {
        let mut it = parts.iter().rev();
        let mut acc = it.next().cloned().unwrap_or_else(Self::identity);
        for f in it {
            acc = Self::compose(f, &acc);
        }
        acc
    }

    pub fn eval() -> Self {
        Self::new(FNode::E)
    }

    pub fn eval_scan() -> Self {
        Self::new(FNode::EScan)
    }

    pub fn approx(phi: &Functional) -> Self {
        Self::new(FNode::Approx(phi.clone()))
    }

    pub fn case(sel: &Functional, f0: &Functional, f1: &Functional) -> Self {
        Self::new(FNode::Case(sel.clone(), f0.clone(), f1.clone()))
    }

    pub fn dispatch(d: Dispatch) -> Self {
        Self::new(FNode::Dispatch(d))
    }

    /// Build a finite table functional; entries must agree wherever one prefix extends another.
    pub fn from_prefix_table(
        entries: Vec<TableEntry>,
        use_bound: usize,
        schedule: Schedule,
    ) -> Result<Self, Error> {
        for e in &entries {
            if e.prefix.len() > use_bound {
                return Err(Error::InconsistentTable(format!(
                    "prefix of length {} exceeds use bound {use_bound}",
                    e.prefix.len()
                )));
            }
            if e.prefix.iter().chain(&e.output).chain(e.tail.iter()).any(|&b| b > 1) {
                return Err(Error::InconsistentTable("non-bit entry".into()));
            }
        }
        for (a_ix, a) in entries.iter().enumerate() {
            for b in &entries[a_ix + 1..] {
                let (short, long) = if a.prefix.len() <= b.prefix.len() { (a, b) } else { (b, a) };
                if long.prefix.starts_with(&short.prefix) && !outputs_agree(short, long) {
                    return Err(Error::InconsistentTable(format!(
                        "entries {} and {} conflict",
                        crate::stream::bits_to_string(&short.prefix),
                        crate::stream::bits_to_string(&long.prefix)
                    )));
                }
            }
        }
        Ok(Self::new(FNode::Table(Table {
            use_bound,
            entries,
            schedule,
        })))
    }

    /// True when the functional converges on every oracle.
    pub fn total_kind(&self) -> bool {
        match self.node() {
            FNode::Id | FNode::Project(_) | FNode::Tag(_) | FNode::Approx(_) => true,
            FNode::Const(q) => q.certified_total(),
            FNode::Interleave(f, g) | FNode::Compose(f, g) => f.total_kind() && g.total_kind(),
            _ => false,
        }
    }

    /// `Φ(p)` as a stream, simplified where the descriptor allows.
    pub fn apply(&self, p: &Stream) -> Stream {
        match self.node() {
            FNode::Id => p.clone(),
            FNode::Const(q) => q.clone(),
            FNode::Project(b) => match p.node() {
                SNode::Interleave(l, r) => {
                    if *b == 0 {
                        l.clone()
                    } else {
                        r.clone()
                    }
                }
                SNode::Const { prefix, tail } => {
                    let bits = prefix.iter().skip(*b as usize).step_by(2).copied().collect();
                    Stream::ec(bits, *tail)
                }
                _ => self.apply_raw(p),
            },
            FNode::Tag(i) => Stream::tag(*i, p),
            FNode::Untag => match p.structural_tag() {
                Some((_, body)) => body.clone(),
                None => self.apply_raw(p),
            },
            FNode::Interleave(f, g) => Stream::interleave(&f.apply(p), &g.apply(p)),
            FNode::Compose(outer, inner) => outer.apply(&inner.apply(p)),
            FNode::E => match p.node() {
                SNode::Scheduled { target, .. } => target.clone(),
                SNode::Apply(f, x) => match f.node() {
                    FNode::Approx(phi) => phi.apply(x),
                    _ => self.apply_raw(p),
                },
                _ => self.apply_raw(p),
            },
            FNode::Case(sel, f0, f1) => match sel.apply(p).structural_tag() {
                Some((0, _)) => f0.apply(p),
                Some((_, _)) => f1.apply(p),
                None => self.apply_raw(p),
            },
            FNode::Dispatch(d) => match dispatch_select(d, p) {
                Some(s) => s,
                None => self.apply_raw(p),
            },
            _ => self.apply_raw(p),
        }
    }

    /// `Φ(p)` without simplification.
    pub fn apply_raw(&self, p: &Stream) -> Stream {
        Stream::new(SNode::Apply(self.clone(), p.clone()))
    }

    /// Normalized first-convergence data for output `n`, or `None` within fuel.
    pub fn converged_at(&self, p: &Stream, n: Idx, fuel: u64) -> Option<(Stage, u8, Idx)> {
        let mut ctx = Ctx::new(fuel);
        let o = ctx.plain(p);
        match eval::converged_at(&mut ctx, self, &o, n, None) {
            Ok(Some(c)) => Some((c.stage, c.bit, c.use_)),
            _ => None,
        }
    }

    /// Normalized trace of outputs `0..count` as far as fuel allows.
    pub fn trace(&self, p: &Stream, count: usize, fuel: u64) -> StageTrace {
        let mut ctx = Ctx::new(fuel);
        let o = ctx.plain(p);
        let mut entries = Vec::new();
        for n in 0..count as Idx {
            match eval::converged_at(&mut ctx, self, &o, n, None) {
                Ok(Some(c)) => entries.push(TraceEntry {
                    n,
                    stage: c.stage,
                    bit: c.bit,
                    use_: c.use_,
                }),
                _ => break,
            }
        }
        StageTrace { entries }
    }
}

fn outputs_agree(a: &TableEntry, b: &TableEntry) -> bool {
    let len = a.output.len().max(b.output.len()) + 1;
    (0..len).all(|n| match (entry_bit(a, n), entry_bit(b, n)) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    })
}

pub(crate) fn entry_bit(e: &TableEntry, n: usize) -> Option<u8> {
    e.output.get(n).copied().or(e.tail)
}

/// The output depends only on the first `depth` bits, so selecting once they are known is exact.
fn dispatch_select(d: &Dispatch, p: &Stream) -> Option<Stream> {
    let bits = p.prefix(d.depth, 1 << 16).ok()?;
    d.entries.iter().find(|(pre, _)| *pre == bits).map(|(_, s)| s.clone())
}

/// One line of a stage trace: output `n` first converged at `stage` with `bit` and `use_`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEntry {
    pub n: Idx,
    pub stage: Stage,
    pub bit: u8,
    pub use_: Idx,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StageTrace {
    pub entries: Vec<TraceEntry>,
}

impl StageTrace {
    /// Both ordering clauses: stages strictly increase with n (one release per stage,
    /// smaller outputs first).
    pub fn satisfies_convention(&self) -> bool {
        self.entries
            .iter()
            .enumerate()
            .all(|(k, e)| e.n == k as Idx)
            && self.entries.windows(2).all(|w| w[0].stage < w[1].stage)
    }

    /// Lines of `n s i u`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("{} {} {} {}\n", e.n, e.stage, e.bit, e.use_));
        }
        out
    }
}

impl std::fmt::Debug for Functional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}
