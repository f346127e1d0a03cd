//! Fuel-bounded evaluation of streams and stage-indexed functionals.
//!
//! A `Ctx` lives for one top-level query. It owns the budget and all memo tables,
//! so streams and functionals stay immutable and shareable across threads.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::functional::{entry_bit, FNode, Functional, Stage, Table, TAG_WINDOW};
use crate::pairing::{bit_length, checked_triple, decode_triple, Idx};
use crate::stream::{read_tag, SNode, Stream};

/// Fuel ran out; `spent` is the whole budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Diverged {
    pub spent: u64,
}

pub(crate) type R<T> = Result<T, Diverged>;

/// One output convergence: stage, bit and use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conv {
    pub stage: Stage,
    pub bit: u8,
    pub use_: Idx,
}

impl Conv {
    fn join(self, other: Conv, bit: u8) -> Conv {
        Conv {
            stage: self.stage.max(other.stage),
            bit,
            use_: self.use_.max(other.use_),
        }
    }
}

fn within(c: Conv, bound: Option<Stage>) -> Option<Conv> {
    bound.is_none_or(|b| c.stage <= b).then_some(c)
}

pub(crate) enum OracleNode {
    Plain(Stream),
    Via {
        f: Functional,
        inner: Oracle,
        view: Stream,
    },
}

pub(crate) type Oracle = Arc<OracleNode>;

impl OracleNode {
    fn view(&self) -> &Stream {
        match self {
            OracleNode::Plain(s) => s,
            OracleNode::Via { view, .. } => view,
        }
    }
}

fn okey(o: &Oracle) -> usize {
    Arc::as_ptr(o) as usize
}

#[derive(Clone, Copy)]
enum Memo {
    Known(Conv),
    Above(Stage),
    Never,
}

#[derive(Default)]
struct ScanState {
    pos: Idx,
    seen: BTreeMap<Idx, (Idx, u8, Idx)>,
    broken: bool,
    exhausted: bool,
}

#[derive(Default)]
struct ApproxEnum {
    next_n: Idx,
    members: BTreeSet<Idx>,
    done: bool,
}

/// Per-query evaluation context.
pub struct Ctx {
    budget: u64,
    left: u64,
    streams: HashMap<usize, Stream>,
    functionals: HashMap<usize, Functional>,
    bits: HashMap<(usize, Idx), u8>,
    raw: HashMap<(usize, usize, Idx), Memo>,
    norm: HashMap<(usize, usize), Vec<Conv>>,
    plains: HashMap<usize, Oracle>,
    vias: HashMap<(usize, usize), Oracle>,
    scans: HashMap<usize, ScanState>,
    approx: HashMap<usize, ApproxEnum>,
}

impl Ctx {
    pub fn new(fuel: u64) -> Self {
        Ctx {
            budget: fuel,
            left: fuel,
            streams: HashMap::new(),
            functionals: HashMap::new(),
            bits: HashMap::new(),
            raw: HashMap::new(),
            norm: HashMap::new(),
            plains: HashMap::new(),
            vias: HashMap::new(),
            scans: HashMap::new(),
            approx: HashMap::new(),
        }
    }

    pub fn spent(&self) -> u64 {
        self.budget - self.left
    }

    fn tick(&mut self) -> R<()> {
        if self.left == 0 {
            return Err(Diverged { spent: self.budget });
        }
        self.left -= 1;
        Ok(())
    }

    /// Certain divergence: burn the rest of the budget.
    fn diverge<T>(&mut self) -> R<T> {
        self.left = 0;
        Err(Diverged { spent: self.budget })
    }

    fn pin_stream(&mut self, s: &Stream) -> usize {
        let k = s.key();
        self.streams.entry(k).or_insert_with(|| s.clone());
        k
    }

    fn pin_functional(&mut self, f: &Functional) -> usize {
        let k = f.key();
        self.functionals.entry(k).or_insert_with(|| f.clone());
        k
    }

    pub(crate) fn plain(&mut self, s: &Stream) -> Oracle {
        let k = self.pin_stream(s);
        self.plains
            .entry(k)
            .or_insert_with(|| Arc::new(OracleNode::Plain(s.clone())))
            .clone()
    }

    fn via(&mut self, f: &Functional, inner: &Oracle) -> Oracle {
        let k = (self.pin_functional(f), okey(inner));
        if let Some(o) = self.vias.get(&k) {
            return o.clone();
        }
        let view = f.apply(inner.view());
        let o = Arc::new(OracleNode::Via {
            f: f.clone(),
            inner: inner.clone(),
            view,
        });
        self.vias.insert(k, o.clone());
        o
    }
}

/// Bit `j` of `s`.
pub fn bit(ctx: &mut Ctx, s: &Stream, j: Idx) -> R<u8> {
    if let Some(&b) = ctx.bits.get(&(s.key(), j)) {
        return Ok(b);
    }
    ctx.tick()?;
    let b = match s.node() {
        SNode::Const { prefix, tail } => {
            if j < prefix.len() as Idx {
                prefix[j as usize]
            } else {
                *tail
            }
        }
        SNode::Interleave(a, c) => {
            if j.is_multiple_of(2) {
                bit(ctx, a, j / 2)?
            } else {
                bit(ctx, c, j / 2)?
            }
        }
        SNode::Members(set) => set.contains(&j) as u8,
        SNode::Scheduled { target, offset } => match decode_triple(j) {
            Some((n, st, i)) if n.checked_add(*offset) == Some(st) => {
                (bit(ctx, target, n)? == i) as u8
            }
            _ => 0,
        },
        SNode::Apply(f, x) => {
            let o = ctx.plain(x);
            let r = if f.total_kind() {
                raw(ctx, f, &o, j, None)?
            } else {
                converged_at(ctx, f, &o, j, None)?
            };
            match r {
                Some(c) => c.bit,
                None => return ctx.diverge(),
            }
        }
    };
    ctx.pin_stream(s);
    ctx.bits.insert((s.key(), j), b);
    Ok(b)
}

fn read(ctx: &mut Ctx, o: &Oracle, j: Idx, bound: Option<Stage>) -> R<Option<Conv>> {
    match &**o {
        OracleNode::Plain(s) => Ok(Some(Conv {
            stage: 0,
            bit: bit(ctx, s, j)?,
            use_: j.saturating_add(1),
        })),
        OracleNode::Via { f, inner, .. } => raw(ctx, f, inner, j, bound),
    }
}

/// Unnormalized convergence of output `n`, restricted to stages `<= bound`.
/// `Ok(None)` means "not by `bound`", or "never" when unbounded.
pub(crate) fn raw(
    ctx: &mut Ctx,
    f: &Functional,
    o: &Oracle,
    n: Idx,
    bound: Option<Stage>,
) -> R<Option<Conv>> {
    let key = (f.key(), okey(o), n);
    match ctx.raw.get(&key) {
        Some(Memo::Known(c)) => return Ok(within(*c, bound)),
        Some(Memo::Never) => return Ok(None),
        Some(Memo::Above(b0)) if bound.is_some_and(|b| b <= *b0) => return Ok(None),
        _ => {}
    }
    ctx.tick()?;
    let r = raw_step(ctx, f, o, n, bound)?;
    let memo = match (r, bound) {
        (Some(c), _) => Memo::Known(c),
        (None, None) => Memo::Never,
        (None, Some(b)) => match ctx.raw.get(&key) {
            Some(Memo::Above(b0)) => Memo::Above(b.max(*b0)),
            _ => Memo::Above(b),
        },
    };
    ctx.pin_functional(f);
    ctx.raw.insert(key, memo);
    Ok(r.and_then(|c| within(c, bound)))
}

fn raw_step(
    ctx: &mut Ctx,
    f: &Functional,
    o: &Oracle,
    n: Idx,
    bound: Option<Stage>,
) -> R<Option<Conv>> {
    match f.node() {
        FNode::Id => read(ctx, o, n, bound),
        FNode::Const(q) => Ok(Some(Conv {
            stage: 0,
            bit: bit(ctx, q, n)?,
            use_: 0,
        })),
        FNode::Project(b) => match n.checked_mul(2).and_then(|m| m.checked_add(*b as Idx)) {
            Some(j) => read(ctx, o, j, bound),
            None => Ok(None),
        },
        FNode::Tag(i) => {
            if n.is_multiple_of(2) {
                let b = (n / 2 == *i as Idx) as u8;
                Ok(Some(Conv {
                    stage: 0,
                    bit: b,
                    use_: 0,
                }))
            } else {
                read(ctx, o, n / 2, bound)
            }
        }
        FNode::Untag => {
            let Some((_, tc)) = tag_via(ctx, o, None, bound)? else {
                return Ok(None);
            };
            let Some(j) = n.checked_mul(2).and_then(|m| m.checked_add(1)) else {
                return Ok(None);
            };
            Ok(read(ctx, o, j, bound)?.and_then(|c| within(tc.join(c, c.bit), bound)))
        }
        FNode::Interleave(a, b) => {
            let side = if n.is_multiple_of(2) { a } else { b };
            raw(ctx, side, o, n / 2, bound)
        }
        FNode::Compose(outer, inner) => {
            let v = ctx.via(inner, o);
            raw(ctx, outer, &v, n, bound)
        }
        FNode::Case(sel, f0, f1) => {
            let Some((i, tc)) = tag_via(ctx, o, Some(sel), bound)? else {
                return Ok(None);
            };
            let branch = if i == 0 { f0 } else { f1 };
            Ok(raw(ctx, branch, o, n, bound)?.and_then(|c| within(tc.join(c, c.bit), bound)))
        }
        FNode::E => e_raw(ctx, o, n, bound, true),
        FNode::EScan => e_raw(ctx, o, n, bound, false),
        FNode::Approx(phi) => approx_raw(ctx, phi, o, n, bound),
        FNode::Table(t) => table_raw(ctx, t, o, n, bound),
        FNode::Dispatch(d) => {
            let mut acc = Conv {
                stage: 0,
                bit: 0,
                use_: d.depth as Idx,
            };
            let mut bits = Vec::with_capacity(d.depth);
            for j in 0..d.depth as Idx {
                let Some(c) = read(ctx, o, j, bound)? else {
                    return Ok(None);
                };
                acc = acc.join(c, 0);
                bits.push(c.bit);
            }
            match d.entries.iter().find(|(p, _)| *p == bits) {
                Some((_, s)) => {
                    let s = s.clone();
                    acc.bit = bit(ctx, &s, n)?;
                    Ok(within(acc, bound))
                }
                None => Ok(None),
            }
        }
    }
}

/// Tag of `sel(o)` (or of `o` itself) read over the inspection window.
fn tag_via(
    ctx: &mut Ctx,
    o: &Oracle,
    sel: Option<&Functional>,
    bound: Option<Stage>,
) -> R<Option<(u8, Conv)>> {
    let mut acc = Conv {
        stage: 0,
        bit: 0,
        use_: 0,
    };
    let mut even = Vec::with_capacity(TAG_WINDOW);
    for k in 0..TAG_WINDOW as Idx {
        let c = match sel {
            Some(s) => raw(ctx, s, o, 2 * k, bound)?,
            None => read(ctx, o, 2 * k, bound)?,
        };
        let Some(c) = c else { return Ok(None) };
        acc = acc.join(c, 0);
        even.push(c.bit);
    }
    Ok(read_tag(&even).map(|i| (i, acc)))
}

/// Normalized convergence: output n is released at `max(raw_n, release_{n-1} + 1)`
/// and its use is the largest raw use among outputs `<= n`.
pub(crate) fn converged_at(
    ctx: &mut Ctx,
    f: &Functional,
    o: &Oracle,
    n: Idx,
    bound: Option<Stage>,
) -> R<Option<Conv>> {
    let key = (ctx.pin_functional(f), okey(o));
    let have = ctx.norm.get(&key).map_or(0, |v| v.len()) as Idx;
    if n < have {
        let c = ctx.norm[&key][n as usize];
        return Ok(within(c, bound));
    }
    let mut prev = ctx.norm.get(&key).and_then(|v| v.last().copied());
    for m in have..=n {
        let mb = match bound {
            None => None,
            Some(s) => match s.checked_sub(n - m) {
                Some(b) => Some(b),
                None => return Ok(None),
            },
        };
        let Some(c) = raw(ctx, f, o, m, mb)? else {
            return Ok(None);
        };
        let rel = match prev {
            Some(p) => c.stage.max(p.stage.saturating_add(1)),
            None => c.stage,
        };
        let nc = Conv {
            stage: rel,
            bit: c.bit,
            use_: prev.map_or(c.use_, |p| p.use_.max(c.use_)),
        };
        ctx.norm.entry(key).or_default().push(nc);
        if mb.is_some_and(|b| rel > b) {
            return Ok(None);
        }
        prev = Some(nc);
    }
    Ok(prev.and_then(|c| within(c, bound)))
}

fn scan_limit(bound: Option<Stage>) -> Option<Idx> {
    bound.and_then(|t| (t < 127).then(|| 1u128 << t))
}

/// Largest `s` with `<n,s,0> < cap`.
fn max_stage_below(n: Idx, cap: Idx) -> Option<Stage> {
    let below = |s: Idx| checked_triple(n, s, 0).is_some_and(|t| t < cap);
    if !below(0) {
        return None;
    }
    let mut hi: Idx = 1;
    while below(hi) {
        hi = hi.checked_mul(2)?;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

fn e_raw(
    ctx: &mut Ctx,
    o: &Oracle,
    n: Idx,
    bound: Option<Stage>,
    certified: bool,
) -> R<Option<Conv>> {
    let view = o.view().clone();
    let limit = scan_limit(bound);
    let found = locate_member(ctx, &view, n, limit, certified)?;
    let Some((k, i)) = found else { return Ok(None) };
    if limit.is_some_and(|l| k >= l) {
        return Ok(None);
    }
    let Some(rc) = read(ctx, o, k, bound)? else {
        return Ok(None);
    };
    let c = Conv {
        stage: bit_length(k).max(rc.stage),
        bit: i,
        use_: k.saturating_add(1).max(rc.use_),
    };
    Ok(within(c, bound))
}

/// Member `<n,s,i>` of `a` below `limit`, as `(index, i)`.
pub(crate) fn locate_member(
    ctx: &mut Ctx,
    view: &Stream,
    n: Idx,
    limit: Option<Idx>,
    certified: bool,
) -> R<Option<(Idx, u8)>> {
    match (certified, view.node()) {
        (true, SNode::Scheduled { target, offset }) => {
            let Some(st) = n.checked_add(*offset) else {
                return Ok(None);
            };
            match checked_triple(n, st, 0) {
                Some(lo) if limit.is_none_or(|l| lo < l) => {
                    let i = bit(ctx, target, n)?;
                    Ok(checked_triple(n, st, i).map(|k| (k, i)))
                }
                _ => Ok(None),
            }
        }
        (true, SNode::Apply(f, x)) if matches!(f.node(), FNode::Approx(_)) => {
            let FNode::Approx(phi) = f.node() else { unreachable!() };
            let sb = match limit {
                Some(l) => match max_stage_below(n, l) {
                    Some(s) => Some(s),
                    None => return Ok(None),
                },
                None => None,
            };
            let xo = ctx.plain(x);
            Ok(match converged_at(ctx, phi, &xo, n, sb)? {
                Some(c) => checked_triple(n, c.stage, c.bit).map(|k| (k, c.bit)),
                None => None,
            })
        }
        _ => e_scan(ctx, view, n, limit),
    }
}

/// Scan members of `a` in index order, validating every clause as it goes,
/// until one of the form `<n,s,i>` appears.
fn e_scan(ctx: &mut Ctx, a: &Stream, n: Idx, limit: Option<Idx>) -> R<Option<(Idx, u8)>> {
    let key = ctx.pin_stream(a);
    loop {
        let st = ctx.scans.entry(key).or_default();
        if let Some(&(_, i, k)) = st.seen.get(&n) {
            return Ok(limit.is_none_or(|l| k < l).then_some((k, i)));
        }
        if st.broken || st.exhausted || limit.is_some_and(|l| st.pos >= l) {
            return Ok(None);
        }
        let pos = st.pos;
        let next = next_one(ctx, a, pos, limit)?;
        let st = ctx.scans.get_mut(&key).expect("scan state");
        let Some(k) = next else {
            match limit {
                None => st.exhausted = true,
                Some(l) => st.pos = l,
            }
            return Ok(None);
        };
        st.pos = k.saturating_add(1);
        match decode_triple(k) {
            None => st.broken = true,
            Some((m, s, i)) => {
                let clash = st.seen.contains_key(&m)
                    || st.seen.range(..m).next_back().is_some_and(|(_, v)| v.0 >= s)
                    || st
                        .seen
                        .range(m.saturating_add(1)..)
                        .next()
                        .is_some_and(|(_, v)| v.0 <= s);
                if clash {
                    st.broken = true;
                } else {
                    st.seen.insert(m, (s, i, k));
                }
            }
        }
    }
}

/// Least member of `s` in `[from, limit)`.
pub(crate) fn next_one(ctx: &mut Ctx, s: &Stream, from: Idx, limit: Option<Idx>) -> R<Option<Idx>> {
    if limit.is_some_and(|l| from >= l) {
        return Ok(None);
    }
    ctx.tick()?;
    let ok = |k: Idx| limit.is_none_or(|l| k < l);
    match s.node() {
        SNode::Const { prefix, tail } => {
            let len = prefix.len() as Idx;
            let mut j = from;
            while j < len && ok(j) {
                if prefix[j as usize] == 1 {
                    return Ok(Some(j));
                }
                j += 1;
            }
            let j = from.max(len);
            Ok((*tail == 1 && ok(j)).then_some(j))
        }
        SNode::Members(set) => Ok(set.range(from..).next().copied().filter(|&k| ok(k))),
        SNode::Interleave(a, b) => {
            let ka = next_one(ctx, a, from.div_ceil(2), limit.map(|l| l.div_ceil(2)))?
                .and_then(|j| j.checked_mul(2));
            let mut lb = limit.map(|l| l / 2);
            if let Some(k) = ka {
                lb = Some(lb.map_or(k / 2, |l| l.min(k / 2)));
            }
            let kb = next_one(ctx, b, from / 2, lb)?
                .and_then(|j| j.checked_mul(2).and_then(|m| m.checked_add(1)));
            let best = match (ka, kb) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            };
            Ok(best.filter(|&k| k >= from && ok(k)))
        }
        SNode::Scheduled { target, offset } => scheduled_next(ctx, target, *offset, from, limit),
        SNode::Apply(f, x) => {
            if let FNode::Approx(phi) = f.node() {
                return approx_next(ctx, s, phi, x, from, limit);
            }
            let mut j = from;
            loop {
                if !ok(j) {
                    return Ok(None);
                }
                ctx.tick()?;
                if bit(ctx, s, j)? == 1 {
                    return Ok(Some(j));
                }
                j = match j.checked_add(1) {
                    Some(v) => v,
                    None => return Ok(None),
                };
            }
        }
    }
}

fn scheduled_next(
    ctx: &mut Ctx,
    target: &Stream,
    offset: Idx,
    from: Idx,
    limit: Option<Idx>,
) -> R<Option<Idx>> {
    let t = |n: Idx, i: u8| n.checked_add(offset).and_then(|s| checked_triple(n, s, i));
    // t(n,1) is strictly increasing, so the first candidate is found by bisection.
    let reaches = |n: Idx| t(n, 1).is_none_or(|u| u >= from);
    let mut n = if reaches(0) {
        0
    } else {
        let mut hi: Idx = 1;
        while !reaches(hi) {
            hi *= 2;
        }
        let mut lo = hi / 2;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if reaches(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let mut best: Option<Idx> = None;
    loop {
        ctx.tick()?;
        let Some(lo) = t(n, 0) else { break };
        let cap = match (limit, best) {
            (Some(l), Some(b)) => Some(l.min(b)),
            (l, b) => l.or(b),
        };
        if cap.is_some_and(|c| lo >= c) {
            break;
        }
        let i = bit(ctx, target, n)?;
        if let Some(k) = t(n, i) {
            if k >= from && limit.is_none_or(|l| k < l) {
                best = Some(best.map_or(k, |b| b.min(k)));
            }
        }
        n += 1;
    }
    Ok(best)
}

fn approx_next(
    ctx: &mut Ctx,
    view: &Stream,
    phi: &Functional,
    x: &Stream,
    from: Idx,
    limit: Option<Idx>,
) -> R<Option<Idx>> {
    let key = ctx.pin_stream(view);
    let xo = ctx.plain(x);
    loop {
        let st = ctx.approx.entry(key).or_default();
        let cand = st
            .members
            .range(from..)
            .next()
            .copied()
            .filter(|&k| limit.is_none_or(|l| k < l));
        if st.done {
            return Ok(cand);
        }
        let m = st.next_n;
        // Normalized stages satisfy s_n >= n, so <n,n,0> bounds every later member.
        let Some(lo) = checked_triple(m, m, 0) else {
            return Ok(cand);
        };
        let cap = match (limit, cand) {
            (Some(l), Some(c)) => Some(l.min(c)),
            (l, c) => l.or(c),
        };
        if cap.is_some_and(|c| lo >= c) {
            return Ok(cand);
        }
        let sb = match cap {
            Some(c) => match max_stage_below(m, c) {
                Some(s) => Some(s),
                None => return Ok(cand),
            },
            None => None,
        };
        ctx.tick()?;
        let r = converged_at(ctx, phi, &xo, m, sb)?;
        let st = ctx.approx.get_mut(&key).expect("approx state");
        match r {
            Some(c) => match checked_triple(m, c.stage, c.bit) {
                Some(k) => {
                    st.members.insert(k);
                    st.next_n += 1;
                }
                None => {
                    st.done = true;
                }
            },
            None => {
                if sb.is_none() {
                    st.done = true;
                }
                return Ok(cand);
            }
        }
    }
}

fn approx_raw(
    ctx: &mut Ctx,
    phi: &Functional,
    o: &Oracle,
    m: Idx,
    bound: Option<Stage>,
) -> R<Option<Conv>> {
    let stage = bit_length(m);
    if bound.is_some_and(|b| b < stage) {
        return Ok(None);
    }
    let (bit, use_) = match decode_triple(m) {
        None => (0, 0),
        Some((n, s, i)) => match converged_at(ctx, phi, o, n, Some(s))? {
            Some(c) => ((c.stage == s && c.bit == i) as u8, c.use_),
            None => (0, 0),
        },
    };
    Ok(Some(Conv { stage, bit, use_ }))
}

fn table_raw(ctx: &mut Ctx, t: &Table, o: &Oracle, n: Idx, bound: Option<Stage>) -> R<Option<Conv>> {
    let mut order: Vec<usize> = (0..t.entries.len()).collect();
    order.sort_by_key(|&k| (t.entries[k].prefix.len(), k));
    let mut bits: Vec<u8> = Vec::new();
    let mut acc = Conv {
        stage: t.schedule.stage(n),
        bit: 0,
        use_: 0,
    };
    for k in order {
        let e = &t.entries[k];
        while bits.len() < e.prefix.len() {
            let Some(c) = read(ctx, o, bits.len() as Idx, bound)? else {
                return Ok(None);
            };
            acc = acc.join(c, 0);
            acc.use_ = acc.use_.max(bits.len() as Idx + 1);
            bits.push(c.bit);
        }
        if bits[..e.prefix.len()] == e.prefix[..] {
            if let Some(b) = usize::try_from(n).ok().and_then(|n| entry_bit(e, n)) {
                acc.bit = b;
                return Ok(within(acc, bound));
            }
        }
    }
    Ok(None)
}

/// Public handle on the honest evaluation of `e` at output `n` of a stream.
pub fn eval_bit_scan(a: &Stream, n: Idx, fuel: u64) -> Result<u8, Diverged> {
    let mut ctx = Ctx::new(fuel);
    let s = Functional::eval_scan().apply_raw(a);
    bit(&mut ctx, &s, n)
}

pub(crate) fn members_below(ctx: &mut Ctx, s: &Stream, limit: Idx) -> R<Vec<Idx>> {
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(k) = next_one(ctx, s, pos, Some(limit))? {
        out.push(k);
        pos = k + 1;
    }
    Ok(out)
}
