//! Monotone approximations, the encoder `a_{Φ(p)}` and the evaluation functional `e`.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::eval::{self, Ctx, Diverged};
use crate::functional::{FNode, Functional, Stage};
use crate::pairing::{checked_triple, decode_triple, Idx};
use crate::stream::{SNode, Stream};

/// Outcome of a bounded validity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validity {
    Valid,
    /// `clause` 1: not a triple; 2: two entries for one n; 3: stages out of order.
    ViolationAt { index: Idx, clause: u8 },
}

/// Where an approximation came from, read off its descriptor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Encoded(Functional, Stream),
    Scheduled(Stream, Idx),
    Raw,
}

/// Three-valued totality verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Totality {
    Total,
    NotTotal,
    Unknown,
}

pub fn provenance(a: &Stream) -> Provenance {
    match a.node() {
        SNode::Apply(f, x) => match f.node() {
            FNode::Approx(phi) => Provenance::Encoded(phi.clone(), x.clone()),
            _ => Provenance::Raw,
        },
        SNode::Scheduled { target, offset } => Provenance::Scheduled(target.clone(), *offset),
        _ => Provenance::Raw,
    }
}

/// Check every clause among member indices `< k`.
pub fn check_prefix_valid(p: &Stream, k: Idx, fuel: u64) -> Result<Validity, Diverged> {
    let mut ctx = Ctx::new(fuel);
    let members = eval::members_below(&mut ctx, p, k)?;
    Ok(validate_members(&members))
}

pub(crate) fn validate_members(members: &[Idx]) -> Validity {
    let mut seen: BTreeMap<Idx, Stage> = BTreeMap::new();
    for &m in members {
        let Some((n, s, _)) = decode_triple(m) else {
            return Validity::ViolationAt { index: m, clause: 1 };
        };
        if seen.contains_key(&n) {
            return Validity::ViolationAt { index: m, clause: 2 };
        }
        let before = seen.range(..n).next_back().is_some_and(|(_, &t)| t >= s);
        let after = seen.range(n + 1..).next().is_some_and(|(_, &t)| t <= s);
        if before || after {
            return Validity::ViolationAt { index: m, clause: 3 };
        }
        seen.insert(n, s);
    }
    Validity::Valid
}

/// `a_{Φ(p)}`.
pub fn approx_of(phi: &Functional, p: &Stream) -> Stream {
    Functional::approx(phi).apply(p)
}

/// `e(a)`, using certified descriptors where available.
pub fn eval(a: &Stream) -> Stream {
    Functional::eval().apply(a)
}

/// `e(a)` computed only by the scanning algorithm.
pub fn eval_scan(a: &Stream) -> Stream {
    Functional::eval_scan().apply_raw(a)
}

/// Decide totality from the descriptor alone.
pub fn totality_by_descriptor(a: &Stream) -> Totality {
    match a.node() {
        SNode::Scheduled { .. } => Totality::Total,
        SNode::Apply(f, x) => match f.node() {
            FNode::Approx(phi) if phi.apply(x).certified_total() => Totality::Total,
            _ => Totality::Unknown,
        },
        SNode::Const { tail: 0, .. } | SNode::Members(_) => Totality::NotTotal,
        _ => Totality::Unknown,
    }
}

/// Members `<n, s0+n, q(n)>` with `s0` least such that every member exceeds `min_member`.
///
/// Every member is at least `<0,s0,0>`, so `s0` is the least stage with `<0,s0,0> > min_member`.
pub fn make_total_approx(q: &Stream, min_member: Idx) -> Result<Stream, Error> {
    let above = |s: Idx| checked_triple(0, s, 0).is_none_or(|t| t > min_member);
    let mut hi: Idx = 1;
    while !above(hi) {
        hi = hi.checked_mul(2).ok_or(Error::Overflow)?;
    }
    let mut lo: Idx = 0;
    if !above(0) {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if above(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    } else {
        hi = 0;
    }
    checked_triple(0, hi, 1).ok_or(Error::Overflow)?;
    Ok(Stream::new(SNode::Scheduled {
        target: q.clone(),
        offset: hi,
    }))
}

/// Members for outputs `0..count` as `(n, s, i)`, in increasing n.
pub fn dump(a: &Stream, count: usize, fuel: u64) -> Result<Vec<(Idx, Stage, u8)>, Diverged> {
    let mut ctx = Ctx::new(fuel);
    let mut out = Vec::with_capacity(count);
    for n in 0..count as Idx {
        match eval::locate_member(&mut ctx, a, n, None, true)? {
            Some((k, _)) => {
                let (_, s, i) = decode_triple(k).expect("located members are triples");
                out.push((n, s, i));
            }
            None => break,
        }
    }
    Ok(out)
}

pub fn render_dump(rows: &[(Idx, Stage, u8)]) -> String {
    rows.iter().map(|(n, s, i)| format!("{n} {s} {i}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairing::triple_nat;
    use std::collections::BTreeSet;

    const FUEL: u64 = 1_000_000;

    fn set(items: &[(Idx, Idx, u8)]) -> Stream {
        let s: BTreeSet<Idx> = items.iter().map(|&(n, s, i)| triple_nat(n, s, i).unwrap()).collect();
        Stream::members(s)
    }

    #[test]
    fn validity_examples() {
        assert_eq!(check_prefix_valid(&Stream::zeros(), 512, FUEL).unwrap(), Validity::Valid);
        let two = set(&[(0, 1, 0), (0, 2, 0)]);
        assert!(matches!(
            check_prefix_valid(&two, 512, FUEL).unwrap(),
            Validity::ViolationAt { clause: 2, .. }
        ));
        let disorder = set(&[(1, 1, 0), (0, 2, 0)]);
        assert!(matches!(
            check_prefix_valid(&disorder, 512, FUEL).unwrap(),
            Validity::ViolationAt { clause: 3, .. }
        ));
    }

    #[test]
    fn identity_approx_members() {
        let a = approx_of(&Functional::identity(), &Stream::zeros());
        let rows = dump(&a, 20, FUEL).unwrap();
        for (n, (m, s, i)) in rows.iter().enumerate() {
            assert_eq!((*m, *s, *i), (n as Idx, n as Idx, 0));
        }
        let mut ctx = Ctx::new(FUEL);
        let found = eval::members_below(&mut ctx, &a, triple_nat(6, 6, 0).unwrap() + 1).unwrap();
        let want: Vec<Idx> = (0..=6).map(|n| triple_nat(n, n, 0).unwrap()).collect();
        assert_eq!(found, want);
    }

    #[test]
    fn eval_of_diagonal_ones() {
        let items: Vec<(Idx, Idx, u8)> = (0..40).map(|n| (n, n, 1)).collect();
        let a = set(&items);
        assert_eq!(eval_scan(&a).prefix_string(40, FUEL).unwrap(), "1".repeat(40));
    }

    #[test]
    fn eval_of_zeros_diverges() {
        assert!(eval(&Stream::zeros()).prefix(1, 10_000).is_err());
    }

    #[test]
    fn total_approx_properties() {
        let a = make_total_approx(&Stream::ones(), 1000).unwrap();
        let rows = dump(&a, 64, FUEL).unwrap();
        for (n, s, i) in rows {
            assert!(triple_nat(n, s, i).unwrap() > 1000);
        }
        let q = Stream::from_bits("0110", 1).unwrap();
        let a = make_total_approx(&q, 0).unwrap();
        assert_eq!(eval_scan(&a).prefix(128, FUEL).unwrap(), q.prefix(128, FUEL).unwrap());
        assert_eq!(check_prefix_valid(&a, 512, FUEL).unwrap(), Validity::Valid);
    }

    #[test]
    fn totality_examples() {
        assert_eq!(totality_by_descriptor(&Stream::zeros()), Totality::NotTotal);
        let a = approx_of(&Functional::identity(), &Stream::ones());
        assert_eq!(totality_by_descriptor(&a), Totality::Total);
        let raw = Stream::from_bits("1", 1).unwrap();
        assert_eq!(totality_by_descriptor(&raw), Totality::Unknown);
    }
}
