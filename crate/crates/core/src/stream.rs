//! Lazy binary streams over Cantor space.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::Error;
use crate::eval::{self, Ctx, Diverged};
use crate::functional::{Functional, FNode};
use crate::pairing::Idx;

/// Result of a single fuel-bounded bit query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitOutcome {
    Zero,
    One,
    DivergedWithinFuel(u64),
}

/// An immutable stream descriptor. Cloning is cheap.
#[derive(Clone, PartialEq, Eq)]
pub struct Stream(pub(crate) Arc<SNode>);

#[derive(PartialEq, Eq)]
pub enum SNode {
    /// `prefix tail^ω`
    Const { prefix: Vec<u8>, tail: u8 },
    /// `r(2n) = left(n)`, `r(2n+1) = right(n)`
    Interleave(Stream, Stream),
    /// Output of a functional on an oracle.
    Apply(Functional, Stream),
    /// Characteristic function of a finite member set.
    Members(BTreeSet<Idx>),
    /// Members `<n, offset+n, target(n)>` for every n.
    Scheduled { target: Stream, offset: Idx },
}

impl Stream {
    pub(crate) fn new(node: SNode) -> Self {
        Stream(Arc::new(node))
    }

    pub fn node(&self) -> &SNode {
        &self.0
    }

    pub(crate) fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// `prefix tail^ω`; bits other than 0/1 are rejected.
    pub fn eventually_constant(prefix: &[u8], tail: u8) -> Result<Self, Error> {
        if let Some(&b) = prefix.iter().find(|&&b| b > 1) {
            return Err(Error::NotABit(b));
        }
        if tail > 1 {
            return Err(Error::NotABit(tail));
        }
        Ok(Self::ec(prefix.to_vec(), tail))
    }

    pub(crate) fn ec(prefix: Vec<u8>, tail: u8) -> Self {
        Stream::new(SNode::Const { prefix, tail })
    }

    /// Parse `"0110"` as a prefix.
    pub fn from_bits(prefix: &str, tail: u8) -> Result<Self, Error> {
        let bits = parse_bits(prefix)?;
        Self::eventually_constant(&bits, tail)
    }

    pub fn zeros() -> Self {
        Self::ec(vec![], 0)
    }

    pub fn ones() -> Self {
        Self::ec(vec![], 1)
    }

    /// Characteristic function of `{i}`: `10^ω` or `010^ω`.
    pub fn chi(i: u8) -> Self {
        if i == 0 {
            Self::ec(vec![1], 0)
        } else {
            Self::ec(vec![0, 1], 0)
        }
    }

    pub fn members(set: BTreeSet<Idx>) -> Self {
        Stream::new(SNode::Members(set))
    }

    pub fn interleave(p: &Stream, q: &Stream) -> Self {
        Stream::new(SNode::Interleave(p.clone(), q.clone()))
    }

    pub fn project(&self, side: u8) -> Self {
        Functional::project(side).apply(self)
    }

    pub fn tag(i: u8, p: &Stream) -> Self {
        Self::interleave(&Self::chi(i), p)
    }

    /// Split a tagged stream; the even track must be `χ_{i}` on `window` bits.
    pub fn untag(&self, window: usize, fuel: u64) -> Result<(u8, Stream), UntagError> {
        let mut ctx = Ctx::new(fuel);
        let mut even = Vec::with_capacity(window);
        for k in 0..window as Idx {
            even.push(eval::bit(&mut ctx, self, 2 * k).map_err(UntagError::Diverged)?);
        }
        let i = read_tag(&even).ok_or(UntagError::Malformed)?;
        Ok((i, self.project(1)))
    }

    /// Decide whether this stream is definitely total as a bit sequence.
    pub fn certified_total(&self) -> bool {
        match self.node() {
            SNode::Const { .. } | SNode::Members(_) => true,
            SNode::Interleave(a, b) => a.certified_total() && b.certified_total(),
            SNode::Scheduled { target, .. } => target.certified_total(),
            SNode::Apply(f, x) => match f.node() {
                FNode::Approx(_) => x.certified_total(),
                _ => f.total_kind() && x.certified_total(),
            },
        }
    }

    /// Eventually-constant view, if the descriptor is one.
    pub fn as_ec(&self) -> Option<(&[u8], u8)> {
        match self.node() {
            SNode::Const { prefix, tail } => Some((prefix, *tail)),
            _ => None,
        }
    }

    /// Tag read off the descriptor without evaluation.
    pub(crate) fn structural_tag(&self) -> Option<(u8, &Stream)> {
        if let SNode::Interleave(a, b) = self.node() {
            if let Some((p, t)) = a.as_ec() {
                if t == 0 {
                    let trimmed: &[u8] = {
                        let mut end = p.len();
                        while end > 0 && p[end - 1] == 0 {
                            end -= 1;
                        }
                        &p[..end]
                    };
                    match trimmed {
                        [1] => return Some((0, b)),
                        [0, 1] => return Some((1, b)),
                        _ => {}
                    }
                }
            }
        }
        None
    }

    pub fn query(&self, n: Idx, fuel: u64) -> BitOutcome {
        let mut ctx = Ctx::new(fuel);
        match eval::bit(&mut ctx, self, n) {
            Ok(0) => BitOutcome::Zero,
            Ok(_) => BitOutcome::One,
            Err(d) => BitOutcome::DivergedWithinFuel(d.spent),
        }
    }

    /// First `len` bits under one shared budget.
    pub fn prefix(&self, len: usize, fuel: u64) -> Result<Vec<u8>, PrefixDiverged> {
        let mut ctx = Ctx::new(fuel);
        let mut out = Vec::with_capacity(len);
        for n in 0..len {
            match eval::bit(&mut ctx, self, n as Idx) {
                Ok(b) => out.push(b),
                Err(d) => {
                    return Err(PrefixDiverged {
                        at: n,
                        spent: d.spent,
                        bits: out,
                    })
                }
            }
        }
        Ok(out)
    }

    pub fn prefix_string(&self, len: usize, fuel: u64) -> Result<String, PrefixDiverged> {
        self.prefix(len, fuel).map(|b| bits_to_string(&b))
    }
}

/// Divergence while computing a prefix; `bits` holds what was computed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixDiverged {
    pub at: usize,
    pub spent: u64,
    pub bits: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UntagError {
    Malformed,
    Diverged(Diverged),
}

/// Tag from the even track: `1 0 0 ...` is 0, `0 1 0 ...` is 1.
pub(crate) fn read_tag(even: &[u8]) -> Option<u8> {
    let ones: Vec<usize> = even
        .iter()
        .enumerate()
        .filter(|(_, &b)| b == 1)
        .map(|(k, _)| k)
        .collect();
    match ones.as_slice() {
        [0] => Some(0),
        [1] => Some(1),
        _ => None,
    }
}

pub fn parse_bits(s: &str) -> Result<Vec<u8>, Error> {
    s.chars()
        .enumerate()
        .map(|(pos, c)| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(Error::Parse {
                pos,
                msg: format!("expected bit, found {c:?}"),
            }),
        })
        .collect()
}

pub fn bits_to_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

impl std::fmt::Debug for Stream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FUEL: u64 = 10_000;

    #[test]
    fn tag_shapes() {
        let z = Stream::zeros();
        assert_eq!(Stream::tag(0, &z).prefix_string(6, FUEL).unwrap(), "100000");
        assert_eq!(Stream::tag(1, &z).prefix_string(6, FUEL).unwrap(), "001000");
    }

    #[test]
    fn interleave_shapes() {
        let p = Stream::interleave(&Stream::zeros(), &Stream::ones());
        assert_eq!(p.prefix_string(6, FUEL).unwrap(), "010101");
        let q = Stream::interleave(&Stream::from_bits("1", 0).unwrap(), &Stream::zeros());
        assert_eq!(q.prefix_string(4, FUEL).unwrap(), "1000");
    }

    #[test]
    fn eventually_constant_queries() {
        let s = Stream::from_bits("01", 0).unwrap();
        assert_eq!(s.query(5, 100), BitOutcome::Zero);
        assert_eq!(s.query(1, 100), BitOutcome::One);
        assert_eq!(Stream::ones().prefix_string(3, 100).unwrap(), "111");
    }

    #[test]
    fn untag_round_trip_and_malformed() {
        let p = Stream::from_bits("1101", 0).unwrap();
        let (i, body) = Stream::tag(1, &p).untag(8, FUEL).unwrap();
        assert_eq!(i, 1);
        assert_eq!(body.prefix(64, FUEL).unwrap(), p.prefix(64, FUEL).unwrap());
        assert_eq!(Stream::ones().untag(8, FUEL), Err(UntagError::Malformed));
        assert_eq!(Stream::zeros().untag(8, FUEL), Err(UntagError::Malformed));
    }

    #[test]
    fn bad_bits_rejected() {
        assert!(Stream::eventually_constant(&[0, 2], 0).is_err());
        assert!(Stream::from_bits("01x", 0).is_err());
    }
}
