//! Cantor pairing on naturals and the right-nested triple code.

use crate::error::Error;

/// Natural numbers used as stream indices.
pub type Idx = u128;

/// `(x+y)(x+y+1)/2 + y`.
pub fn pair_nat(x: Idx, y: Idx) -> Result<Idx, Error> {
    checked_pair(x, y).ok_or(Error::Overflow)
}

pub(crate) fn checked_pair(x: Idx, y: Idx) -> Option<Idx> {
    let d = x.checked_add(y)?;
    let t = if d % 2 == 0 {
        (d / 2).checked_mul(d.checked_add(1)?)?
    } else {
        d.checked_mul(d.div_ceil(2))?
    };
    t.checked_add(y)
}

/// Largest `w` with `w(w+1)/2 <= m`.
fn diagonal(m: Idx) -> Idx {
    let mut w = match m.checked_mul(2) {
        Some(d) => d.isqrt(),
        None => (m / 2).isqrt() * 2,
    };
    while tri(w).is_none_or(|t| t > m) {
        w -= 1;
    }
    while tri(w + 1).is_some_and(|t| t <= m) {
        w += 1;
    }
    w
}

fn tri(w: Idx) -> Option<Idx> {
    if w.is_multiple_of(2) {
        (w / 2).checked_mul(w.checked_add(1)?)
    } else {
        w.checked_mul(w.div_ceil(2))
    }
}

/// Inverse of [`pair_nat`].
pub fn unpair_nat(m: Idx) -> (Idx, Idx) {
    let w = diagonal(m);
    let y = m - tri(w).expect("diagonal fits");
    (w - y, y)
}

/// `pair(n, pair(s, i))`.
pub fn triple_nat(n: Idx, s: Idx, i: u8) -> Result<Idx, Error> {
    if i > 1 {
        return Err(Error::NotABit(i));
    }
    pair_nat(n, pair_nat(s, i as Idx)?)
}

pub(crate) fn checked_triple(n: Idx, s: Idx, i: u8) -> Option<Idx> {
    checked_pair(n, checked_pair(s, i as Idx)?)
}

/// Decode `m` as `<n,s,i>`; `None` when the bit slot is not 0 or 1.
pub fn decode_triple(m: Idx) -> Option<(Idx, Idx, u8)> {
    let (n, y) = unpair_nat(m);
    let (s, i) = unpair_nat(y);
    (i < 2).then_some((n, s, i as u8))
}

/// Number of binary digits of `m` (0 for 0).
pub fn bit_length(m: Idx) -> Idx {
    (Idx::BITS - m.leading_zeros()) as Idx
}
