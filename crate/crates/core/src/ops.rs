//! Lattice operations on problems.

use crate::problem::{composite, Operator, Problem};

/// `f ⊔ g`: instances `tag(0,p)` and `tag(1,p)`, solutions tagged the same way.
pub fn coproduct(f: &Problem, g: &Problem) -> Problem {
    composite(Operator::Coproduct, format!("coproduct({},{})", f.name(), g.name()), f, g)
}

/// `f ⊓ g`: instances `interleave(p,q)`; solutions `tag(0, f-solution)` or `tag(1, g-solution)`.
pub fn meet(f: &Problem, g: &Problem) -> Problem {
    composite(Operator::Meet, format!("meet({},{})", f.name(), g.name()), f, g)
}

/// `f ⊞ g` in its Cantor-space form: on `tag(0,p)` a solution is `interleave(a, q)` with
/// `e(a)` an f-solution and `q` arbitrary; mirrored for tag 1.
pub fn boxplus(f: &Problem, g: &Problem) -> Problem {
    composite(Operator::BoxPlus, format!("boxplus({},{})", f.name(), g.name()), f, g)
}

/// Apply an operator by keyword.
pub fn combine(op: Operator, f: &Problem, g: &Problem) -> Problem {
    match op {
        Operator::Coproduct => coproduct(f, g),
        Operator::Meet => meet(f, g),
        Operator::BoxPlus => boxplus(f, g),
    }
}
