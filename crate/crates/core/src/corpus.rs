//! The standard corpus and name resolution for composite problems.

use std::collections::BTreeMap;

use crate::approx::make_total_approx;
use crate::error::Error;
use crate::functional::{Functional, Schedule, TableEntry};
use crate::ops::combine;
use crate::problem::{finite_problem, medvedev_problem, Operator, Problem};
use crate::stream::Stream;

/// Named problems. Names of the form `op(X,Y)` resolve to composites on demand.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    problems: BTreeMap<String, Problem>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: Problem) {
        self.problems.insert(p.name().to_string(), p);
    }

    pub fn get(&self, name: &str) -> Option<&Problem> {
        self.problems.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.problems.keys().map(String::as_str)
    }

    /// Look up `name`, building `coproduct(..)`, `meet(..)` and `boxplus(..)` composites as needed.
    pub fn resolve(&mut self, name: &str) -> Result<Problem, Error> {
        if let Some(p) = self.problems.get(name) {
            return Ok(p.clone());
        }
        let (op, args) = split_call(name).ok_or_else(|| Error::UnknownProblem(name.to_string()))?;
        let op = match op {
            "coproduct" => Operator::Coproduct,
            "meet" => Operator::Meet,
            "boxplus" => Operator::BoxPlus,
            _ => return Err(Error::UnknownProblem(name.to_string())),
        };
        let f = self.resolve(args.0)?;
        let g = self.resolve(args.1)?;
        let p = combine(op, &f, &g);
        if p.name() != name {
            return Err(Error::UnknownProblem(name.to_string()));
        }
        self.insert(p.clone());
        Ok(p)
    }
}

/// `op(a,b)` split at the top-level comma.
fn split_call(s: &str) -> Option<(&str, (&str, &str))> {
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    let mut depth = 0i32;
    for (k, c) in inner.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some((&s[..open], (&inner[..k], &inner[k + 1..]))),
            _ => {}
        }
        if depth < 0 {
            return None;
        }
    }
    None
}

/// Problems and functionals exercised by the suite.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    /// Atomic finite problems; pairs and triples are drawn from these.
    pub atoms: Vec<Problem>,
    /// Two finite mass problems `d_A`, `d_B` with `B ⊆ A`.
    pub medvedev: Option<(Problem, Problem)>,
    /// A pair with a small table witness.
    pub search_match: Option<(Problem, Problem)>,
    /// A pair with no witness at all.
    pub pigeonhole: Option<(Problem, Problem)>,
    /// `(Φ, p)` with `Φ(p)` total.
    pub total_pairs: Vec<(Functional, Stream)>,
    /// `(Φ, p)` with `Φ(p)` partial.
    pub partial_pairs: Vec<(Functional, Stream)>,
}

impl Corpus {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
            && self.medvedev.is_none()
            && self.search_match.is_none()
            && self.pigeonhole.is_none()
            && self.total_pairs.is_empty()
            && self.partial_pairs.is_empty()
    }

    pub fn atom(&self, name: &str) -> Option<&Problem> {
        self.atoms.iter().find(|p| p.name() == name)
    }

    /// Every named problem, ready for composite resolution.
    pub fn registry(&self) -> Registry {
        let mut r = Registry::new();
        for p in &self.atoms {
            r.insert(p.clone());
        }
        if let Some((a, b)) = &self.medvedev {
            r.insert(a.clone());
            r.insert(b.clone());
        }
        r
    }
}

fn ec(prefix: &str, tail: u8) -> Stream {
    Stream::from_bits(prefix, tail).expect("corpus literals are bit strings")
}

fn single(name: &str, d_id: usize, inst: Stream, sols: Vec<Stream>) -> Problem {
    finite_problem(name, d_id, vec![(inst, sols)]).expect("corpus atoms are well formed")
}

/// The standard corpus.
pub fn corpus() -> Corpus {
    let id2 = finite_problem(
        "id2",
        1,
        vec![(Stream::zeros(), vec![Stream::zeros()]), (Stream::ones(), vec![Stream::ones()])],
    )
    .expect("id2 is well formed");
    let a = single("A", 2, ec("10", 0), vec![ec("110", 0)]);
    let b = single("B", 2, ec("01", 0), vec![ec("0", 1)]);
    let c = single("C", 1, Stream::ones(), vec![Stream::zeros()]);
    let d = single("D", 1, Stream::zeros(), vec![ec("1", 0), ec("0", 1)]);
    let k = single("K", 1, Stream::zeros(), vec![Stream::zeros()]);
    let d_a = medvedev_problem("MA", vec![Stream::ones(), ec("1", 0)]).expect("finite mass problem");
    let d_b = medvedev_problem("MB", vec![Stream::ones()]).expect("finite mass problem");

    let table = Functional::from_prefix_table(
        vec![
            TableEntry {
                prefix: vec![0],
                output: vec![1],
                tail: Some(0),
            },
            TableEntry {
                prefix: vec![1],
                output: vec![0, 1],
                tail: Some(1),
            },
        ],
        1,
        Schedule::Explicit(vec![0, 3, 7]),
    )
    .expect("table entries are disjoint");
    let q = ec("1011", 0);
    let mta = make_total_approx(&q, 0).expect("offset 0 never overflows");
    let total_pairs = vec![
        (Functional::identity(), ec("0110", 1)),
        (Functional::project(0), Stream::interleave(&ec("10", 0), &Stream::ones())),
        (Functional::project(1), ec("110101", 0)),
        (Functional::tag(1), ec("1", 0)),
        (
            Functional::interleave(&Functional::identity(), &Functional::constant(&Stream::ones())),
            Stream::zeros(),
        ),
        (Functional::compose(&Functional::project(1), &Functional::tag(0)), ec("011", 1)),
        (Functional::untag(), Stream::tag(1, &ec("01", 1))),
        (
            Functional::case(&Functional::identity(), &Functional::untag(), &Functional::constant(&Stream::zeros())),
            Stream::tag(0, &ec("1", 1)),
        ),
        (table, Stream::zeros()),
        (Functional::eval(), mta.clone()),
        (
            Functional::compose(&Functional::eval(), &Functional::project(0)),
            Stream::interleave(&mta, &Stream::zeros()),
        ),
        (
            Functional::compose(&Functional::eval(), &Functional::approx(&Functional::identity())),
            ec("01", 0),
        ),
    ];
    let partial_pairs = vec![
        (Functional::eval(), Stream::zeros()),
        (Functional::untag(), Stream::ones()),
    ];
    Corpus {
        atoms: vec![id2.clone(), a, b, c.clone(), d, k.clone()],
        medvedev: Some((d_a, d_b)),
        search_match: Some((c, k.clone())),
        pigeonhole: Some((id2, k)),
        total_pairs,
        partial_pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::default_junk_tails;
    use crate::problem::{check_realizer, enumerate_realizers};

    #[test]
    fn atoms_and_counts() {
        let c = corpus();
        assert!(c.atoms.len() >= 6);
        assert!(c.atoms.iter().filter(|p| p.instances().len() == 1).count() >= 3);
        let mut r = c.registry();
        let m = r.resolve("meet(id2,boxplus(A,B))").unwrap();
        assert_eq!(m.instances().len(), 4);
        assert_eq!(r.resolve("coproduct(id2,D)").unwrap().instances().len(), 3);
        assert!(r.resolve("boxplus(A,Z)").is_err());
        assert!(r.resolve("join(A,B)").is_err());
    }

    #[test]
    fn atomic_realizers_pass() {
        let c = corpus();
        for p in &c.atoms {
            for rz in enumerate_realizers(p, &default_junk_tails(), 64).unwrap() {
                assert!(check_realizer(&rz, p, 64, 1_000_000).pass(), "{}", p.name());
            }
        }
    }
}
