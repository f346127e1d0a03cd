//! Text formats for problem and witness files.
//!
//! Problem files hold blocks separated by blank lines; `#` starts a comment line.
//!
//! ```text
//! problem A
//! d_id 2
//! instance 10,0
//! solution 110,0
//! end
//!
//! medvedev MB
//! element ,1
//! end
//!
//! boxplus AB = A B
//! ```
//!
//! Streams are written `prefix,tail`. An `instance` line is followed by its `solution` lines.
//! Operator lines (`coproduct`, `meet`, `boxplus`) name a composite of earlier problems.
//!
//! Witness files hold blocks
//!
//! ```text
//! witness inj0
//! kind sw
//! source A
//! target boxplus(A,B)
//! forward tag0
//! backward compose(e,project0)
//! end
//! ```
//!
//! Problem names in witness files may be composite expressions such as `boxplus(A,B)`.

use crate::corpus::Registry;
use crate::error::Error;
use crate::ops::combine;
use crate::problem::{finite_problem, medvedev_problem, Operator, Problem};
use crate::stream::{bits_to_string, parse_bits, Stream};
use crate::syntax::parse_functional;
use crate::witness::{ReductionWitness, WitnessKind};

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, Error> {
    Err(Error::Parse {
        pos: line,
        msg: msg.into(),
    })
}

fn parse_ec(text: &str, line: usize) -> Result<Stream, Error> {
    let Some((prefix, tail)) = text.split_once(',') else {
        return perr(line, format!("expected prefix,tail but found {text:?}"));
    };
    let bits = parse_bits(prefix.trim()).or_else(|_| perr(line, format!("bad prefix {prefix:?}")))?;
    let tail = match tail.trim() {
        "0" => 0,
        "1" => 1,
        t => return perr(line, format!("bad tail bit {t:?}")),
    };
    Stream::eventually_constant(&bits, tail)
}

fn print_ec(s: &Stream) -> Result<String, Error> {
    match s.as_ec() {
        Some((p, t)) => Ok(format!("{},{t}", bits_to_string(p))),
        None => Err(Error::Parse {
            pos: 0,
            msg: format!("{s} is not eventually constant"),
        }),
    }
}

/// Meaningful lines with their 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn keyword(l: &str) -> (&str, &str) {
    match l.split_once(char::is_whitespace) {
        Some((k, rest)) => (k, rest.trim()),
        None => (l, ""),
    }
}

/// Parse a problem file into a registry; problems are also returned in file order.
pub fn parse_problems(text: &str) -> Result<(Registry, Vec<Problem>), Error> {
    let mut reg = Registry::new();
    let mut order = Vec::new();
    let mut it = lines(text).peekable();
    while let Some((ln, l)) = it.next() {
        let (kw, rest) = keyword(l);
        let problem = match kw {
            "problem" => {
                let name = rest.to_string();
                let mut d_id = None;
                let mut pairs: Vec<(Stream, Vec<Stream>)> = Vec::new();
                loop {
                    let Some((ln, l)) = it.next() else {
                        return perr(ln, "missing end");
                    };
                    let (kw, arg) = keyword(l);
                    match kw {
                        "d_id" => {
                            d_id = Some(arg.parse::<usize>().or_else(|_| perr(ln, "bad d_id"))?);
                        }
                        "instance" => pairs.push((parse_ec(arg, ln)?, Vec::new())),
                        "solution" => match pairs.last_mut() {
                            Some((_, sols)) => sols.push(parse_ec(arg, ln)?),
                            None => return perr(ln, "solution before any instance"),
                        },
                        "end" => break,
                        other => return perr(ln, format!("unexpected {other:?} in problem block")),
                    }
                }
                let d_id = match d_id {
                    Some(d) => d,
                    None => return perr(ln, "missing d_id"),
                };
                finite_problem(&name, d_id, pairs)?
            }
            "medvedev" => {
                let name = rest.to_string();
                let mut elements = Vec::new();
                loop {
                    let Some((ln, l)) = it.next() else {
                        return perr(ln, "missing end");
                    };
                    match keyword(l) {
                        ("element", arg) => elements.push(parse_ec(arg, ln)?),
                        ("end", _) => break,
                        (other, _) => return perr(ln, format!("unexpected {other:?} in medvedev block")),
                    }
                }
                medvedev_problem(&name, elements)?
            }
            "coproduct" | "meet" | "boxplus" => {
                let op = match kw {
                    "coproduct" => Operator::Coproduct,
                    "meet" => Operator::Meet,
                    _ => Operator::BoxPlus,
                };
                let Some((name, operands)) = rest.split_once('=') else {
                    return perr(ln, "expected NAME = X Y");
                };
                let ops: Vec<&str> = operands.split_whitespace().collect();
                if ops.len() != 2 {
                    return perr(ln, "an operator takes two problems");
                }
                let f = reg.resolve(ops[0])?;
                let g = reg.resolve(ops[1])?;
                combine(op, &f, &g).renamed(name.trim())
            }
            other => return perr(ln, format!("unexpected {other:?}")),
        };
        if reg.get(problem.name()).is_some() {
            return perr(ln, format!("problem {} defined twice", problem.name()));
        }
        reg.insert(problem.clone());
        order.push(problem);
    }
    Ok((reg, order))
}

/// Print problems in the problem file format. Finite problems must have eventually-constant data.
pub fn print_problems(problems: &[Problem]) -> Result<String, Error> {
    let mut blocks = Vec::new();
    for p in problems {
        let mut b = String::new();
        if let Some((op, f, g)) = p.operator() {
            b.push_str(&format!("{} {} = {} {}\n", op.keyword(), p.name(), f.name(), g.name()));
        } else if p.is_medvedev() {
            b.push_str(&format!("medvedev {}\n", p.name()));
            for x in p.instances() {
                b.push_str(&format!("element {}\n", print_ec(x)?));
            }
            b.push_str("end\n");
        } else {
            b.push_str(&format!("problem {}\nd_id {}\n", p.name(), p.d_id()));
            for (ix, x) in p.instances().iter().enumerate() {
                b.push_str(&format!("instance {}\n", print_ec(x)?));
                for s in p.listed_solutions(ix).unwrap_or_default() {
                    b.push_str(&format!("solution {}\n", print_ec(s)?));
                }
            }
            b.push_str("end\n");
        }
        blocks.push(b);
    }
    Ok(blocks.join("\n"))
}

/// A witness with the name it carries in a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedWitness {
    pub name: String,
    pub witness: ReductionWitness,
}

pub fn parse_witnesses(text: &str) -> Result<Vec<NamedWitness>, Error> {
    let mut out = Vec::new();
    let mut it = lines(text);
    while let Some((ln, l)) = it.next() {
        let (kw, name) = keyword(l);
        if kw != "witness" {
            return perr(ln, format!("expected witness block, found {kw:?}"));
        }
        let (mut kind, mut source, mut target, mut forward, mut backward) = (None, None, None, None, None);
        loop {
            let Some((ln, l)) = it.next() else {
                return perr(ln, "missing end");
            };
            let (kw, arg) = keyword(l);
            let at = |e: Error| match e {
                Error::Parse { pos, msg } => Error::Parse {
                    pos: ln,
                    msg: format!("column {pos}: {msg}"),
                },
                e => e,
            };
            match kw {
                "kind" => {
                    kind = Some(match arg {
                        "sw" => WitnessKind::Strong,
                        "w" => WitnessKind::Weak,
                        _ => return perr(ln, "kind must be sw or w"),
                    })
                }
                "source" => source = Some(arg.to_string()),
                "target" => target = Some(arg.to_string()),
                "forward" => forward = Some(parse_functional(arg).map_err(at)?),
                "backward" => backward = Some(parse_functional(arg).map_err(at)?),
                "end" => break,
                other => return perr(ln, format!("unexpected {other:?} in witness block")),
            }
        }
        let missing = |what: &str| Error::Parse {
            pos: ln,
            msg: format!("witness {name} has no {what}"),
        };
        out.push(NamedWitness {
            name: name.to_string(),
            witness: ReductionWitness {
                kind: kind.ok_or_else(|| missing("kind"))?,
                forward: forward.ok_or_else(|| missing("forward"))?,
                backward: backward.ok_or_else(|| missing("backward"))?,
                source: source.ok_or_else(|| missing("source"))?,
                target: target.ok_or_else(|| missing("target"))?,
            },
        });
    }
    Ok(out)
}

pub fn print_witnesses(ws: &[NamedWitness]) -> String {
    ws.iter()
        .map(|nw| {
            let w = &nw.witness;
            format!(
                "witness {}\nkind {}\nsource {}\ntarget {}\nforward {}\nbackward {}\nend\n",
                nw.name,
                w.kind.keyword(),
                w.source,
                w.target,
                w.forward,
                w.backward
            )
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus;
    use crate::witness;

    const PROBLEMS: &str = "problem A\nd_id 2\ninstance 10,0\nsolution 110,0\nend\n\n\
problem D\nd_id 1\ninstance ,0\nsolution 1,0\nsolution 0,1\nend\n\n\
medvedev MA\nelement ,1\nelement 1,0\nend\n\n\
boxplus AD = A D\n\nmeet M = AD MA\n";

    #[test]
    fn problem_round_trip() {
        let (_, ps) = parse_problems(PROBLEMS).unwrap();
        assert_eq!(ps.len(), 5);
        assert_eq!(ps[4].instances().len(), 4);
        assert_eq!(print_problems(&ps).unwrap(), PROBLEMS);
    }

    #[test]
    fn problem_errors() {
        assert!(parse_problems("problem A\ninstance 1,0\n").is_err());
        assert!(parse_problems("problem A\nd_id 1\ninstance 1,2\nsolution 1,0\nend\n").is_err());
        assert!(matches!(
            parse_problems("boxplus X = A B\n"),
            Err(Error::UnknownProblem(_))
        ));
        assert!(matches!(
            parse_problems("problem A\nd_id 1\ninstance 1,0\nend\n"),
            Err(Error::EmptySolutionSet(_))
        ));
    }

    #[test]
    fn witness_round_trip() {
        let c = corpus();
        let (a, d, id2) = (c.atom("A").unwrap(), c.atom("D").unwrap(), c.atom("id2").unwrap());
        let ws: Vec<NamedWitness> = [
            witness::sw_boxplus_injections(a, d).0,
            witness::sw_distrib_meet_boxplus(a, d, id2),
            witness::sw_distrib_coproduct_meet(a, d, id2),
            witness::sw_assoc(a, d, id2),
            witness::w_coproduct_injections(a, d).1,
        ]
        .into_iter()
        .enumerate()
        .map(|(k, w)| NamedWitness {
            name: format!("w{k}"),
            witness: w,
        })
        .collect();
        let text = print_witnesses(&ws);
        let back = parse_witnesses(&text).unwrap();
        assert_eq!(print_witnesses(&back), text);
        for (x, y) in ws.iter().zip(&back) {
            assert_eq!(x.witness.source, y.witness.source);
            assert_eq!(x.witness.kind, y.witness.kind);
        }
    }

    #[test]
    fn witness_errors() {
        assert!(parse_witnesses("witness x\nkind sw\nend\n").is_err());
        assert!(parse_witnesses("witness x\nkind sw\nforward tag9(\nend\n").is_err());
        assert!(parse_witnesses("nonsense\n").is_err());
    }
}
