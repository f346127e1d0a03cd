//! Textual expression grammar shared by streams and functionals.
//!
//! ```text
//! expr  := ident | ident "(" arg ("," arg)* ")"
//! arg   := expr | "\"" bits "\"" | number
//! ```
//!
//! Stream heads: `const0`, `const1`, `ec("prefix",bit)`, `interleave(s,s)`,
//! `members(k,...)`, `sched(s,offset)`, `mta(s,min)`, `apply(f,s)`, and any
//! functional head with one extra trailing stream argument, e.g. `project0(s)`,
//! `tag1(s)`, `e(s)`, `approx(f,s)`.
//!
//! Functional heads: `id`, `e`, `escan`, `untag`, `project0`, `project1`, `tag0`,
//! `tag1`, `const(s)`, `const0`, `const1`, `approx(f)`, `compose(outer,inner)`,
//! `interleave(f,g)`, `case(sel,f0,f1)`,
//! `table(use,entry("prefix","output"[,tail])...[,stages(s,...)])`,
//! `dispatch(depth,on("prefix",s)...)`.

use std::collections::BTreeSet;
use std::fmt;

use crate::approx::make_total_approx;
use crate::error::Error;
use crate::functional::{Dispatch, FNode, Functional, Schedule, TableEntry};
use crate::pairing::Idx;
use crate::stream::{bits_to_string, parse_bits, SNode, Stream};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Ast {
    Call { name: String, args: Vec<Ast>, pos: usize },
    Str(String, usize),
    Num(u128, usize),
}

impl Ast {
    fn pos(&self) -> usize {
        match self {
            Ast::Call { pos, .. } | Ast::Str(_, pos) | Ast::Num(_, pos) => *pos,
        }
    }
}

fn err<T>(pos: usize, msg: impl Into<String>) -> Result<T, Error> {
    Err(Error::Parse {
        pos,
        msg: msg.into(),
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse(&mut self) -> Result<Ast, Error> {
        let start = {
            self.skip_ws();
            self.pos
        };
        match self.peek() {
            Some(b'"') => {
                self.pos += 1;
                let s = self.pos;
                while self.pos < self.src.len() && self.src[self.pos] != b'"' {
                    self.pos += 1;
                }
                if self.pos >= self.src.len() {
                    return err(start, "unterminated string");
                }
                let text = String::from_utf8_lossy(&self.src[s..self.pos]).into_owned();
                self.pos += 1;
                Ok(Ast::Str(text, start))
            }
            Some(c) if c.is_ascii_digit() => {
                let s = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[s..self.pos]).expect("ascii");
                text.parse()
                    .map(|v| Ast::Num(v, start))
                    .or_else(|_| err(start, "number out of range"))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let s = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[s..self.pos]).expect("ascii").to_string();
                let mut args = Vec::new();
                if self.peek() == Some(b'(') {
                    self.pos += 1;
                    loop {
                        args.push(self.parse()?);
                        match self.peek() {
                            Some(b',') => self.pos += 1,
                            Some(b')') => {
                                self.pos += 1;
                                break;
                            }
                            _ => return err(self.pos, "expected ',' or ')'"),
                        }
                    }
                }
                Ok(Ast::Call {
                    name,
                    args,
                    pos: start,
                })
            }
            Some(c) => err(self.pos, format!("unexpected '{}'", c as char)),
            None => err(self.pos, "unexpected end of input"),
        }
    }
}

fn parse_ast(text: &str) -> Result<Ast, Error> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    let ast = p.parse()?;
    if p.peek().is_some() {
        return err(p.pos, "trailing input");
    }
    Ok(ast)
}

/// Parse a stream expression.
pub fn parse_stream(text: &str) -> Result<Stream, Error> {
    to_stream(&parse_ast(text)?)
}

/// Parse a functional expression.
pub fn parse_functional(text: &str) -> Result<Functional, Error> {
    to_functional(&parse_ast(text)?)
}

fn num(a: &Ast) -> Result<u128, Error> {
    match a {
        Ast::Num(v, _) => Ok(*v),
        other => err(other.pos(), "expected number"),
    }
}

fn bit_arg(a: &Ast) -> Result<u8, Error> {
    match num(a)? {
        v @ (0 | 1) => Ok(v as u8),
        _ => err(a.pos(), "expected bit"),
    }
}

fn bits_arg(a: &Ast) -> Result<Vec<u8>, Error> {
    match a {
        Ast::Str(s, pos) => parse_bits(s).or_else(|_| err(*pos, "expected bit string")),
        other => err(other.pos(), "expected quoted bit string"),
    }
}

fn arity(args: &[Ast], n: usize, pos: usize, name: &str) -> Result<(), Error> {
    if args.len() == n {
        Ok(())
    } else {
        err(pos, format!("{name} takes {n} argument(s), got {}", args.len()))
    }
}

fn to_stream(a: &Ast) -> Result<Stream, Error> {
    let Ast::Call { name, args, pos } = a else {
        return err(a.pos(), "expected stream expression");
    };
    let pos = *pos;
    match name.as_str() {
        "const0" | "const1" if args.is_empty() => Ok(if name == "const0" {
            Stream::zeros()
        } else {
            Stream::ones()
        }),
        "ec" => {
            arity(args, 2, pos, "ec")?;
            Stream::eventually_constant(&bits_arg(&args[0])?, bit_arg(&args[1])?)
        }
        "interleave" if args.len() == 2 => {
            Ok(Stream::interleave(&to_stream(&args[0])?, &to_stream(&args[1])?))
        }
        "members" => {
            let set: BTreeSet<Idx> = args.iter().map(num).collect::<Result<_, _>>()?;
            Ok(Stream::members(set))
        }
        "sched" => {
            arity(args, 2, pos, "sched")?;
            Ok(Stream::new(SNode::Scheduled {
                target: to_stream(&args[0])?,
                offset: num(&args[1])?,
            }))
        }
        "mta" => {
            arity(args, 2, pos, "mta")?;
            make_total_approx(&to_stream(&args[0])?, num(&args[1])?)
        }
        "apply" => {
            arity(args, 2, pos, "apply")?;
            Ok(to_functional(&args[0])?.apply(&to_stream(&args[1])?))
        }
        _ if !args.is_empty() => {
            let head = Ast::Call {
                name: name.clone(),
                args: args[..args.len() - 1].to_vec(),
                pos,
            };
            let f = to_functional(&head)?;
            Ok(f.apply(&to_stream(&args[args.len() - 1])?))
        }
        _ => err(pos, format!("unknown stream expression {name}")),
    }
}

fn to_functional(a: &Ast) -> Result<Functional, Error> {
    let Ast::Call { name, args, pos } = a else {
        return err(a.pos(), "expected functional expression");
    };
    let pos = *pos;
    let bare = |f: Functional| -> Result<Functional, Error> {
        if args.is_empty() {
            Ok(f)
        } else {
            err(pos, format!("{name} takes no arguments"))
        }
    };
    match name.as_str() {
        "id" => bare(Functional::identity()),
        "e" => bare(Functional::eval()),
        "escan" => bare(Functional::eval_scan()),
        "untag" => bare(Functional::untag()),
        "project0" => bare(Functional::project(0)),
        "project1" => bare(Functional::project(1)),
        "tag0" => bare(Functional::tag(0)),
        "tag1" => bare(Functional::tag(1)),
        "const0" => bare(Functional::constant(&Stream::zeros())),
        "const1" => bare(Functional::constant(&Stream::ones())),
        "const" => {
            arity(args, 1, pos, "const")?;
            Ok(Functional::constant(&to_stream(&args[0])?))
        }
        "approx" => {
            arity(args, 1, pos, "approx")?;
            Ok(Functional::approx(&to_functional(&args[0])?))
        }
        "compose" => {
            arity(args, 2, pos, "compose")?;
            Ok(Functional::compose(
                &to_functional(&args[0])?,
                &to_functional(&args[1])?,
            ))
        }
        "interleave" => {
            arity(args, 2, pos, "interleave")?;
            Ok(Functional::interleave(
                &to_functional(&args[0])?,
                &to_functional(&args[1])?,
            ))
        }
        "case" => {
            arity(args, 3, pos, "case")?;
            Ok(Functional::case(
                &to_functional(&args[0])?,
                &to_functional(&args[1])?,
                &to_functional(&args[2])?,
            ))
        }
        "table" => {
            if args.is_empty() {
                return err(pos, "table needs a use bound");
            }
            let use_bound = num(&args[0])? as usize;
            let mut entries = Vec::new();
            let mut schedule = Schedule::Canonical;
            for e in &args[1..] {
                match e {
                    Ast::Call { name, args, pos } if name == "entry" => {
                        if !(2..=3).contains(&args.len()) {
                            return err(*pos, "entry takes 2 or 3 arguments");
                        }
                        entries.push(TableEntry {
                            prefix: bits_arg(&args[0])?,
                            output: bits_arg(&args[1])?,
                            tail: args.get(2).map(bit_arg).transpose()?,
                        });
                    }
                    Ast::Call { name, args, .. } if name == "stages" => {
                        schedule = Schedule::Explicit(args.iter().map(num).collect::<Result<_, _>>()?);
                    }
                    other => return err(other.pos(), "expected entry(...) or stages(...)"),
                }
            }
            Functional::from_prefix_table(entries, use_bound, schedule)
        }
        "dispatch" => {
            if args.is_empty() {
                return err(pos, "dispatch needs a depth");
            }
            let depth = num(&args[0])? as usize;
            let mut entries = Vec::new();
            for e in &args[1..] {
                match e {
                    Ast::Call { name, args, pos } if name == "on" => {
                        arity(args, 2, *pos, "on")?;
                        entries.push((bits_arg(&args[0])?, to_stream(&args[1])?));
                    }
                    other => return err(other.pos(), "expected on(...)"),
                }
            }
            Ok(Functional::dispatch(Dispatch { depth, entries }))
        }
        _ => err(pos, format!("unknown functional {name}")),
    }
}

impl fmt::Display for Stream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((i, body)) = self.structural_tag() {
            return write!(f, "tag{i}({body})");
        }
        match self.node() {
            SNode::Const { prefix, tail } if prefix.is_empty() => write!(f, "const{tail}"),
            SNode::Const { prefix, tail } => write!(f, "ec(\"{}\",{tail})", bits_to_string(prefix)),
            SNode::Interleave(a, b) => write!(f, "interleave({a},{b})"),
            SNode::Members(set) => {
                write!(f, "members(")?;
                for (k, m) in set.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, ")")
            }
            SNode::Scheduled { target, offset } => write!(f, "sched({target},{offset})"),
            SNode::Apply(g, x) => match g.node() {
                FNode::Project(_) | FNode::Tag(_) | FNode::Untag | FNode::E | FNode::EScan => {
                    write!(f, "{g}({x})")
                }
                FNode::Approx(phi) => write!(f, "approx({phi},{x})"),
                _ => write!(f, "apply({g},{x})"),
            },
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            FNode::Id => write!(f, "id"),
            FNode::Const(q) => write!(f, "const({q})"),
            FNode::Project(b) => write!(f, "project{b}"),
            FNode::Tag(i) => write!(f, "tag{i}"),
            FNode::Untag => write!(f, "untag"),
            FNode::Interleave(a, b) => write!(f, "interleave({a},{b})"),
            FNode::Compose(a, b) => write!(f, "compose({a},{b})"),
            FNode::E => write!(f, "e"),
            FNode::EScan => write!(f, "escan"),
            FNode::Approx(phi) => write!(f, "approx({phi})"),
            FNode::Case(s, a, b) => write!(f, "case({s},{a},{b})"),
            FNode::Table(t) => {
                write!(f, "table({}", t.use_bound)?;
                for e in &t.entries {
                    write!(
                        f,
                        ",entry(\"{}\",\"{}\"",
                        bits_to_string(&e.prefix),
                        bits_to_string(&e.output)
                    )?;
                    if let Some(b) = e.tail {
                        write!(f, ",{b}")?;
                    }
                    write!(f, ")")?;
                }
                if let Schedule::Explicit(v) = &t.schedule {
                    write!(f, ",stages(")?;
                    for (k, s) in v.iter().enumerate() {
                        if k > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{s}")?;
                    }
                    write!(f, ")")?;
                }
                write!(f, ")")
            }
            FNode::Dispatch(d) => {
                write!(f, "dispatch({}", d.depth)?;
                for (p, s) in &d.entries {
                    write!(f, ",on(\"{}\",{s})", bits_to_string(p))?;
                }
                write!(f, ")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for text in [
            "const0",
            "ec(\"0110\",1)",
            "interleave(const0,const1)",
            "tag1(ec(\"1\",0))",
            "approx(compose(e,project0),interleave(const0,const1))",
            "e(const0)",
            "members(0,5,20)",
            "sched(const1,3)",
        ] {
            let s = parse_stream(text).unwrap();
            assert_eq!(s.to_string(), text);
            assert_eq!(parse_stream(&s.to_string()).unwrap(), s);
        }
        for text in [
            "id",
            "compose(e,project1)",
            "case(id,compose(tag1,untag),compose(tag0,untag))",
            "interleave(approx(id),const(const0))",
            "table(1,entry(\"0\",\"1\",0),entry(\"1\",\"0\"),stages(3,3))",
            "dispatch(1,on(\"0\",const0),on(\"1\",const1))",
        ] {
            let f = parse_functional(text).unwrap();
            assert_eq!(f.to_string(), text);
        }
    }

    #[test]
    fn simplifying_parse() {
        let s = parse_stream("project0(interleave(const0,const1))").unwrap();
        assert_eq!(s, Stream::zeros());
        let s = parse_stream("e(approx(id,const0))").unwrap();
        assert_eq!(s, Stream::zeros());
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(parse_stream("interleave(const0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_stream("bogus"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse_functional("id(const0"), Err(Error::Parse { .. })));
        assert!(parse_stream("ec(\"012\",0)").is_err());
    }
}
