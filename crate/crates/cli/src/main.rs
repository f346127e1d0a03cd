//! `swj`: command-line access to streams, approximations, witness checks, the suite and search.
//!
//! Exit codes: 0 pass, 1 fail (or nothing checked), 2 parse, config or file error,
//! 3 divergence within fuel, 4 unknown within depth or fuel.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use swjoin::approx::{approx_of, dump, render_dump};
use swjoin::files::{parse_problems, parse_witnesses, print_witnesses, NamedWitness};
use swjoin::harness::{brute_force_search, verify_witness, Overall, SearchBounds, SearchOutcome, VerifyConfig};
use swjoin::suite::{run_suite, Verdict};
use swjoin::syntax::{parse_functional, parse_stream};
use swjoin::witness::{self, ReductionWitness, WitnessKind};
use swjoin::{corpus, Error, Problem, Registry};

const PASS: u8 = 0;
const FAIL: u8 = 1;
const USAGE: u8 = 2;
const DIVERGED: u8 = 3;
const UNKNOWN: u8 = 4;

#[derive(Parser)]
#[command(
    name = "swj",
    version,
    about = "Strong Weihrauch join calculus",
    after_help = "Exit codes: 0 pass, 1 fail or nothing checked, 2 parse/config/file error, 3 divergence, 4 unknown"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the first bits of a stream expression.
    Eval {
        expr: String,
        #[arg(long, default_value_t = 32)]
        bits: usize,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
    },
    /// Dump the approximation of FUNCTIONAL on STREAM as `n s i` lines.
    Approx {
        functional: String,
        stream: String,
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
        /// Print the stage trace `n s i u` of the functional instead.
        #[arg(long)]
        trace: bool,
    },
    /// Verify every witness in a witness file.
    Check {
        #[arg(long)]
        problems: PathBuf,
        #[arg(long)]
        witness: PathBuf,
        #[arg(long, default_value_t = 48)]
        depth: usize,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
        /// Write the reports as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the acceptance suite on the built-in corpus.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        fuel: Option<u64>,
        /// Write the summary as JSON.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Include per-criterion wall-clock times.
        #[arg(long)]
        timing: bool,
    },
    /// Search for table witnesses between two problems.
    Search {
        #[arg(long)]
        problems: PathBuf,
        source: String,
        target: String,
        #[arg(long, value_enum, default_value_t = Kind::Sw)]
        kind: Kind,
        #[arg(long = "use", default_value_t = 1)]
        use_bound: usize,
        #[arg(long, default_value_t = 4)]
        stages: usize,
        #[arg(long, default_value_t = 1)]
        output_depth: usize,
        #[arg(long, default_value_t = 48)]
        depth: usize,
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
    },
    /// Print a constructed witness in witness file format.
    PrintWitness {
        lemma: Lemma,
        /// Problems the lemma is instantiated at.
        #[arg(required = true, num_args = 2..=3)]
        args: Vec<String>,
        /// Problem file; the built-in corpus when absent.
        #[arg(long)]
        problems: Option<PathBuf>,
        #[arg(long, default_value = "w")]
        name: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sw,
    W,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lemma {
    Injection0,
    Injection1,
    Commute,
    Assoc,
    AssocInverse,
    MeetLower0,
    MeetLower1,
    BoxplusLeCoproduct,
    CoproductInjection0,
    CoproductInjection1,
    DistribMeetBoxplus,
    DistribCoproductMeet,
    SimplejoinIso,
}

/// A failure that maps to an exit code.
struct Exit(u8, String);

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        Exit(USAGE, e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Exit> {
    fs::read_to_string(path).map_err(|e| Exit(USAGE, format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Exit> {
    fs::write(path, text).map_err(|e| Exit(USAGE, format!("{}: {e}", path.display())))
}

fn load_problems(path: Option<&Path>) -> Result<Registry, Exit> {
    match path {
        Some(p) => Ok(parse_problems(&read(p)?)?.0),
        None => Ok(corpus().registry()),
    }
}

fn cfg(depth: usize, fuel: u64) -> VerifyConfig {
    VerifyConfig {
        depth,
        fuel,
        ..VerifyConfig::default()
    }
}

fn eval(expr: &str, bits: usize, fuel: u64) -> Result<u8, Exit> {
    let s = parse_stream(expr)?;
    match s.prefix(bits, fuel) {
        Ok(b) => {
            println!("{}", swjoin::stream::bits_to_string(&b));
            Ok(PASS)
        }
        Err(d) => {
            let got = swjoin::stream::bits_to_string(&d.bits);
            Err(Exit(
                DIVERGED,
                format!("diverged: bit {} not computed within fuel {fuel} (prefix \"{got}\")", d.at),
            ))
        }
    }
}

fn approx(functional: &str, stream: &str, count: usize, fuel: u64, trace: bool) -> Result<u8, Exit> {
    let phi = parse_functional(functional)?;
    let p = parse_stream(stream)?;
    if trace {
        let t = phi.trace(&p, count, fuel);
        print!("{}", t.render());
        return if t.entries.len() < count {
            Err(Exit(DIVERGED, format!("diverged: output {} not reached within fuel {fuel}", t.entries.len())))
        } else {
            Ok(PASS)
        };
    }
    match dump(&approx_of(&phi, &p), count, fuel) {
        Ok(rows) => {
            print!("{}", render_dump(&rows));
            if rows.len() < count {
                eprintln!("approximation has {} members", rows.len());
            }
            Ok(PASS)
        }
        Err(d) => Err(Exit(DIVERGED, format!("diverged after {} steps", d.spent))),
    }
}

fn check(problems: &Path, witness: &Path, cfg: &VerifyConfig, report: Option<&Path>) -> Result<u8, Exit> {
    let mut reg = load_problems(Some(problems))?;
    let ws = parse_witnesses(&read(witness)?)?;
    if ws.is_empty() {
        return Err(Exit(FAIL, "no witnesses to check".into()));
    }
    let mut overall = Overall::Pass;
    let mut reports = Vec::new();
    for nw in &ws {
        let w = &nw.witness;
        let f = reg.resolve(&w.source)?;
        let g = reg.resolve(&w.target)?;
        let r = verify_witness(w, &f, &g, cfg)?;
        print!("{}: {}", nw.name, r.render());
        overall = overall.combine(r.overall);
        reports.push(r);
    }
    if let Some(path) = report {
        write(path, &serde_json::to_string_pretty(&reports).expect("reports are plain data"))?;
    }
    println!("overall {overall:?}");
    Ok(match overall {
        Overall::Pass => PASS,
        Overall::Fail => FAIL,
        Overall::Unknown => UNKNOWN,
    })
}

/// Suite settings file. Every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SuiteConfig {
    depth: Option<usize>,
    fuel: Option<u64>,
    realizer_cap: Option<usize>,
    report: Option<PathBuf>,
    timing: Option<bool>,
}

fn suite(
    config: Option<&Path>,
    depth: Option<usize>,
    fuel: Option<u64>,
    report: Option<PathBuf>,
    timing: bool,
) -> Result<u8, Exit> {
    let file: SuiteConfig = match config {
        Some(p) => toml::from_str(&read(p)?).map_err(|e| Exit(USAGE, format!("{}: {e}", p.display())))?,
        None => SuiteConfig::default(),
    };
    let mut c = VerifyConfig::default();
    c.depth = depth.or(file.depth).unwrap_or(c.depth);
    c.fuel = fuel.or(file.fuel).unwrap_or(c.fuel);
    c.realizer_cap = file.realizer_cap.unwrap_or(c.realizer_cap);
    if c.depth == 0 || c.fuel == 0 || c.realizer_cap == 0 {
        return Err(Exit(USAGE, "depth, fuel and realizer_cap must be positive".into()));
    }
    let summary = run_suite(corpus(), c, timing || file.timing.unwrap_or(false));
    print!("{}", summary.render());
    if let Some(path) = report.or(file.report) {
        write(&path, &summary.to_json())?;
    }
    Ok(match summary.overall {
        Verdict::Pass => PASS,
        Verdict::Fail | Verdict::NothingToCheck => FAIL,
        Verdict::ConfigError => USAGE,
        Verdict::Unknown => UNKNOWN,
    })
}

fn search(problems: &Path, source: &str, target: &str, kind: Kind, bounds: SearchBounds, cfg: &VerifyConfig) -> Result<u8, Exit> {
    let mut reg = load_problems(Some(problems))?;
    let f = reg.resolve(source)?;
    let g = reg.resolve(target)?;
    let kind = match kind {
        Kind::Sw => WitnessKind::Strong,
        Kind::W => WitnessKind::Weak,
    };
    match brute_force_search(&f, &g, kind, bounds, cfg)? {
        SearchOutcome::Found(w) => {
            print!("{}", print_witnesses(&[NamedWitness { name: "found".into(), witness: w }]));
            Ok(PASS)
        }
        SearchOutcome::NoneWithinBounds { tried } => {
            println!("no witness within bounds ({tried} candidates)");
            Ok(FAIL)
        }
    }
}

impl Lemma {
    fn arity(self) -> usize {
        match self {
            Lemma::Assoc | Lemma::AssocInverse | Lemma::DistribMeetBoxplus | Lemma::DistribCoproductMeet => 3,
            _ => 2,
        }
    }
}

fn lemma_witness(lemma: Lemma, ps: &[Problem]) -> Result<ReductionWitness, Exit> {
    if ps.len() != lemma.arity() {
        return Err(Exit(USAGE, format!("this lemma takes {} problems", lemma.arity())));
    }
    let (f, g) = (&ps[0], &ps[1]);
    Ok(match lemma {
        Lemma::Injection0 => witness::sw_boxplus_injections(f, g).0,
        Lemma::Injection1 => witness::sw_boxplus_injections(f, g).1,
        Lemma::Commute => witness::sw_commute(f, g),
        Lemma::Assoc => witness::sw_assoc(f, g, &ps[2]),
        Lemma::AssocInverse => witness::sw_assoc_inverse(f, g, &ps[2]),
        Lemma::MeetLower0 => witness::sw_meet_lower(f, g, 0),
        Lemma::MeetLower1 => witness::sw_meet_lower(f, g, 1),
        Lemma::BoxplusLeCoproduct => witness::sw_boxplus_le_coproduct(f, g),
        Lemma::CoproductInjection0 => witness::w_coproduct_injections(f, g).0,
        Lemma::CoproductInjection1 => witness::w_coproduct_injections(f, g).1,
        Lemma::DistribMeetBoxplus => witness::sw_distrib_meet_boxplus(f, g, &ps[2]),
        Lemma::DistribCoproductMeet => witness::sw_distrib_coproduct_meet(f, g, &ps[2]),
        Lemma::SimplejoinIso => witness::sw_simplejoin_iso(f, g).0,
    })
}

fn print_witness(lemma: Lemma, args: &[String], problems: Option<&Path>, name: &str) -> Result<u8, Exit> {
    let mut reg = load_problems(problems)?;
    let ps = args.iter().map(|a| reg.resolve(a)).collect::<Result<Vec<_>, _>>()?;
    let w = lemma_witness(lemma, &ps)?;
    print!("{}", print_witnesses(&[NamedWitness { name: name.into(), witness: w }]));
    Ok(PASS)
}

fn run(cli: Cli) -> Result<u8, Exit> {
    match cli.cmd {
        Cmd::Eval { expr, bits, fuel } => eval(&expr, bits, fuel),
        Cmd::Approx {
            functional,
            stream,
            count,
            fuel,
            trace,
        } => approx(&functional, &stream, count, fuel, trace),
        Cmd::Check {
            problems,
            witness,
            depth,
            fuel,
            report,
        } => check(&problems, &witness, &cfg(depth, fuel), report.as_deref()),
        Cmd::Suite {
            config,
            depth,
            fuel,
            report,
            timing,
        } => suite(config.as_deref(), depth, fuel, report, timing),
        Cmd::Search {
            problems,
            source,
            target,
            kind,
            use_bound,
            stages,
            output_depth,
            depth,
            fuel,
        } => {
            let bounds = SearchBounds {
                use_bound,
                stage_bound: stages,
                output_depth,
            };
            search(&problems, &source, &target, kind, bounds, &cfg(depth, fuel))
        }
        Cmd::PrintWitness {
            lemma,
            args,
            problems,
            name,
        } => print_witness(lemma, &args, problems.as_deref(), &name),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { PASS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, msg)) => {
            eprintln!("swj: {msg}");
            ExitCode::from(code)
        }
    }
}
