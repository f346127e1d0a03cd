//! Executable calculus for joins in the strong Weihrauch degrees over Cantor space.
//!
//! Streams are immutable descriptors evaluated under an explicit fuel budget.
//! Functionals carry stage and use information normalized so that outputs are
//! released in order, one per stage. On top of these sit monotone approximations,
//! the evaluation functional `e`, problems with three-valued checkers, the lattice
//! operations, reduction witnesses and a verification harness.

pub mod approx;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod files;
pub mod functional;
pub mod harness;
pub mod ops;
pub mod pairing;
pub mod problem;
pub mod stream;
pub mod suite;
pub mod syntax;
pub mod witness;

pub use approx::{
    approx_of, check_prefix_valid, eval as eval_stream, make_total_approx, totality_by_descriptor,
    Totality, Validity,
};
pub use error::Error;
pub use eval::Diverged;
pub use functional::{Functional, Schedule, Stage, StageTrace, TableEntry};
pub use pairing::{decode_triple, pair_nat, triple_nat, unpair_nat, Idx};
pub use stream::{BitOutcome, Stream};
pub use ops::{boxplus, coproduct, meet};
pub use problem::{
    check_realizer, decode_completed, enumerate_realizers, finite_problem, medvedev_problem, Completed,
    CompletedSpace, Operator, Problem, Verdict,
};
pub use witness::{ReductionWitness, WitnessKind};
pub use harness::{
    brute_force_search, verify_equivalence, verify_witness, Overall, Report, SearchBounds, SearchOutcome,
    VerifyConfig,
};
pub use corpus::{corpus, Corpus, Registry};
pub use suite::{run_suite, Suite, Summary};
