//! Linear (`λl`) and affine (`λa`) call-by-value lambda calculi with
//! recursion: parsing, substructural type checking, big-step evaluation and
//! two denotational interpreters over a lifted-cpo model.

pub mod denote;
pub mod domains;
pub mod eval;
pub mod syntax;
pub mod typecheck;

use serde::{Deserialize, Serialize};

pub use denote::{
    denote, denote_naive, denote_value_b, denote_value_v, Backend, BackendConfig, BackendRegistry, Denotation,
    DenoteError, ValueDenotation,
};
pub use domains::{sem_equal, Comp, EqVerdict, SemEnv, SemVal};
pub use eval::{eval, eval_trace, EvalOutcome, EvalStats};
pub use syntax::{Context, Name, Term, Type};
pub use typecheck::{check_program, typecheck, Calculus, TypeError, TypeErrorKind, UsageReport};

/// A finite budget of work: rule instances for the evaluator, computation
/// steps for the denotational interpreters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Fuel(pub u64);

impl From<u64> for Fuel {
    fn from(n: u64) -> Self {
        Fuel(n)
    }
}
