//! Fuel-bounded big-step call-by-value evaluation.
//!
//! The evaluator builds the (unique) derivation of `m ⇓ v` with an explicit
//! continuation stack, so deep `rec` unfoldings never touch the host stack.
//! Every rule instance costs one unit of fuel.

use std::fmt;

use serde::Serialize;

use crate::syntax::{subst, subst_many, Name, Term, Type};
use crate::Fuel;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalOutcome {
    Converged(Term),
    OutOfFuel,
    /// No rule applies (only possible for open or ill-typed terms).
    Stuck(Term),
}

impl EvalOutcome {
    pub fn value(&self) -> Option<&Term> {
        match self {
            EvalOutcome::Converged(v) => Some(v),
            _ => None,
        }
    }

    pub fn converged(&self) -> bool {
        matches!(self, EvalOutcome::Converged(_))
    }
}

impl fmt::Display for EvalOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalOutcome::Converged(v) => write!(f, "{v}"),
            EvalOutcome::OutOfFuel => f.write_str("OUT_OF_FUEL"),
            EvalOutcome::Stuck(m) => write!(f, "STUCK({m})"),
        }
    }
}

/// Size of the derivation that was built (or attempted, when out of fuel).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EvalStats {
    /// Rule instances used.
    pub rules: u64,
    /// Height of the derivation tree.
    pub max_depth: u64,
}

enum Frame {
    SeqThen { next: Term, depth: u64 },
    Inject { left: bool, ta: Type, tb: Type },
    CaseBranch {
        left_name: Name,
        left_body: Term,
        right_name: Name,
        right_body: Term,
        depth: u64,
    },
    PairSecond { second: Term, depth: u64 },
    PairBuild { first: Term },
    LetBody { x: Name, y: Name, body: Term, depth: u64 },
    AppArg { arg: Term, depth: u64 },
    AppBody { x: Name, body: Term, depth: u64 },
    ForceBody { depth: u64 },
}

enum State {
    Eval(Term, u64),
    Return(Term),
}

pub fn eval(m: &Term, fuel: Fuel) -> EvalOutcome {
    eval_trace(m, fuel).0
}

pub fn eval_trace(m: &Term, fuel: Fuel) -> (EvalOutcome, EvalStats) {
    let mut stats = EvalStats::default();
    let mut stack: Vec<Frame> = Vec::new();
    let mut state = State::Eval(m.clone(), 1);
    loop {
        state = match state {
            State::Eval(m, depth) => {
                if stats.rules == fuel.0 {
                    return (EvalOutcome::OutOfFuel, stats);
                }
                stats.rules += 1;
                stats.max_depth = stats.max_depth.max(depth);
                let d = depth + 1;
                match m {
                    Term::Var(_) | Term::Star | Term::Lam(..) | Term::Lift(_) => State::Return(m),
                    Term::Seq(a, b) => {
                        stack.push(Frame::SeqThen { next: *b, depth: d });
                        State::Eval(*a, d)
                    }
                    Term::Left(ta, tb, a) => {
                        stack.push(Frame::Inject { left: true, ta, tb });
                        State::Eval(*a, d)
                    }
                    Term::Right(ta, tb, a) => {
                        stack.push(Frame::Inject { left: false, ta, tb });
                        State::Eval(*a, d)
                    }
                    Term::Case {
                        scrutinee,
                        left_name,
                        left_body,
                        right_name,
                        right_body,
                    } => {
                        stack.push(Frame::CaseBranch {
                            left_name,
                            left_body: *left_body,
                            right_name,
                            right_body: *right_body,
                            depth: d,
                        });
                        State::Eval(*scrutinee, d)
                    }
                    Term::Pair(a, b) => {
                        stack.push(Frame::PairSecond { second: *b, depth: d });
                        State::Eval(*a, d)
                    }
                    Term::LetPair {
                        left_name,
                        right_name,
                        bound,
                        body,
                    } => {
                        stack.push(Frame::LetBody { x: left_name, y: right_name, body: *body, depth: d });
                        State::Eval(*bound, d)
                    }
                    Term::App(a, b) => {
                        stack.push(Frame::AppArg { arg: *b, depth: d });
                        State::Eval(*a, d)
                    }
                    Term::Force(a) => {
                        stack.push(Frame::ForceBody { depth: d });
                        State::Eval(*a, d)
                    }
                    Term::Rec(z, ty, body) => {
                        let unfolded = subst(&body, &Term::lift(Term::Rec(z.clone(), ty, body.clone())), &z);
                        State::Eval(unfolded, d)
                    }
                }
            }
            State::Return(v) => {
                let Some(frame) = stack.pop() else {
                    return (EvalOutcome::Converged(v), stats);
                };
                match (frame, v) {
                    (Frame::SeqThen { next, depth }, Term::Star) => State::Eval(next, depth),
                    (Frame::Inject { left: true, ta, tb }, v) => State::Return(Term::left(ta, tb, v)),
                    (Frame::Inject { left: false, ta, tb }, v) => State::Return(Term::right(ta, tb, v)),
                    (
                        Frame::CaseBranch {
                            left_name,
                            left_body,
                            right_name,
                            right_body,
                            depth,
                        },
                        scrutinee,
                    ) => match scrutinee {
                        Term::Left(_, _, v) => State::Eval(subst(&left_body, &v, &left_name), depth),
                        Term::Right(_, _, v) => State::Eval(subst(&right_body, &v, &right_name), depth),
                        other => return (EvalOutcome::Stuck(other), stats),
                    },
                    (Frame::PairSecond { second, depth }, first) => {
                        stack.push(Frame::PairBuild { first });
                        State::Eval(second, depth)
                    }
                    (Frame::PairBuild { first }, second) => State::Return(Term::pair(first, second)),
                    (Frame::LetBody { x, y, body, depth }, Term::Pair(v, w)) => {
                        State::Eval(subst_many(&body, &[(x, *v), (y, *w)]), depth)
                    }
                    (Frame::AppArg { arg, depth }, Term::Lam(x, _, body)) => {
                        stack.push(Frame::AppBody { x, body: *body, depth });
                        State::Eval(arg, depth)
                    }
                    (Frame::AppBody { x, body, depth }, v) => State::Eval(subst(&body, &v, &x), depth),
                    (Frame::ForceBody { depth }, Term::Lift(body)) => State::Eval(*body, depth),
                    (_, other) => return (EvalOutcome::Stuck(other), stats),
                }
            }
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    const T: &str = r"(\y:(I -o I). *) (\x:I. rec z:!I. force z)";

    fn run(src: &str, fuel: u64) -> EvalOutcome {
        eval(&parse_term(src).unwrap(), Fuel(fuel))
    }

    #[test]
    fn degeneracy_witness_converges() {
        assert_eq!(run(T, 10_000), EvalOutcome::Converged(Term::Star));
    }

    #[test]
    fn rec_force_diverges() {
        assert_eq!(run("rec z:!I. force z", 1_000_000), EvalOutcome::OutOfFuel);
    }

    #[test]
    fn force_lift_and_case() {
        assert_eq!(run("force (lift <*, *>)", 100), EvalOutcome::Converged(Term::pair(Term::Star, Term::Star)));
        assert_eq!(
            run("case left[I,I] * of {left x -> x | right y -> y}", 100),
            EvalOutcome::Converged(Term::Star)
        );
        assert_eq!(
            run("case right[I,I] * of {left x -> lift x | right y -> lift y}", 100),
            EvalOutcome::Converged(Term::lift(Term::Star))
        );
    }

    #[test]
    fn rule_counts() {
        let (out, stats) = eval_trace(&Term::Star, Fuel(10));
        assert_eq!((out, stats.rules, stats.max_depth), (EvalOutcome::Converged(Term::Star), 1, 1));
        let (out, stats) = eval_trace(&parse_term("*; *").unwrap(), Fuel(10));
        assert_eq!((out, stats.rules, stats.max_depth), (EvalOutcome::Converged(Term::Star), 3, 2));
        // app + lambda axiom + argument (lambda axiom) + body (star axiom)
        let (out, stats) = eval_trace(&parse_term(T).unwrap(), Fuel(10));
        assert_eq!((out, stats.rules, stats.max_depth), (EvalOutcome::Converged(Term::Star), 4, 2));
    }

    #[test]
    fn exact_fuel_boundary() {
        let m = parse_term("*; *").unwrap();
        assert_eq!(eval(&m, Fuel(2)), EvalOutcome::OutOfFuel);
        assert_eq!(eval(&m, Fuel(3)), EvalOutcome::Converged(Term::Star));
    }

    #[test]
    fn let_pair_substitutes_both() {
        assert_eq!(
            run(r"let <f, u> = <\x:I. x, *> in f u", 100),
            EvalOutcome::Converged(Term::Star)
        );
    }

    #[test]
    fn recursive_countdown_terminates() {
        let src = r"(rec f:!(I + I -o I). \n:I + I. case n of {left u -> u | right v -> force f (left[I, I] v)}) (right[I, I] *)";
        assert_eq!(run(src, 1_000), EvalOutcome::Converged(Term::Star));
    }

    #[test]
    fn open_terms() {
        assert_eq!(run("x", 1), EvalOutcome::Converged(Term::var("x")));
        assert!(matches!(run("x *", 10), EvalOutcome::Stuck(_)));
        assert!(matches!(run("force *", 10), EvalOutcome::Stuck(_)));
    }
}
