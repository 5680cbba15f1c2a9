//! The interpretation that takes function types from the closed structure of
//! the computation category. There `curry(⊥) = ⊥` and `f ⊗ ⊥ = ⊥`, so an
//! abstraction whose body is `⊥` is itself `⊥`, and discarding it cannot
//! succeed. For the affine calculus this breaks soundness; the degeneracy
//! report exhibits the failure on a concrete program.

use std::ops::Deref;

use serde::Serialize;

use super::{standard, Backend, BackendConfig, Compiler, Denotation, DenoteError, Lambdas};
use crate::domains::{Comp, SemFun, SemVal};
use crate::eval::{eval_trace, EvalOutcome};
use crate::syntax::{parse_term, Context, Term};
use crate::typecheck::{check_program, Calculus};
use crate::Fuel;

/// The program that unfolds itself forever.
pub const DIVERGENT: &str = "rec z:!I. force z";

/// Discards an abstraction whose body diverges. It converges operationally
/// but only type checks in the affine calculus.
pub const DISCARDS_DIVERGENT: &str = r"(\y:(I -o I). *) (\x:I. rec z:!I. force z)";

/// A denotation built under strict function spaces and smash products.
#[derive(Clone, Debug)]
pub struct StrictDenotation(Denotation);

impl Deref for StrictDenotation {
    type Target = Denotation;

    fn deref(&self) -> &Denotation {
        &self.0
    }
}

impl StrictDenotation {
    pub fn into_inner(self) -> Denotation {
        self.0
    }
}

/// Outcome of searching for convergence up to a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict")]
pub enum BottomJudgment {
    /// No convergence up to `bound`; a semi-decision only.
    JudgedBottom { bound: Fuel },
    /// Converges, and `fuel` is the least fuel that suffices.
    NotBottom { fuel: Fuel },
}

impl BottomJudgment {
    pub fn is_bottom(&self) -> bool {
        matches!(self, BottomJudgment::JudgedBottom { .. })
    }
}

/// Fuel is spent one step at a time, so a single run at `bound` both decides
/// convergence within the bound and reports the least sufficient fuel.
pub fn judge_bottom(c: &Comp, bound: Fuel) -> BottomJudgment {
    match c.run_metered(bound) {
        (Some(_), spent) => BottomJudgment::NotBottom { fuel: Fuel(spent) },
        (None, _) => BottomJudgment::JudgedBottom { bound },
    }
}

pub fn denote_naive(
    calc: Calculus,
    ctx: &Context,
    m: &Term,
    bottom_bound: Fuel,
    probes: usize,
) -> Result<StrictDenotation, DenoteError> {
    let compiler = Compiler { calc, lambdas: Lambdas::Strict { bottom_bound, probes } };
    compiler.denote(ctx, m).map(StrictDenotation)
}

/// Application in the strict function space: the argument computation is
/// run before the function sees it, so `f ⊥ = ⊥`.
pub fn strict_apply(f: &SemFun, arg: Comp) -> Comp {
    let f = f.clone();
    arg.bind(move |v| f.apply(&v))
}

pub struct Naive {
    cfg: BackendConfig,
}

impl Naive {
    pub fn new(cfg: BackendConfig) -> Self {
        Naive { cfg }
    }
}

impl Backend for Naive {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn summary(&self) -> &'static str {
        "strict function spaces and smash products; unsound for the affine calculus"
    }

    fn denote(&self, calc: Calculus, ctx: &Context, m: &Term) -> Result<Denotation, DenoteError> {
        denote_naive(calc, ctx, m, self.cfg.bottom_bound, self.cfg.probes).map(StrictDenotation::into_inner)
    }
}

/// How the naive and standard interpreters compared on a batch of
/// linear-calculus programs. Filled in by the test harness.
#[derive(Clone, Debug, Default, Serialize)]
pub struct LinearAgreement {
    pub terms: usize,
    pub differ: usize,
    pub unknown: usize,
    /// Terms where exactly one of the two interpreters converged.
    pub convergence_mismatches: usize,
    /// The same, restricted to programs of type `I`.
    pub unit_convergence_mismatches: usize,
    pub seed: u64,
}

/// The executable content of the degeneracy argument.
#[derive(Clone, Debug, Serialize)]
pub struct DegeneracyReport {
    pub program: String,
    pub divergent: String,
    pub affine_type: Option<String>,
    pub linear_rejection: Option<String>,
    pub eval: String,
    pub eval_rules: u64,
    pub standard: String,
    pub standard_fuel: Option<u64>,
    pub naive: BottomJudgment,
    pub naive_lambda_bottom: bool,
    pub divergent_eval: String,
    pub divergent_standard: BottomJudgment,
    pub divergent_naive: BottomJudgment,
    pub fuel: Fuel,
    pub bottom_bound: Fuel,
    pub linear_agreement: Option<LinearAgreement>,
}

impl DegeneracyReport {
    /// Checks the expected shape: the program is affine-only, converges
    /// operationally and in the standard model, and is `⊥` in the naive one.
    /// Linear agreement, when present, must show no `Differ` verdict.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut expect = |ok: bool, what: &str| {
            if !ok {
                out.push(what.to_string());
            }
        };
        expect(self.affine_type.as_deref() == Some("I"), "program should have type I in the affine calculus");
        expect(self.linear_rejection.is_some(), "program should be rejected in the linear calculus");
        expect(self.eval == "*", "program should evaluate to *");
        expect(self.standard == "*", "standard denotation should converge to *");
        expect(self.naive.is_bottom(), "naive denotation should be judged bottom");
        expect(self.divergent_eval == "OUT_OF_FUEL", "divergent program should not evaluate");
        expect(self.divergent_standard.is_bottom(), "divergent program should be bottom in the standard model");
        expect(self.divergent_naive.is_bottom(), "divergent program should be bottom in the naive model");
        if let Some(agree) = &self.linear_agreement {
            expect(agree.differ == 0, "naive and standard interpreters should never differ on linear programs");
        }
        out
    }

    pub fn holds(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Runs the affine-only discarding program and the divergent program through
/// the checker, the evaluator, and both interpreters.
pub fn degeneracy_report(bottom_bound: Fuel, fuel: Fuel, probes: usize) -> DegeneracyReport {
    let t = parse_term(DISCARDS_DIVERGENT).expect("built-in program parses");
    let p = parse_term(DIVERGENT).expect("built-in program parses");
    let empty = Context::new();

    let affine_type = check_program(Calculus::Affine, &t).ok().map(|ty| ty.to_string());
    let linear_rejection = check_program(Calculus::Linear, &t).err().map(|e| e.to_string());
    let (outcome, stats) = eval_trace(&t, fuel);

    let std_t = standard::denote(Calculus::Affine, &empty, &t).expect("program is affine");
    let (standard_val, standard_spent) = std_t.closed().run_metered(fuel);
    let naive_t = denote_naive(Calculus::Affine, &empty, &t, bottom_bound, probes).expect("program is affine");
    let naive_lambda = match &t {
        Term::App(_, arg) => denote_naive(Calculus::Affine, &empty, arg, bottom_bound, probes)
            .map(|d| d.known_bottom())
            .unwrap_or(false),
        _ => false,
    };

    let std_p = standard::denote(Calculus::Affine, &empty, &p).expect("program is affine");
    let naive_p = denote_naive(Calculus::Affine, &empty, &p, bottom_bound, probes).expect("program is affine");

    DegeneracyReport {
        program: t.to_string(),
        divergent: p.to_string(),
        affine_type,
        linear_rejection,
        eval: outcome.to_string(),
        eval_rules: stats.rules,
        standard: standard_val.as_ref().map_or_else(|| format!("BOTTOM_UP_TO_FUEL({})", fuel.0), SemVal::to_string),
        standard_fuel: standard_val.map(|_| standard_spent),
        naive: judge_bottom(&naive_t.closed(), bottom_bound),
        naive_lambda_bottom: naive_lambda,
        divergent_eval: match crate::eval(&p, bottom_bound) {
            EvalOutcome::OutOfFuel => "OUT_OF_FUEL".to_string(),
            other => other.to_string(),
        },
        divergent_standard: judge_bottom(&std_p.closed(), bottom_bound),
        divergent_naive: judge_bottom(&naive_p.closed(), bottom_bound),
        fuel,
        bottom_bound,
        linear_agreement: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(src: &str, bound: u64) -> StrictDenotation {
        denote_naive(Calculus::Affine, &Context::new(), &parse_term(src).unwrap(), Fuel(bound), 8).unwrap()
    }

    #[test]
    fn abstraction_over_bottom_is_bottom() {
        let d = naive(r"\x:I. rec z:!I. force z", 10_000);
        assert!(d.known_bottom());
        assert!(d.closed().run(Fuel(100_000)).is_none());
    }

    #[test]
    fn discarding_program_is_bottom() {
        let d = naive(DISCARDS_DIVERGENT, 10_000);
        assert!(d.known_bottom());
        assert!(d.closed().run(Fuel(1_000_000)).is_none());
        assert_eq!(crate::eval(&parse_term(DISCARDS_DIVERGENT).unwrap(), Fuel(10_000)).value(), Some(&Term::Star));
    }

    #[test]
    fn bottom_free_programs_agree() {
        assert!(matches!(naive("*", 100).closed().run(Fuel(100)), Some(SemVal::Unit)));
        let d = naive(r"(\x:I. x) *", 100);
        assert!(!d.known_bottom());
        assert!(matches!(d.closed().run(Fuel(100)), Some(SemVal::Unit)));
        let s = standard::denote(Calculus::Affine, &Context::new(), &parse_term(r"(\x:I. x) *").unwrap()).unwrap();
        assert!(matches!(s.closed().run(Fuel(100)), Some(SemVal::Unit)));
    }

    #[test]
    fn partial_bodies_are_not_bottom() {
        let d = naive(r"\n:I + I. case n of {left u -> u | right v -> v; rec z:!I. force z}", 1_000);
        assert!(!d.known_bottom());
        let SemVal::Fun(f) = d.closed().run(Fuel(0)).unwrap() else { panic!() };
        assert!(f.apply(&SemVal::inl(SemVal::Unit)).run(Fuel(10)).is_some());
        assert!(f.apply(&SemVal::inr(SemVal::Unit)).run(Fuel(10_000)).is_none());
    }

    #[test]
    fn functions_are_strict() {
        let d = naive(r"\x:I. *", 100);
        let SemVal::Fun(f) = d.closed().run(Fuel(0)).unwrap() else { panic!() };
        assert!(strict_apply(&f, Comp::bottom()).run(Fuel(1_000_000)).is_none());
        assert!(strict_apply(&f, Comp::ret(SemVal::Unit)).run(Fuel(10)).is_some());
    }

    #[test]
    fn judgments() {
        assert_eq!(judge_bottom(&Comp::bottom(), Fuel(50)), BottomJudgment::JudgedBottom { bound: Fuel(50) });
        let two = Comp::step_then(Comp::step_then(Comp::ret(SemVal::Unit)));
        assert_eq!(judge_bottom(&two, Fuel(50)), BottomJudgment::NotBottom { fuel: Fuel(2) });
        assert!(judge_bottom(&two, Fuel(1)).is_bottom());
    }

    #[test]
    fn report_facts() {
        let r = degeneracy_report(Fuel(10_000), Fuel(10_000), 8);
        assert!(r.holds(), "{:?}", r.failures());
        assert_eq!(r.affine_type.as_deref(), Some("I"));
        assert!(r.naive_lambda_bottom);
        assert_eq!(r.divergent_eval, "OUT_OF_FUEL");
    }
}
