//! Suites about the type system and the evaluator alone.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slc_core::{check_program, denote, eval_trace, Calculus, Context, Fuel};

use super::{per_calculus, Check, Suite, SuiteConfig, TestReport};
use crate::gen::{gen_typed_term, rule_coverage};

/// Values of converging programs re-check at the program's type.
pub struct SubjectReduction;

impl Suite for SubjectReduction {
    fn name(&self) -> &'static str {
        "subject-reduction"
    }

    fn summary(&self) -> &'static str {
        "evaluation preserves types"
    }

    fn run(&self, cfg: &SuiteConfig) -> TestReport {
        let mut report = TestReport::new(self.name(), cfg);
        let converged = AtomicUsize::new(0);
        let terms = Mutex::new(Vec::new());
        let outcomes = per_calculus(cfg, cfg.cases, |calc, _, seed| {
            let (m, ty) = gen_typed_term(&cfg.gen_config(calc, seed));
            terms.lock().expect("no poisoning").push(m.clone());
            let (out, _) = eval_trace(&m, cfg.fuel);
            let check = match out.value() {
                None => Check::Pass,
                Some(v) => {
                    converged.fetch_add(1, Ordering::Relaxed);
                    let again = check_program(calc, v);
                    Check::expect(again.as_ref() == Ok(&ty) && v.is_value(), || match again {
                        Ok(other) => format!("value `{v}` has type {other}, program has type {ty}"),
                        Err(e) => format!("value `{v}` does not check: {e}"),
                    })
                }
            };
            (m.to_string(), vec![check])
        });
        report.absorb(outcomes);
        report.stat("converged", converged.into_inner());
        let terms = terms.into_inner().expect("no poisoning");
        report.stat("rule_coverage", rule_coverage(terms.iter()));
        report
    }
}

/// Every linear program is an affine program of the same type.
pub struct Inclusion;

impl Suite for Inclusion {
    fn name(&self) -> &'static str {
        "inclusion"
    }

    fn summary(&self) -> &'static str {
        "linear typings are affine typings"
    }

    fn run(&self, cfg: &SuiteConfig) -> TestReport {
        let mut report = TestReport::new(self.name(), cfg);
        let linear = SuiteConfig { calculi: vec![Calculus::Linear], ..cfg.clone() };
        let outcomes = per_calculus(&linear, cfg.cases, |calc, _, seed| {
            let (m, ty) = gen_typed_term(&cfg.gen_config(calc, seed));
            let affine = check_program(Calculus::Affine, &m);
            let check = Check::expect(affine.as_ref() == Ok(&ty), || format!("affine checker says {affine:?}, expected {ty}"));
            (m.to_string(), vec![check])
        });
        report.absorb(outcomes);
        report
    }
}

/// Results converged at fuel `n` are reproduced exactly at any larger fuel,
/// by the evaluator and by the standard interpreter, and repeated runs agree.
pub struct FuelMonotonicity;

impl Suite for FuelMonotonicity {
    fn name(&self) -> &'static str {
        "fuel-monotonicity"
    }

    fn summary(&self) -> &'static str {
        "convergence is monotone in fuel and evaluation is deterministic"
    }

    fn run(&self, cfg: &SuiteConfig) -> TestReport {
        let mut report = TestReport::new(self.name(), cfg);
        let pairs = AtomicUsize::new(0);
        let converged_pairs = AtomicUsize::new(0);
        let outcomes = per_calculus(cfg, cfg.cases, |calc, _, seed| {
            let (m, _) = gen_typed_term(&cfg.gen_config(calc, seed));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let den = denote(calc, &Context::new(), &m).expect("generated programs check").closed();
            let mut checks = Vec::new();
            for _ in 0..3 {
                let n = rng.gen_range(0..=cfg.fuel.0);
                let n2 = rng.gen_range(n + 1..=cfg.fuel.0 + 1);
                pairs.fetch_add(1, Ordering::Relaxed);
                let (a, sa) = eval_trace(&m, Fuel(n));
                let (b, sb) = eval_trace(&m, Fuel(n2));
                let (a2, sa2) = eval_trace(&m, Fuel(n));
                checks.push(Check::expect(a == a2 && sa == sa2, || format!("evaluation at fuel {n} is not deterministic")));
                if a.converged() {
                    converged_pairs.fetch_add(1, Ordering::Relaxed);
                    checks.push(Check::expect(a == b && sa == sb, || format!("fuel {n} gave {a}, fuel {n2} gave {b}")));
                } else {
                    checks.push(Check::expect(!b.converged() || sb.rules > n, || {
                        format!("converged in {} rules at fuel {n2} but not at fuel {n}", sb.rules)
                    }));
                }
                let (x, y) = (den.run(Fuel(n)), den.run(Fuel(n2)));
                if let Some(x) = x {
                    let same = y.as_ref().map(|y| y.to_string()) == Some(x.to_string());
                    checks.push(Check::expect(same, || format!("denotation converged to {x} at {n} but not at {n2}")));
                }
            }
            (m.to_string(), checks)
        });
        report.absorb(outcomes);
        report.stat("fuel_pairs", pairs.into_inner());
        report.stat("converged_pairs", converged_pairs.into_inner());
        report
    }
}
