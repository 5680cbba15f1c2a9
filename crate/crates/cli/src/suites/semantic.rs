//! Suites relating the standard interpreter to the evaluator and to the
//! value-level interpretations.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use slc_core::domains::{gen_sem_env, replay, EqVerdict};
use slc_core::{
    check_program, denote, denote_value_b, denote_value_v, eval_trace, sem_equal, Calculus, Comp, Context, Fuel, SemVal,
    Term, Type,
};

use super::{per_calculus, Check, Suite, SuiteConfig, TestReport};
use crate::corpus::corpus;
use crate::gen::{gen_typed_term, gen_typed_value, GenConfig};

/// Turns a comparison verdict into a check. A `Differ` witness is replayed
/// on both sides before it is reported.
pub(crate) fn verdict_check(what: &str, ty: &Type, a: &Comp, b: &Comp, verdict: EqVerdict, fuel: Fuel) -> Check {
    match verdict {
        EqVerdict::Equal => Check::Pass,
        EqVerdict::Unknown { fuel } => Check::Unknown { what: what.to_string(), fuel },
        EqVerdict::Differ(w) => {
            let (ra, rb) = (replay(a, &w.path, fuel), replay(b, &w.path, fuel));
            Check::Fail(format!("{what} at {ty}: differ, witness {w} (replayed: {ra:?} vs {rb:?})"))
        }
    }
}

/// If a closed program evaluates to `v`, its denotation equals that of `v`.
pub struct Soundness;

impl Suite for Soundness {
    fn name(&self) -> &'static str {
        "soundness"
    }

    fn summary(&self) -> &'static str {
        "evaluation preserves the standard denotation"
    }

    fn run(&self, cfg: &SuiteConfig) -> TestReport {
        let mut report = TestReport::new(self.name(), cfg);
        let compared = AtomicUsize::new(0);
        let empty = Context::new();
        let fuels = [cfg.fuel, Fuel(cfg.fuel.0 * 10)];
        let outcomes = per_calculus(cfg, cfg.cases, |calc, _, seed| {
            let (m, ty) = gen_typed_term(&cfg.gen_config(calc, seed));
            let (out, _) = eval_trace(&m, cfg.fuel);
            let Some(v) = out.value() else { return (m.to_string(), vec![Check::Pass]) };
            compared.fetch_add(1, Ordering::Relaxed);
            let dm = denote(calc, &empty, &m).expect("generated programs check").closed();
            let dv = denote(calc, &empty, v).expect("values of programs check").closed();
            let checks = fuels
                .iter()
                .map(|&f| verdict_check("⟦m⟧ = ⟦v⟧", &ty, &dm, &dv, sem_equal(&ty, &dm, &dv, f, cfg.probes), f))
                .collect();
            (m.to_string(), checks)
        });
        report.absorb(outcomes);
        report.stat("compared", compared.into_inner());
        report
    }
}

/// At type `I`, evaluation converges exactly when the denotation does, up to
/// a constant factor of fuel.
pub struct Adequacy;

impl Suite for Adequacy {
    fn name(&self) -> &'static str {
        "adequacy"
    }

    fn summary(&self) -> &'static str {
        "programs of type I converge iff their denotation does"
    }

    fn run(&self, cfg: &SuiteConfig) -> TestReport {
        let mut report = TestReport::new(self.name(), cfg);
        let max_ratio = AtomicU64::new(0);
        let converged = AtomicUsize::new(0);
        let case = |calc: Calculus, m: &Term| -> Vec<Check> {
            let (out, stats) = eval_trace(m, cfg.fuel);
            let den = denote(calc, &Context::new(), m).expect("programs check").closed();
            if out.converged() {
                converged.fetch_add(1, Ordering::Relaxed);
                let bound = Fuel(cfg.fuel.0 * cfg.adequacy_factor);
                let (val, spent) = den.run_metered(bound);
                let ratio = spent.div_ceil(stats.rules.max(1));
                max_ratio.fetch_max(ratio, Ordering::Relaxed);
                vec![Check::expect(matches!(val, Some(SemVal::Unit)), || {
                    format!("evaluates to * in {} rules but denotation gives {val:?} within {}", stats.rules, bound.0)
                })]
            } else {
                match den.run_metered(cfg.fuel) {
                    (None, _) => vec![Check::Pass],
                    (Some(_), spent) => {
                        let bound = Fuel(spent.max(1) * cfg.adequacy_factor);
                        let again = eval_trace(m, bound).0;
                        vec![Check::expect(again.converged(), || {
                            format!("denotation converges in {spent} steps but evaluation not within {}", bound.0)
                        })]
                    }
                }
            }
        };
        let outcomes = per_calculus(cfg, cfg.cases, |calc, _, seed| {
            let gen = GenConfig { target: Some(Type::Unit), ..cfg.gen_config(calc, seed) };
            let (m, _) = gen_typed_term(&gen);
            (m.to_string(), case(calc, &m))
        });
        report.absorb(outcomes);

        let mut extra = Vec::new();
        for (i, e) in corpus().into_iter().enumerate() {
            if check_program(e.calculus, &e.term).ok() != Some(Type::Unit) {
                continue;
            }
            let mut checks = case(e.calculus, &e.term);
            if e.diverges {
                let bound = cfg.divergence_bound;
                let out = eval_trace(&e.term, bound).0;
                let den = denote(e.calculus, &Context::new(), &e.term).expect("corpus checks").closed();
                checks.push(Check::expect(!out.converged(), || format!("{} evaluates within {}", e.name, bound.0)));
                checks.push(Check::expect(den.run(bound).is_none(), || format!("{} denotes within {}", e.name, bound.0)));
            }
            extra.push(super::CaseOutcome {
                case: cfg.cases + i,
                calculus: Some(e.calculus),
                seed: 0,
                term: format!("{} = {}", e.name, e.term),
                checks,
            });
        }
        report.absorb(extra);
        report.stat("converged", converged.into_inner());
        report.stat("max_denotation_steps_per_rule", max_ratio.into_inner());
        report.stat("factor", cfg.adequacy_factor);
        report
    }
}

/// A value's denotation is `return` of its value-level interpretation, and
/// for non-linear values also of its base-level one.
pub struct Coherence;

impl Suite for Coherence {
    fn name(&self) -> &'static str {
        "coherence"
    }

    fn summary(&self) -> &'static str {
        "value denotations factor through the value and base interpretations"
    }

    fn run(&self, cfg: &SuiteConfig) -> TestReport {
        let mut report = TestReport::new(self.name(), cfg);
        let base_checked = AtomicUsize::new(0);
        let outcomes = per_calculus(cfg, cfg.cases, |calc, i, seed| {
            let gen = GenConfig { max_depth: cfg.max_depth.min(4), ..cfg.gen_config(calc, seed) };
            let (ctx, v, ty) = gen_typed_value(&gen, i % 2 == 0);
            let env = gen_sem_env(&ctx, seed, 2);
            let d = denote(calc, &ctx, &v).expect("generated values check");
            let vv = denote_value_v(calc, &ctx, &v).expect("generated values are values");
            let dc = d.fun(&env);
            let mut checks = vec![Check::expect(dc.run(Fuel(0)).is_some(), || "value denotation needs fuel".into())];
            let rv = vv.returned(&env);
            let eq = sem_equal(&ty, &dc, &rv, cfg.fuel, cfg.probes);
            checks.push(verdict_check("denote = return ∘ value", &ty, &dc, &rv, eq, cfg.fuel));
            if ctx.is_nonlinear() && ty.is_nonlinear() {
                base_checked.fetch_add(1, Ordering::Relaxed);
                let vb = denote_value_b(calc, &ctx, &v).expect("non-linear values");
                let rb = vb.returned(&env);
                let eq = sem_equal(&ty, &dc, &rb, cfg.fuel, cfg.probes);
                checks.push(verdict_check("denote = return ∘ base", &ty, &dc, &rb, eq, cfg.fuel));
            }
            (format!("{ctx} ⊢ {v} : {ty}"), checks)
        });
        report.absorb(outcomes);
        report.stat("base_checked", base_checked.into_inner());
        report
    }
}
