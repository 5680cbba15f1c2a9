//! The naive interpreter fails on an affine program while the standard one
//! succeeds; on linear programs the two never disagree.

use std::sync::atomic::{AtomicUsize, Ordering};

use slc_core::denote::{degeneracy_report, LinearAgreement};
use slc_core::{denote, denote_naive, sem_equal, Calculus, Context, Type};

use super::semantic::verdict_check;
use super::{per_calculus, CaseOutcome, Check, Suite, SuiteConfig, TestReport};
use crate::gen::gen_typed_term;

/// Compares both interpreters on `cfg.cases` generated linear programs.
pub fn linear_agreement(cfg: &SuiteConfig) -> (LinearAgreement, Vec<CaseOutcome>) {
    let linear = SuiteConfig { calculi: vec![Calculus::Linear], ..cfg.clone() };
    let (mismatches, unit_mismatches) = (AtomicUsize::new(0), AtomicUsize::new(0));
    let empty = Context::new();
    let outcomes = per_calculus(&linear, cfg.cases, |calc, _, seed| {
        let (m, ty) = gen_typed_term(&cfg.gen_config(calc, seed));
        let std = denote(calc, &empty, &m).expect("generated programs check").closed();
        let naive = denote_naive(calc, &empty, &m, cfg.bottom_bound, cfg.probes).expect("generated programs check").closed();
        if std.run(cfg.fuel).is_some() != naive.run(cfg.fuel).is_some() {
            mismatches.fetch_add(1, Ordering::Relaxed);
            if ty == Type::Unit {
                unit_mismatches.fetch_add(1, Ordering::Relaxed);
            }
        }
        let verdict = sem_equal(&ty, &std, &naive, cfg.fuel, cfg.probes);
        (m.to_string(), vec![verdict_check("standard = naive", &ty, &std, &naive, verdict, cfg.fuel)])
    });
    let count = |p: fn(&Check) -> bool| outcomes.iter().flat_map(|o| &o.checks).filter(|c| p(c)).count();
    let agreement = LinearAgreement {
        terms: outcomes.len(),
        differ: count(|c| matches!(c, Check::Fail(_))),
        unknown: count(|c| matches!(c, Check::Unknown { .. })),
        convergence_mismatches: mismatches.into_inner(),
        unit_convergence_mismatches: unit_mismatches.into_inner(),
        seed: cfg.seed,
    };
    (agreement, outcomes)
}

pub struct Degeneracy;

impl Suite for Degeneracy {
    fn name(&self) -> &'static str {
        "degeneracy"
    }

    fn summary(&self) -> &'static str {
        "the naive interpreter is unsound for the affine calculus but agrees on linear programs"
    }

    fn run(&self, cfg: &SuiteConfig) -> TestReport {
        let mut report = TestReport::new(self.name(), cfg);
        let mut facts = degeneracy_report(cfg.degeneracy_bound, cfg.fuel, cfg.probes);
        let (agreement, outcomes) = linear_agreement(cfg);
        facts.linear_agreement = Some(agreement);
        report.absorb(outcomes);
        let witness = CaseOutcome {
            case: cfg.cases,
            calculus: Some(Calculus::Affine),
            seed: 0,
            term: facts.program.clone(),
            checks: facts.failures().into_iter().map(Check::Fail).collect(),
        };
        report.absorb(vec![witness]);
        report.degeneracy = Some(facts);
        report
    }
}
