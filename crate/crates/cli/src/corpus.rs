//! The built-in program corpus.
//!
//! Each program lives in `corpus/<name>.sll`. Leading `# key: value` comment
//! lines carry metadata: `diverges`, `affine-only` and `evaluates-to`.

use std::collections::BTreeMap;

use serde::Serialize;
use slc_core::syntax::{parse_source, parse_term};
use slc_core::{check_program, denote, denote_naive, eval_trace, Calculus, Fuel, Term};

const SOURCES: [(&str, &str); 9] = [
    ("divergent", include_str!("../corpus/divergent.sll")),
    ("discards_divergent", include_str!("../corpus/discards_divergent.sll")),
    ("affine_discarder", include_str!("../corpus/affine_discarder.sll")),
    ("contraction_at_bang", include_str!("../corpus/contraction_at_bang.sll")),
    ("let_case", include_str!("../corpus/let_case.sll")),
    ("countdown", include_str!("../corpus/countdown.sll")),
    ("shared_function", include_str!("../corpus/shared_function.sll")),
    ("discarded_thunk", include_str!("../corpus/discarded_thunk.sll")),
    ("lambda_over_divergence", include_str!("../corpus/lambda_over_divergence.sll")),
];

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub source: &'static str,
    pub calculus: Calculus,
    pub term: Term,
    pub diverges: bool,
    pub affine_only: bool,
    pub evaluates_to: Option<Term>,
}

fn metadata(source: &str) -> BTreeMap<String, String> {
    source
        .lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once(':'))
        .filter(|(k, _)| !k.trim().contains(' '))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

pub fn corpus() -> Vec<CorpusEntry> {
    SOURCES
        .iter()
        .map(|(name, source)| {
            let parsed = parse_source(source).unwrap_or_else(|e| panic!("corpus program {name}: {e}"));
            let meta = metadata(source);
            let flag = |k: &str| meta.get(k).is_some_and(|v| v == "true");
            CorpusEntry {
                name,
                source,
                calculus: parsed.calculus.unwrap_or(Calculus::Linear),
                term: parsed.term,
                diverges: flag("diverges"),
                affine_only: flag("affine-only"),
                evaluates_to: meta
                    .get("evaluates-to")
                    .map(|v| parse_term(v).unwrap_or_else(|e| panic!("corpus program {name}: {e}"))),
            }
        })
        .collect()
}

pub fn entry(name: &str) -> Option<CorpusEntry> {
    corpus().into_iter().find(|e| e.name == name)
}

/// What each backend makes of one corpus program, for the golden report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorpusResult {
    pub name: String,
    pub calculus: Calculus,
    pub ty: String,
    pub linear: bool,
    pub affine: bool,
    pub eval: String,
    pub eval_rules: u64,
    pub standard: String,
    pub naive: String,
}

pub const GOLDEN_SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub schema: u32,
    pub fuel: Fuel,
    pub results: Vec<CorpusResult>,
}

fn observe(c: &slc_core::domains::Comp, fuel: Fuel) -> String {
    c.run(fuel).map_or_else(|| format!("BOTTOM_UP_TO_FUEL({})", fuel.0), |v| v.to_string())
}

pub fn corpus_report(fuel: Fuel) -> CorpusReport {
    let results = corpus()
        .into_iter()
        .map(|e| {
            let ty = check_program(e.calculus, &e.term).expect("corpus programs check");
            let (outcome, stats) = eval_trace(&e.term, fuel);
            let std = denote(e.calculus, &Default::default(), &e.term).expect("corpus programs check");
            let naive = denote_naive(e.calculus, &Default::default(), &e.term, fuel, 8).expect("corpus programs check");
            CorpusResult {
                name: e.name.to_string(),
                calculus: e.calculus,
                ty: ty.to_string(),
                linear: check_program(Calculus::Linear, &e.term).is_ok(),
                affine: check_program(Calculus::Affine, &e.term).is_ok(),
                eval: outcome.to_string(),
                eval_rules: stats.rules,
                standard: observe(&std.closed(), fuel),
                naive: observe(&naive.closed(), fuel),
            }
        })
        .collect();
    CorpusReport { schema: GOLDEN_SCHEMA, fuel, results }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_matches_behaviour() {
        let all = corpus();
        assert_eq!(all.len(), SOURCES.len());
        for e in &all {
            assert!(check_program(e.calculus, &e.term).is_ok(), "{}", e.name);
            assert_eq!(e.affine_only, check_program(Calculus::Linear, &e.term).is_err(), "{}", e.name);
            let out = slc_core::eval(&e.term, Fuel(10_000));
            assert_eq!(e.diverges, !out.converged(), "{}", e.name);
            if let Some(v) = &e.evaluates_to {
                assert_eq!(out.value(), Some(v), "{}", e.name);
            }
        }
    }

    #[test]
    fn required_programs_are_present() {
        let p = entry("divergent").unwrap();
        assert!(p.diverges);
        let t = entry("discards_divergent").unwrap();
        assert!(t.affine_only);
        assert_eq!(t.evaluates_to, Some(Term::Star));
    }
}
