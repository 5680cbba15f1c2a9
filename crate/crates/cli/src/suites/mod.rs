//! Property suites, each a named [`Suite`] in a [`SuiteRegistry`].
//!
//! A suite turns one metatheorem into a batch of executable checks. Cases
//! are generated from per-case seeds derived from the run seed, run in
//! parallel and merged by case index, so a report is reproducible from its
//! seed and configuration alone.

mod degeneracy;
mod operational;
mod semantic;
mod structure;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use slc_core::denote::DegeneracyReport;
use slc_core::{Calculus, Fuel};

use crate::gen::{case_seed, GenConfig};

pub use degeneracy::{linear_agreement, Degeneracy};
pub use operational::{FuelMonotonicity, Inclusion, SubjectReduction};
pub use semantic::{Adequacy, Coherence, Soundness};
pub use structure::{comonoid_types, ComonoidLaws, Naturality};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Cases per calculus.
    pub cases: usize,
    /// Evaluation fuel.
    pub fuel: Fuel,
    /// Bound up to which a program counts as divergent.
    pub divergence_bound: Fuel,
    /// Arguments tried when comparing functions.
    pub probes: usize,
    pub max_depth: u32,
    pub calculi: Vec<Calculus>,
    /// Search bound for the naive interpreter's bottom judgments on generated programs.
    pub bottom_bound: Fuel,
    /// Search bound for the degeneracy witness.
    pub degeneracy_bound: Fuel,
    /// Denotations of programs converging within `n` evaluation rules must
    /// converge within `adequacy_factor * n` steps, and conversely.
    pub adequacy_factor: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            cases: 1000,
            fuel: Fuel(10_000),
            divergence_bound: Fuel(1_000_000),
            probes: 8,
            max_depth: 5,
            calculi: Calculus::ALL.to_vec(),
            bottom_bound: Fuel(10_000),
            degeneracy_bound: Fuel(1_000_000),
            adequacy_factor: 100,
        }
    }
}

impl SuiteConfig {
    pub fn gen_config(&self, calculus: Calculus, seed: u64) -> GenConfig {
        GenConfig {
            calculus,
            max_depth: self.max_depth,
            seed,
            count: self.cases,
            fuel: self.fuel,
            probes: self.probes,
            ..GenConfig::default()
        }
    }

    /// Seed of case `index` for `calculus`; distinct calculi draw distinct programs.
    pub fn case_seed(&self, calculus: Calculus, index: usize) -> u64 {
        let salt = match calculus {
            Calculus::Linear => 0x11,
            Calculus::Affine => 0xaf,
        };
        case_seed(self.seed ^ salt, index as u64)
    }
}

/// One failing check, with enough information to replay it.
#[derive(Clone, Debug, Serialize)]
pub struct CaseFailure {
    pub case: usize,
    pub calculus: Option<Calculus>,
    pub seed: u64,
    pub term: String,
    pub verdicts: String,
}

/// A comparison that could not be decided within its fuel.
#[derive(Clone, Debug, Serialize)]
pub struct UnknownVerdict {
    pub case: usize,
    pub calculus: Option<Calculus>,
    pub seed: u64,
    pub term: String,
    pub check: String,
    pub fuel: Fuel,
}

#[derive(Clone, Debug, Serialize)]
pub struct TestReport {
    pub schema: u32,
    pub suite: String,
    pub seed: u64,
    pub cases: usize,
    pub passed: bool,
    pub failures: Vec<CaseFailure>,
    pub unknowns: Vec<UnknownVerdict>,
    /// Suite-specific counters.
    pub stats: BTreeMap<String, serde_json::Value>,
    pub wall_time_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degeneracy: Option<DegeneracyReport>,
}

impl TestReport {
    fn new(suite: &str, cfg: &SuiteConfig) -> Self {
        TestReport {
            schema: REPORT_SCHEMA,
            suite: suite.to_string(),
            seed: cfg.seed,
            cases: 0,
            passed: true,
            failures: Vec::new(),
            unknowns: Vec::new(),
            stats: BTreeMap::new(),
            wall_time_ms: 0,
            degeneracy: None,
        }
    }

    fn stat(&mut self, key: &str, value: impl Serialize) {
        self.stats.insert(key.to_string(), serde_json::to_value(value).expect("stats serialize"));
    }

    fn absorb(&mut self, outcomes: Vec<CaseOutcome>) {
        for o in outcomes {
            self.cases += 1;
            for check in o.checks {
                match check {
                    Check::Pass => {}
                    Check::Unknown { what, fuel } => self.unknowns.push(UnknownVerdict {
                        case: o.case,
                        calculus: o.calculus,
                        seed: o.seed,
                        term: o.term.clone(),
                        check: what,
                        fuel,
                    }),
                    Check::Fail(verdicts) => self.failures.push(CaseFailure {
                        case: o.case,
                        calculus: o.calculus,
                        seed: o.seed,
                        term: o.term.clone(),
                        verdicts,
                    }),
                }
            }
        }
        self.passed = self.failures.is_empty();
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        writeln!(
            f,
            "{}: {status} ({} cases, {} failures, {} unknown, {} ms, seed {})",
            self.suite,
            self.cases,
            self.failures.len(),
            self.unknowns.len(),
            self.wall_time_ms,
            self.seed
        )?;
        for (k, v) in &self.stats {
            writeln!(f, "  {k}: {v}")?;
        }
        for fail in self.failures.iter().take(20) {
            let calc = fail.calculus.map(|c| format!(" [{c}]")).unwrap_or_default();
            writeln!(f, "  case {}{calc} seed {}: {}", fail.case, fail.seed, fail.verdicts)?;
            writeln!(f, "    {}", fail.term)?;
        }
        if self.failures.len() > 20 {
            writeln!(f, "  ... {} more failures", self.failures.len() - 20)?;
        }
        if let Some(d) = &self.degeneracy {
            for line in d.failures() {
                writeln!(f, "  degeneracy: {line}")?;
            }
        }
        Ok(())
    }
}

/// The result of one check within a case.
#[derive(Clone, Debug)]
pub enum Check {
    Pass,
    Unknown { what: String, fuel: Fuel },
    Fail(String),
}

impl Check {
    pub fn expect(ok: bool, detail: impl FnOnce() -> String) -> Check {
        if ok {
            Check::Pass
        } else {
            Check::Fail(detail())
        }
    }
}

#[derive(Clone, Debug)]
pub struct CaseOutcome {
    pub case: usize,
    pub calculus: Option<Calculus>,
    pub seed: u64,
    pub term: String,
    pub checks: Vec<Check>,
}

/// Runs `cases` cases per configured calculus in parallel, in case order.
fn per_calculus<F>(cfg: &SuiteConfig, cases: usize, f: F) -> Vec<CaseOutcome>
where
    F: Fn(Calculus, usize, u64) -> (String, Vec<Check>) + Sync,
{
    cfg.calculi
        .iter()
        .flat_map(|&calc| {
            (0..cases)
                .into_par_iter()
                .map(|i| {
                    let seed = cfg.case_seed(calc, i);
                    let (term, checks) = f(calc, i, seed);
                    CaseOutcome { case: i, calculus: Some(calc), seed, term, checks }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

pub trait Suite: Send + Sync {
    fn name(&self) -> &'static str;

    /// The property being checked, in one line.
    fn summary(&self) -> &'static str;

    fn run(&self, cfg: &SuiteConfig) -> TestReport;

    /// Whether a failing report should make `slc test` exit non-zero.
    fn gates_exit(&self, report: &TestReport) -> bool {
        !report.passed
    }
}

/// Runs `suite` and stamps the wall time.
pub fn run_suite(suite: &dyn Suite, cfg: &SuiteConfig) -> TestReport {
    let start = Instant::now();
    let mut report = suite.run(cfg);
    report.wall_time_ms = start.elapsed().as_millis() as u64;
    report
}

pub struct SuiteRegistry {
    suites: Vec<Box<dyn Suite>>,
}

impl SuiteRegistry {
    pub fn empty() -> Self {
        SuiteRegistry { suites: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(SubjectReduction));
        reg.register(Box::new(Soundness));
        reg.register(Box::new(Adequacy));
        reg.register(Box::new(ComonoidLaws));
        reg.register(Box::new(Naturality));
        reg.register(Box::new(Coherence));
        reg.register(Box::new(Inclusion));
        reg.register(Box::new(Degeneracy));
        reg.register(Box::new(FuelMonotonicity));
        reg
    }

    /// Adds a suite, replacing any existing one with the same name.
    pub fn register(&mut self, suite: Box<dyn Suite>) {
        self.suites.retain(|s| s.name() != suite.name());
        self.suites.push(suite);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Suite> {
        self.suites.iter().find(|s| s.name() == name).map(|s| s.as_ref())
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Suite> {
        self.suites.iter().map(|s| s.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.iter().map(|s| s.name()).collect()
    }
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
