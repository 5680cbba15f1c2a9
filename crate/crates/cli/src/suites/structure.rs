//! Suites about the substructural maps: discarding, copying and promotion.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use slc_core::domains::{copy, discard, gen_sem_env, gen_sem_val, promote};
use slc_core::{denote, denote_value_v, sem_equal, Calculus, Comp, Fuel, SemEnv, SemVal, Type};

use super::semantic::verdict_check;
use super::{per_calculus, CaseOutcome, Check, Suite, SuiteConfig, TestReport};
use crate::gen::{gen_typed_value, GenConfig};

/// Generated points per type for the comonoid laws.
pub const COMONOID_POINTS: usize = 100;

/// Every non-linear type of depth at most 3 built from `I`, `I+I`, `!I` and
/// `!(I -o I)` with `+`, `⊗` and `!`.
pub fn comonoid_types() -> Vec<Type> {
    let i = Type::Unit;
    let atoms = [
        i.clone(),
        Type::sum(i.clone(), i.clone()),
        Type::bang(i.clone()),
        Type::bang(Type::lolli(i.clone(), i)),
    ];
    let mut set: BTreeSet<Type> = atoms.into_iter().filter(|t| t.depth() <= 3).collect();
    loop {
        let current: Vec<Type> = set.iter().cloned().collect();
        let mut grown = set.clone();
        for a in &current {
            grown.insert(Type::bang(a.clone()));
            for b in &current {
                grown.insert(Type::sum(a.clone(), b.clone()));
                grown.insert(Type::tensor(a.clone(), b.clone()));
            }
        }
        grown.retain(|t| t.depth() <= 3);
        if grown.len() == set.len() {
            break;
        }
        set = grown;
    }
    debug_assert!(set.iter().all(Type::is_nonlinear));
    set.into_iter().collect()
}

fn halves(v: SemVal) -> (SemVal, SemVal) {
    match v {
        SemVal::Pair(a, b) => ((*a).clone(), (*b).clone()),
        other => panic!("copy returned {other}"),
    }
}

fn laws(calc: Calculus, x: &Type, v: &SemVal, fuel: Fuel, probes: usize) -> Vec<Check> {
    let copy = |v: &SemVal| halves(copy(x, v).expect("non-linear type"));
    let discard = |v: &SemVal| discard(calc, x, v).expect("non-linear type");
    let (a, b) = copy(v);
    let unit = Type::Unit;
    let tensor = Type::tensor;
    let cases = [
        ("counit left", tensor(unit.clone(), x.clone()), SemVal::pair(discard(&a), b.clone()), SemVal::pair(SemVal::Unit, v.clone())),
        ("counit right", tensor(x.clone(), unit), SemVal::pair(a.clone(), discard(&b)), SemVal::pair(v.clone(), SemVal::Unit)),
        ("coassociativity", tensor(tensor(x.clone(), x.clone()), x.clone()), {
            let (a1, a2) = copy(&a);
            SemVal::pair(SemVal::pair(a1, a2), b.clone())
        }, {
            let (b1, b2) = copy(&b);
            SemVal::pair(SemVal::pair(a.clone(), b1), b2)
        }),
        ("cocommutativity", tensor(x.clone(), x.clone()), SemVal::pair(b.clone(), a.clone()), SemVal::pair(a, b)),
    ];
    cases
        .into_iter()
        .map(|(what, ty, l, r)| {
            let (l, r) = (Comp::ret(l), Comp::ret(r));
            verdict_check(what, &ty, &l, &r, sem_equal(&ty, &l, &r, fuel, probes), fuel)
        })
        .collect()
}

/// Copying and discarding make every non-linear type a cocommutative comonoid.
pub struct ComonoidLaws;

impl Suite for ComonoidLaws {
    fn name(&self) -> &'static str {
        "comonoid-laws"
    }

    fn summary(&self) -> &'static str {
        "discard and copy form cocommutative comonoids at non-linear types"
    }

    fn run(&self, cfg: &SuiteConfig) -> TestReport {
        let mut report = TestReport::new(self.name(), cfg);
        let types = comonoid_types();
        for &calc in &cfg.calculi {
            let outcomes: Vec<CaseOutcome> = (0..types.len() * COMONOID_POINTS)
                .into_par_iter()
                .map(|i| {
                    let x = &types[i / COMONOID_POINTS];
                    let seed = cfg.case_seed(calc, i);
                    let v = gen_sem_val(x, seed, 2);
                    CaseOutcome {
                        case: i,
                        calculus: Some(calc),
                        seed,
                        term: format!("{v:?} : {x}"),
                        checks: laws(calc, x, &v, cfg.fuel, cfg.probes),
                    }
                })
                .collect();
            report.absorb(outcomes);
        }
        report.stat("types", types.len());
        report.stat("points_per_type", COMONOID_POINTS);
        report
    }
}

/// Values of non-linear type commute with discarding, copying and
/// promotion; affine values of any type can be discarded.
pub struct Naturality;

impl Suite for Naturality {
    fn name(&self) -> &'static str {
        "substructural-naturality"
    }

    fn summary(&self) -> &'static str {
        "non-linear values commute with discard, copy and promotion"
    }

    fn run(&self, cfg: &SuiteConfig) -> TestReport {
        let mut report = TestReport::new(self.name(), cfg);
        let discardability = AtomicUsize::new(0);
        let (fuel, probes) = (cfg.fuel, cfg.probes);
        let outcomes = per_calculus(cfg, cfg.cases, |calc, _, seed| {
            let gen = GenConfig { max_depth: cfg.max_depth.min(4), ..cfg.gen_config(calc, seed) };
            let (phi, v, p) = gen_typed_value(&gen, true);
            let env = gen_sem_env(&phi, seed, 2);
            let den = denote(calc, &phi, &v).expect("generated values check");
            let tuple = env.to_tuple(&phi);
            let phi_ty = phi.as_tensor();
            let at = |e: &SemEnv| den.fun(e);
            let mut checks = Vec::new();

            let (p1, p2) = (p.clone(), p.clone());
            let lhs = at(&env).map(move |x| discard(calc, &p1, &x).expect("non-linear"));
            let rhs = Comp::ret(discard(calc, &phi_ty, &tuple).expect("non-linear"));
            checks.push(verdict_check("discard", &Type::Unit, &lhs, &rhs, sem_equal(&Type::Unit, &lhs, &rhs, fuel, probes), fuel));

            let lhs = at(&env).map(move |x| copy(&p2, &x).expect("non-linear"));
            let (t1, t2) = halves(copy(&phi_ty, &tuple).expect("non-linear"));
            let second = at(&SemEnv::from_tuple(&phi, &t2));
            let rhs = at(&SemEnv::from_tuple(&phi, &t1)).bind(move |a| second.clone().map(move |b| SemVal::pair(a.clone(), b)));
            let pp = Type::tensor(p.clone(), p.clone());
            checks.push(verdict_check("copy", &pp, &lhs, &rhs, sem_equal(&pp, &lhs, &rhs, fuel, probes), fuel));

            let p3 = p.clone();
            let lhs = at(&env).map(move |x| promote(&p3, &x).expect("non-linear"));
            let SemVal::Thunk(boxed) = promote(&phi_ty, &tuple).expect("non-linear") else { unreachable!() };
            let (den2, phi2) = (den.clone(), phi.clone());
            let lifted = boxed.bind(move |t| den2.fun(&SemEnv::from_tuple(&phi2, &t)));
            let rhs = Comp::ret(SemVal::Thunk(lifted));
            let bp = Type::bang(p.clone());
            checks.push(verdict_check("promote", &bp, &lhs, &rhs, sem_equal(&bp, &lhs, &rhs, fuel, probes), fuel));

            let mut term = format!("{phi} ⊢ {v} : {p}");
            if calc == Calculus::Affine {
                discardability.fetch_add(1, Ordering::Relaxed);
                let (gamma, w, a) = gen_typed_value(&GenConfig { seed: !seed, ..gen }, false);
                let env = gen_sem_env(&gamma, seed, 2);
                let total = denote(calc, &gamma, &w).expect("generated values check").fun(&env).run(Fuel(0));
                checks.push(Check::expect(total.is_some(), || format!("`{w}` needs fuel")));
                let val = denote_value_v(calc, &gamma, &w).expect("generated values").fun(&env);
                let lhs = Comp::ret(discard(calc, &a, &val).expect("affine discard is total"));
                let rhs = Comp::ret(discard(calc, &gamma.as_tensor(), &env.to_tuple(&gamma)).expect("affine discard is total"));
                checks.push(verdict_check("affine discard", &Type::Unit, &lhs, &rhs, sem_equal(&Type::Unit, &lhs, &rhs, fuel, probes), fuel));
                term = format!("{term}; {gamma} ⊢ {w} : {a}");
            }
            (term, checks)
        });
        report.absorb(outcomes);
        report.stat("affine_discardability_cases", discardability.into_inner());
        report
    }
}
