//! Random generation of well-typed terms and values.
//!
//! Generation is type-directed and top-down. Each call receives the target
//! type and the set of linear variables it is responsible for ("obligations").
//! In the linear calculus every obligation must be consumed exactly once, so
//! obligations are split among subterms. Leftovers at a leaf are consumed by
//! an explicit eliminator chain (a "sink"). In the affine calculus
//! obligations may also be dropped. A final type check guards the result,
//! and the generator retries with a derived seed on the rare dead end.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use slc_core::syntax::Context;
use slc_core::{typecheck, Calculus, Fuel, Name, Term, Type};

#[derive(Clone, Debug, Serialize)]
pub struct GenConfig {
    pub calculus: Calculus,
    pub max_depth: u32,
    /// Types used for annotations and intermediate results.
    pub palette: Vec<Type>,
    pub seed: u64,
    pub count: usize,
    pub fuel: Fuel,
    pub probes: usize,
    /// Relative weight of `rec` among the applicable rules.
    pub rec_weight: u32,
    /// Type of the generated program; drawn from the palette when absent.
    pub target: Option<Type>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            calculus: Calculus::Linear,
            max_depth: 5,
            palette: default_palette(),
            seed: 0,
            count: 1000,
            fuel: Fuel(10_000),
            probes: 8,
            rec_weight: 2,
            target: None,
        }
    }
}

pub fn default_palette() -> Vec<Type> {
    let i = Type::Unit;
    vec![
        i.clone(),
        Type::sum(i.clone(), i.clone()),
        Type::tensor(i.clone(), i.clone()),
        Type::lolli(i.clone(), i.clone()),
        Type::bang(i.clone()),
        Type::bang(Type::lolli(i.clone(), i)),
    ]
}

/// A generated program together with the seed that reproduces it.
#[derive(Clone, Debug)]
pub struct Generated {
    pub term: Term,
    pub ty: Type,
    pub seed: u64,
}

/// Seed of the `index`-th case of a run seeded with `seed`.
pub fn case_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(index).rotate_left(17) ^ 0x5851_f42d
}

const ATTEMPTS: u64 = 64;

/// A closed term accepted by the type checker of `cfg.calculus`, and its type.
pub fn gen_typed_term(cfg: &GenConfig) -> (Term, Type) {
    let mut depth = cfg.max_depth.max(1);
    loop {
        for attempt in 0..ATTEMPTS {
            let mut g = Gen::new(cfg, case_seed(cfg.seed, attempt));
            let ty = cfg.target.clone().unwrap_or_else(|| g.pick_type());
            let m = g.term(&ty, depth, Vec::new());
            if let Ok((checked, _)) = typecheck(cfg.calculus, &Context::new(), &m) {
                debug_assert_eq!(checked, ty);
                return (m, ty);
            }
        }
        // Shrinking the depth always ends at a leaf, and leaves check.
        depth = depth.saturating_sub(1).max(1);
    }
}

/// `cfg.count` programs with per-case seeds derived from `cfg.seed`.
pub fn gen_batch(cfg: &GenConfig) -> Vec<Generated> {
    (0..cfg.count as u64)
        .map(|i| {
            let seed = case_seed(cfg.seed, i);
            let (term, ty) = gen_typed_term(&GenConfig { seed, ..cfg.clone() });
            Generated { term, ty, seed }
        })
        .collect()
}

/// A value `Γ ⊢ v : A` in a generated context. With `nonlinear` set, both
/// the context and the type are non-linear.
pub fn gen_typed_value(cfg: &GenConfig, nonlinear: bool) -> (Context, Term, Type) {
    for attempt in 0.. {
        let mut g = Gen::new(cfg, case_seed(cfg.seed, attempt));
        let pool: Vec<Type> = if nonlinear { nonlinear_palette() } else { cfg.palette.clone() };
        let width = g.rng.gen_range(0..=2);
        let mut ctx = Context::new();
        for _ in 0..width {
            let ty = pool.choose(&mut g.rng).expect("palette is not empty").clone();
            let x = g.fresh("g");
            g.scope.push(Var { name: x.clone(), ty: ty.clone(), masked: false });
            ctx = ctx.extend(x, ty).expect("fresh names");
        }
        let ty = pool.choose(&mut g.rng).expect("palette is not empty").clone();
        let obligations = g.scope.iter().filter(|v| !v.ty.is_nonlinear()).map(|v| v.name.clone()).collect();
        let v = g.value(&ty, cfg.max_depth.max(1), obligations);
        if let Ok((checked, _)) = typecheck(cfg.calculus, &ctx, &v) {
            debug_assert_eq!(checked, ty);
            return (ctx, v, ty);
        }
    }
    unreachable!()
}

fn nonlinear_palette() -> Vec<Type> {
    let i = Type::Unit;
    vec![
        i.clone(),
        Type::sum(i.clone(), i.clone()),
        Type::bang(i.clone()),
        Type::tensor(i.clone(), Type::bang(i.clone())),
        Type::bang(Type::lolli(i.clone(), i)),
    ]
}

/// How often each typing rule occurs in `terms`.
pub fn rule_coverage<'a>(terms: impl IntoIterator<Item = &'a Term>) -> BTreeMap<&'static str, u64> {
    let mut counts: BTreeMap<&'static str, u64> = ALL_RULES.iter().map(|r| (*r, 0)).collect();
    fn walk(m: &Term, counts: &mut BTreeMap<&'static str, u64>) {
        *counts.entry(m.rule_name()).or_default() += 1;
        for c in m.children() {
            walk(c, counts);
        }
    }
    for m in terms {
        walk(m, &mut counts);
    }
    counts
}

pub const ALL_RULES: [&str; 13] =
    ["var", "star", "seq", "left", "right", "case", "pair", "let-pair", "lam", "app", "lift", "force", "rec"];

struct Var {
    name: Name,
    ty: Type,
    masked: bool,
}

struct Gen<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
    scope: Vec<Var>,
    next: usize,
}

#[derive(Clone, Copy, Debug)]
enum Rule {
    Var,
    Star,
    Seq,
    Inject,
    Case,
    Pair,
    Let,
    Lam,
    App,
    Lift,
    Force,
    Rec,
}

impl<'a> Gen<'a> {
    fn new(cfg: &'a GenConfig, seed: u64) -> Self {
        Gen { cfg, rng: ChaCha8Rng::seed_from_u64(seed), scope: Vec::new(), next: 0 }
    }

    fn affine(&self) -> bool {
        self.cfg.calculus == Calculus::Affine
    }

    fn fresh(&mut self, base: &str) -> Name {
        self.next += 1;
        format!("{base}{}", self.next)
    }

    fn pick_type(&mut self) -> Type {
        self.cfg.palette.choose(&mut self.rng).cloned().unwrap_or(Type::Unit)
    }

    fn bind<T>(&mut self, binds: &[(Name, Type)], f: impl FnOnce(&mut Self) -> T) -> T {
        for (x, ty) in binds {
            self.scope.push(Var { name: x.clone(), ty: ty.clone(), masked: false });
        }
        let r = f(self);
        self.scope.truncate(self.scope.len() - binds.len());
        r
    }

    /// Hides linear variables, as in the body of `lift` and `rec`.
    fn masked<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        let saved: Vec<bool> = self.scope.iter().map(|v| v.masked).collect();
        for v in &mut self.scope {
            if !v.ty.is_nonlinear() {
                v.masked = true;
            }
        }
        let r = f(self);
        for (v, m) in self.scope.iter_mut().zip(saved) {
            v.masked = m;
        }
        r
    }

    fn visible(&self, x: &str) -> Option<&Var> {
        self.scope.iter().rev().find(|v| v.name == x).filter(|v| !v.masked)
    }

    /// Variables that may stand alone as a term of type `ty` given obligations `ob`.
    fn var_candidates(&self, ty: &Type, ob: &[Name]) -> Vec<Name> {
        let mut out = Vec::new();
        for (i, v) in self.scope.iter().enumerate() {
            let shadowed = self.scope[i + 1..].iter().any(|w| w.name == v.name);
            if v.masked || shadowed || &v.ty != ty {
                continue;
            }
            let ok = if v.ty.is_nonlinear() {
                self.affine() || ob.is_empty()
            } else if self.affine() {
                ob.contains(&v.name)
            } else {
                ob.len() == 1 && ob[0] == v.name
            };
            if ok {
                out.push(v.name.clone());
            }
        }
        out
    }

    /// Distributes obligations among `parts` subterms. In the affine
    /// calculus an obligation is sometimes dropped instead.
    fn split(&mut self, ob: Vec<Name>, parts: usize) -> Vec<Vec<Name>> {
        let mut out = vec![Vec::new(); parts];
        for x in ob {
            if self.affine() && self.rng.gen_bool(0.15) {
                continue;
            }
            let i = self.rng.gen_range(0..parts);
            out[i].push(x);
        }
        out
    }

    fn linear_binders(binds: &[(Name, Type)]) -> Vec<Name> {
        binds.iter().filter(|(_, t)| !t.is_nonlinear()).map(|(x, _)| x.clone()).collect()
    }

    fn term(&mut self, ty: &Type, depth: u32, ob: Vec<Name>) -> Term {
        if depth <= 1 {
            return self.leaf(ty, ob);
        }
        let mut rules: Vec<(Rule, u32)> = vec![(Rule::Seq, 1), (Rule::Case, 2), (Rule::Let, 2), (Rule::App, 3), (Rule::Force, 2)];
        if !self.var_candidates(ty, &ob).is_empty() {
            rules.push((Rule::Var, 3));
        }
        if ob.is_empty() {
            rules.push((Rule::Rec, self.cfg.rec_weight));
        }
        match ty {
            Type::Unit if ob.is_empty() || self.affine() => rules.push((Rule::Star, 2)),
            Type::Sum(..) => rules.push((Rule::Inject, 5)),
            Type::Tensor(..) => rules.push((Rule::Pair, 5)),
            Type::Lolli(..) => rules.push((Rule::Lam, 6)),
            Type::Bang(_) if ob.is_empty() || self.affine() => rules.push((Rule::Lift, 5)),
            _ => {}
        }
        let rule = rules.choose_weighted(&mut self.rng, |r| r.1).expect("rules are weighted").0;
        let d = depth - 1;
        match rule {
            Rule::Var => {
                let xs = self.var_candidates(ty, &ob);
                Term::var(xs.choose(&mut self.rng).expect("candidates").clone())
            }
            Rule::Star => Term::Star,
            Rule::Seq => {
                let mut parts = self.split(ob, 2).into_iter();
                let first = self.term(&Type::Unit, d, parts.next().unwrap());
                Term::seq(first, self.term(ty, d, parts.next().unwrap()))
            }
            Rule::Inject => {
                let Type::Sum(a, b) = ty else { unreachable!() };
                if self.rng.gen_bool(0.5) {
                    Term::left((**a).clone(), (**b).clone(), self.term(a, d, ob))
                } else {
                    Term::right((**a).clone(), (**b).clone(), self.term(b, d, ob))
                }
            }
            Rule::Case => {
                let (a, b) = (self.pick_type(), self.pick_type());
                let mut parts = self.split(ob, 2).into_iter();
                let scrutinee = self.term(&Type::sum(a.clone(), b.clone()), d, parts.next().unwrap());
                let rest = parts.next().unwrap();
                let (x, y) = (self.fresh("l"), self.fresh("r"));
                let bl = [(x.clone(), a)];
                let br = [(y.clone(), b)];
                let mut ol = rest.clone();
                ol.extend(Self::linear_binders(&bl));
                let mut or = rest;
                or.extend(Self::linear_binders(&br));
                let left = self.bind(&bl, |g| g.term(ty, d, ol));
                let right = self.bind(&br, |g| g.term(ty, d, or));
                Term::case(scrutinee, x, left, y, right)
            }
            Rule::Pair => {
                let Type::Tensor(a, b) = ty else { unreachable!() };
                let mut parts = self.split(ob, 2).into_iter();
                let first = self.term(a, d, parts.next().unwrap());
                Term::pair(first, self.term(b, d, parts.next().unwrap()))
            }
            Rule::Let => {
                let (a, b) = (self.pick_type(), self.pick_type());
                let mut parts = self.split(ob, 2).into_iter();
                let bound = self.term(&Type::tensor(a.clone(), b.clone()), d, parts.next().unwrap());
                let (x, y) = (self.fresh("a"), self.fresh("b"));
                let binds = [(x.clone(), a), (y.clone(), b)];
                let mut rest = parts.next().unwrap();
                rest.extend(Self::linear_binders(&binds));
                let body = self.bind(&binds, |g| g.term(ty, d, rest));
                Term::let_pair(x, y, bound, body)
            }
            Rule::Lam => self.lambda(ty, d, ob),
            Rule::App => {
                let a = self.pick_type();
                let mut parts = self.split(ob, 2).into_iter();
                let f = self.term(&Type::lolli(a.clone(), ty.clone()), d, parts.next().unwrap());
                Term::app(f, self.term(&a, d, parts.next().unwrap()))
            }
            Rule::Lift => {
                let Type::Bang(a) = ty else { unreachable!() };
                Term::lift(self.masked(|g| g.term(a, d, Vec::new())))
            }
            Rule::Force => Term::force(self.term(&Type::bang(ty.clone()), d, ob)),
            Rule::Rec => {
                let z = self.fresh("z");
                let bang = Type::bang(ty.clone());
                let body = self.masked(|g| g.bind(&[(z.clone(), bang.clone())], |g| g.term(ty, d, Vec::new())));
                Term::rec(z, bang, body)
            }
        }
    }

    fn lambda(&mut self, ty: &Type, d: u32, mut ob: Vec<Name>) -> Term {
        let Type::Lolli(a, b) = ty else { unreachable!() };
        let x = self.fresh("x");
        let binds = [(x.clone(), (**a).clone())];
        ob.extend(Self::linear_binders(&binds));
        let body = self.bind(&binds, |g| g.term(b, d, ob));
        Term::lam(x, (**a).clone(), body)
    }

    /// Depth is exhausted: use a variable when one fits, otherwise consume
    /// the obligations and build a canonical inhabitant.
    fn leaf(&mut self, ty: &Type, ob: Vec<Name>) -> Term {
        let xs = self.var_candidates(ty, &ob);
        if !xs.is_empty() && self.rng.gen_bool(0.7) {
            return Term::var(xs.choose(&mut self.rng).unwrap().clone());
        }
        if self.affine() {
            // Canonical inhabitants always contain a leaf that may discard.
            return self.inhabit(ty);
        }
        let mut m = self.inhabit(ty);
        for x in ob.into_iter().rev() {
            let xt = self.visible(&x).expect("obligations are visible").ty.clone();
            m = Term::seq(self.sink(Term::var(x), &xt), m);
        }
        m
    }

    /// A term of type `I` that consumes `m : ty` exactly once.
    fn sink(&mut self, m: Term, ty: &Type) -> Term {
        match ty {
            Type::Unit => m,
            Type::Sum(a, b) => {
                let (x, y) = (self.fresh("s"), self.fresh("s"));
                let left = self.sink(Term::var(x.clone()), a);
                let right = self.sink(Term::var(y.clone()), b);
                Term::case(m, x, left, y, right)
            }
            Type::Tensor(a, b) => {
                let (x, y) = (self.fresh("s"), self.fresh("s"));
                let first = self.sink(Term::var(x.clone()), a);
                let second = self.sink(Term::var(y.clone()), b);
                Term::let_pair(x, y, m, Term::seq(first, second))
            }
            Type::Lolli(a, b) => {
                let arg = self.inhabit(a);
                self.sink(Term::app(m, arg), b)
            }
            Type::Bang(_) => {
                let r = self.fresh("s");
                Term::app(Term::lam(r, ty.clone(), Term::Star), m)
            }
        }
    }

    /// A closed value of type `ty`.
    fn inhabit(&mut self, ty: &Type) -> Term {
        match ty {
            Type::Unit => Term::Star,
            Type::Sum(a, b) => {
                let v = self.inhabit(a);
                Term::left((**a).clone(), (**b).clone(), v)
            }
            Type::Tensor(a, b) => {
                let v = self.inhabit(a);
                Term::pair(v, self.inhabit(b))
            }
            Type::Lolli(a, b) => {
                let x = self.fresh("i");
                let used = self.sink(Term::var(x.clone()), a);
                let result = self.inhabit(b);
                Term::lam(x, (**a).clone(), Term::seq(used, result))
            }
            Type::Bang(a) => Term::lift(self.inhabit(a)),
        }
    }

    /// A value of type `ty` consuming the obligations `ob`.
    fn value(&mut self, ty: &Type, depth: u32, ob: Vec<Name>) -> Term {
        let xs = self.var_candidates(ty, &ob);
        if !xs.is_empty() && (depth <= 1 || self.rng.gen_bool(0.3)) {
            return Term::var(xs.choose(&mut self.rng).unwrap().clone());
        }
        let d = depth.saturating_sub(1).max(1);
        match ty {
            Type::Unit => Term::Star,
            Type::Sum(a, b) => {
                if self.rng.gen_bool(0.5) {
                    Term::left((**a).clone(), (**b).clone(), self.value(a, d, ob))
                } else {
                    Term::right((**a).clone(), (**b).clone(), self.value(b, d, ob))
                }
            }
            Type::Tensor(a, b) => {
                let mut parts = self.split(ob, 2).into_iter();
                let first = self.value(a, d, parts.next().unwrap());
                Term::pair(first, self.value(b, d, parts.next().unwrap()))
            }
            Type::Lolli(..) => self.lambda(ty, d, ob),
            Type::Bang(a) => Term::lift(self.masked(|g| g.term(a, d, Vec::new()))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(calculus: Calculus, depth: u32, seed: u64) -> GenConfig {
        GenConfig { calculus, max_depth: depth, seed, ..GenConfig::default() }
    }

    #[test]
    fn depth_one_unit_programs() {
        let c = GenConfig { palette: vec![Type::Unit], ..cfg(Calculus::Linear, 1, 0) };
        for seed in 0..50 {
            let (m, ty) = gen_typed_term(&GenConfig { seed, ..c.clone() });
            assert_eq!((m, ty), (Term::Star, Type::Unit));
        }
    }

    #[test]
    fn generated_terms_check() {
        for calc in Calculus::ALL {
            for seed in 0..300 {
                let (m, ty) = gen_typed_term(&cfg(calc, 4, seed));
                assert_eq!(slc_core::check_program(calc, &m).unwrap(), ty, "{m}");
            }
        }
    }

    #[test]
    fn affine_generation_discards_linear_binders() {
        let found = (0..2000).any(|seed| {
            let (m, _) = gen_typed_term(&cfg(Calculus::Affine, 3, seed));
            slc_core::check_program(Calculus::Linear, &m).is_err()
        });
        assert!(found);
    }

    #[test]
    fn deterministic_per_seed() {
        let c = cfg(Calculus::Affine, 5, 42);
        assert_eq!(gen_typed_term(&c), gen_typed_term(&c));
        let (ctx, v, _) = gen_typed_value(&c, false);
        let (ctx2, v2, _) = gen_typed_value(&c, false);
        assert_eq!((ctx.to_string(), v), (ctx2.to_string(), v2));
    }

    #[test]
    fn values_are_values() {
        for calc in Calculus::ALL {
            for seed in 0..200 {
                let (ctx, v, ty) = gen_typed_value(&cfg(calc, 3, seed), seed % 2 == 0);
                assert!(v.is_value(), "{v}");
                if seed % 2 == 0 {
                    assert!(ctx.is_nonlinear() && ty.is_nonlinear());
                }
            }
        }
    }
}
