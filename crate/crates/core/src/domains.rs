//! Semantic values and fuel-indexed computations of the lifted-cpo model.
//!
//! Values ([`SemVal`]) inhabit the value-level interpretation of types:
//! unit, disjoint unions, products, functions from values to computations,
//! and suspended computations for `!A`. A [`Comp`] is a possibly-divergent
//! computation; ⊥ is the computation that never returns and cannot be
//! inspected, only observed as "not yet" at every finite fuel.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Context, Name, Type};
use crate::typecheck::Calculus;
use crate::Fuel;

#[derive(Clone)]
pub enum SemVal {
    Unit,
    Inl(Arc<SemVal>),
    Inr(Arc<SemVal>),
    Pair(Arc<SemVal>, Arc<SemVal>),
    Fun(SemFun),
    Thunk(Comp),
}

impl SemVal {
    pub fn inl(v: SemVal) -> SemVal {
        SemVal::Inl(Arc::new(v))
    }

    pub fn inr(v: SemVal) -> SemVal {
        SemVal::Inr(Arc::new(v))
    }

    pub fn pair(a: SemVal, b: SemVal) -> SemVal {
        SemVal::Pair(Arc::new(a), Arc::new(b))
    }

    pub fn thunk(c: Comp) -> SemVal {
        SemVal::Thunk(c)
    }

    /// Structural well-typedness; functions and thunks are only checked by shape.
    pub fn has_type(&self, ty: &Type) -> bool {
        match (self, ty) {
            (SemVal::Unit, Type::Unit) => true,
            (SemVal::Inl(v), Type::Sum(a, _)) => v.has_type(a),
            (SemVal::Inr(v), Type::Sum(_, b)) => v.has_type(b),
            (SemVal::Pair(v, w), Type::Tensor(a, b)) => v.has_type(a) && w.has_type(b),
            (SemVal::Fun(_), Type::Lolli(..)) => true,
            (SemVal::Thunk(_), Type::Bang(_)) => true,
            _ => false,
        }
    }
}

impl fmt::Display for SemVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemVal::Unit => f.write_str("*"),
            SemVal::Inl(v) => write!(f, "left {}", Atomic(v)),
            SemVal::Inr(v) => write!(f, "right {}", Atomic(v)),
            SemVal::Pair(a, b) => write!(f, "<{a}, {b}>"),
            SemVal::Fun(_) => f.write_str("<fun>"),
            SemVal::Thunk(_) => f.write_str("<thunk>"),
        }
    }
}

impl fmt::Debug for SemVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemVal::Fun(g) => write!(f, "<fun {}>", g.label),
            other => write!(f, "{other}"),
        }
    }
}

struct Atomic<'a>(&'a SemVal);

impl fmt::Display for Atomic<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SemVal::Inl(_) | SemVal::Inr(_) => write!(f, "({})", self.0),
            v => write!(f, "{v}"),
        }
    }
}

type ApplyFn = dyn Fn(&SemVal) -> Comp + Send + Sync;

/// An element of `⟦A⟧ ⊸ ⟦B⟧`: a map from values to computations.
#[derive(Clone)]
pub struct SemFun {
    apply: Arc<ApplyFn>,
    label: Arc<str>,
}

impl SemFun {
    pub fn new(label: impl Into<Arc<str>>, f: impl Fn(&SemVal) -> Comp + Send + Sync + 'static) -> Self {
        SemFun { apply: Arc::new(f), label: label.into() }
    }

    pub fn apply(&self, arg: &SemVal) -> Comp {
        (self.apply)(arg)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

type StepFn = dyn Fn() -> Comp + Send + Sync;
type KontFn = dyn Fn(SemVal) -> Comp + Send + Sync;

enum Node {
    Return(SemVal),
    /// One unit of work, then continue with the produced computation.
    Step(Arc<StepFn>),
    Bind(Comp, Arc<KontFn>),
    Diverge,
}

/// A computation observed through fuel: `run(n)` is either a value or "not
/// yet", and is monotone in `n`.
#[derive(Clone)]
pub struct Comp(Arc<Node>);

impl Comp {
    pub fn ret(v: SemVal) -> Comp {
        Comp(Arc::new(Node::Return(v)))
    }

    /// The least element: never returns at any fuel.
    pub fn bottom() -> Comp {
        Comp(Arc::new(Node::Diverge))
    }

    /// Spends one unit of fuel, then behaves as `next()`.
    pub fn step(next: impl Fn() -> Comp + Send + Sync + 'static) -> Comp {
        Comp(Arc::new(Node::Step(Arc::new(next))))
    }

    /// Spends one unit of fuel, then behaves as `next`.
    pub fn step_then(next: Comp) -> Comp {
        Comp::step(move || next.clone())
    }

    /// Strict sequencing: runs `self` to a value, then continues with `k`.
    pub fn bind(self, k: impl Fn(SemVal) -> Comp + Send + Sync + 'static) -> Comp {
        Comp(Arc::new(Node::Bind(self, Arc::new(k))))
    }

    pub fn map(self, f: impl Fn(SemVal) -> SemVal + Send + Sync + 'static) -> Comp {
        self.bind(move |v| Comp::ret(f(v)))
    }

    /// Returns the value if the computation finishes within `fuel` steps.
    pub fn run(&self, fuel: Fuel) -> Option<SemVal> {
        self.run_metered(fuel).0
    }

    /// As [`Comp::run`], also reporting the steps spent.
    pub fn run_metered(&self, fuel: Fuel) -> (Option<SemVal>, u64) {
        let mut spent = 0u64;
        let mut kont: Vec<Arc<KontFn>> = Vec::new();
        let mut cur = self.clone();
        loop {
            let next = match &*cur.0 {
                Node::Return(v) => match kont.pop() {
                    None => return (Some(v.clone()), spent),
                    Some(k) => k(v.clone()),
                },
                Node::Step(f) => {
                    if spent == fuel.0 {
                        return (None, spent);
                    }
                    spent += 1;
                    f()
                }
                Node::Bind(m, k) => {
                    kont.push(k.clone());
                    m.clone()
                }
                Node::Diverge => return (None, fuel.0),
            };
            cur = next;
        }
    }

    /// Smallest fuel at which the computation converges, if it does within `bound`.
    pub fn convergence_fuel(&self, bound: Fuel) -> Option<u64> {
        match self.run_metered(bound) {
            (Some(_), spent) => Some(spent),
            (None, _) => None,
        }
    }
}

impl fmt::Debug for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<comp>")
    }
}

/// Environments: finite maps from variable names to values. Later bindings
/// shadow earlier ones.
#[derive(Clone, Default)]
pub struct SemEnv(Option<Arc<EnvNode>>);

struct EnvNode {
    name: Name,
    value: SemVal,
    next: SemEnv,
}

impl SemEnv {
    pub fn new() -> Self {
        SemEnv(None)
    }

    pub fn extend(&self, name: impl Into<Name>, value: SemVal) -> SemEnv {
        SemEnv(Some(Arc::new(EnvNode { name: name.into(), value, next: self.clone() })))
    }

    pub fn lookup(&self, name: &str) -> Option<&SemVal> {
        let mut cur = &self.0;
        while let Some(node) = cur {
            if node.name == name {
                return Some(&node.value);
            }
            cur = &node.next.0;
        }
        None
    }

    /// Visible bindings, oldest first.
    pub fn entries(&self) -> Vec<(Name, SemVal)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut cur = &self.0;
        while let Some(node) = cur {
            if seen.insert(node.name.clone()) {
                out.push((node.name.clone(), node.value.clone()));
            }
            cur = &node.next.0;
        }
        out.reverse();
        out
    }

    /// Keeps only the bindings named in `ctx`, in context order.
    pub fn restrict(&self, ctx: &Context) -> SemEnv {
        ctx.entries().iter().fold(SemEnv::new(), |env, (x, _)| match self.lookup(x) {
            Some(v) => env.extend(x.clone(), v.clone()),
            None => env,
        })
    }

    /// The point of `⟦Γ⟧ = ⟦A1⟧ ⊗ ... ⊗ ⟦An⟧` this environment denotes.
    pub fn to_tuple(&self, ctx: &Context) -> SemVal {
        let vals: Vec<SemVal> = ctx
            .entries()
            .iter()
            .map(|(x, _)| self.lookup(x).cloned().unwrap_or_else(|| panic!("environment lacks `{x}`")))
            .collect();
        let mut it = vals.into_iter().rev();
        match it.next() {
            None => SemVal::Unit,
            Some(last) => it.fold(last, |acc, v| SemVal::pair(v, acc)),
        }
    }

    pub fn from_tuple(ctx: &Context, tuple: &SemVal) -> SemEnv {
        let n = ctx.len();
        let mut env = SemEnv::new();
        let mut cur = tuple.clone();
        for (i, (x, _)) in ctx.entries().iter().enumerate() {
            if i + 1 == n {
                env = env.extend(x.clone(), cur.clone());
                break;
            }
            let SemVal::Pair(a, b) = cur else { panic!("tuple does not match context") };
            env = env.extend(x.clone(), (*a).clone());
            cur = (*b).clone();
        }
        env
    }
}

impl fmt::Debug for SemEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries().iter().map(|(k, v)| (k.clone(), v.clone()))).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("contract violation: {0}")]
pub struct ContractViolation(pub String);

/// `◇`: the map to the unit. The linear model only has it at non-linear
/// types; the affine model has it everywhere (the unit is terminal).
pub fn discard(calc: Calculus, ty: &Type, _v: &SemVal) -> Result<SemVal, ContractViolation> {
    if calc == Calculus::Linear && !ty.is_nonlinear() {
        return Err(ContractViolation(format!("discard at linear type {ty} in the linear model")));
    }
    Ok(SemVal::Unit)
}

/// `△`: the diagonal, at non-linear types only. Thunks are shared, not re-run.
pub fn copy(ty: &Type, v: &SemVal) -> Result<SemVal, ContractViolation> {
    if !ty.is_nonlinear() {
        return Err(ContractViolation(format!("copy at linear type {ty}")));
    }
    Ok(SemVal::pair(v.clone(), v.clone()))
}

/// `□`: promotion into `!X` via the unit of the lifting adjunction.
pub fn promote(ty: &Type, v: &SemVal) -> Result<SemVal, ContractViolation> {
    if !ty.is_nonlinear() {
        return Err(ContractViolation(format!("promotion at linear type {ty}")));
    }
    Ok(SemVal::thunk(Comp::ret(v.clone())))
}

/// One step along a distinguishing observation.
#[derive(Clone, Debug)]
pub enum Observation {
    Fst,
    Snd,
    LeftBody,
    RightBody,
    Apply(SemVal),
    Force,
}

impl fmt::Display for Observation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observation::Fst => f.write_str("fst"),
            Observation::Snd => f.write_str("snd"),
            Observation::LeftBody => f.write_str("left-body"),
            Observation::RightBody => f.write_str("right-body"),
            Observation::Apply(v) => write!(f, "apply({v:?})"),
            Observation::Force => f.write_str("force"),
        }
    }
}

/// A path of observations ending in two different injection tags.
#[derive(Clone, Debug)]
pub struct Witness {
    pub path: Vec<Observation>,
    pub left: &'static str,
    pub right: &'static str,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path: Vec<String> = self.path.iter().map(|o| o.to_string()).collect();
        write!(f, "[{}] observes {} vs {}", path.join(" . "), self.left, self.right)
    }
}

#[derive(Clone, Debug)]
pub enum EqVerdict {
    Equal,
    Differ(Witness),
    /// Some observation did not finish within the fuel.
    Unknown { fuel: Fuel },
}

impl EqVerdict {
    pub fn is_differ(&self) -> bool {
        matches!(self, EqVerdict::Differ(_))
    }

    fn and(self, other: impl FnOnce() -> EqVerdict) -> EqVerdict {
        match self {
            EqVerdict::Differ(_) => self,
            EqVerdict::Equal => other(),
            EqVerdict::Unknown { .. } => match other() {
                d @ EqVerdict::Differ(_) => d,
                _ => self,
            },
        }
    }
}

fn tag(v: &SemVal) -> &'static str {
    match v {
        SemVal::Unit => "*",
        SemVal::Inl(_) => "left",
        SemVal::Inr(_) => "right",
        SemVal::Pair(..) => "pair",
        SemVal::Fun(_) => "fun",
        SemVal::Thunk(_) => "thunk",
    }
}

struct Comparer {
    fuel: Fuel,
    probes: usize,
}

impl Comparer {
    fn comps(&self, ty: &Type, a: &Comp, b: &Comp, path: &mut Vec<Observation>) -> EqVerdict {
        match (a.run(self.fuel), b.run(self.fuel)) {
            (Some(v), Some(w)) => self.values(ty, &v, &w, path),
            _ => EqVerdict::Unknown { fuel: self.fuel },
        }
    }

    fn values(&self, ty: &Type, v: &SemVal, w: &SemVal, path: &mut Vec<Observation>) -> EqVerdict {
        let mut under = |obs: Observation, f: &mut dyn FnMut(&mut Vec<Observation>) -> EqVerdict| {
            path.push(obs);
            let r = f(path);
            path.pop();
            r
        };
        match (ty, v, w) {
            (Type::Unit, SemVal::Unit, SemVal::Unit) => EqVerdict::Equal,
            (Type::Sum(a, _), SemVal::Inl(x), SemVal::Inl(y)) => {
                under(Observation::LeftBody, &mut |p| self.values(a, x, y, p))
            }
            (Type::Sum(_, b), SemVal::Inr(x), SemVal::Inr(y)) => {
                under(Observation::RightBody, &mut |p| self.values(b, x, y, p))
            }
            (Type::Tensor(a, b), SemVal::Pair(x1, x2), SemVal::Pair(y1, y2)) => {
                let first = under(Observation::Fst, &mut |p| self.values(a, x1, y1, p));
                first.and(|| under(Observation::Snd, &mut |p| self.values(b, x2, y2, p)))
            }
            (Type::Lolli(a, b), SemVal::Fun(f), SemVal::Fun(g)) => {
                if self.probes == 0 {
                    return EqVerdict::Unknown { fuel: self.fuel };
                }
                let mut verdict = EqVerdict::Equal;
                for arg in probe_args(a, self.probes) {
                    let (fa, ga) = (f.apply(&arg), g.apply(&arg));
                    let r = under(Observation::Apply(arg), &mut |p| self.comps(b, &fa, &ga, p));
                    verdict = verdict.and(|| r);
                    if verdict.is_differ() {
                        break;
                    }
                }
                verdict
            }
            (Type::Bang(a), SemVal::Thunk(c), SemVal::Thunk(d)) => {
                under(Observation::Force, &mut |p| self.comps(a, c, d, p))
            }
            _ => EqVerdict::Differ(Witness { path: path.clone(), left: tag(v), right: tag(w) }),
        }
    }
}

/// Observation-bounded comparison of two computations at type `ty`.
///
/// Both sides are run with `fuel`. If either does not finish the verdict is
/// `Unknown` (⊥ lies below everything). Functions are compared on up to
/// `probes` generated arguments and thunks by forcing. `Differ` always
/// carries a replayable witness; `Equal` is only as strong as the probes.
pub fn sem_equal(ty: &Type, a: &Comp, b: &Comp, fuel: Fuel, probes: usize) -> EqVerdict {
    Comparer { fuel, probes }.comps(ty, a, b, &mut Vec::new())
}

/// Follows `path` from `c` and reports the tag of the value reached, or
/// `None` if some computation along the way does not finish.
pub fn replay(c: &Comp, path: &[Observation], fuel: Fuel) -> Option<&'static str> {
    let mut v = c.run(fuel)?;
    for obs in path {
        v = match (obs, &v) {
            (Observation::Fst, SemVal::Pair(a, _)) => (**a).clone(),
            (Observation::Snd, SemVal::Pair(_, b)) => (**b).clone(),
            (Observation::LeftBody, SemVal::Inl(x)) | (Observation::RightBody, SemVal::Inr(x)) => (**x).clone(),
            (Observation::Apply(arg), SemVal::Fun(f)) => f.apply(arg).run(fuel)?,
            (Observation::Force, SemVal::Thunk(c)) => c.run(fuel)?,
            _ => return Some(tag(&v)),
        };
    }
    Some(tag(&v))
}

/// Deterministic probe arguments: exhaustive small first-order inhabitants
/// first, then generated values.
pub fn probe_args(ty: &Type, count: usize) -> Vec<SemVal> {
    let mut out = small_inhabitants(ty, count);
    let mut seed = 0u64;
    while out.len() < count {
        out.push(gen_sem_val(ty, 0x9e37_79b9 ^ seed, 2));
        seed += 1;
    }
    out
}

/// Up to `limit` first-order inhabitants of `ty`; empty if `ty` mentions `⊸` or `!`.
fn small_inhabitants(ty: &Type, limit: usize) -> Vec<SemVal> {
    match ty {
        Type::Unit => vec![SemVal::Unit],
        Type::Sum(a, b) => {
            let (xs, ys) = (small_inhabitants(a, limit), small_inhabitants(b, limit));
            if xs.is_empty() || ys.is_empty() {
                return vec![];
            }
            let mut out: Vec<SemVal> = xs.into_iter().map(SemVal::inl).collect();
            out.extend(ys.into_iter().map(SemVal::inr));
            out.truncate(limit);
            out
        }
        Type::Tensor(a, b) => {
            let (xs, ys) = (small_inhabitants(a, limit), small_inhabitants(b, limit));
            let mut out = Vec::new();
            for x in &xs {
                for y in &ys {
                    if out.len() < limit {
                        out.push(SemVal::pair(x.clone(), y.clone()));
                    }
                }
            }
            out
        }
        Type::Lolli(..) | Type::Bang(_) => vec![],
    }
}

/// A first-order fingerprint of a value: what a finite-table function can see.
fn fingerprint(v: &SemVal) -> String {
    match v {
        SemVal::Fun(_) | SemVal::Thunk(_) => "_".to_string(),
        SemVal::Unit => "*".to_string(),
        SemVal::Inl(x) => format!("L{}", fingerprint(x)),
        SemVal::Inr(x) => format!("R{}", fingerprint(x)),
        SemVal::Pair(a, b) => format!("({},{})", fingerprint(a), fingerprint(b)),
    }
}

/// Generates a value of type `ty`, deterministically in `seed`. Functions
/// are finite tables keyed on the argument's first-order shape whose entries
/// are generated results or ⊥; thunks are ⊥ with positive probability.
pub fn gen_sem_val(ty: &Type, seed: u64, size: u32) -> SemVal {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_with(ty, &mut rng, size)
}

pub(crate) fn gen_with(ty: &Type, rng: &mut ChaCha8Rng, size: u32) -> SemVal {
    match ty {
        Type::Unit => SemVal::Unit,
        Type::Sum(a, b) => {
            if rng.gen_bool(0.5) {
                SemVal::inl(gen_with(a, rng, size))
            } else {
                SemVal::inr(gen_with(b, rng, size))
            }
        }
        Type::Tensor(a, b) => {
            let x = gen_with(a, rng, size);
            SemVal::pair(x, gen_with(b, rng, size))
        }
        Type::Bang(a) => {
            if rng.gen_bool(0.25) {
                SemVal::thunk(Comp::bottom())
            } else {
                SemVal::thunk(Comp::ret(gen_with(a, rng, size.saturating_sub(1))))
            }
        }
        Type::Lolli(a, b) => {
            let keys: Vec<String> = small_inhabitants(a, 6).iter().map(fingerprint).collect();
            let entry = |rng: &mut ChaCha8Rng| -> Option<SemVal> {
                if rng.gen_bool(0.2) {
                    None
                } else {
                    Some(gen_with(b, rng, size.saturating_sub(1)))
                }
            };
            let table: Vec<(String, Option<SemVal>)> = keys.into_iter().map(|k| (k, entry(rng))).collect();
            let default = entry(rng);
            let label = table
                .iter()
                .map(|(k, v)| format!("{k}↦{}", v.as_ref().map_or("⊥".to_string(), |v| v.to_string())))
                .chain(std::iter::once(format!(
                    "_↦{}",
                    default.as_ref().map_or("⊥".to_string(), |v| v.to_string())
                )))
                .collect::<Vec<_>>()
                .join(", ");
            SemFun::new(format!("table{{{label}}}"), move |arg| {
                let key = fingerprint(arg);
                let hit = table.iter().find(|(k, _)| *k == key).map(|(_, v)| v).unwrap_or(&default);
                match hit {
                    Some(v) => Comp::ret(v.clone()),
                    None => Comp::bottom(),
                }
            })
            .into()
        }
    }
}

impl From<SemFun> for SemVal {
    fn from(f: SemFun) -> Self {
        SemVal::Fun(f)
    }
}

/// Generated environment for `ctx`, one value per entry.
pub fn gen_sem_env(ctx: &Context, seed: u64, size: u32) -> SemEnv {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ctx.entries()
        .iter()
        .fold(SemEnv::new(), |env, (x, ty)| env.extend(x.clone(), gen_with(ty, &mut rng, size)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ii() -> Type {
        Type::sum(Type::Unit, Type::Unit)
    }

    fn never() -> Comp {
        fn spin() -> Comp {
            Comp::step(spin)
        }
        spin()
    }

    #[test]
    fn discard_examples() {
        assert!(matches!(discard(Calculus::Linear, &Type::Unit, &SemVal::Unit), Ok(SemVal::Unit)));
        let t = SemVal::thunk(Comp::bottom());
        assert!(matches!(discard(Calculus::Linear, &Type::bang(Type::Unit), &t), Ok(SemVal::Unit)));
        let f: SemVal = SemFun::new("id", |v| Comp::ret(v.clone())).into();
        let lolli = Type::lolli(Type::Unit, Type::Unit);
        assert!(matches!(discard(Calculus::Affine, &lolli, &f), Ok(SemVal::Unit)));
        assert!(discard(Calculus::Linear, &lolli, &f).is_err());
    }

    #[test]
    fn copy_examples() {
        let v = copy(&Type::Unit, &SemVal::Unit).unwrap();
        assert_eq!(v.to_string(), "<*, *>");
        let c = Comp::ret(SemVal::Unit);
        match copy(&Type::bang(Type::Unit), &SemVal::thunk(c.clone())).unwrap() {
            SemVal::Pair(a, b) => match (&*a, &*b) {
                (SemVal::Thunk(x), SemVal::Thunk(y)) => {
                    assert!(Arc::ptr_eq(&x.0, &c.0) && Arc::ptr_eq(&y.0, &c.0));
                }
                _ => panic!("expected thunks"),
            },
            _ => panic!("expected pair"),
        }
        let v = copy(&ii(), &SemVal::inl(SemVal::Unit)).unwrap();
        assert_eq!(v.to_string(), "<left *, left *>");
        assert!(copy(&Type::lolli(Type::Unit, Type::Unit), &SemVal::Unit).is_err());
    }

    #[test]
    fn promote_examples() {
        let SemVal::Thunk(c) = promote(&Type::Unit, &SemVal::Unit).unwrap() else { panic!() };
        assert!(matches!(c.run(Fuel(1)), Some(SemVal::Unit)));
        let inner = SemVal::thunk(Comp::bottom());
        let SemVal::Thunk(c) = promote(&Type::bang(Type::Unit), &inner).unwrap() else { panic!() };
        assert!(matches!(c.run(Fuel(1)), Some(SemVal::Thunk(_))));
        let SemVal::Thunk(c) = promote(&ii(), &SemVal::inr(SemVal::Unit)).unwrap() else { panic!() };
        assert_eq!(c.run(Fuel(1)).unwrap().to_string(), "right *");
        assert!(promote(&Type::lolli(Type::Unit, Type::Unit), &SemVal::Unit).is_err());
    }

    #[test]
    fn sem_equal_examples() {
        let unit = Comp::ret(SemVal::Unit);
        assert!(matches!(sem_equal(&Type::Unit, &unit, &unit, Fuel(10), 0), EqVerdict::Equal));
        assert!(matches!(
            sem_equal(&Type::Unit, &unit, &never(), Fuel(10_000), 0),
            EqVerdict::Unknown { .. }
        ));
        let (l, r) = (Comp::ret(SemVal::inl(SemVal::Unit)), Comp::ret(SemVal::inr(SemVal::Unit)));
        let EqVerdict::Differ(w) = sem_equal(&ii(), &l, &r, Fuel(10), 0) else { panic!() };
        assert_eq!((w.left, w.right), ("left", "right"));
        assert_ne!(replay(&l, &w.path, Fuel(10)), replay(&r, &w.path, Fuel(10)));
    }

    #[test]
    fn sem_equal_probes_functions_and_thunks() {
        let ty = Type::lolli(ii(), ii());
        let id: SemVal = SemFun::new("id", |v| Comp::ret(v.clone())).into();
        let swap: SemVal = SemFun::new("swap", |v| {
            Comp::ret(match v {
                SemVal::Inl(x) => SemVal::Inr(x.clone()),
                SemVal::Inr(x) => SemVal::Inl(x.clone()),
                other => other.clone(),
            })
        })
        .into();
        let (a, b) = (Comp::ret(id.clone()), Comp::ret(swap));
        let EqVerdict::Differ(w) = sem_equal(&ty, &a, &b, Fuel(10), 4) else { panic!() };
        assert_ne!(replay(&a, &w.path, Fuel(10)), replay(&b, &w.path, Fuel(10)));
        assert!(matches!(sem_equal(&ty, &a, &a, Fuel(10), 4), EqVerdict::Equal));
        assert!(matches!(sem_equal(&ty, &a, &a, Fuel(10), 0), EqVerdict::Unknown { .. }));

        let bang = Type::bang(ii());
        let t1 = Comp::ret(SemVal::thunk(Comp::ret(SemVal::inl(SemVal::Unit))));
        let t2 = Comp::ret(SemVal::thunk(Comp::step(|| Comp::ret(SemVal::inr(SemVal::Unit)))));
        assert!(sem_equal(&bang, &t1, &t2, Fuel(10), 0).is_differ());
        let t3 = Comp::ret(SemVal::thunk(never()));
        assert!(matches!(sem_equal(&bang, &t1, &t3, Fuel(100), 0), EqVerdict::Unknown { .. }));
    }

    #[test]
    fn bottom_and_monotonicity() {
        assert!(Comp::bottom().run(Fuel(1_000_000)).is_none());
        assert!(never().run(Fuel(10_000)).is_none());
        let three = Comp::step(|| Comp::step(|| Comp::step(|| Comp::ret(SemVal::Unit))));
        assert!(three.run(Fuel(2)).is_none());
        for n in 3..10 {
            assert!(matches!(three.run(Fuel(n)), Some(SemVal::Unit)));
        }
        assert_eq!(three.convergence_fuel(Fuel(100)), Some(3));
    }

    #[test]
    fn deep_binds_do_not_overflow() {
        fn chain(n: u32) -> Comp {
            if n == 0 {
                Comp::ret(SemVal::Unit)
            } else {
                Comp::step(move || chain(n - 1).bind(Comp::ret))
            }
        }
        assert!(chain(200_000).run(Fuel(1_000_000)).is_some());
    }

    #[test]
    fn generator_contract() {
        for seed in 0..20 {
            assert!(matches!(gen_sem_val(&Type::Unit, seed, 3), SemVal::Unit));
            assert!(matches!(gen_sem_val(&ii(), seed, 1), SemVal::Inl(_) | SemVal::Inr(_)));
        }
        let bang = Type::bang(Type::Unit);
        let bottoms = (0..200)
            .filter(|s| match gen_sem_val(&bang, *s, 2) {
                SemVal::Thunk(c) => c.run(Fuel(100)).is_none(),
                _ => panic!("not a thunk"),
            })
            .count();
        assert!(bottoms > 0 && bottoms < 200);
        let ty = Type::lolli(ii(), Type::tensor(ii(), Type::bang(Type::Unit)));
        for seed in 0..50 {
            let v = gen_sem_val(&ty, seed, 2);
            assert!(v.has_type(&ty));
            let again = gen_sem_val(&ty, seed, 2);
            let same = sem_equal(&ty, &Comp::ret(v), &Comp::ret(again), Fuel(10), 4);
            assert!(!same.is_differ());
        }
    }

    #[test]
    fn env_tuples_round_trip() {
        let ctx = Context::from_entries([
            ("a".to_string(), Type::Unit),
            ("b".to_string(), ii()),
            ("c".to_string(), Type::Unit),
        ])
        .unwrap();
        let env = SemEnv::new()
            .extend("a", SemVal::Unit)
            .extend("b", SemVal::inr(SemVal::Unit))
            .extend("c", SemVal::Unit);
        let tuple = env.to_tuple(&ctx);
        assert!(tuple.has_type(&ctx.as_tensor()));
        assert_eq!(tuple.to_string(), "<*, <right *, *>>");
        let back = SemEnv::from_tuple(&ctx, &tuple);
        assert_eq!(back.lookup("b").unwrap().to_string(), "right *");
        assert_eq!(SemEnv::new().to_tuple(&Context::new()).to_string(), "*");
    }
}
