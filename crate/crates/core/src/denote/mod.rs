//! Denotational interpreters and the registry they are selected from.
//!
//! Both interpreters compile a well-typed term, by structural recursion,
//! into a map from environments to computations. They share every clause
//! except abstraction and the bottom-propagation laws, which the naive
//! interpreter applies while building the denotation.

pub mod naive;
pub mod standard;

use std::fmt;
use std::sync::Arc;

use crate::domains::{gen_sem_env, probe_args, Comp, SemEnv, SemFun, SemVal};
use crate::syntax::{Context, Name, Term, Type};
use crate::typecheck::{typecheck, Calculus, TypeError};
use crate::Fuel;

pub use naive::{degeneracy_report, denote_naive, judge_bottom, BottomJudgment, DegeneracyReport, LinearAgreement, Naive,
    StrictDenotation};
pub use standard::{denote, denote_value_b, denote_value_v, fix_denote, Standard};

pub(crate) type DenFn = Arc<dyn Fn(&SemEnv) -> Comp + Send + Sync>;
pub(crate) type ValFn = Arc<dyn Fn(&SemEnv) -> SemVal + Send + Sync>;

#[derive(Debug, thiserror::Error)]
pub enum DenoteError {
    #[error("ill-typed input: {0}")]
    IllTyped(#[from] TypeError),
    #[error("contract violation: {0}")]
    Contract(String),
}

/// `⟦Γ ⊢ m : A⟧`, a map from environments over `Γ` to computations of type `A`.
#[derive(Clone)]
pub struct Denotation {
    ctx: Context,
    ty: Type,
    fun: DenFn,
    known_bottom: bool,
}

impl Denotation {
    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn ty(&self) -> &Type {
        &self.ty
    }

    pub fn fun(&self, env: &SemEnv) -> Comp {
        (self.fun)(env)
    }

    /// The computation on the empty environment, for closed terms.
    pub fn closed(&self) -> Comp {
        self.fun(&SemEnv::new())
    }

    /// Whether construction already established the denotation is `⊥`.
    /// Only the naive interpreter ever sets this.
    pub fn known_bottom(&self) -> bool {
        self.known_bottom
    }
}

impl fmt::Debug for Denotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Denotation({} ⊢ _ : {})", self.ctx, self.ty)
    }
}

/// A total map from environments to values, used for the value-level
/// interpretations.
#[derive(Clone)]
pub struct ValueDenotation {
    ctx: Context,
    ty: Type,
    fun: ValFn,
}

impl ValueDenotation {
    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn ty(&self) -> &Type {
        &self.ty
    }

    pub fn fun(&self, env: &SemEnv) -> SemVal {
        (self.fun)(env)
    }

    /// Embeds into computations by `return`.
    pub fn returned(&self, env: &SemEnv) -> Comp {
        Comp::ret(self.fun(env))
    }
}

/// A denotational interpreter, selectable by name.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;

    fn summary(&self) -> &'static str;

    /// Checks `m` in `calc` under `ctx` and compiles it.
    fn denote(&self, calc: Calculus, ctx: &Context, m: &Term) -> Result<Denotation, DenoteError>;
}

/// Settings handed to every backend the registry builds.
#[derive(Clone, Copy, Debug)]
pub struct BackendConfig {
    /// Fuel up to which the naive interpreter searches for convergence
    /// before judging a lambda body to be `⊥`.
    pub bottom_bound: Fuel,
    /// Probe environments tried per judgment.
    pub probes: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig { bottom_bound: Fuel(10_000), probes: 8 }
    }
}

pub struct BackendRegistry {
    backends: Vec<Box<dyn Backend>>,
}

impl BackendRegistry {
    pub fn empty() -> Self {
        BackendRegistry { backends: Vec::new() }
    }

    /// The standard and naive interpreters.
    pub fn builtin(cfg: BackendConfig) -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(Standard));
        reg.register(Box::new(Naive::new(cfg)));
        reg
    }

    /// Adds a backend, replacing any existing one with the same name.
    pub fn register(&mut self, backend: Box<dyn Backend>) {
        self.backends.retain(|b| b.name() != backend.name());
        self.backends.push(backend);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Backend> {
        self.backends.iter().find(|b| b.name() == name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.backends.iter().map(|b| b.name()).collect()
    }
}

impl Default for BackendRegistry {
    fn default() -> Self {
        Self::builtin(BackendConfig::default())
    }
}

#[derive(Clone, Copy)]
pub(crate) enum Lambdas {
    /// `L curry(⟦m⟧)`: an abstraction is always a value.
    Curried,
    /// Curry in the computation category, with `curry(⊥) = ⊥` and the
    /// smash law applied to components judged `⊥`.
    Strict { bottom_bound: Fuel, probes: usize },
}

pub(crate) struct Piece {
    pub ty: Type,
    pub fun: DenFn,
    pub bottom: bool,
}

impl Piece {
    fn bottom(ty: Type) -> Piece {
        Piece { ty, fun: Arc::new(|_| Comp::bottom()), bottom: true }
    }
}

type Scope = Vec<(Name, Type)>;

fn lookup<'a>(scope: &'a Scope, x: &str) -> &'a Type {
    &scope.iter().rev().find(|(y, _)| y == x).unwrap_or_else(|| panic!("unbound `{x}` after type checking")).1
}

fn with<T>(scope: &mut Scope, binds: &[(&Name, &Type)], f: impl FnOnce(&mut Scope) -> T) -> T {
    for (x, ty) in binds {
        scope.push(((*x).clone(), (*ty).clone()));
    }
    let r = f(scope);
    scope.truncate(scope.len() - binds.len());
    r
}

/// The `n`-th Kleene approximant of `rec z. body` at fuel `n`: every
/// unfolding costs one step and rebinds `z` to a thunk of the next one.
pub(crate) fn fix_comp(body: DenFn, z: Name, env: SemEnv) -> Comp {
    Comp::step(move || {
        let again = fix_comp(body.clone(), z.clone(), env.clone());
        body(&env.extend(z.clone(), SemVal::Thunk(again)))
    })
}

fn expect_fun(v: SemVal) -> SemFun {
    match v {
        SemVal::Fun(f) => f,
        other => panic!("expected a function after type checking, got {other}"),
    }
}

pub(crate) struct Compiler {
    pub calc: Calculus,
    pub lambdas: Lambdas,
}

impl Compiler {
    pub fn denote(&self, ctx: &Context, m: &Term) -> Result<Denotation, DenoteError> {
        let (ty, _) = typecheck(self.calc, ctx, m)?;
        let mut scope: Scope = ctx.entries().to_vec();
        let piece = self.compile(m, &mut scope);
        debug_assert_eq!(piece.ty, ty);
        Ok(Denotation { ctx: ctx.clone(), ty, fun: piece.fun, known_bottom: piece.bottom })
    }

    fn strict(&self) -> bool {
        matches!(self.lambdas, Lambdas::Strict { .. })
    }

    pub fn compile(&self, m: &Term, scope: &mut Scope) -> Piece {
        match m {
            Term::Var(x) => {
                let x = x.clone();
                let ty = lookup(scope, &x).clone();
                Piece {
                    ty,
                    fun: Arc::new(move |env| Comp::ret(env.lookup(&x).expect("environment covers context").clone())),
                    bottom: false,
                }
            }
            Term::Star => Piece { ty: Type::Unit, fun: Arc::new(|_| Comp::ret(SemVal::Unit)), bottom: false },
            Term::Seq(a, b) => {
                let (pa, pb) = (self.compile(a, scope), self.compile(b, scope));
                if self.strict() && (pa.bottom || pb.bottom) {
                    return Piece::bottom(pb.ty);
                }
                let (fa, fb) = (pa.fun, pb.fun);
                Piece {
                    ty: pb.ty,
                    fun: Arc::new(move |env| {
                        let (fb, e) = (fb.clone(), env.clone());
                        Comp::step_then(fa(env).bind(move |_| fb(&e)))
                    }),
                    bottom: false,
                }
            }
            Term::Left(ta, tb, a) | Term::Right(ta, tb, a) => {
                let left = matches!(m, Term::Left(..));
                let pa = self.compile(a, scope);
                let ty = Type::sum(ta.clone(), tb.clone());
                if self.strict() && pa.bottom {
                    return Piece::bottom(ty);
                }
                let fa = pa.fun;
                let inject = if left { SemVal::inl } else { SemVal::inr };
                Piece { ty, fun: Arc::new(move |env| fa(env).map(inject)), bottom: false }
            }
            Term::Case { scrutinee, left_name, left_body, right_name, right_body } => {
                let ps = self.compile(scrutinee, scope);
                let Type::Sum(ta, tb) = &ps.ty else { panic!("case on non-sum after type checking") };
                let (ta, tb) = ((**ta).clone(), (**tb).clone());
                let pl = with(scope, &[(left_name, &ta)], |s| self.compile(left_body, s));
                let pr = with(scope, &[(right_name, &tb)], |s| self.compile(right_body, s));
                if self.strict() && (ps.bottom || (pl.bottom && pr.bottom)) {
                    return Piece::bottom(pl.ty);
                }
                let (fs, fl, fr) = (ps.fun, pl.fun, pr.fun);
                let (ln, rn) = (left_name.clone(), right_name.clone());
                Piece {
                    ty: pl.ty,
                    fun: Arc::new(move |env| {
                        let (fl, fr, ln, rn, e) = (fl.clone(), fr.clone(), ln.clone(), rn.clone(), env.clone());
                        Comp::step_then(fs(env).bind(move |v| match v {
                            SemVal::Inl(x) => fl(&e.extend(ln.clone(), (*x).clone())),
                            SemVal::Inr(y) => fr(&e.extend(rn.clone(), (*y).clone())),
                            other => panic!("case on {other} after type checking"),
                        }))
                    }),
                    bottom: false,
                }
            }
            Term::Pair(a, b) => {
                let (pa, pb) = (self.compile(a, scope), self.compile(b, scope));
                let ty = Type::tensor(pa.ty, pb.ty);
                if self.strict() && (pa.bottom || pb.bottom) {
                    return Piece::bottom(ty);
                }
                let (fa, fb) = (pa.fun, pb.fun);
                Piece {
                    ty,
                    fun: Arc::new(move |env| {
                        let (fb, e) = (fb.clone(), env.clone());
                        fa(env).bind(move |x| fb(&e).map(move |y| SemVal::pair(x.clone(), y)))
                    }),
                    bottom: false,
                }
            }
            Term::LetPair { left_name, right_name, bound, body } => {
                let pm = self.compile(bound, scope);
                let Type::Tensor(ta, tb) = &pm.ty else { panic!("let on non-tensor after type checking") };
                let (ta, tb) = ((**ta).clone(), (**tb).clone());
                let pb = with(scope, &[(left_name, &ta), (right_name, &tb)], |s| self.compile(body, s));
                if self.strict() && (pm.bottom || pb.bottom) {
                    return Piece::bottom(pb.ty);
                }
                let (fm, fb) = (pm.fun, pb.fun);
                let (x, y) = (left_name.clone(), right_name.clone());
                Piece {
                    ty: pb.ty,
                    fun: Arc::new(move |env| {
                        let (fb, x, y, e) = (fb.clone(), x.clone(), y.clone(), env.clone());
                        Comp::step_then(fm(env).bind(move |p| match p {
                            SemVal::Pair(a, b) => fb(&e.extend(x.clone(), (*a).clone()).extend(y.clone(), (*b).clone())),
                            other => panic!("let on {other} after type checking"),
                        }))
                    }),
                    bottom: false,
                }
            }
            Term::Lam(x, ta, body) => {
                let pb = with(scope, &[(x, ta)], |s| self.compile(body, s));
                let ty = Type::lolli(ta.clone(), pb.ty.clone());
                if let Lambdas::Strict { bottom_bound, probes } = self.lambdas {
                    if pb.bottom || self.body_judged_bottom(m, scope, &pb.fun, bottom_bound, probes) {
                        return Piece::bottom(ty);
                    }
                }
                let (fb, x) = (pb.fun, x.clone());
                Piece {
                    ty,
                    fun: Arc::new(move |env| Comp::ret(closure(fb.clone(), x.clone(), env.clone()))),
                    bottom: false,
                }
            }
            Term::App(a, b) => {
                let (pa, pb) = (self.compile(a, scope), self.compile(b, scope));
                let Type::Lolli(_, result) = &pa.ty else { panic!("application of non-function after type checking") };
                let ty = (**result).clone();
                if self.strict() && (pa.bottom || pb.bottom) {
                    return Piece::bottom(ty);
                }
                let (fa, fb) = (pa.fun, pb.fun);
                Piece {
                    ty,
                    fun: Arc::new(move |env| {
                        let (fb, e) = (fb.clone(), env.clone());
                        Comp::step_then(fa(env).bind(move |f| {
                            let f = expect_fun(f);
                            fb(&e).bind(move |v| f.apply(&v))
                        }))
                    }),
                    bottom: false,
                }
            }
            Term::Lift(a) => {
                let pa = self.compile(a, scope);
                let fa = pa.fun;
                Piece {
                    ty: Type::bang(pa.ty),
                    fun: Arc::new(move |env| Comp::ret(SemVal::Thunk(fa(env)))),
                    bottom: false,
                }
            }
            Term::Force(a) => {
                let pa = self.compile(a, scope);
                let Type::Bang(inner) = &pa.ty else { panic!("force of non-bang after type checking") };
                let ty = (**inner).clone();
                if self.strict() && pa.bottom {
                    return Piece::bottom(ty);
                }
                let fa = pa.fun;
                Piece {
                    ty,
                    fun: Arc::new(move |env| {
                        Comp::step_then(fa(env).bind(|t| match t {
                            SemVal::Thunk(c) => c,
                            other => panic!("force of {other} after type checking"),
                        }))
                    }),
                    bottom: false,
                }
            }
            Term::Rec(z, bang_ty, body) => {
                let Type::Bang(inner) = bang_ty else { panic!("rec annotation is not a bang type") };
                let ty = (**inner).clone();
                let pb = with(scope, &[(z, bang_ty)], |s| self.compile(body, s));
                if self.strict() && pb.bottom {
                    return Piece::bottom(ty);
                }
                let (fb, z) = (pb.fun, z.clone());
                Piece { ty, fun: Arc::new(move |env| fix_comp(fb.clone(), z.clone(), env.clone())), bottom: false }
            }
        }
    }

    /// Sweeps the body of abstraction `lam` over probe environments and
    /// arguments. It is judged `⊥` only if no probe converges within the bound.
    fn body_judged_bottom(&self, lam: &Term, scope: &Scope, body: &DenFn, bound: Fuel, probes: usize) -> bool {
        let Term::Lam(x, ta, _) = lam else { unreachable!() };
        let free = lam.free_vars();
        let mut ctx = Context::new();
        for (y, ty) in scope.iter().rev() {
            if free.contains(y) && ctx.lookup(y).is_none() {
                ctx = ctx.extend(y.clone(), ty.clone()).expect("names are distinct");
            }
        }
        let probes = probes.max(1);
        let args = probe_args(ta, probes);
        args.iter().enumerate().all(|(i, arg)| {
            let env = gen_sem_env(&ctx, i as u64, 2).extend(x.clone(), arg.clone());
            matches!(judge_bottom(&body(&env), bound), BottomJudgment::JudgedBottom { .. })
        })
    }
}

/// The curried body as a function value closing over `env`.
pub(crate) fn closure(body: DenFn, x: Name, env: SemEnv) -> SemVal {
    SemVal::Fun(SemFun::new(format!("λ{x}"), move |arg| body(&env.extend(x.clone(), arg.clone()))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_selects_by_name() {
        let reg = BackendRegistry::default();
        assert_eq!(reg.names(), vec!["standard", "naive"]);
        assert!(reg.get("standard").is_some());
        assert!(reg.get("naive").is_some());
        assert!(reg.get("other").is_none());
        let mut reg = reg;
        reg.register(Box::new(Standard));
        assert_eq!(reg.names(), vec!["naive", "standard"]);
    }
}
