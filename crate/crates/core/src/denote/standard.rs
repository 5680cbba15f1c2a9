//! The interpretation in the adequate cpo model: abstractions are values,
//! `rec` is the least fixed point computed by fuel-indexed approximants.

use std::sync::Arc;

use super::{closure, fix_comp, Backend, Compiler, Denotation, DenoteError, Lambdas, ValFn, ValueDenotation};
use crate::domains::{copy, SemEnv, SemVal};
use crate::syntax::{Context, Name, Term, Type};
use crate::typecheck::{typecheck, Calculus};

pub struct Standard;

impl Backend for Standard {
    fn name(&self) -> &'static str {
        "standard"
    }

    fn summary(&self) -> &'static str {
        "lifted-cpo model; abstractions are values, recursion by least fixed point"
    }

    fn denote(&self, calc: Calculus, ctx: &Context, m: &Term) -> Result<Denotation, DenoteError> {
        denote(calc, ctx, m)
    }
}

fn compiler(calc: Calculus) -> Compiler {
    Compiler { calc, lambdas: Lambdas::Curried }
}

pub fn denote(calc: Calculus, ctx: &Context, m: &Term) -> Result<Denotation, DenoteError> {
    compiler(calc).denote(ctx, m)
}

/// The value-level interpretation: a total map into values, with no fuel.
/// Only the bodies of abstractions and `lift` go through [`denote`].
pub fn denote_value_v(calc: Calculus, ctx: &Context, v: &Term) -> Result<ValueDenotation, DenoteError> {
    if !v.is_value() {
        return Err(DenoteError::Contract(format!("`{v}` is not a value")));
    }
    let (ty, _) = typecheck(calc, ctx, v)?;
    let mut scope = ctx.entries().to_vec();
    let fun = value_v(&compiler(calc), v, &mut scope);
    Ok(ValueDenotation { ctx: ctx.clone(), ty, fun })
}

fn value_v(c: &Compiler, v: &Term, scope: &mut Vec<(Name, Type)>) -> ValFn {
    match v {
        Term::Var(x) => {
            let x = x.clone();
            Arc::new(move |env| env.lookup(&x).expect("environment covers context").clone())
        }
        Term::Star => Arc::new(|_| SemVal::Unit),
        Term::Left(_, _, a) => {
            let fa = value_v(c, a, scope);
            Arc::new(move |env| SemVal::inl(fa(env)))
        }
        Term::Right(_, _, a) => {
            let fa = value_v(c, a, scope);
            Arc::new(move |env| SemVal::inr(fa(env)))
        }
        Term::Pair(a, b) => {
            let (fa, fb) = (value_v(c, a, scope), value_v(c, b, scope));
            Arc::new(move |env| SemVal::pair(fa(env), fb(env)))
        }
        Term::Lam(x, ta, body) => {
            scope.push((x.clone(), ta.clone()));
            let fb = c.compile(body, scope).fun;
            scope.pop();
            let x = x.clone();
            Arc::new(move |env| closure(fb.clone(), x.clone(), env.clone()))
        }
        Term::Lift(m) => {
            let fm = c.compile(m, scope).fun;
            Arc::new(move |env| SemVal::Thunk(fm(env)))
        }
        other => unreachable!("`{other}` is not a value"),
    }
}

/// The base-level interpretation of a non-linear value in a non-linear
/// context, built on context tuples: `*` discards, pairing copies the
/// context, variables project, and `lift m` promotes the suspended body.
pub fn denote_value_b(calc: Calculus, ctx: &Context, v: &Term) -> Result<ValueDenotation, DenoteError> {
    if !ctx.is_nonlinear() {
        return Err(DenoteError::Contract(format!("context `{ctx}` is not non-linear")));
    }
    if !v.is_value() {
        return Err(DenoteError::Contract(format!("`{v}` is not a value")));
    }
    let (ty, _) = typecheck(calc, ctx, v)?;
    if !ty.is_nonlinear() {
        return Err(DenoteError::Contract(format!("type `{ty}` is not non-linear")));
    }
    let on_tuple = value_b(&compiler(calc), ctx, v);
    let phi = ctx.clone();
    let fun: ValFn = Arc::new(move |env| on_tuple(&env.to_tuple(&phi)));
    Ok(ValueDenotation { ctx: ctx.clone(), ty, fun })
}

type TupleFn = Arc<dyn Fn(&SemVal) -> SemVal + Send + Sync>;

fn value_b(c: &Compiler, ctx: &Context, v: &Term) -> TupleFn {
    match v {
        Term::Var(x) => {
            let n = ctx.len();
            let i = ctx.entries().iter().position(|(y, _)| y == x).expect("variable in context");
            Arc::new(move |t| project(t, i, n))
        }
        Term::Star => Arc::new(|_| SemVal::Unit),
        Term::Left(_, _, a) => {
            let fa = value_b(c, ctx, a);
            Arc::new(move |t| SemVal::inl(fa(t)))
        }
        Term::Right(_, _, a) => {
            let fa = value_b(c, ctx, a);
            Arc::new(move |t| SemVal::inr(fa(t)))
        }
        Term::Pair(a, b) => {
            let (fa, fb) = (value_b(c, ctx, a), value_b(c, ctx, b));
            let phi = ctx.as_tensor();
            Arc::new(move |t| match copy(&phi, t).expect("context is non-linear") {
                SemVal::Pair(t1, t2) => SemVal::pair(fa(&t1), fb(&t2)),
                _ => unreachable!(),
            })
        }
        Term::Lift(m) => {
            let mut scope = ctx.entries().to_vec();
            let fm = c.compile(m, &mut scope).fun;
            let ctx = ctx.clone();
            Arc::new(move |t| SemVal::Thunk(fm(&SemEnv::from_tuple(&ctx, t))))
        }
        other => unreachable!("`{other}` is not a non-linear value"),
    }
}

fn project(t: &SemVal, i: usize, n: usize) -> SemVal {
    let mut cur = t;
    for _ in 0..i {
        let SemVal::Pair(_, rest) = cur else { unreachable!("tuple shorter than context") };
        cur = rest;
    }
    match cur {
        SemVal::Pair(head, _) if i + 1 < n => (**head).clone(),
        _ => cur.clone(),
    }
}

/// `⟦Φ ⊢ rec z. m⟧` from `body = ⟦Φ, z:!A ⊢ m : A⟧`: on fuel `n` it computes
/// the `n`-th approximant, starting from `⊥`.
pub fn fix_denote(ctx: &Context, z: &str, ty: &Type, body: &Denotation) -> Result<Denotation, DenoteError> {
    if !ctx.is_nonlinear() {
        return Err(DenoteError::Contract(format!("context `{ctx}` is not non-linear")));
    }
    if body.ty() != ty || body.ctx().lookup(z) != Some(&Type::bang(ty.clone())) {
        return Err(DenoteError::Contract(format!("body is not a denotation of `{ctx}, {z}:!{ty} ⊢ _ : {ty}`")));
    }
    let (fb, z) = (body.fun.clone(), z.to_string());
    Ok(Denotation {
        ctx: ctx.clone(),
        ty: ty.clone(),
        fun: Arc::new(move |env| fix_comp(fb.clone(), z.clone(), env.clone())),
        known_bottom: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{sem_equal, Comp, EqVerdict};
    use crate::syntax::parse_term;
    use crate::{eval, Fuel};

    const P: &str = "rec z:!I. force z";
    const T: &str = r"(\y:(I -o I). *) (\x:I. rec z:!I. force z)";

    fn closed(calc: Calculus, src: &str) -> Denotation {
        denote(calc, &Context::new(), &parse_term(src).unwrap()).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert!(matches!(closed(Calculus::Affine, "*").closed().run(Fuel(1)), Some(SemVal::Unit)));
        assert!(closed(Calculus::Affine, P).closed().run(Fuel(1_000_000)).is_none());
        assert!(matches!(closed(Calculus::Affine, T).closed().run(Fuel(10_000)), Some(SemVal::Unit)));
        let id = closed(Calculus::Linear, r"\x:I. x").closed().run(Fuel(0)).unwrap();
        let SemVal::Fun(f) = id else { panic!() };
        assert!(matches!(f.apply(&SemVal::Unit).run(Fuel(10)), Some(SemVal::Unit)));
        assert!(eval(&parse_term(r"(\x:I. x) *").unwrap(), Fuel(10)).converged());
    }

    #[test]
    fn ill_typed_is_rejected() {
        assert!(denote(Calculus::Linear, &Context::new(), &parse_term(T).unwrap()).is_err());
        assert!(denote(Calculus::Linear, &Context::new(), &parse_term("force *").unwrap()).is_err());
    }

    #[test]
    fn value_interpretations() {
        let empty = Context::new();
        let lift_p = denote_value_v(Calculus::Affine, &empty, &parse_term(&format!("lift ({P})")).unwrap()).unwrap();
        let SemVal::Thunk(c) = lift_p.fun(&SemEnv::new()) else { panic!() };
        assert!(c.run(Fuel(10_000)).is_none());

        let pair = denote_value_v(Calculus::Linear, &empty, &parse_term("<*, *>").unwrap()).unwrap();
        assert_eq!(pair.fun(&SemEnv::new()).to_string(), "<*, *>");

        let lam = denote_value_v(Calculus::Affine, &empty, &parse_term(&format!(r"\x:I. {P}")).unwrap()).unwrap();
        let SemVal::Fun(f) = lam.fun(&SemEnv::new()) else { panic!() };
        assert!(f.apply(&SemVal::Unit).run(Fuel(10_000)).is_none());

        assert!(denote_value_v(Calculus::Affine, &empty, &parse_term("* ; *").unwrap()).is_err());
    }

    #[test]
    fn base_value_interpretations() {
        let empty = Context::new();
        let star = denote_value_b(Calculus::Linear, &empty, &Term::Star).unwrap();
        assert!(matches!(star.fun(&SemEnv::new()), SemVal::Unit));
        let v = denote_value_b(Calculus::Linear, &empty, &parse_term("<*, lift *>").unwrap()).unwrap();
        let SemVal::Pair(a, b) = v.fun(&SemEnv::new()) else { panic!() };
        assert!(matches!(*a, SemVal::Unit));
        let SemVal::Thunk(c) = &*b else { panic!() };
        assert!(matches!(c.run(Fuel(0)), Some(SemVal::Unit)));

        let ctx = Context::from_entries([("u".into(), Type::bang(Type::Unit)), ("w".into(), Type::Unit)]).unwrap();
        let env = SemEnv::new().extend("u", SemVal::Thunk(Comp::ret(SemVal::Unit))).extend("w", SemVal::Unit);
        let v = denote_value_b(Calculus::Linear, &ctx, &parse_term("<w, lift force u>").unwrap()).unwrap();
        let SemVal::Pair(_, t) = v.fun(&env) else { panic!() };
        let SemVal::Thunk(c) = &*t else { panic!() };
        assert!(matches!(c.run(Fuel(5)), Some(SemVal::Unit)));

        let lin = Context::from_entries([("f".into(), Type::lolli(Type::Unit, Type::Unit))]).unwrap();
        assert!(denote_value_b(Calculus::Linear, &lin, &parse_term("f").unwrap()).is_err());
        assert!(denote_value_b(Calculus::Linear, &empty, &parse_term(r"\x:I. x").unwrap()).is_err());
    }

    #[test]
    fn value_routes_agree_with_denote() {
        for src in ["<*, lift *>", "left[I, !I] *", r"\x:I + I. x", "lift (rec z:!I. force z)"] {
            let v = parse_term(src).unwrap();
            let empty = Context::new();
            let d = denote(Calculus::Linear, &empty, &v).unwrap();
            let vv = denote_value_v(Calculus::Linear, &empty, &v).unwrap();
            let env = SemEnv::new();
            let verdict = sem_equal(d.ty(), &d.fun(&env), &vv.returned(&env), Fuel(100), 4);
            assert!(!verdict.is_differ(), "{src}: {verdict:?}");
            if d.ty().is_nonlinear() {
                let vb = denote_value_b(Calculus::Linear, &empty, &v).unwrap();
                assert!(!sem_equal(d.ty(), &d.fun(&env), &vb.returned(&env), Fuel(100), 4).is_differ());
            }
        }
    }

    fn fix_of(body_src: &str, ty: Type) -> Denotation {
        let ctx = Context::new().extend("z", Type::bang(ty.clone())).unwrap();
        let body = denote(Calculus::Linear, &ctx, &parse_term(body_src).unwrap()).unwrap();
        fix_denote(&Context::new(), "z", &ty, &body).unwrap()
    }

    #[test]
    fn fixpoints() {
        assert!(fix_of("force z", Type::Unit).closed().run(Fuel(100_000)).is_none());
        let constant = fix_of("*", Type::Unit).closed();
        assert!(constant.run(Fuel(0)).is_none());
        assert!(matches!(constant.run(Fuel(1)), Some(SemVal::Unit)));

        let ii = Type::sum(Type::Unit, Type::Unit);
        let countdown = r"\n:I + I. case n of {left u -> u | right v -> force z (left[I, I] v)}";
        let f = fix_of(countdown, Type::lolli(ii.clone(), Type::Unit)).closed().run(Fuel(10)).unwrap();
        let SemVal::Fun(f) = f else { panic!() };
        assert!(matches!(f.apply(&SemVal::inr(SemVal::Unit)).run(Fuel(100)), Some(SemVal::Unit)));
        let whole = parse_term(&format!("(rec z:!(I + I -o I). {countdown}) (right[I, I] *)")).unwrap();
        assert_eq!(eval(&whole, Fuel(100)).value(), Some(&Term::Star));
        let d = denote(Calculus::Linear, &Context::new(), &whole).unwrap();
        assert!(matches!(
            sem_equal(&Type::Unit, &d.closed(), &Comp::ret(SemVal::Unit), Fuel(100), 0),
            EqVerdict::Equal
        ));

        let lin = Context::new().extend("f", Type::lolli(Type::Unit, Type::Unit)).unwrap();
        let body = denote(Calculus::Linear, &Context::new().extend("z", Type::bang(Type::Unit)).unwrap(), &Term::Star);
        assert!(fix_denote(&lin, "z", &Type::Unit, &body.unwrap()).is_err());
    }
}
