//! Types, terms and contexts shared by the linear and affine calculi.
//!
//! The two calculi have the same term language; they only differ in their
//! formation rules (see [`crate::typecheck`]).

mod parse;
mod print;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use parse::{parse_source, parse_term, parse_type, ParseError, Source};

/// Variable and binder names.
pub type Name = String;

/// Types `I | A+B | A*B | A -o B | !A`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Type {
    Unit,
    Sum(Box<Type>, Box<Type>),
    Tensor(Box<Type>, Box<Type>),
    Lolli(Box<Type>, Box<Type>),
    Bang(Box<Type>),
}

impl Type {
    pub fn sum(left: Type, right: Type) -> Type {
        Type::Sum(Box::new(left), Box::new(right))
    }

    pub fn tensor(left: Type, right: Type) -> Type {
        Type::Tensor(Box::new(left), Box::new(right))
    }

    pub fn lolli(arg: Type, result: Type) -> Type {
        Type::Lolli(Box::new(arg), Box::new(result))
    }

    pub fn bang(body: Type) -> Type {
        Type::Bang(Box::new(body))
    }

    /// Membership in the non-linear fragment `P ::= I | P+R | P*R | !A`.
    pub fn is_nonlinear(&self) -> bool {
        match self {
            Type::Unit | Type::Bang(_) => true,
            Type::Sum(a, b) | Type::Tensor(a, b) => a.is_nonlinear() && b.is_nonlinear(),
            Type::Lolli(..) => false,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Type::Unit => 1,
            Type::Bang(a) => 1 + a.depth(),
            Type::Sum(a, b) | Type::Tensor(a, b) | Type::Lolli(a, b) => 1 + a.depth().max(b.depth()),
        }
    }
}

/// Free-function form of [`Type::is_nonlinear`].
pub fn is_nonlinear(ty: &Type) -> bool {
    ty.is_nonlinear()
}

/// Terms. Binders and injections carry their type annotations.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(Name),
    Star,
    Seq(Box<Term>, Box<Term>),
    Left(Type, Type, Box<Term>),
    Right(Type, Type, Box<Term>),
    Case {
        scrutinee: Box<Term>,
        left_name: Name,
        left_body: Box<Term>,
        right_name: Name,
        right_body: Box<Term>,
    },
    Pair(Box<Term>, Box<Term>),
    LetPair {
        left_name: Name,
        right_name: Name,
        bound: Box<Term>,
        body: Box<Term>,
    },
    Lam(Name, Type, Box<Term>),
    App(Box<Term>, Box<Term>),
    Lift(Box<Term>),
    Force(Box<Term>),
    /// `rec z:!A. m`; the annotation is the type of `z`, the result type is `A`.
    Rec(Name, Type, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<Name>) -> Term {
        Term::Var(name.into())
    }

    pub fn seq(m: Term, n: Term) -> Term {
        Term::Seq(Box::new(m), Box::new(n))
    }

    pub fn left(a: Type, b: Type, m: Term) -> Term {
        Term::Left(a, b, Box::new(m))
    }

    pub fn right(a: Type, b: Type, m: Term) -> Term {
        Term::Right(a, b, Box::new(m))
    }

    pub fn case(
        scrutinee: Term,
        left_name: impl Into<Name>,
        left_body: Term,
        right_name: impl Into<Name>,
        right_body: Term,
    ) -> Term {
        Term::Case {
            scrutinee: Box::new(scrutinee),
            left_name: left_name.into(),
            left_body: Box::new(left_body),
            right_name: right_name.into(),
            right_body: Box::new(right_body),
        }
    }

    pub fn pair(m: Term, n: Term) -> Term {
        Term::Pair(Box::new(m), Box::new(n))
    }

    pub fn let_pair(x: impl Into<Name>, y: impl Into<Name>, bound: Term, body: Term) -> Term {
        Term::LetPair {
            left_name: x.into(),
            right_name: y.into(),
            bound: Box::new(bound),
            body: Box::new(body),
        }
    }

    pub fn lam(x: impl Into<Name>, ty: Type, body: Term) -> Term {
        Term::Lam(x.into(), ty, Box::new(body))
    }

    pub fn app(m: Term, n: Term) -> Term {
        Term::App(Box::new(m), Box::new(n))
    }

    pub fn lift(m: Term) -> Term {
        Term::Lift(Box::new(m))
    }

    pub fn force(m: Term) -> Term {
        Term::Force(Box::new(m))
    }

    pub fn rec(z: impl Into<Name>, bang_ty: Type, body: Term) -> Term {
        Term::Rec(z.into(), bang_ty, Box::new(body))
    }

    /// Values: variables, star, injections and pairs of values, lambdas, and
    /// `lift m` for any `m`.
    pub fn is_value(&self) -> bool {
        match self {
            Term::Var(_) | Term::Star | Term::Lam(..) | Term::Lift(_) => true,
            Term::Left(_, _, m) | Term::Right(_, _, m) => m.is_value(),
            Term::Pair(m, n) => m.is_value() && n.is_value(),
            _ => false,
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().map(Term::size).sum::<usize>()
    }

    pub fn depth(&self) -> usize {
        1 + self.children().map(Term::depth).max().unwrap_or(0)
    }

    /// Immediate subterms, left to right.
    pub fn children(&self) -> impl Iterator<Item = &Term> {
        let kids: Vec<&Term> = match self {
            Term::Var(_) | Term::Star => vec![],
            Term::Left(_, _, m)
            | Term::Right(_, _, m)
            | Term::Lam(_, _, m)
            | Term::Lift(m)
            | Term::Force(m)
            | Term::Rec(_, _, m) => vec![m],
            Term::Seq(m, n) | Term::Pair(m, n) | Term::App(m, n) => vec![m, n],
            Term::Case {
                scrutinee,
                left_body,
                right_body,
                ..
            } => vec![scrutinee, left_body, right_body],
            Term::LetPair { bound, body, .. } => vec![bound, body],
        };
        kids.into_iter()
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut out = BTreeSet::new();
        collect_free(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => y == x,
            Term::Star => false,
            Term::Seq(m, n) | Term::Pair(m, n) | Term::App(m, n) => m.has_free(x) || n.has_free(x),
            Term::Left(_, _, m) | Term::Right(_, _, m) | Term::Lift(m) | Term::Force(m) => {
                m.has_free(x)
            }
            Term::Case {
                scrutinee,
                left_name,
                left_body,
                right_name,
                right_body,
            } => {
                scrutinee.has_free(x)
                    || (left_name != x && left_body.has_free(x))
                    || (right_name != x && right_body.has_free(x))
            }
            Term::LetPair {
                left_name,
                right_name,
                bound,
                body,
            } => bound.has_free(x) || (left_name != x && right_name != x && body.has_free(x)),
            Term::Lam(y, _, m) | Term::Rec(y, _, m) => y != x && m.has_free(x),
        }
    }

    /// Short constructor name, used for rule coverage and error reports.
    pub fn rule_name(&self) -> &'static str {
        match self {
            Term::Var(_) => "var",
            Term::Star => "star",
            Term::Seq(..) => "seq",
            Term::Left(..) => "left",
            Term::Right(..) => "right",
            Term::Case { .. } => "case",
            Term::Pair(..) => "pair",
            Term::LetPair { .. } => "let-pair",
            Term::Lam(..) => "lam",
            Term::App(..) => "app",
            Term::Lift(_) => "lift",
            Term::Force(_) => "force",
            Term::Rec(..) => "rec",
        }
    }
}

/// Free-function form of [`Term::is_value`].
pub fn is_value(m: &Term) -> bool {
    m.is_value()
}

/// Free-function form of [`Term::free_vars`].
pub fn free_vars(m: &Term) -> BTreeSet<Name> {
    m.free_vars()
}

fn collect_free(m: &Term, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
    let under = |bound: &mut Vec<Name>, names: &[&Name], body: &Term, out: &mut BTreeSet<Name>| {
        let before = bound.len();
        bound.extend(names.iter().map(|n| (*n).clone()));
        collect_free(body, bound, out);
        bound.truncate(before);
    };
    match m {
        Term::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        Term::Star => {}
        Term::Seq(a, b) | Term::Pair(a, b) | Term::App(a, b) => {
            collect_free(a, bound, out);
            collect_free(b, bound, out);
        }
        Term::Left(_, _, a) | Term::Right(_, _, a) | Term::Lift(a) | Term::Force(a) => {
            collect_free(a, bound, out)
        }
        Term::Case {
            scrutinee,
            left_name,
            left_body,
            right_name,
            right_body,
        } => {
            collect_free(scrutinee, bound, out);
            under(bound, &[left_name], left_body, out);
            under(bound, &[right_name], right_body, out);
        }
        Term::LetPair {
            left_name,
            right_name,
            bound: m,
            body,
        } => {
            collect_free(m, bound, out);
            under(bound, &[left_name, right_name], body, out);
        }
        Term::Lam(x, _, body) | Term::Rec(x, _, body) => under(bound, &[x], body, out),
    }
}

/// Capture-avoiding substitution `m[v/x]`.
///
/// `v` must be a value; evaluation only ever substitutes values.
pub fn subst(m: &Term, v: &Term, x: &str) -> Term {
    assert!(v.is_value(), "subst: substituted term must be a value");
    subst_many(m, &[(x.to_string(), v.clone())])
}

/// Simultaneous substitution `m[v1/x1, ..., vk/xk]`. When a name occurs
/// twice the later entry wins, matching the shadowing of a repeated binder.
pub fn subst_many(m: &Term, pairs: &[(Name, Term)]) -> Term {
    assert!(
        pairs.iter().all(|(_, v)| v.is_value()),
        "subst: substituted terms must be values"
    );
    let mut map: Vec<(Name, Term)> = Vec::new();
    for (x, v) in pairs {
        map.retain(|(y, _)| y != x);
        map.push((x.clone(), v.clone()));
    }
    let mut avoid = BTreeSet::new();
    for (_, v) in &map {
        avoid.extend(v.free_vars());
    }
    Substituter { avoid }.go(m, &map)
}

struct Substituter {
    /// Free variables of the substituted values; binders must not capture them.
    avoid: BTreeSet<Name>,
}

impl Substituter {
    fn go(&self, m: &Term, map: &[(Name, Term)]) -> Term {
        if map.is_empty() {
            return m.clone();
        }
        match m {
            Term::Var(x) => match map.iter().find(|(y, _)| y == x) {
                Some((_, v)) => v.clone(),
                None => m.clone(),
            },
            Term::Star => Term::Star,
            Term::Seq(a, b) => Term::seq(self.go(a, map), self.go(b, map)),
            Term::Pair(a, b) => Term::pair(self.go(a, map), self.go(b, map)),
            Term::App(a, b) => Term::app(self.go(a, map), self.go(b, map)),
            Term::Left(ta, tb, a) => Term::left(ta.clone(), tb.clone(), self.go(a, map)),
            Term::Right(ta, tb, a) => Term::right(ta.clone(), tb.clone(), self.go(a, map)),
            Term::Lift(a) => Term::lift(self.go(a, map)),
            Term::Force(a) => Term::force(self.go(a, map)),
            Term::Case {
                scrutinee,
                left_name,
                left_body,
                right_name,
                right_body,
            } => {
                let (x, n) = self.under(&[left_name], left_body, map);
                let (y, p) = self.under(&[right_name], right_body, map);
                Term::Case {
                    scrutinee: Box::new(self.go(scrutinee, map)),
                    left_name: x[0].clone(),
                    left_body: Box::new(n),
                    right_name: y[0].clone(),
                    right_body: Box::new(p),
                }
            }
            Term::LetPair {
                left_name,
                right_name,
                bound,
                body,
            } => {
                let (names, n) = self.under(&[left_name, right_name], body, map);
                Term::LetPair {
                    left_name: names[0].clone(),
                    right_name: names[1].clone(),
                    bound: Box::new(self.go(bound, map)),
                    body: Box::new(n),
                }
            }
            Term::Lam(x, ty, body) => {
                let (names, b) = self.under(&[x], body, map);
                Term::Lam(names[0].clone(), ty.clone(), Box::new(b))
            }
            Term::Rec(z, ty, body) => {
                let (names, b) = self.under(&[z], body, map);
                Term::Rec(names[0].clone(), ty.clone(), Box::new(b))
            }
        }
    }

    /// Pushes the substitution under `binders`, renaming any binder that
    /// would capture a free variable of a substituted value.
    fn under(&self, binders: &[&Name], body: &Term, map: &[(Name, Term)]) -> (Vec<Name>, Term) {
        let inner: Vec<(Name, Term)> = map
            .iter()
            .filter(|(y, _)| !binders.contains(&y))
            .filter(|(y, _)| body.has_free(y))
            .cloned()
            .collect();
        if inner.is_empty() {
            return (binders.iter().map(|b| (*b).clone()).collect(), body.clone());
        }
        let mut renames: Vec<(Name, Term)> = Vec::new();
        let mut names = Vec::with_capacity(binders.len());
        let mut taken: BTreeSet<Name> = body.free_vars();
        taken.extend(self.avoid.iter().cloned());
        taken.extend(binders.iter().map(|b| (*b).clone()));
        for (i, b) in binders.iter().enumerate() {
            // A repeated binder is shadowed by the later one; leave it alone.
            let shadowed = binders[i + 1..].contains(b);
            if self.avoid.contains(*b) && !shadowed {
                let fresh = fresh_name(b, &taken);
                taken.insert(fresh.clone());
                renames.push(((*b).clone(), Term::Var(fresh.clone())));
                names.push(fresh);
            } else {
                names.push((*b).clone());
            }
        }
        let body = if renames.is_empty() {
            body.clone()
        } else {
            Substituter { avoid: BTreeSet::new() }.go(body, &renames)
        };
        (names, self.go(&body, &inner))
    }
}

/// Deterministic fresh name derived from `base`: the first `base_k` not in `taken`.
pub fn fresh_name(base: &str, taken: &BTreeSet<Name>) -> Name {
    let stem = match base.rfind('_') {
        Some(i) if base[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < base.len() => &base[..i],
        _ => base,
    };
    (1..)
        .map(|k| format!("{stem}_{k}"))
        .find(|cand| !taken.contains(cand))
        .expect("infinite supply")
}

/// Typing contexts: ordered `(name, type)` entries with distinct names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Context(Vec<(Name, Type)>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("duplicate context entry `{0}`")]
pub struct DuplicateName(pub Name);

impl Context {
    pub fn new() -> Self {
        Context(Vec::new())
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (Name, Type)>) -> Result<Self, DuplicateName> {
        let mut ctx = Context::new();
        for (x, ty) in entries {
            ctx = ctx.extend(x, ty)?;
        }
        Ok(ctx)
    }

    pub fn extend(mut self, x: impl Into<Name>, ty: Type) -> Result<Self, DuplicateName> {
        let x = x.into();
        if self.lookup(&x).is_some() {
            return Err(DuplicateName(x));
        }
        self.0.push((x, ty));
        Ok(self)
    }

    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.0.iter().find(|(y, _)| y == x).map(|(_, t)| t)
    }

    pub fn entries(&self) -> &[(Name, Type)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_nonlinear(&self) -> bool {
        self.0.iter().all(|(_, t)| t.is_nonlinear())
    }

    /// The non-linear part `Φ` of the context.
    pub fn nonlinear_part(&self) -> Context {
        Context(self.0.iter().filter(|(_, t)| t.is_nonlinear()).cloned().collect())
    }

    /// `I` for the empty context, otherwise the right-nested tensor of the entries.
    pub fn as_tensor(&self) -> Type {
        let mut it = self.0.iter().rev();
        match it.next() {
            None => Type::Unit,
            Some((_, last)) => it.fold(last.clone(), |acc, (_, t)| Type::tensor(t.clone(), acc)),
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, t)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}:{t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lolli_ii() -> Type {
        Type::lolli(Type::Unit, Type::Unit)
    }

    #[test]
    fn nonlinear_examples() {
        assert!(Type::Unit.is_nonlinear());
        assert!(!lolli_ii().is_nonlinear());
        assert!(Type::bang(lolli_ii()).is_nonlinear());
        assert!(!Type::tensor(Type::Unit, lolli_ii()).is_nonlinear());
        assert!(Type::sum(Type::Unit, Type::bang(lolli_ii())).is_nonlinear());
    }

    #[test]
    fn value_examples() {
        let p = Term::rec("z", Type::bang(Type::Unit), Term::force(Term::var("z")));
        assert!(Term::lift(p).is_value());
        assert!(!Term::force(Term::lift(Term::Star)).is_value());
        assert!(Term::pair(Term::Star, Term::left(Type::Unit, Type::Unit, Term::Star)).is_value());
        assert!(!Term::pair(Term::Star, Term::app(Term::var("f"), Term::Star)).is_value());
    }

    #[test]
    fn free_var_examples() {
        assert_eq!(Term::var("x").free_vars(), BTreeSet::from(["x".to_string()]));
        assert!(Term::lam("x", Type::Unit, Term::var("x")).free_vars().is_empty());
        assert_eq!(
            Term::app(Term::var("f"), Term::var("x")).free_vars(),
            BTreeSet::from(["f".to_string(), "x".to_string()])
        );
    }

    #[test]
    fn subst_examples() {
        assert_eq!(subst(&Term::var("x"), &Term::Star, "x"), Term::Star);
        let id = Term::lam("x", Type::Unit, Term::var("x"));
        assert_eq!(subst(&id, &Term::Star, "x"), id);

        let p = Term::rec("z", Type::bang(Type::Unit), Term::force(Term::var("z")));
        let unfolded = subst(&Term::force(Term::var("z")), &Term::lift(p.clone()), "z");
        assert_eq!(unfolded, Term::force(Term::lift(p)));
    }

    #[test]
    fn subst_avoids_capture() {
        // (\y:I. x)[y/x] must not capture y.
        let m = Term::lam("y", Type::Unit, Term::var("x"));
        let out = subst(&m, &Term::var("y"), "x");
        match &out {
            Term::Lam(b, _, body) => {
                assert_ne!(b, "y");
                assert_eq!(**body, Term::var("y"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(out.free_vars(), BTreeSet::from(["y".to_string()]));
    }

    #[test]
    fn simultaneous_subst_later_wins() {
        let m = Term::pair(Term::var("x"), Term::var("y"));
        let out = subst_many(
            &m,
            &[("x".into(), Term::Star), ("y".into(), Term::lift(Term::Star))],
        );
        assert_eq!(out, Term::pair(Term::Star, Term::lift(Term::Star)));
        let dup = subst_many(&Term::var("x"), &[("x".into(), Term::Star), ("x".into(), Term::lift(Term::Star))]);
        assert_eq!(dup, Term::lift(Term::Star));
    }

    #[test]
    fn fresh_names_are_deterministic() {
        let taken = BTreeSet::from(["x_1".to_string(), "x".to_string()]);
        assert_eq!(fresh_name("x", &taken), "x_2");
        assert_eq!(fresh_name("x_1", &taken), "x_2");
    }

    #[test]
    fn context_rejects_duplicates() {
        let ctx = Context::new().extend("x", Type::Unit).unwrap();
        assert_eq!(ctx.extend("x", Type::Unit), Err(DuplicateName("x".into())));
    }
}
