//! Algorithmic type checking for the linear and affine calculi.
//!
//! Context splitting `Φ, Γ, Σ` with `Γ ∩ Σ = ∅` is replaced by usage
//! accounting: each subterm reports the linear variables it consumes, and
//! multi-premise rules demand those reports be disjoint. Non-linear variables
//! are shared freely and never appear in a report.
//!
//! In the affine calculus a linear variable may be dropped, but only where a
//! leaf rule with an arbitrary context (`var`, `star`, `lift`) can absorb it.
//! `rec` only admits a non-linear context in both calculi, so the checker
//! tracks for every subterm whether its derivation has such a leaf.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::syntax::{Context, Name, Term, Type};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calculus {
    Linear,
    Affine,
}

impl Calculus {
    pub const ALL: [Calculus; 2] = [Calculus::Linear, Calculus::Affine];
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Calculus::Linear => "linear",
            Calculus::Affine => "affine",
        })
    }
}

impl FromStr for Calculus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Calculus::Linear),
            "affine" => Ok(Calculus::Affine),
            other => Err(format!("unknown calculus `{other}` (expected linear or affine)")),
        }
    }
}

/// The linear-typed context variables consumed by a checked term.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct UsageReport {
    pub consumed: BTreeSet<Name>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum TypeErrorKind {
    UnboundVariable,
    TypeMismatch,
    LinearVarDuplicated,
    LinearVarDiscarded,
    LinearVarInLift,
    LinearVarInRec,
    BranchUsageMismatch,
    NotAFunction,
    NotABang,
    NotASum,
    NotATensor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
#[error("{kind:?} at `{location}` [{rule}]: {details}")]
pub struct TypeError {
    pub kind: TypeErrorKind,
    /// The formation rule whose premise failed.
    pub rule: String,
    /// The offending subterm, printed.
    pub location: String,
    pub details: String,
}

fn excerpt(m: &Term) -> String {
    let s = m.to_string();
    if s.chars().count() > 80 {
        let cut: String = s.chars().take(77).collect();
        format!("{cut}...")
    } else {
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Barrier {
    Lift,
    Rec,
}

struct Entry {
    name: Name,
    ty: Type,
}

struct Judgment {
    ty: Type,
    /// Scope levels of the linear variables consumed.
    used: BTreeSet<usize>,
    /// Whether the derivation can absorb extra (unused) linear variables.
    absorbs: bool,
}

struct Checker {
    calc: Calculus,
    scope: Vec<Entry>,
    barriers: Vec<(usize, Barrier)>,
}

impl Checker {
    fn err(&self, kind: TypeErrorKind, rule: &str, m: &Term, details: String) -> TypeError {
        TypeError {
            kind,
            rule: format!("{rule} ({})", self.calc),
            location: excerpt(m),
            details,
        }
    }

    fn rule_for_leaf(&self, leaf: &str) -> String {
        match self.calc {
            Calculus::Linear => format!("{leaf}: context must be non-linear apart from the subject"),
            Calculus::Affine => format!("{leaf}: arbitrary context"),
        }
    }

    fn disjoint(&self, m: &Term, rule: &str, a: &BTreeSet<usize>, b: &BTreeSet<usize>) -> Result<(), TypeError> {
        if let Some(l) = a.intersection(b).next() {
            return Err(self.err(
                TypeErrorKind::LinearVarDuplicated,
                rule,
                m,
                format!(
                    "linear variable `{}` : {} is used by two premises (requires Γ ∩ Σ = ∅)",
                    self.scope[*l].name, self.scope[*l].ty
                ),
            ));
        }
        Ok(())
    }

    /// Checks `body` with `binders` pushed, then closes their scope: linear
    /// binders must be consumed (linear) or absorbable (affine).
    fn under(&mut self, rule: &str, m: &Term, binders: &[(&Name, &Type)], body: &Term) -> Result<Judgment, TypeError> {
        let base = self.scope.len();
        for (x, ty) in binders {
            self.scope.push(Entry { name: (*x).clone(), ty: (*ty).clone() });
        }
        let result = self.check(body);
        let mut j = match result {
            Ok(j) => j,
            Err(e) => {
                self.scope.truncate(base);
                return Err(e);
            }
        };
        for (i, (x, ty)) in binders.iter().enumerate() {
            let level = base + i;
            if ty.is_nonlinear() || j.used.contains(&level) {
                continue;
            }
            let shadowed = binders[i + 1..].iter().any(|(y, _)| y == x);
            let ok = self.calc == Calculus::Affine && j.absorbs;
            if !ok {
                self.scope.truncate(base);
                let why = match (self.calc, shadowed) {
                    (_, true) => "it is shadowed by a later binder of the same name".to_string(),
                    (Calculus::Linear, false) => "linear variables must be used exactly once".to_string(),
                    (Calculus::Affine, false) => {
                        "no rule in its scope can discard it (its scope is a rec body)".to_string()
                    }
                };
                return Err(self.err(
                    TypeErrorKind::LinearVarDiscarded,
                    rule,
                    m,
                    format!("linear binder `{x}` : {ty} is never used: {why}"),
                ));
            }
        }
        for i in 0..binders.len() {
            j.used.remove(&(base + i));
        }
        self.scope.truncate(base);
        Ok(j)
    }

    fn check(&mut self, m: &Term) -> Result<Judgment, TypeError> {
        use TypeErrorKind::*;
        let affine = self.calc == Calculus::Affine;
        match m {
            Term::Var(x) => {
                let Some(level) = self.scope.iter().rposition(|e| &e.name == x) else {
                    return Err(self.err(UnboundVariable, "var", m, format!("`{x}` is not in scope")));
                };
                let ty = self.scope[level].ty.clone();
                let mut used = BTreeSet::new();
                if !ty.is_nonlinear() {
                    if let Some(&(at, kind)) = self.barriers.last() {
                        if level < at {
                            let (err_kind, rule) = match kind {
                                Barrier::Lift => (LinearVarInLift, "lift: body must be typed in Φ"),
                                Barrier::Rec => (LinearVarInRec, "rec: Φ, z:!A ⊢ m : A"),
                            };
                            return Err(self.err(
                                err_kind,
                                rule,
                                m,
                                format!("linear variable `{x}` : {ty} referenced inside a {kind:?} body"),
                            ));
                        }
                    }
                    used.insert(level);
                }
                Ok(Judgment { ty, used, absorbs: affine })
            }
            Term::Star => Ok(Judgment { ty: Type::Unit, used: BTreeSet::new(), absorbs: affine }),
            Term::Seq(a, b) => {
                let ja = self.check(a)?;
                if ja.ty != Type::Unit {
                    return Err(self.err(
                        TypeMismatch,
                        "seq: Φ,Γ ⊢ m : I",
                        m,
                        format!("left of `;` has type {}, expected I", ja.ty),
                    ));
                }
                let jb = self.check(b)?;
                self.disjoint(m, "seq", &ja.used, &jb.used)?;
                Ok(Judgment {
                    ty: jb.ty,
                    used: &ja.used | &jb.used,
                    absorbs: ja.absorbs || jb.absorbs,
                })
            }
            Term::Left(ta, tb, a) | Term::Right(ta, tb, a) => {
                let is_left = matches!(m, Term::Left(..));
                let ja = self.check(a)?;
                let want = if is_left { ta } else { tb };
                if &ja.ty != want {
                    return Err(self.err(
                        TypeMismatch,
                        if is_left { "left" } else { "right" },
                        m,
                        format!("injected term has type {}, annotation says {want}", ja.ty),
                    ));
                }
                Ok(Judgment { ty: Type::sum(ta.clone(), tb.clone()), ..ja })
            }
            Term::Case {
                scrutinee,
                left_name,
                left_body,
                right_name,
                right_body,
            } => {
                let js = self.check(scrutinee)?;
                let Type::Sum(ta, tb) = &js.ty else {
                    return Err(self.err(
                        NotASum,
                        "case: Φ,Γ ⊢ m : A+B",
                        m,
                        format!("scrutinee has type {}", js.ty),
                    ));
                };
                let (ta, tb) = ((**ta).clone(), (**tb).clone());
                let jn = self.under("case", m, &[(left_name, &ta)], left_body)?;
                let jp = self.under("case", m, &[(right_name, &tb)], right_body)?;
                if jn.ty != jp.ty {
                    return Err(self.err(
                        TypeMismatch,
                        "case",
                        m,
                        format!("branches have types {} and {}", jn.ty, jp.ty),
                    ));
                }
                if jn.used != jp.used {
                    let only_left: Vec<_> = jn.used.difference(&jp.used).collect();
                    let only_right: Vec<_> = jp.used.difference(&jn.used).collect();
                    let ok = affine
                        && (only_left.is_empty() || jp.absorbs)
                        && (only_right.is_empty() || jn.absorbs);
                    if !ok {
                        let names = |ls: &[&usize]| {
                            ls.iter().map(|l| self.scope[**l].name.clone()).collect::<Vec<_>>().join(", ")
                        };
                        return Err(self.err(
                            BranchUsageMismatch,
                            "case: both branches share Φ, Σ",
                            m,
                            format!(
                                "left branch alone uses [{}], right branch alone uses [{}]",
                                names(&only_left),
                                names(&only_right)
                            ),
                        ));
                    }
                }
                let branches = &jn.used | &jp.used;
                self.disjoint(m, "case", &js.used, &branches)?;
                Ok(Judgment {
                    ty: jn.ty,
                    used: &js.used | &branches,
                    absorbs: js.absorbs || (jn.absorbs && jp.absorbs),
                })
            }
            Term::Pair(a, b) => {
                let ja = self.check(a)?;
                let jb = self.check(b)?;
                self.disjoint(m, "pair", &ja.used, &jb.used)?;
                Ok(Judgment {
                    ty: Type::tensor(ja.ty, jb.ty),
                    used: &ja.used | &jb.used,
                    absorbs: ja.absorbs || jb.absorbs,
                })
            }
            Term::LetPair {
                left_name,
                right_name,
                bound,
                body,
            } => {
                let jm = self.check(bound)?;
                let Type::Tensor(ta, tb) = &jm.ty else {
                    return Err(self.err(
                        NotATensor,
                        "let-pair: Φ,Γ ⊢ m : A⊗B",
                        m,
                        format!("bound term has type {}", jm.ty),
                    ));
                };
                let (ta, tb) = ((**ta).clone(), (**tb).clone());
                let jn = self.under("let-pair", m, &[(left_name, &ta), (right_name, &tb)], body)?;
                self.disjoint(m, "let-pair", &jm.used, &jn.used)?;
                Ok(Judgment {
                    ty: jn.ty,
                    used: &jm.used | &jn.used,
                    absorbs: jm.absorbs || jn.absorbs,
                })
            }
            Term::Lam(x, ty, body) => {
                let jb = self.under("lam: Γ, x:A ⊢ m : B", m, &[(x, ty)], body)?;
                Ok(Judgment { ty: Type::lolli(ty.clone(), jb.ty), ..jb })
            }
            Term::App(a, b) => {
                let ja = self.check(a)?;
                let Type::Lolli(targ, tres) = &ja.ty else {
                    return Err(self.err(
                        NotAFunction,
                        "app: Φ,Γ ⊢ m : A ⊸ B",
                        m,
                        format!("applied term has type {}", ja.ty),
                    ));
                };
                let (targ, tres) = ((**targ).clone(), (**tres).clone());
                let jb = self.check(b)?;
                if jb.ty != targ {
                    return Err(self.err(
                        TypeMismatch,
                        "app: Φ,Σ ⊢ n : A",
                        m,
                        format!("argument has type {}, function expects {targ}", jb.ty),
                    ));
                }
                self.disjoint(m, "app", &ja.used, &jb.used)?;
                Ok(Judgment {
                    ty: tres,
                    used: &ja.used | &jb.used,
                    absorbs: ja.absorbs || jb.absorbs,
                })
            }
            Term::Lift(a) => {
                self.barriers.push((self.scope.len(), Barrier::Lift));
                let r = self.check(a);
                self.barriers.pop();
                let ja = r?;
                debug_assert!(ja.used.is_empty());
                Ok(Judgment { ty: Type::bang(ja.ty), used: BTreeSet::new(), absorbs: affine })
            }
            Term::Force(a) => {
                let ja = self.check(a)?;
                let Type::Bang(inner) = &ja.ty else {
                    return Err(self.err(
                        NotABang,
                        "force: Γ ⊢ m : !A",
                        m,
                        format!("forced term has type {}", ja.ty),
                    ));
                };
                Ok(Judgment { ty: (**inner).clone(), ..ja })
            }
            Term::Rec(z, bang_ty, body) => {
                let Type::Bang(result) = bang_ty else {
                    return Err(self.err(
                        NotABang,
                        "rec: z : !A",
                        m,
                        format!("recursion variable annotated {bang_ty}, expected a !-type"),
                    ));
                };
                self.barriers.push((self.scope.len(), Barrier::Rec));
                let r = self.under("rec", m, &[(z, bang_ty)], body);
                self.barriers.pop();
                let jb = r?;
                if &jb.ty != result.as_ref() {
                    return Err(self.err(
                        TypeMismatch,
                        "rec: Φ, z:!A ⊢ m : A",
                        m,
                        format!("body has type {}, expected {result}", jb.ty),
                    ));
                }
                Ok(Judgment { ty: jb.ty, used: BTreeSet::new(), absorbs: false })
            }
        }
    }
}

/// Checks `m` in `ctx`, returning its type and the linear context variables it
/// consumes. In the linear calculus every linear context variable must be
/// consumed; in the affine calculus unconsumed ones must be absorbable.
pub fn typecheck(calc: Calculus, ctx: &Context, m: &Term) -> Result<(Type, UsageReport), TypeError> {
    let mut checker = Checker {
        calc,
        scope: ctx
            .entries()
            .iter()
            .map(|(name, ty)| Entry { name: name.clone(), ty: ty.clone() })
            .collect(),
        barriers: Vec::new(),
    };
    let j = checker.check(m)?;
    for (level, (x, ty)) in ctx.entries().iter().enumerate() {
        if ty.is_nonlinear() || j.used.contains(&level) {
            continue;
        }
        if calc == Calculus::Linear || !j.absorbs {
            return Err(checker.err(
                TypeErrorKind::LinearVarDiscarded,
                &checker.rule_for_leaf("context"),
                m,
                format!("linear context variable `{x}` : {ty} is never used"),
            ));
        }
    }
    let consumed = j.used.iter().map(|l| ctx.entries()[*l].0.clone()).collect();
    Ok((j.ty, UsageReport { consumed }))
}

/// Checks a closed program.
pub fn check_program(calc: Calculus, m: &Term) -> Result<Type, TypeError> {
    if let Some(x) = m.free_vars().into_iter().next() {
        return Err(TypeError {
            kind: TypeErrorKind::UnboundVariable,
            rule: format!("program ({calc})"),
            location: excerpt(m),
            details: format!("free variable `{x}` in a closed program"),
        });
    }
    typecheck(calc, &Context::new(), m).map(|(ty, _)| ty)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_type};

    fn ty(s: &str) -> Type {
        parse_type(s).unwrap()
    }

    fn check(calc: Calculus, ctx: &[(&str, &str)], src: &str) -> Result<(Type, UsageReport), TypeError> {
        let ctx = Context::from_entries(ctx.iter().map(|(x, t)| (x.to_string(), ty(t)))).unwrap();
        typecheck(calc, &ctx, &parse_term(src).unwrap())
    }

    fn kind(r: Result<(Type, UsageReport), TypeError>) -> TypeErrorKind {
        r.unwrap_err().kind
    }

    use Calculus::*;
    use TypeErrorKind::*;

    const T: &str = r"(\y:(I -o I). *) (\x:I. rec z:!I. force z)";

    #[test]
    fn linear_variable_is_consumed() {
        let (t, usage) = check(Linear, &[("x", "I -o I")], "x").unwrap();
        assert_eq!(t, ty("I -o I"));
        assert_eq!(usage.consumed, BTreeSet::from(["x".to_string()]));
    }

    #[test]
    fn weakening_of_linear_binder() {
        assert_eq!(kind(check(Linear, &[], r"\x:(I -o I). *")), LinearVarDiscarded);
        let (t, usage) = check(Affine, &[], r"\x:(I -o I). *").unwrap();
        assert_eq!(t, ty("(I -o I) -o I"));
        assert!(usage.consumed.is_empty());
    }

    #[test]
    fn degeneracy_witness_is_affine_only() {
        assert_eq!(check(Affine, &[], T).unwrap().0, Type::Unit);
        assert_eq!(kind(check(Linear, &[], T)), LinearVarDiscarded);
        assert_eq!(check_program(Affine, &parse_term(T).unwrap()).unwrap(), Type::Unit);
    }

    #[test]
    fn contraction_at_bang() {
        for calc in Calculus::ALL {
            let (t, _) = check(calc, &[], r"\x:!I. <force x, force x>").unwrap();
            assert_eq!(t, ty("!I -o I * I"));
        }
    }

    #[test]
    fn contraction_at_linear_type() {
        for calc in Calculus::ALL {
            assert_eq!(kind(check(calc, &[], r"\x:(I -o I). <x, x>")), LinearVarDuplicated);
        }
    }

    #[test]
    fn closed_programs() {
        let p = parse_term("rec z:!I. force z").unwrap();
        assert_eq!(check_program(Linear, &p).unwrap(), Type::Unit);
        assert_eq!(check_program(Linear, &Term::var("x")).unwrap_err().kind, UnboundVariable);
    }

    #[test]
    fn lift_and_rec_barriers() {
        assert_eq!(kind(check(Affine, &[("f", "I -o I")], "lift (f *)")), LinearVarInLift);
        assert_eq!(kind(check(Linear, &[("f", "I -o I")], "lift (f *)")), LinearVarInLift);
        assert_eq!(kind(check(Affine, &[("f", "I -o I")], "rec z:!I. f *")), LinearVarInRec);
        // Non-linear variables cross both barriers.
        assert!(check(Linear, &[("u", "!I")], "lift (force u)").is_ok());
        assert!(check(Linear, &[("u", "I")], "rec z:!I. u").is_ok());
        // Linear variables bound inside the body are fine.
        assert!(check(Linear, &[], r"lift (\f:(I -o I). f *)").is_ok());
    }

    #[test]
    fn affine_lift_discards_context() {
        assert!(check(Affine, &[("f", "I -o I")], "lift *").is_ok());
        assert_eq!(kind(check(Linear, &[("f", "I -o I")], "lift *")), LinearVarDiscarded);
    }

    #[test]
    fn rec_cannot_discard_linear_context() {
        // No leaf of the derivation can absorb f.
        assert_eq!(kind(check(Affine, &[("f", "I -o I")], "rec z:!I. force z")), LinearVarDiscarded);
        assert_eq!(kind(check(Affine, &[], r"\f:(I -o I). rec z:!I. force z")), LinearVarDiscarded);
        // A sibling leaf can.
        assert!(check(Affine, &[], r"\f:(I -o I). <rec z:!I. force z, *>").is_ok());
    }

    #[test]
    fn case_usage() {
        let ctx = [("f", "I -o I"), ("s", "I + I")];
        let same = "case s of {left a -> f a | right b -> f b}";
        assert!(check(Linear, &ctx, same).is_ok());
        let differ = "case s of {left a -> f a | right b -> b}";
        assert_eq!(kind(check(Linear, &ctx, differ)), BranchUsageMismatch);
        let (_, usage) = check(Affine, &ctx, differ).unwrap();
        assert_eq!(usage.consumed, BTreeSet::from(["f".to_string()]));
        // The branch that skips f cannot discard it when it is a rec.
        let stuck = "case s of {left a -> f a | right b -> rec z:!I. force z}";
        assert_eq!(kind(check(Affine, &ctx, stuck)), BranchUsageMismatch);
        assert_eq!(kind(check(Linear, &[("s", "I")], same)), NotASum);
    }

    #[test]
    fn let_pair_and_app_errors() {
        assert!(check(Linear, &[], r"let <f, u> = <\x:I. x, *> in f u").is_ok());
        assert_eq!(kind(check(Linear, &[], "let <a, b> = * in a")), NotATensor);
        assert_eq!(kind(check(Linear, &[], "* *")), NotAFunction);
        assert_eq!(kind(check(Linear, &[], r"(\x:I. x) (lift *)")), TypeMismatch);
        assert_eq!(kind(check(Linear, &[], "force *")), NotABang);
        assert_eq!(kind(check(Linear, &[], "rec z:I. z")), NotABang);
        assert_eq!(kind(check(Linear, &[], "lift *; *")), TypeMismatch);
        assert_eq!(kind(check(Linear, &[], "left[I, I] lift *")), TypeMismatch);
    }

    #[test]
    fn linear_context_must_be_used() {
        assert_eq!(kind(check(Linear, &[("f", "I -o I")], "*")), LinearVarDiscarded);
        assert!(check(Affine, &[("f", "I -o I")], "*").is_ok());
        assert!(check(Linear, &[("u", "!(I -o I)")], "*").is_ok());
    }

    #[test]
    fn shadowing_hides_outer_linear_binder() {
        assert_eq!(kind(check(Linear, &[], r"\x:(I -o I). \x:I. x")), LinearVarDiscarded);
        assert!(check(Affine, &[], r"\x:(I -o I). \x:I. x").is_ok());
    }

    #[test]
    fn errors_serialize_with_kind_and_rule() {
        let e = check(Linear, &[], r"\x:(I -o I). <x, x>").unwrap_err();
        let json = serde_json::to_value(&e).unwrap();
        assert_eq!(json["kind"], "LinearVarDuplicated");
        assert!(json["rule"].as_str().unwrap().starts_with("pair"));
    }
}
