use std::fmt;

use super::{Term, Type};

// Precedence levels, loosest first.
const TY_LOLLI: u8 = 0;
const TY_SUM: u8 = 1;
const TY_TENSOR: u8 = 2;
const TY_ATOM: u8 = 3;

fn write_type(f: &mut fmt::Formatter<'_>, ty: &Type, level: u8) -> fmt::Result {
    let (own, open) = match ty {
        Type::Unit => return f.write_str("I"),
        Type::Bang(a) => {
            f.write_str("!")?;
            return write_type(f, a, TY_ATOM);
        }
        Type::Lolli(..) => (TY_LOLLI, level > TY_LOLLI),
        Type::Sum(..) => (TY_SUM, level > TY_SUM),
        Type::Tensor(..) => (TY_TENSOR, level > TY_TENSOR),
    };
    if open {
        f.write_str("(")?;
    }
    let (a, b, op) = match ty {
        Type::Lolli(a, b) => (a, b, " -o "),
        Type::Sum(a, b) => (a, b, " + "),
        Type::Tensor(a, b) => (a, b, " * "),
        _ => unreachable!(),
    };
    // Right-associative: the left operand binds one level tighter.
    write_type(f, a, own + 1)?;
    f.write_str(op)?;
    write_type(f, b, own)?;
    if open {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type(f, self, TY_LOLLI)
    }
}

const EXPR: u8 = 0;
const SEQ: u8 = 1;
const APP: u8 = 2;
const PREFIX: u8 = 3;

fn write_term(f: &mut fmt::Formatter<'_>, m: &Term, level: u8) -> fmt::Result {
    let own = match m {
        Term::Lam(..) | Term::Rec(..) | Term::LetPair { .. } => EXPR,
        Term::Seq(..) => SEQ,
        Term::App(..) => APP,
        Term::Left(..) | Term::Right(..) | Term::Lift(_) | Term::Force(_) => PREFIX,
        _ => u8::MAX,
    };
    let open = own < level;
    if open {
        f.write_str("(")?;
    }
    match m {
        Term::Var(x) => f.write_str(x)?,
        Term::Star => f.write_str("*")?,
        Term::Seq(a, b) => {
            write_term(f, a, APP)?;
            f.write_str("; ")?;
            write_term(f, b, EXPR)?;
        }
        Term::Left(ta, tb, a) => {
            write!(f, "left[{ta}, {tb}] ")?;
            write_term(f, a, PREFIX)?;
        }
        Term::Right(ta, tb, a) => {
            write!(f, "right[{ta}, {tb}] ")?;
            write_term(f, a, PREFIX)?;
        }
        Term::Case {
            scrutinee,
            left_name,
            left_body,
            right_name,
            right_body,
        } => {
            f.write_str("case ")?;
            write_term(f, scrutinee, EXPR)?;
            write!(f, " of {{left {left_name} -> ")?;
            write_term(f, left_body, EXPR)?;
            write!(f, " | right {right_name} -> ")?;
            write_term(f, right_body, EXPR)?;
            f.write_str("}")?;
        }
        Term::Pair(a, b) => {
            f.write_str("<")?;
            write_term(f, a, EXPR)?;
            f.write_str(", ")?;
            write_term(f, b, EXPR)?;
            f.write_str(">")?;
        }
        Term::LetPair {
            left_name,
            right_name,
            bound,
            body,
        } => {
            write!(f, "let <{left_name}, {right_name}> = ")?;
            write_term(f, bound, EXPR)?;
            f.write_str(" in ")?;
            write_term(f, body, EXPR)?;
        }
        Term::Lam(x, ty, body) => {
            write!(f, "\\{x}:{ty}. ")?;
            write_term(f, body, EXPR)?;
        }
        Term::App(a, b) => {
            write_term(f, a, APP)?;
            f.write_str(" ")?;
            write_term(f, b, PREFIX)?;
        }
        Term::Lift(a) => {
            f.write_str("lift ")?;
            write_term(f, a, PREFIX)?;
        }
        Term::Force(a) => {
            f.write_str("force ")?;
            write_term(f, a, PREFIX)?;
        }
        Term::Rec(z, ty, body) => {
            write!(f, "rec {z}:{ty}. ")?;
            write_term(f, body, EXPR)?;
        }
    }
    if open {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, EXPR)
    }
}
