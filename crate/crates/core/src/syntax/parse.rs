//! Recursive-descent parser for `.sll` sources.
//!
//! ```text
//! source ::= ("calculus" ("linear" | "affine"))? expr
//! expr   ::= "\" x ":" type "." expr
//!          | "rec" z ":" type "." expr
//!          | "let" "<" x "," y ">" "=" expr "in" expr
//!          | seq
//! seq    ::= app (";" expr)?
//! app    ::= prefix prefix*
//! prefix ::= ("lift" | "force" | "left[" type "," type "]" | "right[" type "," type "]") prefix
//!          | atom
//! atom   ::= x | "*" | "(" expr ")" | "<" expr "," expr ">"
//!          | "case" expr "of" "{" "left" x "->" expr "|" "right" y "->" expr "}"
//!
//! type   ::= sum ("-o" type)?
//! sum    ::= tensor ("+" sum)?
//! tensor ::= unary ("*" tensor)?
//! unary  ::= "!" unary | "I" | "(" type ")"
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use std::fmt;

use serde::Serialize;

use super::{Name, Term, Type};
use crate::typecheck::Calculus;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub found: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: unexpected {}, expected one of: {}",
            self.line,
            self.column,
            self.found,
            self.expected.join(", ")
        )
    }
}

/// A parsed source file: an optional calculus pragma and one term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Source {
    pub calculus: Option<Calculus>,
    pub term: Term,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => format!("keyword `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "case", "of", "left", "right", "let", "in", "lift", "force", "rec", "calculus",
];

const SYMBOLS: &[&str] = &[
    "->", "-o", "\\", "*", ";", ",", "<", ">", "(", ")", "[", "]", "{", "}", ":", ".", "+", "!", "|",
    "=",
];

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            out.push(Spanned { tok: Tok::Ident(word), line, column: col });
            col += i - start;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                out.push(Spanned { tok: Tok::Sym(sym), line, column: col });
                i += sym.len();
                col += sym.len();
            }
            None => {
                return Err(ParseError {
                    line,
                    column: col,
                    found: format!("character `{c}`"),
                    expected: vec!["a token".into()],
                })
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let here = &self.toks[self.pos];
        Err(ParseError {
            line: here.line,
            column: here.column,
            found: here.tok.describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }

    fn expect_sym(&mut self, s: &'static str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.error(&[&format!("`{s}`")])
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.error(&[&format!("keyword `{k}`")])
        }
    }

    fn ident(&mut self) -> PResult<Name> {
        match self.peek() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if matches!(self.peek(), Tok::Eof) {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    // ---- types ----

    fn ty(&mut self) -> PResult<Type> {
        let lhs = self.sum_ty()?;
        if self.is_sym("-o") {
            self.bump();
            Ok(Type::lolli(lhs, self.ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn sum_ty(&mut self) -> PResult<Type> {
        let lhs = self.tensor_ty()?;
        if self.is_sym("+") {
            self.bump();
            Ok(Type::sum(lhs, self.sum_ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn tensor_ty(&mut self) -> PResult<Type> {
        let lhs = self.unary_ty()?;
        if self.is_sym("*") {
            self.bump();
            Ok(Type::tensor(lhs, self.tensor_ty()?))
        } else {
            Ok(lhs)
        }
    }

    fn unary_ty(&mut self) -> PResult<Type> {
        if self.is_sym("!") {
            self.bump();
            return Ok(Type::bang(self.unary_ty()?));
        }
        if self.is_sym("(") {
            self.bump();
            let t = self.ty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        if self.is_kw("I") {
            self.bump();
            return Ok(Type::Unit);
        }
        self.error(&["`I`", "`!`", "`(`"])
    }

    // ---- terms ----

    fn expr(&mut self) -> PResult<Term> {
        if self.is_sym("\\") {
            self.bump();
            let x = self.ident()?;
            self.expect_sym(":")?;
            let ty = self.ty()?;
            self.expect_sym(".")?;
            return Ok(Term::lam(x, ty, self.expr()?));
        }
        if self.is_kw("rec") {
            self.bump();
            let z = self.ident()?;
            self.expect_sym(":")?;
            let ty = self.ty()?;
            self.expect_sym(".")?;
            return Ok(Term::rec(z, ty, self.expr()?));
        }
        if self.is_kw("let") {
            self.bump();
            self.expect_sym("<")?;
            let x = self.ident()?;
            self.expect_sym(",")?;
            let y = self.ident()?;
            self.expect_sym(">")?;
            self.expect_sym("=")?;
            let bound = self.expr()?;
            self.expect_kw("in")?;
            let body = self.expr()?;
            return Ok(Term::let_pair(x, y, bound, body));
        }
        let lhs = self.app()?;
        if self.is_sym(";") {
            self.bump();
            Ok(Term::seq(lhs, self.expr()?))
        } else {
            Ok(lhs)
        }
    }

    fn starts_prefix(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) => {
                !KEYWORDS.contains(&s.as_str()) || matches!(s.as_str(), "lift" | "force" | "left" | "right" | "case")
            }
            Tok::Sym(s) => matches!(*s, "*" | "(" | "<"),
            Tok::Eof => false,
        }
    }

    fn app(&mut self) -> PResult<Term> {
        let mut head = self.prefix()?;
        while self.starts_prefix() {
            let arg = self.prefix()?;
            head = Term::app(head, arg);
        }
        Ok(head)
    }

    fn injection_types(&mut self) -> PResult<(Type, Type)> {
        self.expect_sym("[")?;
        let a = self.ty()?;
        self.expect_sym(",")?;
        let b = self.ty()?;
        self.expect_sym("]")?;
        Ok((a, b))
    }

    fn prefix(&mut self) -> PResult<Term> {
        if self.is_kw("lift") {
            self.bump();
            return Ok(Term::lift(self.prefix()?));
        }
        if self.is_kw("force") {
            self.bump();
            return Ok(Term::force(self.prefix()?));
        }
        if self.is_kw("left") {
            self.bump();
            let (a, b) = self.injection_types()?;
            return Ok(Term::left(a, b, self.prefix()?));
        }
        if self.is_kw("right") {
            self.bump();
            let (a, b) = self.injection_types()?;
            return Ok(Term::right(a, b, self.prefix()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Term> {
        if self.is_sym("*") {
            self.bump();
            return Ok(Term::Star);
        }
        if self.is_sym("(") {
            self.bump();
            let m = self.expr()?;
            self.expect_sym(")")?;
            return Ok(m);
        }
        if self.is_sym("<") {
            self.bump();
            let m = self.expr()?;
            self.expect_sym(",")?;
            let n = self.expr()?;
            self.expect_sym(">")?;
            return Ok(Term::pair(m, n));
        }
        if self.is_kw("case") {
            self.bump();
            let scrutinee = self.expr()?;
            self.expect_kw("of")?;
            self.expect_sym("{")?;
            self.expect_kw("left")?;
            let x = self.ident()?;
            self.expect_sym("->")?;
            let n = self.expr()?;
            self.expect_sym("|")?;
            self.expect_kw("right")?;
            let y = self.ident()?;
            self.expect_sym("->")?;
            let p = self.expr()?;
            self.expect_sym("}")?;
            return Ok(Term::case(scrutinee, x, n, y, p));
        }
        if let Tok::Ident(s) = self.peek() {
            if !KEYWORDS.contains(&s.as_str()) {
                return Ok(Term::Var(self.ident()?));
            }
        }
        self.error(&[
            "identifier", "`*`", "`(`", "`<`", "`\\`", "keyword `case`", "keyword `let`", "keyword `rec`",
            "keyword `lift`", "keyword `force`", "keyword `left`", "keyword `right`",
        ])
    }
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let m = p.expr()?;
    p.finish()?;
    Ok(m)
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.ty()?;
    p.finish()?;
    Ok(t)
}

/// Parses a source file: an optional `calculus linear|affine` pragma, then one term.
pub fn parse_source(text: &str) -> Result<Source, ParseError> {
    let mut p = Parser::new(text)?;
    let mut calculus = None;
    if p.is_kw("calculus") {
        p.bump();
        calculus = Some(match p.peek() {
            Tok::Ident(s) if s == "linear" => Calculus::Linear,
            Tok::Ident(s) if s == "affine" => Calculus::Affine,
            _ => return p.error(&["`linear`", "`affine`"]),
        });
        p.bump();
    }
    let term = p.expr()?;
    p.finish()?;
    Ok(Source { calculus, term })
}
