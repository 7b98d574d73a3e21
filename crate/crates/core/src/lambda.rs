//! Untyped λ-terms modulo α.
//!
//! Terms keep their binder names for printing. Equality and hashing go
//! through a nameless form, so two terms compare equal iff they are
//! α-equivalent.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub enum Term {
    Var(Arc<str>),
    Abs(Arc<str>, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
}

#[derive(PartialEq, Eq, Hash)]
enum Nameless {
    Free(Arc<str>),
    Bound(usize),
    Abs(Box<Nameless>),
    App(Box<Nameless>, Box<Nameless>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(name.into())
    }

    pub fn abs(binder: &str, body: Term) -> Term {
        Term::Abs(binder.into(), Arc::new(body))
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Arc::new(fun), Arc::new(arg))
    }

    /// `\x.x`
    pub fn identity() -> Term {
        Term::abs("x", Term::var("x"))
    }

    /// `\x y.x`
    pub fn first() -> Term {
        Term::abs("x", Term::abs("y", Term::var("x")))
    }

    /// `\x.x x`
    pub fn delta() -> Term {
        Term::abs("x", Term::app(Term::var("x"), Term::var("x")))
    }

    /// `(\x.x x) (\x.x x)`
    pub fn omega() -> Term {
        Term::app(Term::delta(), Term::delta())
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::Abs(_, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    /// Maximal number of nested abstractions along any path.
    pub fn abs_depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::Abs(_, b) => 1 + b.abs_depth(),
            Term::App(f, a) => f.abs_depth().max(a.abs_depth()),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Arc<str>>, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Term::Var(x) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Term::Abs(x, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
            Term::App(f, a) => {
                f.collect_free(bound, out);
                a.collect_free(bound, out);
            }
        }
    }

    pub fn is_free(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => &**y == x,
            Term::Abs(y, b) => &**y != x && b.is_free(x),
            Term::App(f, a) => f.is_free(x) || a.is_free(x),
        }
    }

    fn all_names(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Abs(x, b) => {
                out.insert(x.clone());
                b.all_names(out);
            }
            Term::App(f, a) => {
                f.all_names(out);
                a.all_names(out);
            }
        }
    }

    fn nameless(&self, bound: &mut Vec<Arc<str>>) -> Nameless {
        match self {
            Term::Var(x) => match bound.iter().rev().position(|b| b == x) {
                Some(i) => Nameless::Bound(i),
                None => Nameless::Free(x.clone()),
            },
            Term::Abs(x, b) => {
                bound.push(x.clone());
                let body = b.nameless(bound);
                bound.pop();
                Nameless::Abs(Box::new(body))
            }
            Term::App(f, a) => {
                Nameless::App(Box::new(f.nameless(bound)), Box::new(a.nameless(bound)))
            }
        }
    }

    /// Capture-avoiding substitution of `u` for the free occurrences of `x`.
    pub fn substitute(&self, x: &str, u: &Term) -> Term {
        let fv = u.free_vars();
        self.subst(x, u, &fv)
    }

    fn subst(&self, x: &str, u: &Term, fv_u: &BTreeSet<Arc<str>>) -> Term {
        match self {
            Term::Var(y) => {
                if &**y == x {
                    u.clone()
                } else {
                    self.clone()
                }
            }
            Term::App(f, a) => Term::app(f.subst(x, u, fv_u), a.subst(x, u, fv_u)),
            Term::Abs(y, b) => {
                if &**y == x || !b.is_free(x) {
                    return self.clone();
                }
                if !fv_u.contains(y) {
                    return Term::Abs(y.clone(), Arc::new(b.subst(x, u, fv_u)));
                }
                let mut avoid = fv_u.clone();
                b.all_names(&mut avoid);
                avoid.insert(x.into());
                let fresh = fresh_name(y, &avoid);
                let renamed = b.substitute(y, &Term::var(&fresh));
                Term::abs(&fresh, renamed.subst(x, u, fv_u))
            }
        }
    }

    /// One leftmost-outermost β-contraction, `None` on a normal form.
    pub fn beta_step(&self) -> Option<Term> {
        match self {
            Term::Var(_) => None,
            Term::Abs(x, b) => b.beta_step().map(|b| Term::Abs(x.clone(), Arc::new(b))),
            Term::App(f, a) => {
                if let Term::Abs(x, b) = &**f {
                    return Some(b.substitute(x, a));
                }
                if let Some(f2) = f.beta_step() {
                    return Some(Term::App(Arc::new(f2), a.clone()));
                }
                a.beta_step().map(|a2| Term::App(f.clone(), Arc::new(a2)))
            }
        }
    }
}

/// Primes `base` until it avoids every name in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<Arc<str>>) -> String {
    let mut name = format!("{base}'");
    while avoid.contains(name.as_str()) {
        name.push('\'');
    }
    name
}

impl PartialEq for Term {
    fn eq(&self, other: &Term) -> bool {
        self.nameless(&mut Vec::new()) == other.nameless(&mut Vec::new())
    }
}

impl Eq for Term {}

impl Hash for Term {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.nameless(&mut Vec::new()).hash(state)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::Abs(..) => {
                let mut t = self;
                f.write_str("\\")?;
                let mut first = true;
                while let Term::Abs(x, b) = t {
                    if !first {
                        f.write_str(" ")?;
                    }
                    first = false;
                    write!(f, "{x}")?;
                    t = b;
                }
                write!(f, ".{t}")
            }
            Term::App(fun, arg) => {
                match &**fun {
                    Term::Abs(..) => write!(f, "({fun})")?,
                    _ => write!(f, "{fun}")?,
                }
                match &**arg {
                    Term::Var(_) => write!(f, " {arg}"),
                    _ => write!(f, " ({arg})"),
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.to_string(),
        })
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_alphabetic() || c == '_' => {}
            _ => return None,
        }
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '\'' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        Some(self.src[start..self.pos].to_string())
    }

    fn term(&mut self) -> Result<Term> {
        self.skip_ws();
        if let Some(c @ ('\\' | 'λ')) = self.peek() {
            self.pos += c.len_utf8();
            let mut binders = Vec::new();
            while let Some(x) = self.ident() {
                binders.push(x);
            }
            if binders.is_empty() {
                return self.err("expected binder");
            }
            self.skip_ws();
            if self.peek() != Some('.') {
                return self.err("expected `.`");
            }
            self.pos += 1;
            let mut body = self.term()?;
            for x in binders.iter().rev() {
                body = Term::abs(x, body);
            }
            return Ok(body);
        }
        let mut acc: Option<Term> = None;
        loop {
            self.skip_ws();
            let arg = match self.peek() {
                Some('(') => {
                    self.pos += 1;
                    let t = self.term()?;
                    self.skip_ws();
                    if self.peek() != Some(')') {
                        return self.err("expected `)`");
                    }
                    self.pos += 1;
                    t
                }
                Some('\\' | 'λ') => self.term()?,
                _ => match self.ident() {
                    Some(x) => Term::var(&x),
                    None => break,
                },
            };
            acc = Some(match acc {
                None => arg,
                Some(f) => Term::app(f, arg),
            });
        }
        match acc {
            Some(t) => Ok(t),
            None => self.err("expected term"),
        }
    }
}

pub fn parse_term(text: &str) -> Result<Term> {
    let mut p = Parser { src: text, pos: 0 };
    let t = p.term()?;
    p.skip_ws();
    if p.pos < text.len() {
        return p.err("unexpected input");
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn parsing() {
        assert_eq!(t("\\x.x"), Term::identity());
        assert_eq!(t("\\x y.x"), Term::first());
        assert_eq!(t("λa b.a"), Term::first());
        assert_eq!(t("(\\x.x x)(\\x.x x)"), Term::omega());
        assert_eq!(t("f x y"), Term::app(Term::app(t("f"), t("x")), t("y")));
        assert_eq!(t("f \\x.x"), Term::app(t("f"), Term::identity()));
        assert_eq!(Term::omega().to_string(), "(\\x.x x) (\\x.x x)");
        assert!(matches!(
            parse_term("\\.x"),
            Err(Error::Syntax { pos: 1, .. })
        ));
        assert!(matches!(
            parse_term("(x"),
            Err(Error::Syntax { pos: 2, .. })
        ));
        assert!(parse_term("x )").is_err());
    }

    #[test]
    fn alpha() {
        assert_eq!(t("\\x.x"), t("\\y.y"));
        assert_ne!(t("\\x.y"), t("\\y.y"));
        assert_ne!(t("\\x y.x"), t("\\x y.y"));
    }

    #[test]
    fn substitution() {
        assert_eq!(t("x").substitute("x", &Term::identity()), Term::identity());
        let r = t("\\y.x").substitute("x", &t("y"));
        assert_eq!(r, t("\\z.y"));
        assert_eq!(r.to_string(), "\\y'.y");
        assert_eq!(t("\\x.x").substitute("x", &Term::first()), t("\\x.x"));
    }

    #[test]
    fn beta() {
        assert_eq!(Term::omega().beta_step(), Some(Term::omega()));
        assert_eq!(t("(\\x.x) (\\x y.x)").beta_step(), Some(Term::first()));
        assert_eq!(Term::first().beta_step(), None);
        assert_eq!(t("x ((\\y.y) z)").beta_step(), Some(t("x z")));
    }
}
