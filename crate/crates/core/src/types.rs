//! Intersection types over a finite constant set.
//!
//! Every [`Type`] built through the constructors here is kept in normal form:
//! intersections are flat, duplicate-free and sorted, so associativity,
//! commutativity and idempotence of `&` are plain structural equality.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Concrete name of the universal type.
pub const TOP: &str = "Top";

/// A type constant.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(name: &str) -> Atom {
        Atom(Arc::from(name))
    }

    pub fn top() -> Atom {
        Atom::new(TOP)
    }

    pub fn name(&self) -> &str {
        &self.0
    }

    pub fn is_top(&self) -> bool {
        &*self.0 == TOP
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An intersection type.
///
/// `Inter` always holds at least two parts, none of which is itself an
/// intersection, sorted by the derived order and without repetitions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Atom(Atom),
    Arrow(Arc<Type>, Arc<Type>),
    Inter(Arc<[Type]>),
}

impl Type {
    pub fn atom(name: &str) -> Type {
        Type::Atom(Atom::new(name))
    }

    pub fn top() -> Type {
        Type::Atom(Atom::top())
    }

    pub fn arrow(dom: Type, cod: Type) -> Type {
        Type::Arrow(Arc::new(dom), Arc::new(cod))
    }

    /// Normalized intersection of `parts`; the empty intersection is `Top`.
    pub fn inter<I: IntoIterator<Item = Type>>(parts: I) -> Type {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Type::Inter(ps) => flat.extend(ps.iter().cloned()),
                other => flat.push(other),
            }
        }
        flat.sort();
        flat.dedup();
        match flat.len() {
            0 => Type::top(),
            1 => flat.pop().unwrap(),
            _ => Type::Inter(flat.into()),
        }
    }

    pub fn meet(&self, other: &Type) -> Type {
        Type::inter([self.clone(), other.clone()])
    }

    pub fn is_top(&self) -> bool {
        matches!(self, Type::Atom(a) if a.is_top())
    }

    /// Conjuncts of the type; a non-intersection is its own single conjunct.
    pub fn parts(&self) -> &[Type] {
        match self {
            Type::Inter(ps) => ps,
            other => std::slice::from_ref(other),
        }
    }

    /// Node count: atoms count one, each arrow one, and a `k`-part
    /// intersection `k - 1` (as many binary `&` nodes).
    pub fn size(&self) -> usize {
        match self {
            Type::Atom(_) => 1,
            Type::Arrow(a, b) => 1 + a.size() + b.size(),
            Type::Inter(ps) => ps.len() - 1 + ps.iter().map(Type::size).sum::<usize>(),
        }
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Type::Atom(a) => {
                out.insert(a.clone());
            }
            Type::Arrow(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Type::Inter(ps) => ps.iter().for_each(|p| p.collect_atoms(out)),
        }
    }

    /// All subterms including the type itself. The subterms of an
    /// intersection are its conjuncts and their subterms.
    pub fn subterms(&self) -> BTreeSet<Type> {
        let mut out = BTreeSet::new();
        self.collect_subterms(&mut out);
        out
    }

    fn collect_subterms(&self, out: &mut BTreeSet<Type>) {
        if !out.insert(self.clone()) {
            return;
        }
        match self {
            Type::Atom(_) => {}
            Type::Arrow(a, b) => {
                a.collect_subterms(out);
                b.collect_subterms(out);
            }
            Type::Inter(ps) => ps.iter().for_each(|p| p.collect_subterms(out)),
        }
    }

    /// Canonical enumeration order: by size, then structurally.
    pub fn canonical_cmp(&self, other: &Type) -> Ordering {
        self.size().cmp(&other.size()).then_with(|| self.cmp(other))
    }

    fn fmt_dom(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Arrow(..) => write!(f, "({self})"),
            _ => write!(f, "{self}"),
        }
    }
}

/// Re-establishes the normal form of an arbitrarily assembled type.
pub fn normalize(t: &Type) -> Type {
    match t {
        Type::Atom(_) => t.clone(),
        Type::Arrow(a, b) => Type::arrow(normalize(a), normalize(b)),
        Type::Inter(ps) => Type::inter(ps.iter().map(normalize)),
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Atom(a) => write!(f, "{a}"),
            Type::Arrow(a, b) => {
                a.fmt_dom(f)?;
                write!(f, " -> {b}")
            }
            Type::Inter(ps) => {
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    p.fmt_dom(f)?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Arrow,
    Amp,
    LParen,
    RParen,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        if c.is_whitespace() {
            it.next();
        } else if c == '(' {
            it.next();
            out.push((pos, Tok::LParen));
        } else if c == ')' {
            it.next();
            out.push((pos, Tok::RParen));
        } else if c == '&' {
            it.next();
            out.push((pos, Tok::Amp));
        } else if c == '-' {
            it.next();
            match it.next() {
                Some((_, '>')) => out.push((pos, Tok::Arrow)),
                _ => {
                    return Err(Error::Syntax {
                        pos,
                        msg: "expected `->`".into(),
                    })
                }
            }
        } else if is_ident_start(c) {
            let mut name = String::new();
            while let Some(&(_, c)) = it.peek() {
                if !is_ident_char(c) {
                    break;
                }
                name.push(c);
                it.next();
            }
            out.push((pos, Tok::Ident(name)));
        } else {
            return Err(Error::Syntax {
                pos,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct TypeParser<'a> {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
    constants: Option<&'a BTreeSet<Atom>>,
}

impl TypeParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.to_string(),
        })
    }

    fn ty(&mut self) -> Result<Type> {
        let lhs = self.ity()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.at += 1;
            let rhs = self.ty()?;
            Ok(Type::arrow(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn ity(&mut self) -> Result<Type> {
        let mut parts = vec![self.bty()?];
        while self.peek() == Some(&Tok::Amp) {
            self.at += 1;
            parts.push(self.bty()?);
        }
        Ok(Type::inter(parts))
    }

    fn bty(&mut self) -> Result<Type> {
        match self.peek().cloned() {
            Some(Tok::Ident(name)) => {
                if let Some(cs) = self.constants {
                    if !cs.iter().any(|a| a.name() == name) {
                        return Err(Error::UnknownAtom(name));
                    }
                }
                self.at += 1;
                Ok(Type::atom(&name))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let t = self.ty()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.at += 1;
                Ok(t)
            }
            Some(_) => self.err("expected a type"),
            None => self.err("unexpected end of input"),
        }
    }
}

fn parse_with(text: &str, constants: Option<&BTreeSet<Atom>>) -> Result<Type> {
    let mut p = TypeParser {
        toks: lex(text)?,
        at: 0,
        end: text.len(),
        constants,
    };
    let t = p.ty()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(t)
}

/// Parses a type; every identifier must name one of `constants` (`Top` is
/// accepted whenever it is listed, which every theory does).
pub fn parse_type(text: &str, constants: &BTreeSet<Atom>) -> Result<Type> {
    parse_with(text, Some(constants))
}

/// Parses without checking identifiers against a constant set.
pub fn parse_type_unchecked(text: &str) -> Result<Type> {
    parse_with(text, None)
}

/// Every normalized type over `atoms` of size at most `max_size`, in
/// canonical order. Subterm closed by construction.
pub fn enumerate_types(atoms: &BTreeSet<Atom>, max_size: usize) -> Vec<Type> {
    let mut by_size: Vec<Vec<Type>> = vec![Vec::new(); max_size + 1];
    let mut seen: HashSet<Type> = HashSet::new();
    for size in 1..=max_size {
        let mut fresh = Vec::new();
        if size == 1 {
            fresh.extend(atoms.iter().cloned().map(Type::Atom));
        }
        for left in 1..size.saturating_sub(1) {
            let right = size - 1 - left;
            for a in &by_size[left] {
                for b in &by_size[right] {
                    fresh.push(Type::arrow(a.clone(), b.clone()));
                    let m = a.meet(b);
                    if m.size() == size {
                        fresh.push(m);
                    }
                }
            }
        }
        for t in fresh {
            if seen.insert(t.clone()) {
                by_size[size].push(t);
            }
        }
        by_size[size].sort();
    }
    by_size.into_iter().flatten().collect()
}

/// Default cap on universe size.
pub const DEFAULT_UNIVERSE_CAP: usize = 20_000;

/// A finite, subterm-closed set of types containing `Top`.
#[derive(Clone, Debug)]
pub struct TypeUniverse {
    members: Vec<Type>,
    index: HashMap<Type, usize>,
    width_bound: usize,
    provenance: String,
}

impl TypeUniverse {
    /// Builds a universe from an explicit set, adding `Top` and subterms.
    pub fn from_types<I: IntoIterator<Item = Type>>(types: I, provenance: &str) -> TypeUniverse {
        let mut set = BTreeSet::new();
        set.insert(Type::top());
        for t in types {
            set.extend(normalize(&t).subterms());
        }
        Self::from_closed(set, 1, provenance.to_string())
    }

    fn from_closed(set: BTreeSet<Type>, width_bound: usize, provenance: String) -> TypeUniverse {
        let mut members: Vec<Type> = set.into_iter().collect();
        members.sort_by(Type::canonical_cmp);
        let index = members
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        TypeUniverse {
            members,
            index,
            width_bound,
            provenance,
        }
    }

    /// All types over `atoms` up to `max_size`.
    pub fn all_up_to(atoms: &BTreeSet<Atom>, max_size: usize) -> TypeUniverse {
        let mut atoms = atoms.clone();
        atoms.insert(Atom::top());
        let set = enumerate_types(&atoms, max_size).into_iter().collect();
        Self::from_closed(set, 1, format!("all types of size <= {max_size}"))
    }

    pub fn members(&self) -> &[Type] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, t: &Type) -> bool {
        self.index.contains_key(t)
    }

    pub fn index_of(&self, t: &Type) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn width_bound(&self) -> usize {
        self.width_bound
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Members built only from `atoms`.
    pub fn restrict_to(&self, atoms: &BTreeSet<Atom>) -> TypeUniverse {
        let set = self
            .members
            .iter()
            .filter(|t| t.atoms().is_subset(atoms))
            .cloned()
            .collect();
        Self::from_closed(
            set,
            self.width_bound,
            format!("{} restricted to {} atoms", self.provenance, atoms.len()),
        )
    }

    /// Union with the subterms of further types.
    pub fn extended<I: IntoIterator<Item = Type>>(&self, extra: I) -> TypeUniverse {
        let mut set: BTreeSet<Type> = self.members.iter().cloned().collect();
        for t in extra {
            set.extend(normalize(&t).subterms());
        }
        Self::from_closed(set, self.width_bound, self.provenance.clone())
    }

    /// Checks subterm closure and presence of `Top` by direct scan.
    pub fn is_subterm_closed(&self) -> bool {
        self.contains(&Type::top())
            && self
                .members
                .iter()
                .all(|t| t.subterms().iter().all(|s| self.contains(s)))
    }
}

/// Smallest subterm-closed set containing `seed` and `Top`, then closed
/// under intersections of up to `width_bound` distinct non-`Top` members.
pub fn subterm_closure<'a, I>(seed: I, width_bound: usize, cap: usize) -> Result<TypeUniverse>
where
    I: IntoIterator<Item = &'a Type>,
{
    if width_bound == 0 {
        return Err(Error::Precondition("width bound must be at least 1".into()));
    }
    let mut base = BTreeSet::new();
    base.insert(Type::top());
    for t in seed {
        base.extend(normalize(t).subterms());
    }
    if base.len() > cap {
        return Err(Error::Resource(format!("universe exceeds {cap} members")));
    }
    let conjuncts: Vec<Type> = base.iter().filter(|t| !t.is_top()).cloned().collect();
    let mut set = base.clone();
    // combinations of 2..=width distinct conjuncts
    let mut frontier: Vec<(usize, Type)> = conjuncts
        .iter()
        .enumerate()
        .map(|(i, t)| (i, t.clone()))
        .collect();
    for _ in 1..width_bound {
        let mut next = Vec::new();
        for (last, acc) in &frontier {
            for (j, c) in conjuncts.iter().enumerate().skip(last + 1) {
                let m = acc.meet(c);
                if set.insert(m.clone()) && set.len() > cap {
                    return Err(Error::Resource(format!("universe exceeds {cap} members")));
                }
                next.push((j, m));
            }
        }
        frontier = next;
    }
    Ok(TypeUniverse::from_closed(
        set,
        width_bound,
        format!("subterm closure, width {width_bound}"),
    ))
}
