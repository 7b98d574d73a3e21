//! Easy intersection type theories: representation, validation, the
//! textual file format, and the subtyping entry points.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::subtype::Solver;
use crate::types::{parse_type, Atom, Type};

const CACHE_CAP: usize = 4_000_000;

/// A judgement `lhs <= rhs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Judgement {
    pub lhs: Type,
    pub rhs: Type,
}

impl Judgement {
    pub fn new(lhs: Type, rhs: Type) -> Self {
        Judgement { lhs, rhs }
    }
}

impl fmt::Display for Judgement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <= {}", self.lhs, self.rhs)
    }
}

/// An easy intersection type theory.
///
/// Immutable once built; the derived constant order and the subtype cache
/// are maintained internally. The cache is shared between threads behind a
/// mutex and only ever holds settled answers.
pub struct Theory {
    name: String,
    constants: BTreeSet<Atom>,
    order: BTreeSet<(Atom, Atom)>,
    arrows: BTreeMap<Atom, Type>,
    duplicate_arrows: Vec<Atom>,
    above: HashMap<Atom, Vec<Atom>>,
    cache: Mutex<HashMap<(Type, Type), bool>>,
}

impl Clone for Theory {
    fn clone(&self) -> Self {
        Theory::new(
            &self.name,
            self.constants.iter().cloned(),
            self.order.iter().cloned(),
            self.arrows.iter().map(|(a, t)| (a.clone(), t.clone())),
        )
        .with_duplicates(self.duplicate_arrows.clone())
    }
}

impl PartialEq for Theory {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.constants == other.constants
            && self.order == other.order
            && self.arrows == other.arrows
    }
}

impl fmt::Debug for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Theory {
    /// Assembles a theory without validating it. `Top` is always a constant.
    /// A repeated arrow axiom for the same atom keeps the last body and is
    /// recorded as a violation for [`Theory::validate`].
    pub fn new<C, O, A>(name: &str, constants: C, order: O, arrows: A) -> Theory
    where
        C: IntoIterator<Item = Atom>,
        O: IntoIterator<Item = (Atom, Atom)>,
        A: IntoIterator<Item = (Atom, Type)>,
    {
        let mut constants: BTreeSet<Atom> = constants.into_iter().collect();
        constants.insert(Atom::top());
        let order: BTreeSet<(Atom, Atom)> = order.into_iter().collect();
        let mut map = BTreeMap::new();
        let mut duplicates = Vec::new();
        for (atom, body) in arrows {
            if map.insert(atom.clone(), body).is_some() {
                duplicates.push(atom);
            }
        }
        let above = order_closure(&constants, &order);
        Theory {
            name: name.to_string(),
            constants,
            order,
            arrows: map,
            duplicate_arrows: duplicates,
            above,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn with_duplicates(mut self, dups: Vec<Atom>) -> Self {
        self.duplicate_arrows = dups;
        self
    }

    /// The theory whose filter model is Scott's D-infinity: constants
    /// `Top` and `w` with `w ~ Top -> w`.
    pub fn d_infinity() -> Theory {
        let w = Atom::new("w");
        Theory::new(
            "d0",
            [w.clone()],
            [],
            [(w.clone(), Type::arrow(Type::top(), Type::Atom(w)))],
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constants(&self) -> &BTreeSet<Atom> {
        &self.constants
    }

    pub fn order_axioms(&self) -> &BTreeSet<(Atom, Atom)> {
        &self.order
    }

    pub fn arrow_axioms(&self) -> &BTreeMap<Atom, Type> {
        &self.arrows
    }

    /// Body of the arrow axiom `psi ~ body`.
    pub fn body(&self, psi: &Atom) -> Option<&Type> {
        self.arrows.get(psi)
    }

    pub fn renamed(&self, name: &str) -> Theory {
        let mut t = self.clone();
        t.name = name.to_string();
        t
    }

    /// Adds a constant with its arrow axiom.
    pub fn with_atom(&self, atom: Atom, body: Type) -> Theory {
        Theory::new(
            &self.name,
            self.constants.iter().cloned().chain([atom.clone()]),
            self.order.iter().cloned(),
            self.arrows
                .iter()
                .map(|(a, t)| (a.clone(), t.clone()))
                .chain([(atom, body)]),
        )
        .with_duplicates(self.duplicate_arrows.clone())
    }

    pub fn with_order<I: IntoIterator<Item = (Atom, Atom)>>(&self, extra: I) -> Theory {
        Theory::new(
            &self.name,
            self.constants.iter().cloned(),
            self.order.iter().cloned().chain(extra),
            self.arrows.iter().map(|(a, t)| (a.clone(), t.clone())),
        )
        .with_duplicates(self.duplicate_arrows.clone())
    }

    /// First unused `"{prefix}{n}"`.
    pub fn fresh_atom(&self, prefix: &str) -> Atom {
        (0..)
            .map(|i| Atom::new(&format!("{prefix}{i}")))
            .find(|a| !self.constants.contains(a))
            .unwrap()
    }

    /// Every type occurring in an axiom, plus the constants.
    pub fn axiom_types(&self) -> Vec<Type> {
        let mut out: Vec<Type> = self.constants.iter().cloned().map(Type::Atom).collect();
        out.extend(self.arrows.values().cloned());
        out
    }

    /// Whether every atom of `t` is a constant of this theory.
    pub fn check_type(&self, t: &Type) -> Result<()> {
        match t.atoms().into_iter().find(|a| !self.constants.contains(a)) {
            Some(a) => Err(Error::UnknownAtom(a.name().to_string())),
            None => Ok(()),
        }
    }

    pub fn owns(&self, t: &Type) -> bool {
        self.check_type(t).is_ok()
    }

    /// Reflexive-transitive constant order.
    pub(crate) fn atom_le(&self, lo: &Atom, hi: &Atom) -> bool {
        lo == hi
            || self
                .above
                .get(lo)
                .is_some_and(|ups| ups.iter().any(|u| u == hi))
    }

    /// Arrow conjuncts of `t`, unfolding each constant (and every constant
    /// above it) into its arrow axiom once.
    pub(crate) fn arrows_of(&self, t: &Type) -> Vec<(Type, Type)> {
        let mut out = Vec::new();
        for p in t.parts() {
            match p {
                Type::Arrow(d, c) => out.push(((**d).clone(), (**c).clone())),
                Type::Atom(a) if !a.is_top() => {
                    let mut ups = vec![a.clone()];
                    if let Some(more) = self.above.get(a) {
                        ups.extend(more.iter().cloned());
                    }
                    for u in ups {
                        if let Some(body) = self.arrows.get(&u) {
                            for bp in body.parts() {
                                if let Type::Arrow(d, c) = bp {
                                    out.push(((**d).clone(), (**c).clone()));
                                }
                            }
                        }
                    }
                }
                _ => {}
            }
        }
        out.sort();
        out.dedup();
        out
    }

    pub(crate) fn cached(&self, a: &Type, b: &Type) -> Option<bool> {
        let cache = self.cache.lock().unwrap();
        cache.get(&(a.clone(), b.clone())).copied()
    }

    pub(crate) fn store(&self, key: (Type, Type), v: bool) {
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_CAP {
            cache.clear();
        }
        cache.insert(key, v);
    }

    /// Decides `a <= b`.
    pub fn subtype(&self, a: &Type, b: &Type) -> Result<bool> {
        self.check_type(a)?;
        self.check_type(b)?;
        Solver::new(self).decide(a, b)
    }

    pub fn equiv(&self, a: &Type, b: &Type) -> Result<bool> {
        Ok(self.subtype(a, b)? && self.subtype(b, a)?)
    }

    pub fn is_top_equiv(&self, a: &Type) -> Result<bool> {
        self.subtype(&Type::top(), a)
    }

    /// Whether `psi <= psi'` is licensed by the arrow axioms: each arrow
    /// `xi' -> E'` of `psi'` is matched by an arrow `xi -> E` of `psi` with
    /// `xi' <= xi` and `E <= E'`.
    pub fn compatible(&self, psi: &Atom, psi2: &Atom) -> Result<bool> {
        let (Some(lo), Some(hi)) = (self.arrows.get(psi), self.arrows.get(psi2)) else {
            return Ok(false);
        };
        for hp in hi.parts() {
            let Type::Arrow(xi2, e2) = hp else {
                return Ok(false);
            };
            let mut found = false;
            for lp in lo.parts() {
                if let Type::Arrow(xi, e) = lp {
                    if self.subtype(xi2, xi)? && self.subtype(e, e2)? {
                        found = true;
                        break;
                    }
                }
            }
            if !found {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Adds every constant-order axiom demanded by compatibility.
    pub fn complete_order(&self) -> Result<Theory> {
        let mut th = self.clone();
        loop {
            let mut extra = Vec::new();
            for p in th.arrows.keys() {
                for q in th.arrows.keys() {
                    if p == q || th.order.contains(&(p.clone(), q.clone())) {
                        continue;
                    }
                    if th.compatible(p, q)? {
                        extra.push((p.clone(), q.clone()));
                    }
                }
            }
            if extra.is_empty() {
                return Ok(th);
            }
            th = th.with_order(extra);
        }
    }

    /// Checks the structural and compatibility conditions on the axioms.
    pub fn validate(&self) -> ValidationReport {
        let mut v: Vec<Violation> = Vec::new();
        for (p, q) in &self.order {
            let ax = format!("{p} <= {q}");
            if p.is_top() || q.is_top() {
                v.push(Violation::new(
                    2,
                    ax.clone(),
                    "order axioms may not mention Top",
                ));
            }
            for a in [p, q] {
                if !self.constants.contains(a) {
                    v.push(Violation::new(
                        3,
                        ax.clone(),
                        &format!("undeclared constant `{a}`"),
                    ));
                }
            }
        }
        for (psi, body) in &self.arrows {
            let ax = format!("{psi} ~ {body}");
            if psi.is_top() {
                v.push(Violation::new(
                    2,
                    ax.clone(),
                    "Top has no arrow axiom of its own",
                ));
            }
            if !self.constants.contains(psi) {
                v.push(Violation::new(
                    3,
                    ax.clone(),
                    &format!("undeclared constant `{psi}`"),
                ));
            }
            for a in body.atoms() {
                if !self.constants.contains(&a) {
                    v.push(Violation::new(
                        3,
                        ax.clone(),
                        &format!("undeclared constant `{a}`"),
                    ));
                }
            }
            for part in body.parts() {
                match part {
                    Type::Arrow(d, _) if matches!(**d, Type::Atom(_)) => {}
                    Type::Arrow(..) => v.push(Violation::new(
                        2,
                        ax.clone(),
                        "arrow domain must be a constant",
                    )),
                    _ => v.push(Violation::new(
                        2,
                        ax.clone(),
                        "body must be an intersection of arrows",
                    )),
                }
            }
        }
        for psi in &self.duplicate_arrows {
            v.push(Violation::new(
                4,
                format!("{psi} ~ ..."),
                "more than one arrow axiom",
            ));
        }
        for psi in self.constants.iter().filter(|a| !a.is_top()) {
            if !self.arrows.contains_key(psi) {
                v.push(Violation::new(4, psi.to_string(), "missing arrow axiom"));
            }
        }
        let structural_ok = v.is_empty();
        if structural_ok {
            for p in self.arrows.keys() {
                for q in self.arrows.keys() {
                    if p == q {
                        continue;
                    }
                    let present = self.order.contains(&(p.clone(), q.clone()));
                    match self.compatible(p, q) {
                        Ok(c) if c == present => {}
                        Ok(true) => v.push(Violation::new(
                            5,
                            format!("{p} <= {q}"),
                            "arrow axioms are compatible but the order axiom is missing",
                        )),
                        Ok(false) => v.push(Violation::new(
                            5,
                            format!("{p} <= {q}"),
                            "order axiom not licensed by the arrow axioms",
                        )),
                        Err(e) => v.push(Violation::new(5, format!("{p} <= {q}"), &e.to_string())),
                    }
                }
            }
        }
        ValidationReport { violations: v }
    }

    /// Validates and turns violations into an error.
    pub fn validated(self) -> Result<Theory> {
        let report = self.validate();
        if report.is_pass() {
            Ok(self)
        } else {
            Err(Error::InvalidTheory {
                name: self.name.clone(),
                report: report.to_string(),
            })
        }
    }

    /// Compares `meet(A_i -> B_i) <= C -> D` as decided by [`Theory::subtype`]
    /// with the existence of `J` such that `C <= meet(A_j)` and
    /// `meet(B_j) <= D`, found by enumerating all subsets. Returns whether
    /// the two agree.
    pub fn beta_soundness_check(&self, lhs: &[(Type, Type)], c: &Type, d: &Type) -> Result<bool> {
        if self.is_top_equiv(d)? {
            return Err(Error::Precondition(format!("{d} is equivalent to Top")));
        }
        if lhs.len() > 16 {
            return Err(Error::Resource("more than 16 arrows".into()));
        }
        let left = Type::inter(lhs.iter().map(|(a, b)| Type::arrow(a.clone(), b.clone())));
        let decided = self.subtype(&left, &Type::arrow(c.clone(), d.clone()))?;
        let mut exists = false;
        for mask in 0u32..(1 << lhs.len()) {
            let chosen: Vec<&(Type, Type)> = lhs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, p)| p)
                .collect();
            let doms = Type::inter(chosen.iter().map(|p| p.0.clone()));
            let cods = Type::inter(chosen.iter().map(|p| p.1.clone()));
            if self.subtype(c, &doms)? && self.subtype(&cods, d)? {
                exists = true;
                break;
            }
        }
        Ok(decided == exists)
    }
}

fn order_closure(
    constants: &BTreeSet<Atom>,
    order: &BTreeSet<(Atom, Atom)>,
) -> HashMap<Atom, Vec<Atom>> {
    let mut out = HashMap::new();
    for c in constants {
        let mut seen = BTreeSet::new();
        let mut todo = vec![c.clone()];
        while let Some(x) = todo.pop() {
            for (p, q) in order {
                if *p == x && seen.insert(q.clone()) {
                    todo.push(q.clone());
                }
            }
        }
        seen.remove(c);
        if !seen.is_empty() {
            out.insert(c.clone(), seen.into_iter().collect());
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub clause: u8,
    pub axiom: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl Violation {
    fn new(clause: u8, axiom: String, detail: &str) -> Self {
        Violation {
            clause,
            axiom,
            detail: detail.to_string(),
        }
    }
}

impl ValidationReport {
    pub fn is_pass(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn clauses(&self) -> BTreeSet<u8> {
        self.violations.iter().map(|v| v.clause).collect()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_pass() {
            return writeln!(f, "PASS");
        }
        for v in &self.violations {
            writeln!(
                f,
                "VIOLATION clause {}: {}: {}",
                v.clause, v.axiom, v.detail
            )?;
        }
        Ok(())
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theory {} {{", self.name)?;
        let atoms: Vec<String> = self.constants.iter().map(|a| a.to_string()).collect();
        writeln!(f, "  atoms: {};", atoms.join(", "))?;
        for (p, q) in &self.order {
            writeln!(f, "  order: {p} <= {q};")?;
        }
        for (psi, body) in &self.arrows {
            writeln!(f, "  arrows: {psi} ~ {body};")?;
        }
        writeln!(f, "}}")
    }
}

fn syntax(pos: usize, msg: &str) -> Error {
    Error::Syntax {
        pos,
        msg: msg.to_string(),
    }
}

fn shift(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { pos, msg } => Error::Syntax { pos: pos + by, msg },
        other => other,
    }
}

fn ident(s: &str, pos: usize) -> Result<Atom> {
    let ok = s
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
    if ok {
        Ok(Atom::new(s))
    } else {
        Err(syntax(pos, &format!("bad identifier `{s}`")))
    }
}

/// Trimmed slice together with its offset in the original text.
fn trimmed(s: &str, offset: usize) -> (&str, usize) {
    let lead = s.len() - s.trim_start().len();
    (s.trim(), offset + lead)
}

/// Parses a theory file without validating it.
///
/// ```text
/// theory d0 {
///   atoms: Top, w;
///   arrows: w ~ Top -> w;
/// }
/// ```
/// Entries are separated by `;`. A section keyword (`atoms:`, `order:`,
/// `arrows:`) applies until the next keyword.
pub fn parse_theory_unchecked(text: &str) -> Result<Theory> {
    let (t, off) = trimmed(text, 0);
    let rest = t
        .strip_prefix("theory")
        .ok_or_else(|| syntax(off, "expected `theory`"))?;
    let open = rest
        .find('{')
        .ok_or_else(|| syntax(off + t.len(), "expected `{`"))?;
    let name_off = off + "theory".len();
    let (name, name_pos) = trimmed(&rest[..open], name_off);
    let name = ident(name, name_pos)?;
    let body_start = name_off + open + 1;
    let after = &rest[open + 1..];
    let close = after
        .rfind('}')
        .ok_or_else(|| syntax(off + t.len(), "expected `}`"))?;
    if !after[close + 1..].trim().is_empty() {
        return Err(syntax(body_start + close + 1, "trailing input after `}`"));
    }
    let body = &after[..close];

    let mut atoms: Vec<Atom> = Vec::new();
    let mut order = Vec::new();
    let mut arrow_src: Vec<(Atom, &str, usize)> = Vec::new();
    let mut section = "";
    let mut pos = body_start;
    for raw in body.split(';') {
        let (mut entry, mut epos) = trimmed(raw, pos);
        pos += raw.len() + 1;
        for kw in ["atoms:", "order:", "arrows:"] {
            if let Some(r) = entry.strip_prefix(kw) {
                section = kw;
                let (e, p) = trimmed(r, epos + kw.len());
                entry = e;
                epos = p;
            }
        }
        if entry.is_empty() {
            continue;
        }
        match section {
            "atoms:" => {
                let mut ipos = epos;
                for piece in entry.split(',') {
                    let (id, p) = trimmed(piece, ipos);
                    ipos += piece.len() + 1;
                    atoms.push(ident(id, p)?);
                }
            }
            "order:" => {
                let (l, r) = entry
                    .split_once("<=")
                    .ok_or_else(|| syntax(epos, "expected `<=`"))?;
                let (lid, lp) = trimmed(l, epos);
                let (rid, rp) = trimmed(r, epos + l.len() + 2);
                order.push((ident(lid, lp)?, ident(rid, rp)?));
            }
            "arrows:" => {
                let (l, r) = entry
                    .split_once('~')
                    .ok_or_else(|| syntax(epos, "expected `~`"))?;
                let (lid, lp) = trimmed(l, epos);
                arrow_src.push((ident(lid, lp)?, r, epos + l.len() + 1));
            }
            _ => return Err(syntax(epos, "expected `atoms:`, `order:` or `arrows:`")),
        }
    }
    let mut constants: BTreeSet<Atom> = atoms.iter().cloned().collect();
    constants.insert(Atom::top());
    if atoms.len() != atoms.iter().collect::<BTreeSet<_>>().len() {
        return Err(syntax(body_start, "duplicate atom declaration"));
    }
    let mut arrows = Vec::new();
    for (psi, src, p) in arrow_src {
        let ty = parse_type(src, &constants).map_err(|e| shift(e, p))?;
        arrows.push((psi, ty));
    }
    Ok(Theory::new(name.name(), constants, order, arrows))
}

/// Parses a theory file and rejects it unless it validates.
pub fn parse_theory(text: &str) -> Result<Theory> {
    parse_theory_unchecked(text)?.validated()
}
