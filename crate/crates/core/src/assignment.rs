//! Intersection type assignment: bases, derivations and bounded inference.
//!
//! Inference computes, for a term under a basis, a single generator type
//! whose upward closure is the set of types the term receives. Variables
//! get their basis type. An application gets the meet of the codomains of
//! those arrows of the function's generator whose domain lies above the
//! argument's generator. An abstraction gets one arrow `B -> C` per domain
//! `B` drawn from the universe, where `C` is the body's generator under
//! `x:B`. Arrows whose codomain is equivalent to `Top` are dropped.
//!
//! The depth bounds abstraction nesting; an abstraction met with no depth
//! left gets `Top`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lambda::{fresh_name, Term};
use crate::theory::{Judgement, Theory};
use crate::types::{parse_type, Type, TypeUniverse};

/// Finite basis: at most one type per variable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Basis {
    bindings: BTreeMap<Arc<str>, Type>,
}

impl Basis {
    pub fn new() -> Basis {
        Basis::default()
    }

    /// Returns the basis with `x` bound to `ty`, replacing any old binding.
    pub fn with(&self, x: &str, ty: Type) -> Basis {
        let mut b = self.clone();
        b.bindings.insert(x.into(), ty);
        b
    }

    pub fn get(&self, x: &str) -> Option<&Type> {
        self.bindings.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.bindings.contains_key(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Type)> {
        self.bindings.iter().map(|(k, v)| (&**k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn restrict(&self, vars: &BTreeSet<Arc<str>>) -> Basis {
        Basis {
            bindings: self
                .bindings
                .iter()
                .filter(|(k, _)| vars.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    fn key(&self) -> Vec<(Arc<str>, Type)> {
        self.bindings
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

impl FromIterator<(String, Type)> for Basis {
    fn from_iter<I: IntoIterator<Item = (String, Type)>>(iter: I) -> Basis {
        Basis {
            bindings: iter.into_iter().map(|(k, v)| (k.into(), v)).collect(),
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, ty)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}:{ty}")?;
        }
        Ok(())
    }
}

/// Parses `x:A, y:B` (the empty string is the empty basis).
pub fn parse_basis(text: &str, th: &Theory) -> Result<Basis> {
    let mut b = Basis::new();
    if text.trim().is_empty() {
        return Ok(b);
    }
    let mut offset = 0;
    for entry in text.split(',') {
        let Some((x, ty)) = entry.split_once(':') else {
            return Err(Error::Syntax {
                pos: offset,
                msg: "expected `x:Type`".into(),
            });
        };
        let x = x.trim();
        if x.is_empty() || b.contains(x) {
            return Err(Error::Syntax {
                pos: offset,
                msg: format!("missing or repeated variable `{x}`"),
            });
        }
        let ty = parse_type(ty, th.constants()).map_err(|e| match e {
            Error::Syntax { pos, msg } => Error::Syntax {
                pos: pos + offset + entry.find(':').unwrap() + 1,
                msg,
            },
            e => e,
        })?;
        b = b.with(x, ty);
        offset += entry.len() + 1;
    }
    Ok(b)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    Ax,
    AxTop,
    ArrowIntro,
    ArrowElim,
    InterIntro,
    Sub,
}

impl Rule {
    pub fn label(self) -> &'static str {
        match self {
            Rule::Ax => "ax",
            Rule::AxTop => "axTop",
            Rule::ArrowIntro => "->I",
            Rule::ArrowElim => "->E",
            Rule::InterIntro => "&I",
            Rule::Sub => "<=",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub rule: Rule,
    pub basis: Basis,
    pub term: Term,
    pub ty: Type,
    pub premises: Vec<Derivation>,
    pub side: Option<Judgement>,
}

impl Derivation {
    pub fn leaf(rule: Rule, basis: Basis, term: Term, ty: Type) -> Derivation {
        Derivation {
            rule,
            basis,
            term,
            ty,
            premises: Vec::new(),
            side: None,
        }
    }

    pub fn node(
        rule: Rule,
        basis: Basis,
        term: Term,
        ty: Type,
        premises: Vec<Derivation>,
    ) -> Derivation {
        Derivation {
            rule,
            basis,
            term,
            ty,
            premises,
            side: None,
        }
    }

    /// Weakens the conclusion to `ty` by one subsumption step.
    pub fn subsume(self, ty: Type) -> Derivation {
        let side = Judgement::new(self.ty.clone(), ty.clone());
        Derivation {
            rule: Rule::Sub,
            basis: self.basis.clone(),
            term: self.term.clone(),
            ty,
            premises: vec![self],
            side: Some(side),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self
            .premises
            .iter()
            .map(Derivation::node_count)
            .sum::<usize>()
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, indent: usize) -> fmt::Result {
        write!(f, "{:indent$}({}) ", "", self.rule.label())?;
        if !self.basis.is_empty() {
            write!(f, "{} ", self.basis)?;
        }
        write!(f, "|- {} : {}", self.term, self.ty)?;
        if let Some(j) = &self.side {
            write!(f, "  [{} <= {}]", j.lhs, j.rhs)?;
        }
        writeln!(f)?;
        for p in &self.premises {
            p.write(f, indent + 2)?;
        }
        Ok(())
    }
}

impl fmt::Display for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

/// Checks every node against its rule schema, naming the first failing
/// node by its premise path (`root`, `root.0`, ...).
pub fn verify_derivation(th: &Theory, d: &Derivation) -> Result<()> {
    verify_at(th, d, "root".to_string())
}

/// Boolean form of [`verify_derivation`].
pub fn check_derivation(th: &Theory, d: &Derivation) -> bool {
    verify_derivation(th, d).is_ok()
}

fn verify_at(th: &Theory, d: &Derivation, path: String) -> Result<()> {
    let fail = |reason: &str| {
        Err(Error::Derivation {
            path: path.clone(),
            reason: reason.to_string(),
        })
    };
    for (_, ty) in d.basis.iter() {
        if !th.owns(ty) {
            return fail("basis mentions an unknown constant");
        }
    }
    if !th.owns(&d.ty) {
        return fail("type mentions an unknown constant");
    }
    let arity = match d.rule {
        Rule::Ax | Rule::AxTop => 0,
        Rule::ArrowIntro | Rule::Sub => 1,
        Rule::ArrowElim | Rule::InterIntro => 2,
    };
    if d.premises.len() != arity {
        return fail(&format!("rule takes {arity} premises"));
    }
    if d.rule != Rule::Sub && d.side.is_some() {
        return fail("side judgement on a non-subsumption node");
    }
    let p = &d.premises;
    match d.rule {
        Rule::Ax => match &d.term {
            Term::Var(x) if d.basis.get(x) == Some(&d.ty) => {}
            Term::Var(_) => return fail("variable not bound to the concluded type"),
            _ => return fail("axiom on a non-variable"),
        },
        Rule::AxTop => {
            if !d.ty.is_top() {
                return fail("axTop must conclude Top");
            }
        }
        Rule::ArrowIntro => {
            let Term::Abs(x, body) = &d.term else {
                return fail("->I on a non-abstraction");
            };
            let Type::Arrow(a, b) = &d.ty else {
                return fail("->I must conclude an arrow");
            };
            if d.basis.contains(x) {
                return fail("binder already bound in the basis");
            }
            if p[0].basis != d.basis.with(x, (**a).clone()) {
                return fail("premise basis is not the extended basis");
            }
            if p[0].term != **body || p[0].ty != **b {
                return fail("premise does not type the body at the codomain");
            }
        }
        Rule::ArrowElim => {
            let Term::App(fun, arg) = &d.term else {
                return fail("->E on a non-application");
            };
            if p[0].basis != d.basis || p[1].basis != d.basis {
                return fail("premise bases differ from the conclusion");
            }
            if p[0].term != **fun || p[1].term != **arg {
                return fail("premise subjects do not match the application");
            }
            if p[0].ty != Type::arrow(p[1].ty.clone(), d.ty.clone()) {
                return fail("function type does not match argument and result");
            }
        }
        Rule::InterIntro => {
            for q in p {
                if q.basis != d.basis || q.term != d.term {
                    return fail("premises must share basis and subject");
                }
            }
            if d.ty != p[0].ty.meet(&p[1].ty) {
                return fail("conclusion is not the meet of the premises");
            }
        }
        Rule::Sub => {
            if p[0].basis != d.basis || p[0].term != d.term {
                return fail("premise must share basis and subject");
            }
            match &d.side {
                Some(j) if j.lhs == p[0].ty && j.rhs == d.ty => {}
                _ => return fail("side judgement does not link premise and conclusion"),
            }
            if !th.subtype(&p[0].ty, &d.ty)? {
                return fail("side judgement is not derivable");
            }
        }
    }
    for (i, q) in p.iter().enumerate() {
        verify_at(th, q, format!("{path}.{i}"))?;
    }
    Ok(())
}

/// Generator of the application of a filter generated by `fun` to one
/// generated by `arg`.
pub fn apply_generators(th: &Theory, fun: &Type, arg: &Type) -> Result<Type> {
    let mut cods = Vec::new();
    for (dom, cod) in th.arrows_of(fun) {
        if th.subtype(arg, &dom)? {
            cods.push(cod);
        }
    }
    Ok(Type::inter(cods))
}

/// Default cap on generator computations per engine.
pub const DEFAULT_INFER_BUDGET: usize = 2_000_000;

type MemoKey = (Term, Vec<(Arc<str>, Type)>, usize);

/// Memoizing inference engine over one theory and one domain universe.
pub struct Inference<'a> {
    th: &'a Theory,
    domains: &'a TypeUniverse,
    memo: HashMap<MemoKey, Type>,
    steps: usize,
    budget: usize,
}

impl<'a> Inference<'a> {
    pub fn new(th: &'a Theory, domains: &'a TypeUniverse) -> Result<Inference<'a>> {
        for t in domains.members() {
            th.check_type(t)?;
        }
        Ok(Inference {
            th,
            domains,
            memo: HashMap::new(),
            steps: 0,
            budget: DEFAULT_INFER_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn theory(&self) -> &'a Theory {
        self.th
    }

    /// Generator of the types of `t` under `basis`.
    pub fn generator(&mut self, basis: &Basis, t: &Term, depth: usize) -> Result<Type> {
        for (_, ty) in basis.iter() {
            self.th.check_type(ty)?;
        }
        self.gen(basis, t, depth)
    }

    fn gen(&mut self, basis: &Basis, t: &Term, depth: usize) -> Result<Type> {
        match t {
            Term::Var(x) => return Ok(basis.get(x).cloned().unwrap_or_else(Type::top)),
            Term::Abs(..) if depth == 0 => return Ok(Type::top()),
            _ => {}
        }
        let local = basis.restrict(&t.free_vars());
        let key = (t.clone(), local.key(), depth);
        if let Some(g) = self.memo.get(&key) {
            return Ok(g.clone());
        }
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Error::Resource(format!(
                "inference exceeded {} generator computations",
                self.budget
            )));
        }
        let g = match t {
            Term::App(f, a) => {
                let gf = self.gen(&local, f, depth)?;
                let ga = self.gen(&local, a, depth)?;
                apply_generators(self.th, &gf, &ga)?
            }
            Term::Abs(x, body) => {
                let mut arrows = Vec::new();
                for dom in self.domains.members() {
                    let cod = self.gen(&local.with(x, dom.clone()), body, depth - 1)?;
                    if !self.th.is_top_equiv(&cod)? {
                        arrows.push(Type::arrow(dom.clone(), cod));
                    }
                }
                Type::inter(arrows)
            }
            Term::Var(_) => unreachable!(),
        };
        self.memo.insert(key, g.clone());
        Ok(g)
    }

    /// Members of the universe derivable for `t`.
    pub fn infer(&mut self, basis: &Basis, t: &Term, depth: usize) -> Result<BTreeSet<Type>> {
        let g = self.generator(basis, t, depth)?;
        let mut out = BTreeSet::new();
        for a in self.domains.members() {
            if self.th.subtype(&g, a)? {
                out.insert(a.clone());
            }
        }
        Ok(out)
    }

    /// Whether `t` receives `a`.
    pub fn derives(&mut self, basis: &Basis, t: &Term, a: &Type, depth: usize) -> Result<bool> {
        self.th.check_type(a)?;
        let g = self.generator(basis, t, depth)?;
        self.th.subtype(&g, a)
    }

    /// A derivation of `basis |- t : a`, if inference finds one.
    pub fn certify(
        &mut self,
        basis: &Basis,
        t: &Term,
        a: &Type,
        depth: usize,
    ) -> Result<Option<Derivation>> {
        if !self.derives(basis, t, a, depth)? {
            return Ok(None);
        }
        let d = self.build(basis, t, depth)?;
        Ok(Some(if d.ty == *a { d } else { d.subsume(a.clone()) }))
    }

    fn build(&mut self, basis: &Basis, t: &Term, depth: usize) -> Result<Derivation> {
        let g = self.gen(basis, t, depth)?;
        if g.is_top() {
            return Ok(Derivation::leaf(Rule::AxTop, basis.clone(), t.clone(), g));
        }
        match t {
            Term::Var(_) => Ok(Derivation::leaf(Rule::Ax, basis.clone(), t.clone(), g)),
            Term::App(f, a) => {
                let df = self.build(basis, f, depth)?;
                let da = self.build(basis, a, depth)?;
                let want = Type::arrow(da.ty.clone(), g.clone());
                let df = df.subsume(want);
                Ok(Derivation::node(
                    Rule::ArrowElim,
                    basis.clone(),
                    t.clone(),
                    g,
                    vec![df, da],
                ))
            }
            Term::Abs(x, body) => {
                let (x, body, t2): (Arc<str>, Term, Term) = if basis.contains(x) {
                    let mut avoid = t.free_vars();
                    avoid.extend(basis.iter().map(|(k, _)| Arc::from(k)));
                    let fresh = fresh_name(x, &avoid);
                    let b = body.substitute(x, &Term::var(&fresh));
                    (fresh.as_str().into(), b.clone(), Term::abs(&fresh, b))
                } else {
                    (x.clone(), (**body).clone(), t.clone())
                };
                let mut acc: Option<Derivation> = None;
                for part in g.parts() {
                    let Type::Arrow(dom, cod) = part else {
                        unreachable!("abstraction generators are arrow intersections")
                    };
                    let inner = basis.with(&x, (**dom).clone());
                    let db = self.build(&inner, &body, depth - 1)?;
                    if db.ty != **cod {
                        return Err(Error::Derivation {
                            path: "root".into(),
                            reason: format!("inference disagrees with itself on {body}"),
                        });
                    }
                    let intro = Derivation::node(
                        Rule::ArrowIntro,
                        basis.clone(),
                        t2.clone(),
                        part.clone(),
                        vec![db],
                    );
                    acc = Some(match acc {
                        None => intro,
                        Some(prev) => {
                            let ty = prev.ty.meet(&intro.ty);
                            Derivation::node(
                                Rule::InterIntro,
                                basis.clone(),
                                t2.clone(),
                                ty,
                                vec![prev, intro],
                            )
                        }
                    });
                }
                let mut d = acc.expect("non-Top abstraction generator has a part");
                d.term = t.clone();
                Ok(d)
            }
        }
    }
}

/// Members of `u` derivable for `t` under `basis`.
pub fn infer(
    th: &Theory,
    basis: &Basis,
    t: &Term,
    u: &TypeUniverse,
    depth: usize,
) -> Result<BTreeSet<Type>> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    Inference::new(th, u)?.infer(basis, t, depth)
}

/// Elimination of `&` is admissible: whenever `a & b` is derivable for `t`,
/// so are `a` and `b`.
pub fn intersection_elim_check(
    th: &Theory,
    basis: &Basis,
    t: &Term,
    a: &Type,
    b: &Type,
    u: &TypeUniverse,
    depth: usize,
) -> Result<bool> {
    let mut eng = Inference::new(th, u)?;
    if !eng.derives(basis, t, &a.meet(b), depth)? {
        return Err(Error::Precondition(format!(
            "{} is not derivable",
            a.meet(b)
        )));
    }
    Ok(eng.derives(basis, t, a, depth)? && eng.derives(basis, t, b, depth)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::parse_term;
    use crate::types::{parse_type_unchecked as ty, subterm_closure, DEFAULT_UNIVERSE_CAP};

    fn universe(seed: &[&str]) -> TypeUniverse {
        let seed: Vec<Type> = seed.iter().map(|s| ty(s).unwrap()).collect();
        subterm_closure(&seed, 1, DEFAULT_UNIVERSE_CAP).unwrap()
    }

    #[test]
    fn identity_and_first() {
        let th = Theory::d_infinity();
        let u = universe(&["(w -> w) -> w -> w", "Top -> w"]);
        let d = ty("(w -> w) -> w -> w").unwrap();
        let i = Term::identity();
        let k = Term::first();
        assert!(infer(&th, &Basis::new(), &i, &u, 3).unwrap().contains(&d));
        assert!(!infer(&th, &Basis::new(), &k, &u, 5).unwrap().contains(&d));
        let mut eng = Inference::new(&th, &u).unwrap();
        let cert = eng.certify(&Basis::new(), &i, &d, 3).unwrap().unwrap();
        verify_derivation(&th, &cert).unwrap();
    }

    #[test]
    fn variable_gets_everything_above() {
        let th = Theory::d_infinity();
        let u = universe(&["(w -> w) -> w -> w", "Top -> w"]);
        let b = Basis::new().with("x", ty("w").unwrap());
        let got = infer(&th, &b, &parse_term("x").unwrap(), &u, 1).unwrap();
        let want: BTreeSet<Type> = u
            .members()
            .iter()
            .filter(|a| th.subtype(&ty("w").unwrap(), a).unwrap())
            .cloned()
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn hand_derivations() {
        let th = Theory::d_infinity();
        let top = Derivation::leaf(Rule::AxTop, Basis::new(), Term::omega(), Type::top());
        assert!(check_derivation(&th, &top));

        let w = ty("w").unwrap();
        let inner = Derivation::leaf(
            Rule::Ax,
            Basis::new().with("x", w.clone()),
            parse_term("x").unwrap(),
            w.clone(),
        );
        let intro = Derivation::node(
            Rule::ArrowIntro,
            Basis::new(),
            Term::identity(),
            ty("w -> w").unwrap(),
            vec![inner.clone()],
        );
        assert!(check_derivation(&th, &intro));

        let bad = Derivation::node(
            Rule::ArrowElim,
            Basis::new().with("x", w.clone()),
            parse_term("x x").unwrap(),
            w.clone(),
            vec![
                inner.clone().subsume(ty("Top -> w").unwrap()),
                inner.clone().subsume(ty("w -> w").unwrap()),
            ],
        );
        match verify_derivation(&th, &bad) {
            Err(Error::Derivation { path, .. }) => assert_eq!(path, "root"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn binder_clash_is_renamed() {
        let th = Theory::d_infinity();
        let u = universe(&["w -> w"]);
        let b = Basis::new().with("x", ty("w").unwrap());
        let t = parse_term("\\x.x").unwrap();
        let mut eng = Inference::new(&th, &u).unwrap();
        let d = eng
            .certify(&b, &t, &ty("w -> w").unwrap(), 2)
            .unwrap()
            .unwrap();
        verify_derivation(&th, &d).unwrap();
    }

    #[test]
    fn basis_parsing() {
        let th = Theory::d_infinity();
        let b = parse_basis("x:w, y:Top -> w", &th).unwrap();
        assert_eq!(b.to_string(), "x:w, y:Top -> w");
        assert!(parse_basis("x:w, x:w", &th).is_err());
        assert!(matches!(
            parse_basis("x:v", &th),
            Err(Error::UnknownAtom(_))
        ));
    }
}
