//! Conservative extensions, the easiness scheme for `(\x.x x)(\x.x x)`,
//! predicate-induced filters and the stagewise construction.
//!
//! Stage 0 is the D-infinity theory. Stage `n+1` extends stage `n` through
//! the scheme, pointed at the witness with index `n = pair(r, s)`: the
//! `s`-th type, in canonical order, that satisfies the predicate and is new
//! at stage `r`. Candidates at stage `r` are drawn from the subterm closure
//! of that stage's axioms, widened by two rounds of arrow formation so that
//! curried shapes such as `A -> B -> C` are reachable.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use crate::assignment::Inference;
use crate::error::{Error, Result};
use crate::filter::Filter;
use crate::lambda::Term;
use crate::theory::{parse_theory, Judgement, Theory};
use crate::types::{parse_type, subterm_closure, Type, TypeUniverse, DEFAULT_UNIVERSE_CAP};

#[derive(Clone, Debug)]
pub struct PointedTheory {
    pub theory: Theory,
    pub point: Type,
}

impl PointedTheory {
    pub fn new(theory: Theory, point: Type) -> Result<PointedTheory> {
        theory.check_type(&point)?;
        Ok(PointedTheory { theory, point })
    }
}

pub type Extension = Arc<dyn Fn(&PointedTheory) -> Result<Theory> + Send + Sync>;

#[derive(Clone)]
pub struct FilterScheme {
    pub name: String,
    pub extend: Extension,
}

impl FilterScheme {
    pub fn apply(&self, p: &PointedTheory) -> Result<Theory> {
        (self.extend)(p)
    }

    /// The scheme adding `psi ~ psi -> Z` for a fresh `psi`.
    pub fn omega_scheme() -> FilterScheme {
        FilterScheme {
            name: "dd".into(),
            extend: Arc::new(dd_scheme),
        }
    }
}

impl fmt::Debug for FilterScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FilterScheme({})", self.name)
    }
}

#[derive(Clone)]
pub struct TypePredicate {
    pub name: String,
    pub holds: Arc<dyn Fn(&Type) -> bool + Send + Sync>,
}

impl TypePredicate {
    pub fn new<F: Fn(&Type) -> bool + Send + Sync + 'static>(
        name: &str,
        holds: F,
    ) -> TypePredicate {
        TypePredicate {
            name: name.into(),
            holds: Arc::new(holds),
        }
    }

    pub fn test(&self, t: &Type) -> bool {
        (self.holds)(t)
    }
}

impl fmt::Debug for TypePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TypePredicate({})", self.name)
    }
}

/// Whether `new` orders every sampled judgement exactly as `old` does.
pub fn conservativity_check(old: &Theory, new: &Theory, sample: &[Judgement]) -> Result<bool> {
    if !old.constants().is_subset(new.constants()) {
        return Err(Error::Precondition(
            "the new theory must contain the old constants".into(),
        ));
    }
    for j in sample {
        old.check_type(&j.lhs)?;
        old.check_type(&j.rhs)?;
        if old.subtype(&j.lhs, &j.rhs)? != new.subtype(&j.lhs, &j.rhs)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All judgements between the given types.
pub fn all_pairs(types: &[Type]) -> Vec<Judgement> {
    types
        .iter()
        .flat_map(|a| {
            types
                .iter()
                .map(move |b| Judgement::new(a.clone(), b.clone()))
        })
        .collect()
}

/// Extends the theory with a fresh `psi` and `psi ~ psi -> Z`, adding the
/// constant-order axioms that compatibility demands.
pub fn dd_scheme(p: &PointedTheory) -> Result<Theory> {
    let psi = p.theory.fresh_atom("psi");
    let body = Type::arrow(Type::Atom(psi.clone()), p.point.clone());
    p.theory.with_atom(psi, body).complete_order()?.validated()
}

/// Old-theory types assigned to `e` restricted to `u`, met together.
fn strongest_old(e: &Term, old: &Theory, u: &TypeUniverse, depth: usize) -> Result<Type> {
    let u_old = u.restrict_to(old.constants());
    let mut eng = Inference::new(old, &u_old)?;
    Ok(Type::inter(eng.infer(&Default::default(), e, depth)?))
}

/// For every `B` in `u`: `e : B` in the new theory iff some old type `C`
/// of `e` has `C & z <= B` in the new theory. The strongest such `C` within
/// `u` is the meet of all old types of `e` in `u`.
pub fn simple_easiness_check(
    e: &Term,
    old: &Theory,
    new: &Theory,
    z: &Type,
    u: &TypeUniverse,
    depth: usize,
) -> Result<bool> {
    let c = strongest_old(e, old, u, depth)?.meet(z);
    let mut eng = Inference::new(new, u)?;
    let g = eng.generator(&Default::default(), e, depth)?;
    for b in u.members() {
        if new.subtype(&g, b)? != new.subtype(&c, b)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The interpretation of `e` in the new theory is the join of `up(z)` with
/// its interpretation in the old theory.
pub fn theorem4_check(
    e: &Term,
    old: &Theory,
    new: &Theory,
    z: &Type,
    u: &TypeUniverse,
    depth: usize,
) -> Result<bool> {
    let u_old = u.restrict_to(old.constants());
    let g_old = Inference::new(old, &u_old)?.generator(&Default::default(), e, depth)?;
    let g_new = Inference::new(new, u)?.generator(&Default::default(), e, depth)?;
    new.equiv(&g_new, &z.meet(&g_old))
}

/// `up` of the meet of the members of `u` satisfying `p`.
pub fn predicate_filter(th: &Arc<Theory>, p: &TypePredicate, u: &TypeUniverse) -> Result<Filter> {
    let parts: Vec<Type> = u.members().iter().filter(|a| p.test(a)).cloned().collect();
    Filter::principal(th, Type::inter(parts))
}

/// Cantor pairing.
pub fn pair(r: u64, s: u64) -> u64 {
    (r + s) * (r + s + 1) / 2 + s
}

pub fn unpair(n: u64) -> (u64, u64) {
    let mut k = (((8 * n + 1) as f64).sqrt() as u64 - 1) / 2;
    while k * (k + 1) / 2 > n {
        k -= 1;
    }
    while (k + 1) * (k + 2) / 2 <= n {
        k += 1;
    }
    let s = n - k * (k + 1) / 2;
    (k - s, s)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Index of the step that consumed this witness.
    pub step: usize,
    pub r: usize,
    pub s: usize,
    pub ty: Type,
}

#[derive(Clone, Debug)]
pub struct StagePlan {
    pub stages: Vec<Theory>,
    pub witnesses: Vec<Witness>,
    pub predicate: TypePredicate,
    pub width_bound: usize,
}

impl StagePlan {
    pub fn last(&self) -> &Theory {
        self.stages.last().expect("a plan has at least one stage")
    }

    /// Subterm closure of the final stage's axioms, the witnesses and
    /// `extra`.
    pub fn universe(&self, extra: &[Type], width_bound: usize) -> Result<TypeUniverse> {
        let mut seed = self.last().axiom_types();
        seed.extend(self.witnesses.iter().map(|w| w.ty.clone()));
        seed.extend(extra.iter().cloned());
        subterm_closure(&seed, width_bound, DEFAULT_UNIVERSE_CAP)
    }

    /// One line per step: `step <n> pair (<r>,<s>) witness <type>`.
    pub fn manifest(&self) -> String {
        let mut out = String::new();
        for w in &self.witnesses {
            out.push_str(&format!(
                "step {} pair ({},{}) witness {}\n",
                w.step, w.r, w.s, w.ty
            ));
        }
        out
    }

    /// Writes `d<n>.eitt` for every stage and `manifest.txt`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for th in &self.stages {
            fs::write(dir.join(format!("{}.eitt", th.name())), th.to_string())?;
        }
        fs::write(dir.join("manifest.txt"), self.manifest())
    }

    /// Reads back what [`StagePlan::write_to`] wrote.
    pub fn read_from(
        dir: &Path,
        predicate: TypePredicate,
        width_bound: usize,
    ) -> Result<StagePlan> {
        let io = |e: std::io::Error| Error::Precondition(e.to_string());
        let manifest = fs::read_to_string(dir.join("manifest.txt")).map_err(io)?;
        let mut stages = Vec::new();
        for n in 0..=manifest.lines().count() {
            let text = fs::read_to_string(dir.join(format!("d{n}.eitt"))).map_err(io)?;
            stages.push(parse_theory(&text)?);
        }
        let mut witnesses = Vec::new();
        for line in manifest.lines() {
            let bad = || Error::Syntax {
                pos: 0,
                msg: format!("bad manifest line `{line}`"),
            };
            let rest = line.strip_prefix("step ").ok_or_else(bad)?;
            let (step, rest) = rest.split_once(" pair (").ok_or_else(bad)?;
            let (rs, ty) = rest.split_once(") witness ").ok_or_else(bad)?;
            let (r, s) = rs.split_once(',').ok_or_else(bad)?;
            let step: usize = step.parse().map_err(|_| bad())?;
            let ty = parse_type(ty, stages[step].constants())?;
            witnesses.push(Witness {
                step,
                r: r.parse().map_err(|_| bad())?,
                s: s.parse().map_err(|_| bad())?,
                ty,
            });
        }
        Ok(StagePlan {
            stages,
            witnesses,
            predicate,
            width_bound,
        })
    }
}

/// Candidate witnesses new at stage `r`, in canonical order.
fn candidates(
    stages: &[Theory],
    r: usize,
    p: &TypePredicate,
    width_bound: usize,
) -> Result<Vec<Type>> {
    let th = &stages[r];
    let base = subterm_closure(&th.axiom_types(), width_bound, DEFAULT_UNIVERSE_CAP)?;
    let mut level: BTreeSet<Type> = base.members().iter().cloned().collect();
    let mut found = BTreeSet::new();
    for round in 0..2 {
        let cur: Vec<Type> = level.iter().cloned().collect();
        for a in &cur {
            for b in &cur {
                let t = Type::arrow(a.clone(), b.clone());
                if p.test(&t) {
                    found.insert(t.clone());
                }
                if round == 0 {
                    level.insert(t);
                }
            }
        }
    }
    found.extend(base.members().iter().filter(|t| p.test(t)).cloned());
    let fresh = |t: &Type| r == 0 || !stages[r - 1].owns(t);
    let mut out: Vec<Type> = found.into_iter().filter(fresh).collect();
    out.sort_by(Type::canonical_cmp);
    Ok(out)
}

/// Builds stages `0 .. count`; `count` is the number of theories.
pub fn run_construction(
    e: &Term,
    scheme: &FilterScheme,
    p: &TypePredicate,
    count: usize,
    width_bound: usize,
) -> Result<StagePlan> {
    if count == 0 {
        return Err(Error::Precondition("at least one stage is required".into()));
    }
    if !e.free_vars().is_empty() {
        return Err(Error::Precondition(format!("{e} is not closed")));
    }
    let mut stages = vec![Theory::d_infinity().renamed("d0").validated()?];
    let mut pools: BTreeMap<usize, Vec<Type>> = BTreeMap::new();
    let mut witnesses = Vec::new();
    for n in 0..count - 1 {
        let (r, s) = unpair(n as u64);
        let (r, s) = (r as usize, s as usize);
        let pool = match pools.entry(r) {
            Entry::Occupied(o) => o.into_mut(),
            Entry::Vacant(v) => v.insert(candidates(&stages, r, p, width_bound)?),
        };
        let w = pool.get(s).cloned().ok_or(Error::Exhausted {
            stage: r,
            index: s,
            available: pool.len(),
        })?;
        let pointed = PointedTheory::new(stages[n].clone(), w.clone())?;
        let next = scheme.apply(&pointed)?.renamed(&format!("d{}", n + 1));
        stages.push(next);
        witnesses.push(Witness {
            step: n,
            r,
            s,
            ty: w,
        });
    }
    Ok(StagePlan {
        stages,
        witnesses,
        predicate: p.clone(),
        width_bound,
    })
}

/// At every stage `n`, the interpretation of `e` is generated by the meet
/// of the witnesses consumed before `n`. Returns the failing stages.
pub fn stage_interpretation_failures(
    plan: &StagePlan,
    e: &Term,
    u: &TypeUniverse,
    depth: usize,
) -> Result<Vec<usize>> {
    let mut bad = Vec::new();
    for (n, th) in plan.stages.iter().enumerate() {
        let un = u.restrict_to(th.constants());
        let g = Inference::new(th, &un)?.generator(&Default::default(), e, depth)?;
        let want = Type::inter(plan.witnesses[..n].iter().map(|w| w.ty.clone()));
        if !th.equiv(&g, &want)? {
            bad.push(n);
        }
    }
    Ok(bad)
}

pub fn stage_interpretation_check(
    plan: &StagePlan,
    e: &Term,
    u: &TypeUniverse,
    depth: usize,
) -> Result<bool> {
    Ok(stage_interpretation_failures(plan, e, u, depth)?.is_empty())
}

/// `(w -> w) -> w -> w`, which separates `\x.x` from `\x y.x`.
pub fn separator() -> Type {
    let ww = Type::arrow(Type::atom("w"), Type::atom("w"));
    Type::arrow(ww.clone(), ww)
}

/// At every stage: the separator types `\x.x` but not `\x y.x`, and
/// `w -> w <= w` fails.
pub fn nontriviality_check(plan: &StagePlan, u: &TypeUniverse, depth: usize) -> Result<bool> {
    let d = separator();
    if !u.contains(&d) {
        return Err(Error::Precondition(format!("universe must contain {d}")));
    }
    let ww = Type::arrow(Type::atom("w"), Type::atom("w"));
    for th in &plan.stages {
        let un = u.restrict_to(th.constants());
        let mut eng = Inference::new(th, &un)?;
        let empty = Default::default();
        if !eng.derives(&empty, &Term::identity(), &d, depth)?
            || eng.derives(&empty, &Term::first(), &d, depth)?
            || th.subtype(&ww, &Type::atom("w"))?
        {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::parse_type_unchecked as ty;

    #[test]
    fn pairing_is_a_bijection() {
        assert_eq!(unpair(0), (0, 0));
        assert_eq!(unpair(1), (1, 0));
        assert_eq!(unpair(2), (0, 1));
        assert_eq!(unpair(3), (2, 0));
        let mut seen = BTreeSet::new();
        for r in 0..=100 {
            for s in 0..=100 {
                let n = pair(r, s);
                assert!(n >= r);
                assert_eq!(unpair(n), (r, s));
                assert!(seen.insert(n));
            }
        }
    }

    #[test]
    fn scheme_on_d_infinity() {
        let th = Theory::d_infinity();
        let t1 = dd_scheme(&PointedTheory::new(th.clone(), ty("w").unwrap()).unwrap()).unwrap();
        assert_eq!(
            t1.body(&crate::Atom::new("psi0")),
            Some(&ty("psi0 -> w").unwrap())
        );
        let t2 =
            dd_scheme(&PointedTheory::new(t1.clone(), ty("w -> w").unwrap()).unwrap()).unwrap();
        assert!(t2.constants().contains(&crate::Atom::new("psi1")));
        assert!(t2.validate().is_pass());
        let types = crate::types::enumerate_types(th.constants(), 5);
        assert!(conservativity_check(&th, &t1, &all_pairs(&types)).unwrap());
    }
}
