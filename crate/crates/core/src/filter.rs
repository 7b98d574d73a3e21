//! Principal filters over a theory and the filter model built on them.
//!
//! A filter is represented by its generator; two filters are equal when
//! their generators are equivalent. Application is computed exactly on
//! generators: `up(F) . up(G)` is generated by the meet of the codomains of
//! the arrows of `F` whose domain lies above `G`. Interpretation returns the
//! generator computed by inference under the basis read off the environment.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::assignment::{apply_generators, Basis, Inference};
use crate::error::{Error, Result};
use crate::lambda::{fresh_name, Term};
use crate::theory::Theory;
use crate::types::{parse_type, Type, TypeUniverse};

#[derive(Clone, Debug)]
pub struct Filter {
    theory: Arc<Theory>,
    generator: Type,
}

impl Filter {
    pub fn principal(theory: &Arc<Theory>, generator: Type) -> Result<Filter> {
        theory.check_type(&generator)?;
        Ok(Filter {
            theory: theory.clone(),
            generator,
        })
    }

    pub fn bottom(theory: &Arc<Theory>) -> Filter {
        Filter {
            theory: theory.clone(),
            generator: Type::top(),
        }
    }

    pub fn generator(&self) -> &Type {
        &self.generator
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    fn check_same_theory(&self, other: &Filter) -> Result<()> {
        if Arc::ptr_eq(&self.theory, &other.theory) || *self.theory == *other.theory {
            Ok(())
        } else {
            Err(Error::TheoryMismatch)
        }
    }

    pub fn member(&self, a: &Type) -> Result<bool> {
        self.theory.subtype(&self.generator, a)
    }

    /// Whether every member of `self` is a member of `other`.
    pub fn included_in(&self, other: &Filter) -> Result<bool> {
        self.check_same_theory(other)?;
        self.theory.subtype(&other.generator, &self.generator)
    }

    /// Filter equality.
    pub fn same(&self, other: &Filter) -> Result<bool> {
        self.check_same_theory(other)?;
        self.theory.equiv(&self.generator, &other.generator)
    }

    pub fn join(&self, other: &Filter) -> Result<Filter> {
        self.check_same_theory(other)?;
        Ok(Filter {
            theory: self.theory.clone(),
            generator: self.generator.meet(&other.generator),
        })
    }

    pub fn apply(&self, arg: &Filter) -> Result<Filter> {
        self.check_same_theory(arg)?;
        Ok(Filter {
            theory: self.theory.clone(),
            generator: apply_generators(&self.theory, &self.generator, &arg.generator)?,
        })
    }

    /// Application traced on a universe: the meet of every `D` in `u` with
    /// `F <= G -> D`. Always includes the exact result.
    pub fn apply_within(&self, arg: &Filter, u: &TypeUniverse) -> Result<Filter> {
        self.check_same_theory(arg)?;
        let mut parts = Vec::new();
        for d in u.members() {
            let probe = Type::arrow(arg.generator.clone(), d.clone());
            if self.theory.subtype(&self.generator, &probe)? {
                parts.push(d.clone());
            }
        }
        Ok(Filter {
            theory: self.theory.clone(),
            generator: Type::inter(parts),
        })
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "up({})", self.generator)
    }
}

/// Environment of principal filters; unbound variables denote the bottom
/// filter `up(Top)`.
#[derive(Clone, Debug)]
pub struct Env {
    theory: Arc<Theory>,
    bindings: BTreeMap<Arc<str>, Filter>,
}

impl Env {
    pub fn empty(theory: &Arc<Theory>) -> Env {
        Env {
            theory: theory.clone(),
            bindings: BTreeMap::new(),
        }
    }

    pub fn with(&self, x: &str, f: Filter) -> Result<Env> {
        if !(Arc::ptr_eq(&self.theory, f.theory()) || *self.theory == **f.theory()) {
            return Err(Error::TheoryMismatch);
        }
        let mut e = self.clone();
        e.bindings.insert(x.into(), f);
        Ok(e)
    }

    pub fn without(&self, x: &str) -> Env {
        let mut e = self.clone();
        e.bindings.remove(x);
        e
    }

    pub fn get(&self, x: &str) -> Filter {
        self.bindings
            .get(x)
            .cloned()
            .unwrap_or_else(|| Filter::bottom(&self.theory))
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(|k| &**k)
    }

    pub fn theory(&self) -> &Arc<Theory> {
        &self.theory
    }

    /// The strongest basis satisfying the environment.
    pub fn basis(&self) -> Basis {
        self.bindings
            .iter()
            .map(|(k, f)| (k.to_string(), f.generator().clone()))
            .collect()
    }
}

impl fmt::Display for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (x, v)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{x}:={}", v.generator())?;
        }
        f.write_str("]")
    }
}

/// Parses `x=A, y=B` into an environment of principal filters.
pub fn parse_env(text: &str, theory: &Arc<Theory>) -> Result<Env> {
    let mut env = Env::empty(theory);
    if text.trim().is_empty() {
        return Ok(env);
    }
    let mut offset = 0;
    for entry in text.split(',') {
        let Some((x, ty)) = entry.split_once('=') else {
            return Err(Error::Syntax {
                pos: offset,
                msg: "expected `x=Type`".into(),
            });
        };
        let x = x.trim();
        if x.is_empty() {
            return Err(Error::Syntax {
                pos: offset,
                msg: "missing variable".into(),
            });
        }
        let ty = parse_type(ty, theory.constants()).map_err(|e| match e {
            Error::Syntax { pos, msg } => Error::Syntax {
                pos: pos + offset + entry.find('=').unwrap() + 1,
                msg,
            },
            e => e,
        })?;
        env = env.with(x, Filter::principal(theory, ty)?)?;
        offset += entry.len() + 1;
    }
    Ok(env)
}

/// Interpreter for one theory over one domain universe, sharing inference
/// results across calls.
pub struct Interpreter<'a> {
    theory: &'a Arc<Theory>,
    engine: Inference<'a>,
}

impl<'a> Interpreter<'a> {
    pub fn new(theory: &'a Arc<Theory>, u: &'a TypeUniverse) -> Result<Interpreter<'a>> {
        Ok(Interpreter {
            theory,
            engine: Inference::new(theory, u)?,
        })
    }

    pub fn interp(&mut self, t: &Term, env: &Env, depth: usize) -> Result<Filter> {
        let g = self.engine.generator(&env.basis(), t, depth)?;
        Filter::principal(self.theory, g)
    }
}

/// Interpretation of `t` under `env`.
pub fn interp(
    theory: &Arc<Theory>,
    t: &Term,
    env: &Env,
    u: &TypeUniverse,
    depth: usize,
) -> Result<Filter> {
    Interpreter::new(theory, u)?.interp(t, env, depth)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LawLine {
    pub law: u8,
    pub term: String,
    pub env: String,
    pub pass: bool,
}

impl fmt::Display for LawLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "LAW{} {} {} {verdict}", self.law, self.term, self.env)
    }
}

#[derive(Clone, Debug, Default)]
pub struct LawReport {
    pub lines: Vec<LawLine>,
}

impl LawReport {
    pub fn all_pass(&self) -> bool {
        self.lines.iter().all(|l| l.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &LawLine> {
        self.lines.iter().filter(|l| !l.pass)
    }
}

impl fmt::Display for LawReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Checks the λ-model laws on each sample. Law numbers:
/// 1 variables denote their binding, 2 application is filter application,
/// 3 abstraction applied to a principal filter is substitution in the
/// environment, 4 bindings outside the free variables are irrelevant,
/// 5 renaming a binder is irrelevant, 6 weak extensionality, 7 η.
///
/// Laws 3 and 6 quantify over principal filters generated by members of `u`.
/// `depth` must cover the abstraction nesting of each sample plus two.
pub fn model_laws_suite(
    theory: &Arc<Theory>,
    samples: &[(Term, Env)],
    u: &TypeUniverse,
    depth: usize,
) -> Result<LawReport> {
    let mut ip = Interpreter::new(theory, u)?;
    let args: Vec<Filter> = u
        .members()
        .iter()
        .map(|a| Filter::principal(theory, a.clone()))
        .collect::<Result<_>>()?;
    let mut report = LawReport::default();
    for (t, env) in samples {
        let mut push = |law: u8, pass: bool| {
            report.lines.push(LawLine {
                law,
                term: t.to_string(),
                env: env.to_string(),
                pass,
            })
        };
        let fv = t.free_vars();
        let mut avoid = fv.clone();
        avoid.extend(env.vars().map(Arc::from));
        let here = ip.interp(t, env, depth)?;

        let mut ok = true;
        for x in fv.iter() {
            ok &= ip
                .interp(&Term::Var(x.clone()), env, depth)?
                .same(&env.get(x))?;
        }
        push(1, ok);

        let mut ok = true;
        for s in subterms(t) {
            if let Term::App(f, a) = &s {
                let lhs = ip.interp(&s, env, depth)?;
                let rhs = ip
                    .interp(f, env, depth)?
                    .apply(&ip.interp(a, env, depth)?)?;
                ok &= lhs.same(&rhs)?;
            }
        }
        push(2, ok);

        let (x, body) = match t {
            Term::Abs(x, b) => (x.to_string(), (**b).clone()),
            _ => (
                fv.iter()
                    .next()
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "x".into()),
                t.clone(),
            ),
        };
        let lam = Term::abs(&x, body.clone());
        let lam_here = ip.interp(&lam, env, depth)?;
        let mut ok = true;
        for arg in &args {
            let lhs = lam_here.apply(arg)?;
            let rhs = ip.interp(&body, &env.with(&x, arg.clone())?, depth)?;
            ok &= lhs.same(&rhs)?;
        }
        push(3, ok);

        let spare = fresh_name("v", &avoid);
        let mut other = env.with(
            &spare,
            args.last()
                .cloned()
                .unwrap_or_else(|| Filter::bottom(theory)),
        )?;
        for v in env.vars().map(str::to_string).collect::<Vec<_>>() {
            if !fv.contains(v.as_str()) {
                other = other.without(&v);
            }
        }
        push(4, ip.interp(t, &other, depth)?.same(&here)?);

        let mut avoid_lam = avoid.clone();
        avoid_lam.insert(x.as_str().into());
        let y = fresh_name(&x, &avoid_lam);
        let renamed = Term::abs(&y, body.substitute(&x, &Term::var(&y)));
        push(5, ip.interp(&renamed, env, depth)?.same(&lam_here)?);

        // Weak extensionality, against a body that agrees pointwise.
        let z = fresh_name("z", &avoid_lam);
        let twin = Term::app(Term::abs(&z, body.clone()), Term::var(&x));
        let mut agree = true;
        for arg in &args {
            let e = env.with(&x, arg.clone())?;
            agree &= ip
                .interp(&body, &e, depth)?
                .same(&ip.interp(&twin, &e, depth)?)?;
        }
        let ok = !agree
            || ip
                .interp(&Term::abs(&x, twin), env, depth)?
                .same(&lam_here)?;
        push(6, agree && ok);

        let e = fresh_name("x", &avoid);
        let eta = Term::abs(&e, Term::app(t.clone(), Term::var(&e)));
        push(7, ip.interp(&eta, env, depth)?.same(&here)?);
    }
    Ok(report)
}

fn subterms(t: &Term) -> Vec<Term> {
    let mut out = vec![t.clone()];
    match t {
        Term::Var(_) => {}
        Term::Abs(_, b) => out.extend(subterms(b)),
        Term::App(f, a) => {
            out.extend(subterms(f));
            out.extend(subterms(a));
        }
    }
    out
}
