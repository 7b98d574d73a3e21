//! Model-level evidence that `(\x.x x)(\x.x x)` can denote a join
//! operator: the three semilattice equations, the join identity on
//! universe pairs, and non-triviality of the final stage.

use std::fmt;
use std::sync::Arc;

use crate::easiness::{
    nontriviality_check, run_construction, separator, FilterScheme, StagePlan, TypePredicate,
};
use crate::error::Result;
use crate::filter::{Env, Filter, Interpreter};
use crate::lambda::{parse_term, Term};
use crate::sampling;
use crate::types::Type;

/// Whether `c` has the shape `A -> B -> A & B`.
pub fn join_predicate(c: &Type) -> bool {
    match c {
        Type::Arrow(a, rest) => match &**rest {
            Type::Arrow(b, ab) => **ab == a.meet(b),
            _ => false,
        },
        _ => false,
    }
}

pub fn join_type_predicate() -> TypePredicate {
    TypePredicate::new("join", join_predicate)
}

#[derive(Clone, Debug)]
pub struct JEquation {
    pub name: &'static str,
    pub lhs: Term,
    pub rhs: Term,
}

/// The three axioms, with `(\x.x x)(\x.x x)` written out.
pub fn j_equations() -> Vec<JEquation> {
    let dd = "((\\d.d d) (\\d.d d))";
    let eq = |name, l: String, r: String| JEquation {
        name,
        lhs: parse_term(&l).unwrap(),
        rhs: parse_term(&r).unwrap(),
    };
    vec![
        eq("idempotence", format!("{dd} x x"), "x".into()),
        eq("commutativity", format!("{dd} x y"), format!("{dd} y x")),
        eq(
            "associativity",
            format!("{dd} x ({dd} y z)"),
            format!("{dd} ({dd} x y) z"),
        ),
    ]
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    /// Index of the final stage.
    pub stages: usize,
    pub universe_seed: Vec<Type>,
    pub width_bound: usize,
    pub depth: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            stages: 4,
            universe_seed: vec![separator()],
            width_bound: 1,
            depth: 3,
            samples: 50,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct JReport {
    pub lines: Vec<String>,
    pub equations_pass: bool,
    pub join_pass: bool,
    pub nontrivial: bool,
    pub plan: StagePlan,
}

impl JReport {
    pub fn consistent(&self) -> bool {
        self.equations_pass && self.join_pass && self.nontrivial
    }
}

impl fmt::Display for JReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        if self.consistent() {
            writeln!(f, "CONSISTENT (evidence)")
        } else {
            writeln!(f, "NO EVIDENCE")
        }
    }
}

fn verdict(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn verify_j(cfg: &RunConfig) -> Result<JReport> {
    let plan = run_construction(
        &Term::omega(),
        &FilterScheme::omega_scheme(),
        &join_type_predicate(),
        cfg.stages + 1,
        cfg.width_bound,
    )?;
    let th = Arc::new(plan.last().clone());
    let u = plan.universe(&cfg.universe_seed, cfg.width_bound)?;
    let mut ip = Interpreter::new(&th, &u)?;
    let mut lines: Vec<String> = plan
        .manifest()
        .lines()
        .map(|l| format!("PLAN {l}"))
        .collect();
    lines.push(format!("UNIVERSE {} types", u.len()));

    let mut rng = sampling::rng(cfg.seed);
    let mut equations_pass = true;
    let eqs = j_equations();
    for i in 0..cfg.samples {
        let env = sampling::random_env(&mut rng, &th, &["x", "y", "z"], &u)?;
        for eq in &eqs {
            let l = ip.interp(&eq.lhs, &env, cfg.depth)?;
            let r = ip.interp(&eq.rhs, &env, cfg.depth)?;
            let ok = l.same(&r)?;
            equations_pass &= ok;
            lines.push(format!("EQ {} #{i} {env} {}", eq.name, verdict(ok)));
        }
    }

    let dd = ip.interp(&Term::omega(), &Env::empty(&th), cfg.depth)?;
    lines.push(format!("DD {dd}"));
    let mut failures = Vec::new();
    let members = u.members();
    for a in members {
        for b in members {
            let fa = Filter::principal(&th, a.clone())?;
            let fb = Filter::principal(&th, b.clone())?;
            let got = dd.apply(&fa)?.apply(&fb)?;
            if !got.same(&fa.join(&fb)?)? {
                failures.push((a.clone(), b.clone()));
            }
        }
    }
    let join_pass = failures.is_empty();
    for (a, b) in failures.iter().take(5) {
        lines.push(format!("JOIN {a} | {b} FAIL"));
    }
    lines.push(format!(
        "JOIN {} pairs, {} failures {}",
        members.len() * members.len(),
        failures.len(),
        verdict(join_pass)
    ));

    let nontrivial = nontriviality_check(&plan, &u, cfg.depth)?;
    lines.push(format!("NONTRIVIAL {}", verdict(nontrivial)));

    Ok(JReport {
        lines,
        equations_pass,
        join_pass,
        nontrivial,
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::parse_type_unchecked as ty;

    #[test]
    fn predicate_shapes() {
        assert!(join_predicate(
            &ty("w -> (Top -> w) -> w & (Top -> w)").unwrap()
        ));
        assert!(join_predicate(&ty("Top -> Top -> Top").unwrap()));
        assert!(!join_predicate(&ty("w -> w").unwrap()));
        assert!(!join_predicate(&ty("w -> Top -> Top").unwrap()));
    }
}
