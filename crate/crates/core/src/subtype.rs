//! Syntax-directed decision procedure for the type preorder of a theory.
//!
//! Goals `a <= b` are split on the conjuncts of `b`. An atomic goal is
//! closed by the constant order or by unfolding the atom's arrow axiom. An
//! arrow goal `C -> D` either has `D ~ Top`, or is decided on the arrows of
//! `a` (atoms unfolded one level): with `J` the arrows whose domain is above
//! `C`, the goal holds iff the meet of their codomains is below `D`. The
//! largest such `J` dominates every smaller one, so no subset search is
//! needed.
//!
//! A goal met again while still open counts as false. False answers that
//! depended on an open ancestor are provisional and never enter the cache.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::theory::Theory;
use crate::types::{Atom, Type};

const NO_LINK: usize = usize::MAX;

/// Default per-query goal budget.
pub const DEFAULT_GOAL_BUDGET: usize = 5_000_000;

pub(crate) struct Solver<'t> {
    th: &'t Theory,
    open: HashMap<(Type, Type), usize>,
    steps: usize,
    budget: usize,
}

impl<'t> Solver<'t> {
    pub(crate) fn new(th: &'t Theory) -> Self {
        Solver {
            th,
            open: HashMap::new(),
            steps: 0,
            budget: DEFAULT_GOAL_BUDGET,
        }
    }

    pub(crate) fn decide(&mut self, a: &Type, b: &Type) -> Result<bool> {
        Ok(self.sub(a, b)?.0)
    }

    fn sub(&mut self, a: &Type, b: &Type) -> Result<(bool, usize)> {
        if b.is_top() || a == b {
            return Ok((true, NO_LINK));
        }
        if !matches!(b, Type::Inter(_)) && a.parts().contains(b) {
            return Ok((true, NO_LINK));
        }
        if let Some(v) = self.th.cached(a, b) {
            return Ok((v, NO_LINK));
        }
        let key = (a.clone(), b.clone());
        if let Some(&at) = self.open.get(&key) {
            return Ok((false, at));
        }
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Error::Resource(format!(
                "subtype query exceeded {} goals",
                self.budget
            )));
        }
        let me = self.open.len();
        self.open.insert(key.clone(), me);
        let res = self.step(a, b);
        self.open.remove(&key);
        let (v, low) = res?;
        if v || low >= me {
            self.th.store(key, v);
            Ok((v, NO_LINK))
        } else {
            Ok((false, low))
        }
    }

    fn step(&mut self, a: &Type, b: &Type) -> Result<(bool, usize)> {
        match b {
            Type::Inter(parts) => {
                for p in parts.iter() {
                    let (v, low) = self.sub(a, p)?;
                    if !v {
                        return Ok((false, low));
                    }
                }
                Ok((true, NO_LINK))
            }
            Type::Atom(psi) => self.atom_goal(a, psi),
            Type::Arrow(c, d) => self.arrow_goal(a, c, d),
        }
    }

    fn atom_goal(&mut self, a: &Type, psi: &Atom) -> Result<(bool, usize)> {
        for p in a.parts() {
            if let Type::Atom(q) = p {
                if self.th.atom_le(q, psi) {
                    return Ok((true, NO_LINK));
                }
            }
        }
        match self.th.body(psi) {
            Some(body) => {
                let body = body.clone();
                self.sub(a, &body)
            }
            None => Ok((false, NO_LINK)),
        }
    }

    fn arrow_goal(&mut self, a: &Type, c: &Type, d: &Type) -> Result<(bool, usize)> {
        let top = Type::top();
        let (trivial, mut low) = self.sub(&top, d)?;
        if trivial {
            return Ok((true, NO_LINK));
        }
        let mut cods = Vec::new();
        for (dom, cod) in self.th.arrows_of(a) {
            let (v, l) = self.sub(c, &dom)?;
            low = low.min(l);
            if v {
                cods.push(cod);
            }
        }
        if cods.is_empty() {
            return Ok((false, low));
        }
        let (v, l) = self.sub(&Type::inter(cods), d)?;
        if v {
            Ok((true, NO_LINK))
        } else {
            Ok((false, low.min(l)))
        }
    }
}
