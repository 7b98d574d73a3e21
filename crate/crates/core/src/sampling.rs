//! Seeded random generation of types, terms and environments.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::filter::{Env, Filter};
use crate::lambda::Term;
use crate::theory::Theory;
use crate::types::{Atom, Type, TypeUniverse};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random normalized type of size at most `max_size` (at least 1).
pub fn random_type<R: Rng>(rng: &mut R, atoms: &BTreeSet<Atom>, max_size: usize) -> Type {
    let atoms: Vec<&Atom> = atoms.iter().collect();
    gen_type(rng, &atoms, max_size.max(1))
}

fn gen_type<R: Rng>(rng: &mut R, atoms: &[&Atom], budget: usize) -> Type {
    if budget < 3 || rng.gen_bool(0.3) {
        return Type::Atom((*atoms.choose(rng).unwrap()).clone());
    }
    let left = rng.gen_range(1..=budget - 2);
    let right = rng.gen_range(1..=budget - 1 - left);
    let a = gen_type(rng, atoms, left);
    let b = gen_type(rng, atoms, right);
    if rng.gen_bool(0.6) {
        Type::arrow(a, b)
    } else {
        a.meet(&b)
    }
}

/// Random term of size at most `max_size` over the given free variables
/// (binders are drawn from the same pool).
pub fn random_term<R: Rng>(rng: &mut R, vars: &[&str], max_size: usize) -> Term {
    gen_term(rng, vars, max_size.max(1))
}

fn gen_term<R: Rng>(rng: &mut R, vars: &[&str], budget: usize) -> Term {
    if budget == 1 || rng.gen_bool(0.25) {
        return Term::var(vars.choose(rng).unwrap());
    }
    if budget >= 3 && rng.gen_bool(0.55) {
        let left = rng.gen_range(1..=budget - 2);
        let right = rng.gen_range(1..=budget - 1 - left);
        return Term::app(gen_term(rng, vars, left), gen_term(rng, vars, right));
    }
    let x = vars.choose(rng).unwrap();
    Term::abs(x, gen_term(rng, vars, budget - 1))
}

/// Environment binding each of `vars` to a principal filter generated by a
/// random member of `u`.
pub fn random_env<R: Rng>(
    rng: &mut R,
    theory: &Arc<Theory>,
    vars: &[&str],
    u: &TypeUniverse,
) -> Result<Env> {
    let mut env = Env::empty(theory);
    for x in vars {
        let g = u.members().choose(rng).cloned().unwrap_or_else(Type::top);
        env = env.with(x, Filter::principal(theory, g)?)?;
    }
    Ok(env)
}
