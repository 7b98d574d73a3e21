use std::sync::Arc;

use proptest::prelude::*;

use eitt::assignment::{check_derivation, Basis, Inference};
use eitt::easiness::{pair, unpair};
use eitt::filter::Filter;
use eitt::lambda::{parse_term, Term};
use eitt::sampling::{random_term, random_type, rng};
use eitt::types::{parse_type, subterm_closure, DEFAULT_UNIVERSE_CAP};
use eitt::{normalize, Theory, Type, TypeUniverse};

fn d0() -> Theory {
    Theory::d_infinity()
}

fn ty(seed: u64, size: usize) -> Type {
    random_type(&mut rng(seed), d0().constants(), size)
}

fn tm(seed: u64, size: usize) -> Term {
    random_term(&mut rng(seed), &["x", "y", "z"], size)
}

/// Wraps a normalized type in redundant structure that `normalize` removes.
fn scramble(t: &Type) -> Type {
    match t {
        Type::Atom(_) => Type::Inter(vec![t.clone(), t.clone()].into()),
        Type::Arrow(a, b) => Type::Arrow(Arc::new(scramble(a)), Arc::new(scramble(b))),
        Type::Inter(ps) => {
            let mut v: Vec<Type> = ps.iter().rev().map(scramble).collect();
            v.push(ps[0].clone());
            Type::Inter(vec![Type::Inter(v.into())].into())
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalize_is_idempotent_and_keeps_atoms(seed in any::<u64>()) {
        let t = ty(seed, 9);
        let messy = scramble(&t);
        let n = normalize(&messy);
        prop_assert_eq!(&n, &t);
        prop_assert_eq!(normalize(&n), n.clone());
        prop_assert_eq!(messy.atoms(), t.atoms());
    }

    #[test]
    fn type_print_parse_round_trip(seed in any::<u64>()) {
        let t = ty(seed, 11);
        let back = parse_type(&t.to_string(), d0().constants()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn term_print_parse_round_trip(seed in any::<u64>()) {
        let t = tm(seed, 14);
        let back = parse_term(&t.to_string()).unwrap();
        prop_assert_eq!(back.to_string(), t.to_string());
        prop_assert_eq!(back, t);
    }

    #[test]
    fn closure_is_subterm_closed(s1 in any::<u64>(), s2 in any::<u64>()) {
        let seed = [ty(s1, 6), ty(s2, 6)];
        let u = subterm_closure(&seed, 1, DEFAULT_UNIVERSE_CAP).unwrap();
        prop_assert!(u.is_subterm_closed());
        for t in &seed {
            prop_assert!(u.contains(t));
        }
    }

    #[test]
    fn subtype_preorder(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let th = d0();
        let (a, b, c) = (ty(s1, 6), ty(s2, 6), ty(s3, 6));
        let le = |x: &Type, y: &Type| th.subtype(x, y).unwrap();
        prop_assert!(le(&a, &a));
        prop_assert!(le(&a, &Type::top()));
        prop_assert!(le(&a.meet(&b), &a));
        prop_assert!(le(&a.meet(&b), &b));
        if le(&a, &b) && le(&b, &c) {
            prop_assert!(le(&a, &c));
        }
        let ab = a.meet(&b);
        prop_assert!(le(&ab, &ab.meet(&a)));
    }

    #[test]
    fn subtype_congruences(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), s4 in any::<u64>()) {
        let th = d0();
        let (a, a2, b, b2) = (ty(s1, 5), ty(s2, 5), ty(s3, 5), ty(s4, 5));
        let le = |x: &Type, y: &Type| th.subtype(x, y).unwrap();
        // Pair each type with something certainly below it.
        let lo_a = a.meet(&a2);
        let lo_b = b.meet(&b2);
        prop_assert!(le(&lo_a.meet(&lo_b), &a.meet(&b)));
        prop_assert!(le(&Type::arrow(a.clone(), lo_b.clone()), &Type::arrow(lo_a.clone(), b.clone())));
        prop_assert!(le(
            &Type::arrow(a.clone(), b.clone()).meet(&Type::arrow(a.clone(), b2.clone())),
            &Type::arrow(a.clone(), b.meet(&b2)),
        ));
    }

    #[test]
    fn alpha_renaming_is_equality(seed in any::<u64>()) {
        let body = tm(seed, 8);
        let renamed = Term::abs("v0", body.substitute("x", &Term::var("v0")));
        prop_assert_eq!(Term::abs("x", body), renamed);
    }

    #[test]
    fn substitution_free_variables(s1 in any::<u64>(), s2 in any::<u64>()) {
        let t = tm(s1, 10);
        let u = tm(s2, 5);
        let r = t.substitute("x", &u);
        let mut expect = t.free_vars();
        if expect.remove("x") {
            expect.extend(u.free_vars());
        }
        prop_assert_eq!(r.free_vars(), expect);
        if !t.is_free("x") {
            prop_assert_eq!(r, t);
        }
    }

    #[test]
    fn pairing_is_a_bijection(r in 0u64..1_000_000, s in 0u64..1_000_000) {
        prop_assert_eq!(unpair(pair(r, s)), (r, s));
    }
}

fn small_universe() -> TypeUniverse {
    TypeUniverse::all_up_to(d0().constants(), 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn inference_is_upward_closed_and_certified(seed in any::<u64>(), bx in 0usize..8) {
        let th = d0();
        let u = small_universe();
        let mut eng = Inference::new(&th, &u).unwrap();
        let t = tm(seed, 6);
        let basis = Basis::new().with("x", u.members()[bx % u.len()].clone());
        let got = eng.infer(&basis, &t, 3).unwrap();
        for a in &got {
            for b in u.members() {
                if th.subtype(a, b).unwrap() {
                    prop_assert!(got.contains(b));
                }
            }
            let d = eng.certify(&basis, &t, a, 3).unwrap().expect("inferred type has a derivation");
            prop_assert!(check_derivation(&th, &d));
        }
    }

    #[test]
    fn inference_is_monotone_in_the_basis(seed in any::<u64>(), i in 0usize..64, j in 0usize..64) {
        let th = d0();
        let u = small_universe();
        let mut eng = Inference::new(&th, &u).unwrap();
        let t = tm(seed, 6);
        let a = u.members()[i % u.len()].clone();
        let b = u.members()[j % u.len()].clone();
        let weak = eng.infer(&Basis::new().with("x", a.clone()), &t, 3).unwrap();
        let strong = eng.infer(&Basis::new().with("x", a.meet(&b)), &t, 3).unwrap();
        prop_assert!(weak.is_subset(&strong));
    }

    #[test]
    fn join_is_a_semilattice(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let th = Arc::new(d0());
        let f = |s| Filter::principal(&th, ty(s, 5)).unwrap();
        let (a, b, c) = (f(s1), f(s2), f(s3));
        prop_assert!(a.join(&a).unwrap().same(&a).unwrap());
        prop_assert!(a.join(&b).unwrap().same(&b.join(&a).unwrap()).unwrap());
        let l = a.join(&b).unwrap().join(&c).unwrap();
        let r = a.join(&b.join(&c).unwrap()).unwrap();
        prop_assert!(l.same(&r).unwrap());
        prop_assert!(a.included_in(&a.join(&b).unwrap()).unwrap());
    }

    #[test]
    fn application_is_monotone(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>(), s4 in any::<u64>()) {
        let th = Arc::new(d0());
        let f = |s| Filter::principal(&th, ty(s, 6)).unwrap();
        let (fun, more, arg, arg2) = (f(s1), f(s2), f(s3), f(s4));
        let big_fun = fun.join(&more).unwrap();
        let big_arg = arg.join(&arg2).unwrap();
        let base = fun.apply(&arg).unwrap();
        prop_assert!(base.included_in(&big_fun.apply(&arg).unwrap()).unwrap());
        prop_assert!(base.included_in(&fun.apply(&big_arg).unwrap()).unwrap());
        let u = small_universe();
        prop_assert!(fun.apply_within(&arg, &u).unwrap().included_in(&base).unwrap());
    }
}
