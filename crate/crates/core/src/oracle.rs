//! Brute-force reference for the type preorder.
//!
//! Saturates the judgement set generated by the base axioms and rules plus
//! the theory's own axioms, restricted to the finite set of types of size at
//! most `size_cap`. Shares nothing with the syntax-directed procedure in
//! [`crate::subtype`].
//!
//! `(mon)` is applied in its meet form (`C <= A`, `C <= B` give
//! `C <= A & B`), which is interderivable with `(mon)` plus `(idem)` and
//! `(trans)` once intersections are normalized.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::theory::Theory;
use crate::types::{enumerate_types, normalize, Type};

/// Saturated judgement set over all types up to a size cap.
pub struct Oracle {
    types: Vec<Type>,
    index: HashMap<Type, usize>,
    rows: Vec<FixedBitSet>,
    size_cap: usize,
}

/// Upper bound on the number of types the closure may range over.
pub const ORACLE_TYPE_CAP: usize = 6_000;

impl Oracle {
    pub fn build(th: &Theory, size_cap: usize) -> Result<Oracle> {
        let types = enumerate_types(th.constants(), size_cap);
        if types.len() > ORACLE_TYPE_CAP {
            return Err(Error::Resource(format!(
                "oracle closure over {} types exceeds cap {ORACLE_TYPE_CAP}",
                types.len()
            )));
        }
        let n = types.len();
        let index: HashMap<Type, usize> = types
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        let mut rows = vec![FixedBitSet::with_capacity(n); n];
        let top = index[&Type::top()];
        let idx = |t: &Type| index.get(&normalize(t)).copied();

        let mut arrows = Vec::new();
        let mut inters = Vec::new();
        for (i, t) in types.iter().enumerate() {
            // (refl), (Top)
            rows[i].insert(i);
            rows[i].insert(top);
            match t {
                Type::Arrow(a, b) => arrows.push((i, index[&**a], index[&**b])),
                Type::Inter(ps) => {
                    inters.push((i, ps.iter().map(|p| index[p]).collect::<Vec<_>>()))
                }
                Type::Atom(_) => {}
            }
        }
        // (incl_L), (incl_R): an intersection is below any sub-intersection
        for (i, parts) in &inters {
            for (j, t) in types.iter().enumerate() {
                if t.parts().iter().all(|p| parts.contains(&index[p])) {
                    rows[*i].insert(j);
                }
            }
            for p in parts {
                rows[*i].insert(*p);
            }
        }
        // (Top-eta)
        if let Some(j) = idx(&Type::arrow(Type::top(), Type::top())) {
            rows[top].insert(j);
        }
        // (->-&): (A->B) & (A->C) <= A -> B & C
        for &(x, a, b) in &arrows {
            for &(y, a2, c) in &arrows {
                if a != a2 || x >= y {
                    continue;
                }
                let lhs = types[x].meet(&types[y]);
                let rhs = Type::arrow(types[a].clone(), types[b].meet(&types[c]));
                if let (Some(l), Some(r)) = (idx(&lhs), idx(&rhs)) {
                    rows[l].insert(r);
                }
            }
        }
        // theory axioms
        for (p, q) in th.order_axioms() {
            if let (Some(l), Some(r)) = (idx(&Type::Atom(p.clone())), idx(&Type::Atom(q.clone()))) {
                rows[l].insert(r);
            }
        }
        for (psi, body) in th.arrow_axioms() {
            if let (Some(l), Some(r)) = (idx(&Type::Atom(psi.clone())), idx(body)) {
                rows[l].insert(r);
                rows[r].insert(l);
            }
        }

        loop {
            let before: usize = rows.iter().map(|r| r.count_ones(..)).sum();
            // (trans)
            for k in 0..n {
                let rk = rows[k].clone();
                for row in rows.iter_mut() {
                    if row.contains(k) {
                        row.union_with(&rk);
                    }
                }
            }
            // (mon) in meet form
            for row in rows.iter_mut() {
                for (j, parts) in &inters {
                    if !row.contains(*j) && parts.iter().all(|p| row.contains(*p)) {
                        row.insert(*j);
                    }
                }
            }
            // (eta)
            for &(x, a, b) in &arrows {
                for &(y, a2, b2) in &arrows {
                    if !rows[x].contains(y) && rows[a2].contains(a) && rows[b].contains(b2) {
                        rows[x].insert(y);
                    }
                }
            }
            let after: usize = rows.iter().map(|r| r.count_ones(..)).sum();
            if after == before {
                break;
            }
        }
        Ok(Oracle {
            types,
            index,
            rows,
            size_cap,
        })
    }

    pub fn types(&self) -> &[Type] {
        &self.types
    }

    pub fn size_cap(&self) -> usize {
        self.size_cap
    }

    /// `None` when either side lies outside the closure's type set.
    pub fn query(&self, a: &Type, b: &Type) -> Option<bool> {
        let i = *self.index.get(a)?;
        let j = *self.index.get(b)?;
        Some(self.rows[i].contains(j))
    }
}

/// One-shot oracle query.
pub fn oracle_subtype(th: &Theory, a: &Type, b: &Type, size_cap: usize) -> Result<bool> {
    th.check_type(a)?;
    th.check_type(b)?;
    if a.size() > size_cap || b.size() > size_cap {
        return Err(Error::Precondition(format!(
            "operands must have size at most {size_cap}"
        )));
    }
    let o = Oracle::build(th, size_cap)?;
    Ok(o.query(a, b).expect("operands lie inside the closure"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::parse_type_unchecked as p;

    #[test]
    fn examples() {
        let th = Theory::d_infinity();
        assert!(oracle_subtype(&th, &p("w").unwrap(), &p("Top").unwrap(), 4).unwrap());
        assert!(!oracle_subtype(&th, &p("Top").unwrap(), &p("w").unwrap(), 4).unwrap());
        assert!(oracle_subtype(
            &th,
            &p("(Top -> w) & w").unwrap(),
            &p("Top -> w").unwrap(),
            6
        )
        .unwrap());
    }
}
