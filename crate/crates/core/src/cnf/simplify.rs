//! Fixed-point clause simplification.
//!
//! Each round removes duplicates, propagates the first unit clause into the
//! ledger, drops absorbed clauses (`A(A+B) = A`) and performs the first
//! available merge `(A+x)(A+¬x) = A` in clause order, replacing the earlier
//! clause and deleting the later one. The clause list stays an antichain
//! between rounds, so absorption after a merge only needs the new clause.

use std::collections::{HashMap, HashSet};

use super::{Clause, CnfFormula, Literal};

pub fn simplify(f: &CnfFormula) -> CnfFormula {
    let mut clauses = f.clauses.clone();
    let mut ledger = f.ledger.clone();
    let mut full = true;
    loop {
        if full {
            dedupe(&mut clauses);
            if let Some(unit) = clauses.iter().find(|c| c.len() == 1).map(|c| c.literals()[0].clone()) {
                propagate(&mut clauses, &unit);
                ledger.push(unit);
                continue;
            }
            absorb_all(&mut clauses);
            full = false;
        }
        let Some((a, b, lit)) = first_merge(&clauses) else { break };
        clauses[a] = clauses[a].without(&lit);
        clauses.remove(b);
        if clauses[a].len() <= 1 {
            full = true;
            continue;
        }
        absorb_by(&mut clauses, a);
    }
    CnfFormula { variables: f.variables.clone(), clauses, ledger }
}

pub(crate) fn dedupe(clauses: &mut Vec<Clause>) {
    let mut seen = HashSet::new();
    clauses.retain(|c| seen.insert(c.clone()));
}

fn propagate(clauses: &mut Vec<Clause>, unit: &Literal) {
    let opposite = unit.negate();
    clauses.retain(|c| !c.contains(unit));
    for c in clauses.iter_mut() {
        if c.contains(&opposite) {
            *c = c.without(&opposite);
        }
    }
}

/// Removes every clause that has a proper subset elsewhere in the list.
pub(crate) fn absorb_all(clauses: &mut Vec<Clause>) {
    let mut order: Vec<usize> = (0..clauses.len()).collect();
    order.sort_by_key(|&k| clauses[k].len());
    let mut kept: Vec<usize> = Vec::new();
    let mut drop = vec![false; clauses.len()];
    for &k in &order {
        if kept.iter().any(|&s| clauses[s].len() < clauses[k].len() && clauses[s].is_subset(&clauses[k])) {
            drop[k] = true;
        } else {
            kept.push(k);
        }
    }
    let mut k = 0;
    clauses.retain(|_| {
        k += 1;
        !drop[k - 1]
    });
}

/// Restores the antichain after clause `a` shrank: an equal clause keeps
/// only its first copy, strict supersets go.
fn absorb_by(clauses: &mut Vec<Clause>, a: usize) {
    let new = clauses[a].clone();
    let first_equal = clauses.iter().position(|c| *c == new).unwrap_or(a);
    let mut k = 0;
    clauses.retain(|c| {
        k += 1;
        k - 1 == first_equal || !new.is_subset(c)
    });
}

/// First pair `(a, b)`, `a < b`, of equal-length clauses differing in one
/// complementary literal, with the literal to drop from `a`.
fn first_merge(clauses: &[Clause]) -> Option<(usize, usize, Literal)> {
    let mut index: HashMap<(Clause, Literal), Vec<usize>> = HashMap::new();
    for (k, c) in clauses.iter().enumerate() {
        for lit in c.literals() {
            index.entry((c.without(lit), lit.clone())).or_default().push(k);
        }
    }
    for (a, c) in clauses.iter().enumerate() {
        let best = c
            .literals()
            .iter()
            .filter_map(|lit| {
                let partners = index.get(&(c.without(lit), lit.negate()))?;
                partners.iter().copied().find(|&b| b > a).map(|b| (b, lit.clone()))
            })
            .min_by_key(|(b, _)| *b);
        if let Some((b, lit)) = best {
            return Some((a, b, lit));
        }
    }
    None
}
