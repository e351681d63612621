//! Failed-path encoding.
//!
//! Every branch sequence that leaves a live column entry and ends in a dead
//! node is forbidden by a clause block: the negated conjunction is expanded
//! to CNF by distribution (`¬(p_i q_j)` gives one clause literal pair,
//! `¬¬(p_i q_j)` splits into `p_i` and `q_j`). When a column has several live
//! entries, the block of each entry is guarded by the condition that the
//! assignment reaches that entry, written as the disjunction of the passing
//! paths of the previous column. The guard is multiplied out against the
//! block instead of introducing named auxiliaries.
//!
//! Only columns of weight below the bit length of `n` are walked. Heavier
//! terms can only overshoot, so each contributes `(¬p_i + ¬q_j)` unless the
//! formula already implies it.

use crate::bdd::{Bdd, Branch, ColumnPaths};

use super::simplify::{absorb_all, dedupe};
use super::{is_satisfiable, simplify, Clause, CnfError, CnfFormula, Literal, VariableId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FailedPathOptions {
    /// Largest number of live entries a column may have.
    pub max_entry_nodes: usize,
}

impl Default for FailedPathOptions {
    fn default() -> Self {
        Self { max_entry_nodes: 2 }
    }
}

pub fn cnf_failed_paths(bdd: &Bdd) -> Result<CnfFormula, CnfError> {
    cnf_failed_paths_with(bdd, FailedPathOptions::default())
}

pub fn cnf_failed_paths_with(bdd: &Bdd, opts: FailedPathOptions) -> Result<CnfFormula, CnfError> {
    let inst = &bdd.instance;
    let bits = inst.bit_len();
    let columns: Vec<ColumnPaths> = bdd.column_paths().into_iter().filter(|c| c.weight < bits).collect();

    let mut clauses: Vec<Clause> = Vec::new();
    // Reach condition of each entry of the previous column; `None` is true.
    let mut guards: Vec<Option<Vec<Vec<Branch>>>> = Vec::new();
    let mut previous: Option<&ColumnPaths> = None;
    for col in &columns {
        if col.entries.len() > opts.max_entry_nodes {
            return Err(CnfError::TooManyEntryNodes { column: col.weight, entries: col.entries.len() });
        }
        let mut block = Vec::new();
        let mut next_guards = Vec::new();
        if col.entries.len() == 1 {
            block.extend(negate_dnf(&col.entries[0].failed));
            next_guards.push(None);
        } else {
            let prev = previous.expect("the first column has only the root entry");
            for entry in &col.entries {
                let mut reach = Vec::new();
                for (source, guard) in prev.entries.iter().zip(&guards) {
                    for (path, exit) in &source.passed {
                        if *exit != entry.value {
                            continue;
                        }
                        match guard {
                            None => reach.push(path.clone()),
                            Some(conjs) => reach.extend(conjs.iter().map(|g| [g.as_slice(), path].concat())),
                        }
                    }
                }
                if !entry.failed.is_empty() {
                    block.extend(cross(&negate_dnf(&reach), &negate_dnf(&entry.failed)));
                }
                next_guards.push(Some(reach));
            }
        }
        dedupe(&mut block);
        absorb_all(&mut block);
        clauses.extend(block);
        guards = next_guards;
        previous = Some(col);
    }

    let mut f = CnfFormula::new();
    for i in 0..inst.np {
        f.register(VariableId::p(i));
    }
    for j in 0..inst.nq {
        f.register(VariableId::q(j));
    }
    for c in clauses {
        f.push(c);
    }
    let mut f = simplify(&f);

    let mut extended = false;
    for term in bdd.terms.iter().filter(|t| t.weight() >= bits) {
        let (p, q) = (VariableId::p(term.i), VariableId::q(term.j));
        if is_satisfiable(&f, &[(p.clone(), true), (q.clone(), true)]) {
            f.push_lits([p.neg(), q.neg()]);
            extended = true;
        }
    }
    if extended {
        f = simplify(&f);
    }
    Ok(f)
}

/// CNF of `¬(b_1 ∧ b_2 ∧ …)` for one branch sequence.
fn negate_path(path: &[Branch]) -> Vec<Vec<Literal>> {
    let mut out: Vec<Vec<Literal>> = vec![Vec::new()];
    for b in path {
        let (p, q) = (VariableId::p(b.term.i), VariableId::q(b.term.j));
        if b.taken {
            for c in &mut out {
                c.push(p.clone().neg());
                c.push(q.clone().neg());
            }
        } else {
            out = out
                .into_iter()
                .flat_map(|c| {
                    [p.clone().pos(), q.clone().pos()].map(|lit| {
                        let mut c = c.clone();
                        c.push(lit);
                        c
                    })
                })
                .collect();
        }
    }
    out
}

/// CNF of the negated disjunction of branch sequences.
fn negate_dnf(paths: &[Vec<Branch>]) -> Vec<Clause> {
    paths.iter().flat_map(|p| negate_path(p)).filter_map(Clause::new).collect()
}

/// Clause-wise product of two CNFs (their disjunction), tautologies dropped.
fn cross(a: &[Clause], b: &[Clause]) -> Vec<Clause> {
    a.iter()
        .flat_map(|x| b.iter().filter_map(move |y| Clause::new(x.literals().iter().chain(y.literals()).cloned())))
        .collect()
}
