//! Exhaustive oracles over formulas.
//!
//! [`solve_brute_force`] enumerates every assignment of the registered
//! variables. [`project_solutions`] enumerates assignments of a chosen
//! variable subset and decides the remainder with a counter-based DPLL
//! search, which keeps the unit-BDD encodings (hundreds of auxiliaries that
//! are fully determined by the factor bits) tractable.

use std::collections::{BTreeMap, BTreeSet};

use super::{CnfError, CnfFormula, VariableId};
use crate::problem::ProblemInstance;

pub const BRUTE_FORCE_CAP: usize = 30;

pub type Assignment = BTreeMap<VariableId, bool>;

/// All satisfying assignments over the registered variables, in ascending
/// binary order of the variable list (first variable most significant).
pub fn solve_brute_force(f: &CnfFormula) -> Result<Vec<Assignment>, CnfError> {
    let vars: Vec<&VariableId> = f.variables.iter().collect();
    if vars.len() > BRUTE_FORCE_CAP {
        return Err(CnfError::TooLarge { vars: vars.len(), cap: BRUTE_FORCE_CAP });
    }
    let k = vars.len();
    let bit = |v: &VariableId| k - 1 - vars.binary_search(&v).expect("registered variable");
    let masks: Vec<(u32, u32)> = f
        .all_clauses()
        .iter()
        .map(|c| {
            c.literals().iter().fold((0, 0), |(pos, neg), l| {
                let m = 1u32 << bit(&l.var);
                if l.negated {
                    (pos, neg | m)
                } else {
                    (pos | m, neg)
                }
            })
        })
        .collect();
    let mut out = Vec::new();
    for a in 0..(1u64 << k) {
        let a = a as u32;
        if masks.iter().all(|&(pos, neg)| a & pos != 0 || !a & neg != 0) {
            out.push(vars.iter().map(|&v| (v.clone(), a >> bit(v) & 1 == 1)).collect());
        }
    }
    Ok(out)
}

/// Distinct restrictions of the satisfying assignments to `proj`.
pub fn project_solutions(f: &CnfFormula, proj: &[VariableId]) -> BTreeSet<Vec<bool>> {
    let mut solver = Dpll::new(f, proj);
    let order: Vec<usize> = proj.iter().map(|v| solver.ids[v]).collect();
    let mut out = BTreeSet::new();
    if solver.initial_conflict {
        return out;
    }
    solver.enumerate(&order, 0, &mut out);
    out
}

/// Satisfiability with some variables pinned.
pub fn is_satisfiable(f: &CnfFormula, fixed: &[(VariableId, bool)]) -> bool {
    let mut g = f.clone();
    for (v, b) in fixed {
        g.push(super::Clause::unit(super::Literal { var: v.clone(), negated: !b }));
    }
    let mut solver = Dpll::new(&g, &[]);
    !solver.initial_conflict && solver.solve()
}

/// Factor pairs `(p, q)` encoded by the satisfying assignments.
pub fn factor_projection(f: &CnfFormula, inst: &ProblemInstance) -> BTreeSet<(u64, u64)> {
    let proj: Vec<VariableId> = (0..inst.np)
        .map(VariableId::p)
        .chain((0..inst.nq).map(VariableId::q))
        .collect();
    project_solutions(f, &proj)
        .into_iter()
        .map(|bits| {
            let word = |bs: &[bool]| bs.iter().rev().fold(0u64, |acc, &b| acc << 1 | b as u64);
            (word(&bits[..inst.np]), word(&bits[inst.np..]))
        })
        .collect()
}

struct Dpll {
    ids: BTreeMap<VariableId, usize>,
    /// Clauses as literal codes `2 * var + negated`.
    clauses: Vec<Vec<usize>>,
    occurrences: Vec<Vec<usize>>,
    value: Vec<Option<bool>>,
    satisfied: Vec<usize>,
    falsified: Vec<usize>,
    trail: Vec<usize>,
    initial_conflict: bool,
}

impl Dpll {
    fn new(f: &CnfFormula, extra: &[VariableId]) -> Self {
        let mut ids = BTreeMap::new();
        for v in f.variables.iter().chain(extra).chain(f.ledger.iter().map(|l| &l.var)) {
            let next = ids.len();
            ids.entry(v.clone()).or_insert(next);
        }
        let mut clauses = Vec::new();
        let mut initial_conflict = false;
        for c in f.all_clauses() {
            if c.is_empty() {
                initial_conflict = true;
            }
            let mut codes: Vec<usize> = c
                .literals()
                .iter()
                .map(|l| {
                    let next = ids.len();
                    2 * *ids.entry(l.var.clone()).or_insert(next) + l.negated as usize
                })
                .collect();
            codes.sort_unstable();
            clauses.push(codes);
        }
        let mut occurrences = vec![Vec::new(); 2 * ids.len()];
        for (k, c) in clauses.iter().enumerate() {
            for &lit in c {
                occurrences[lit].push(k);
            }
        }
        let mut s = Self {
            value: vec![None; ids.len()],
            satisfied: vec![0; clauses.len()],
            falsified: vec![0; clauses.len()],
            ids,
            clauses,
            occurrences,
            trail: Vec::new(),
            initial_conflict,
        };
        let units: Vec<usize> = s.clauses.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
        for lit in units {
            if !s.assume(lit) {
                s.initial_conflict = true;
                break;
            }
        }
        s
    }

    /// Assigns `lit` true and propagates; returns false on conflict. The
    /// trail keeps every assignment so callers can undo to a mark.
    fn assume(&mut self, lit: usize) -> bool {
        let mut queue = vec![lit];
        let mut ok = true;
        while let Some(lit) = queue.pop() {
            let var = lit / 2;
            let want = lit % 2 == 0;
            match self.value[var] {
                Some(v) if v == want => continue,
                Some(_) => {
                    ok = false;
                    break;
                }
                None => {}
            }
            self.value[var] = Some(want);
            self.trail.push(var);
            for &k in &self.occurrences[lit] {
                self.satisfied[k] += 1;
            }
            for &k in &self.occurrences[lit ^ 1] {
                self.falsified[k] += 1;
                if self.satisfied[k] > 0 {
                    continue;
                }
                let len = self.clauses[k].len();
                if self.falsified[k] == len {
                    ok = false;
                } else if self.falsified[k] + 1 == len {
                    if let Some(&free) = self.clauses[k].iter().find(|&&l| self.value[l / 2].is_none()) {
                        queue.push(free);
                    }
                }
            }
            if !ok {
                break;
            }
        }
        ok
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().expect("trail entry");
            let lit = 2 * var + (!self.value[var].expect("assigned")) as usize;
            for &k in &self.occurrences[lit] {
                self.satisfied[k] -= 1;
            }
            for &k in &self.occurrences[lit ^ 1] {
                self.falsified[k] -= 1;
            }
            self.value[var] = None;
        }
    }

    fn enumerate(&mut self, order: &[usize], depth: usize, out: &mut BTreeSet<Vec<bool>>) {
        if depth == order.len() {
            let mark = self.trail.len();
            if self.solve() {
                out.insert(order.iter().map(|&v| self.value[v].expect("projected variable")).collect());
            }
            self.undo_to(mark);
            return;
        }
        let var = order[depth];
        if self.value[var].is_some() {
            self.enumerate(order, depth + 1, out);
            return;
        }
        for want in [false, true] {
            let mark = self.trail.len();
            if self.assume(2 * var + !want as usize) {
                self.enumerate(order, depth + 1, out);
            }
            self.undo_to(mark);
        }
    }

    /// Completes the current partial assignment; leaves it in place on
    /// success.
    fn solve(&mut self) -> bool {
        let Some(k) = (0..self.clauses.len()).find(|&k| self.satisfied[k] == 0) else {
            return true;
        };
        let Some(&lit) = self.clauses[k].iter().find(|&&l| self.value[l / 2].is_none()) else {
            return false;
        };
        for choice in [lit, lit ^ 1] {
            let mark = self.trail.len();
            if self.assume(choice) && self.solve() {
                return true;
            }
            self.undo_to(mark);
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::{parse_clauses, Clause};

    fn formula(text: &str) -> CnfFormula {
        CnfFormula::from_clauses(parse_clauses(text).unwrap())
    }

    #[test]
    fn empty_formula_has_one_empty_solution() {
        assert_eq!(solve_brute_force(&CnfFormula::new()).unwrap(), vec![Assignment::new()]);
    }

    #[test]
    fn cap_is_enforced() {
        let mut f = CnfFormula::new();
        for k in 0..31 {
            f.register(VariableId::AuxNamed { name: format!("x{k}") });
        }
        assert!(matches!(solve_brute_force(&f), Err(CnfError::TooLarge { vars: 31, .. })));
    }

    #[test]
    fn dpll_agrees_with_enumeration() {
        let f = formula("(p0+q0)(¬p0+¬q0)(p1+¬q1+q0)(¬p1+q1)");
        let brute: BTreeSet<Vec<bool>> = solve_brute_force(&f)
            .unwrap()
            .into_iter()
            .map(|a| a.into_values().collect())
            .collect();
        let vars: Vec<VariableId> = f.variables.iter().cloned().collect();
        assert_eq!(project_solutions(&f, &vars), brute);
    }

    #[test]
    fn pinned_satisfiability() {
        let f = formula("(p0+q0)(¬p0+¬q0)");
        assert!(is_satisfiable(&f, &[(VariableId::p(0), true)]));
        assert!(!is_satisfiable(&f, &[(VariableId::p(0), true), (VariableId::q(0), true)]));
        let empty = CnfFormula::from_clauses([Clause::new([]).unwrap()]);
        assert!(!is_satisfiable(&empty, &[]));
    }
}
