//! Unit-BDD encoding.
//!
//! Each live cell `(i, j; v)` owns three pass-through variables: `up` (a path
//! enters the cell), `left` (it leaves through `p_i q_j = 0`) and `right` (it
//! leaves through `p_i q_j = 1`). Seven clauses tie them to the factor bits,
//! three more tie `up` to the branches of the parent cells. The root is
//! entered, the accepting terminal is reached and branches into dead nodes
//! are closed.

use crate::bdd::{Bdd, NodeStatus, UnitBdd};

use super::{CellKey, CnfFormula, Literal, VariableId};

fn up(c: CellKey) -> VariableId {
    VariableId::AuxUp { cell: c }
}

fn left(c: CellKey) -> VariableId {
    VariableId::AuxLeft { cell: c }
}

fn right(c: CellKey) -> VariableId {
    VariableId::AuxRight { cell: c }
}

pub fn cell_key(bdd: &Bdd, cell: &UnitBdd) -> CellKey {
    CellKey { i: cell.term.i, j: cell.term.j, v: bdd.nodes[cell.top].value }
}

/// The seven clauses fixing `left = up ∧ ¬(p q)` and `right = up ∧ p q`.
pub fn encode_unit_bdd(key: CellKey) -> CnfFormula {
    let (p, q) = (VariableId::p(key.i), VariableId::q(key.j));
    let (u, l, r) = (up(key), left(key), right(key));
    let mut f = CnfFormula::new();
    f.push_lits([u.clone().pos(), l.clone().neg()]);
    f.push_lits([p.clone().neg(), q.clone().neg(), l.clone().neg()]);
    f.push_lits([p.pos(), u.clone().neg(), l.clone().pos()]);
    f.push_lits([q.pos(), u.clone().neg(), l.clone().pos()]);
    f.push_lits([r.clone().pos(), u.clone().neg(), l.clone().pos()]);
    f.push_lits([r.clone().neg(), u.pos()]);
    f.push_lits([r.neg(), l.neg()]);
    f
}

/// `up(child) = left(left_parent) ∨ right(right_parent)`; an absent parent
/// is constant false.
pub fn encode_connection(child: CellKey, left_parent: Option<CellKey>, right_parent: Option<CellKey>) -> CnfFormula {
    let incoming: Vec<Literal> = left_parent
        .map(|c| left(c).pos())
        .into_iter()
        .chain(right_parent.map(|c| right(c).pos()))
        .collect();
    let u = up(child);
    let mut f = CnfFormula::new();
    f.push_lits(std::iter::once(u.clone().neg()).chain(incoming.iter().cloned()));
    for lit in &incoming {
        f.push_lits([u.clone().pos(), lit.negate()]);
    }
    f
}

pub fn encode_generic(bdd: &Bdd) -> CnfFormula {
    let inst = &bdd.instance;
    let mut f = CnfFormula::new();
    for i in 0..inst.np {
        f.register(VariableId::p(i));
    }
    for j in 0..inst.nq {
        f.register(VariableId::q(j));
    }
    let cells = bdd.live_cells();
    let key_of_top = |top| cells.iter().find(|c| c.top == top).map(|c| cell_key(bdd, c));
    let parents = |node| {
        let l = cells.iter().find(|c| c.left == node).map(|c| cell_key(bdd, c));
        let r = cells.iter().find(|c| c.right == node).map(|c| cell_key(bdd, c));
        (l, r)
    };

    if let Some(root) = key_of_top(bdd.root()) {
        f.push_lits([up(root).pos()]);
    }
    for cell in &cells {
        let key = cell_key(bdd, cell);
        f.extend(encode_unit_bdd(key));
        if cell.position > 0 {
            let (l, r) = parents(cell.top);
            f.extend(encode_connection(key, l, r));
        }
        if bdd.is_dead(cell.left) {
            f.push_lits([left(key).neg()]);
        }
        if bdd.is_dead(cell.right) {
            f.push_lits([right(key).neg()]);
        }
    }
    if let Some(accept) = bdd.accepting() {
        debug_assert_eq!(bdd.nodes[accept].status, NodeStatus::Accepting);
        let (l, r) = parents(accept);
        f.push_lits(l.map(|c| left(c).pos()).into_iter().chain(r.map(|c| right(c).pos())));
    }
    f
}
