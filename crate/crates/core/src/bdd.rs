//! Running-sum decision diagram of binary multiplication.
//!
//! Product terms `p_i q_j` are visited column by column (ascending weight
//! `i + j`, ascending `i` inside a column). A node at traversal position `t`
//! carries the running sum of the terms already decided; the unit cell at
//! `(t, v)` branches to `v` when `p_i q_j = 0` and to `v + 2^(i+j)` when it is
//! 1. Nodes are shared on `(position, value)`.
//!
//! Pruning marks a node dead when the running sum overshoots `n`, when a
//! finished column disagrees with `n` modulo `2^(w+1)`, or when the final sum
//! differs from `n`; dead marks then flow backward so that a node is dead
//! exactly when no live path leaves it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::ProblemInstance;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BddError {
    #[error("root is dead: {n} has no factor pair within widths ({np}, {nq})")]
    FullyDeadDiagram { n: u64, np: usize, nq: usize },
    #[error("node bounds need a width of at least 2, got {0}")]
    WidthTooSmall(usize),
}

pub type NodeId = usize;

/// Product term `p_i q_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Term {
    pub i: usize,
    pub j: usize,
}

impl Term {
    pub fn weight(self) -> usize {
        self.i + self.j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Open,
    Accepting,
    Dead,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BddNode {
    /// Traversal position: number of terms already decided.
    pub position: usize,
    /// Weight of the column this node sits in (the last column for the
    /// terminal layer).
    pub column: usize,
    /// Term decided at this node, absent on the terminal layer.
    pub term: Option<Term>,
    pub value: u64,
    pub status: NodeStatus,
}

/// One decision on a product term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Branch {
    pub term: Term,
    pub taken: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitBdd {
    pub position: usize,
    pub term: Term,
    pub top: NodeId,
    pub left: NodeId,
    pub right: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub weight: usize,
    /// First traversal position of the column.
    pub start: usize,
    pub cells: Vec<UnitBdd>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bdd {
    pub instance: ProblemInstance,
    pub terms: Vec<Term>,
    pub nodes: Vec<BddNode>,
    /// Node ids per position, ascending value.
    pub layers: Vec<Vec<NodeId>>,
    pub cells: Vec<UnitBdd>,
    pub pruned: bool,
}

/// Terms in traversal order.
pub fn term_order(np: usize, nq: usize) -> Vec<Term> {
    (0..np + nq - 1)
        .flat_map(|w| (0..np).filter(move |&i| i <= w && w - i < nq).map(move |i| Term { i, j: w - i }))
        .collect()
}

pub fn build_bdd(inst: &ProblemInstance) -> Bdd {
    let terms = term_order(inst.np, inst.nq);
    let last_column = terms.last().map_or(0, |t| t.weight());
    let mut nodes = Vec::new();
    let mut layers: Vec<Vec<NodeId>> = Vec::with_capacity(terms.len() + 1);
    let mut cells = Vec::new();

    let node = |nodes: &mut Vec<BddNode>, position: usize, value: u64| {
        let term = terms.get(position).copied();
        nodes.push(BddNode {
            position,
            column: term.map_or(last_column, |t| t.weight()),
            term,
            value,
            status: NodeStatus::Open,
        });
        nodes.len() - 1
    };

    layers.push(vec![node(&mut nodes, 0, 0)]);
    for (t, &term) in terms.iter().enumerate() {
        let step = 1u64 << term.weight();
        let mut next: BTreeMap<u64, NodeId> = BTreeMap::new();
        let mut pending = Vec::new();
        for &top in &layers[t] {
            let v = nodes[top].value;
            // Sums never decrease, so an overshooting node stays a terminal.
            if v > inst.n {
                continue;
            }
            for child in [v, v + step] {
                next.entry(child).or_insert_with(|| node(&mut nodes, t + 1, child));
            }
            pending.push((top, v));
        }
        for (top, v) in pending {
            cells.push(UnitBdd { position: t, term, top, left: next[&v], right: next[&(v + step)] });
        }
        layers.push(next.into_values().collect());
    }

    Bdd { instance: inst.clone(), terms, nodes, layers, cells, pruned: false }
}

pub fn prune(bdd: Bdd) -> Result<Bdd, BddError> {
    bdd.pruned()
}

impl Bdd {
    pub fn pruned(mut self) -> Result<Self, BddError> {
        let n = self.instance.n;
        let total = self.terms.len();
        for id in 0..self.nodes.len() {
            let node = &self.nodes[id];
            let t = node.position;
            let mut dead = node.value > n;
            if t > 0 && (t == total || self.terms[t].weight() != self.terms[t - 1].weight()) {
                let modulus = 1u64 << (self.terms[t - 1].weight() + 1);
                dead |= node.value % modulus != n % modulus;
            }
            if t == total {
                dead |= node.value != n;
            }
            self.nodes[id].status = if dead {
                NodeStatus::Dead
            } else if t == total {
                NodeStatus::Accepting
            } else {
                NodeStatus::Open
            };
        }
        for cell in self.cells.iter().rev() {
            if self.is_dead(cell.left) && self.is_dead(cell.right) {
                self.nodes[cell.top].status = NodeStatus::Dead;
            }
        }
        // Open nodes without cells are overshoot terminals, dead already.
        self.pruned = true;
        if self.is_dead(self.root()) {
            let inst = &self.instance;
            return Err(BddError::FullyDeadDiagram { n: inst.n, np: inst.np, nq: inst.nq });
        }
        Ok(self)
    }

    pub fn root(&self) -> NodeId {
        self.layers[0][0]
    }

    pub fn is_dead(&self, id: NodeId) -> bool {
        self.nodes[id].status == NodeStatus::Dead
    }

    pub fn accepting(&self) -> Option<NodeId> {
        self.layers
            .last()?
            .iter()
            .copied()
            .find(|&id| self.nodes[id].status == NodeStatus::Accepting)
    }

    pub fn node_at(&self, position: usize, value: u64) -> Option<NodeId> {
        let layer = self.layers.get(position)?;
        layer
            .binary_search_by_key(&value, |&id| self.nodes[id].value)
            .ok()
            .map(|k| layer[k])
    }

    /// Cell whose top node is `id`.
    pub fn cell_of(&self, id: NodeId) -> Option<&UnitBdd> {
        self.cell_index().get(&id).map(|&k| &self.cells[k])
    }

    fn cell_index(&self) -> BTreeMap<NodeId, usize> {
        self.cells.iter().enumerate().map(|(k, c)| (c.top, k)).collect()
    }

    /// Cells grouped into weight columns.
    pub fn columns(&self) -> Vec<Column> {
        let mut out: Vec<Column> = Vec::new();
        for (t, term) in self.terms.iter().enumerate() {
            if out.last().is_none_or(|c| c.weight != term.weight()) {
                out.push(Column { weight: term.weight(), start: t, cells: Vec::new() });
            }
        }
        for cell in &self.cells {
            let k = out.iter().rposition(|c| c.start <= cell.position).unwrap_or(0);
            out[k].cells.push(*cell);
        }
        out
    }

    /// Cells whose top node is live; after pruning these are the unit BDDs
    /// that carry constraints.
    pub fn live_cells(&self) -> Vec<UnitBdd> {
        self.cells.iter().filter(|c| !self.is_dead(c.top)).copied().collect()
    }

    /// Live unit BDDs in columns of weight below the bit length of `n`.
    pub fn product_column_unit_count(&self) -> usize {
        let bits = self.instance.bit_len();
        self.live_cells().iter().filter(|c| c.term.weight() < bits).count()
    }

    pub fn live_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.status != NodeStatus::Dead).count()
    }

    /// Per-column live entries and the in-column paths leaving each of them.
    pub fn column_paths(&self) -> Vec<ColumnPaths> {
        let index = self.cell_index();
        let total = self.terms.len();
        let mut out = Vec::new();
        let mut start = 0;
        while start < total {
            let weight = self.terms[start].weight();
            let end = (start..total).find(|&t| self.terms[t].weight() != weight).unwrap_or(total);
            let entries = self.layers[start]
                .iter()
                .filter(|&&id| !self.is_dead(id))
                .map(|&id| {
                    let mut paths = EntryPaths { value: self.nodes[id].value, failed: Vec::new(), passed: Vec::new() };
                    self.walk(&index, id, end, &mut Vec::new(), &mut paths);
                    paths
                })
                .collect();
            out.push(ColumnPaths { weight, start, end, entries });
            start = end;
        }
        out
    }

    fn walk(&self, index: &BTreeMap<NodeId, usize>, id: NodeId, end: usize, prefix: &mut Vec<Branch>, out: &mut EntryPaths) {
        let cell = self.cells[index[&id]];
        for (taken, child) in [(false, cell.left), (true, cell.right)] {
            prefix.push(Branch { term: cell.term, taken });
            if self.is_dead(child) {
                out.failed.push(prefix.clone());
            } else if self.nodes[child].position == end {
                out.passed.push((prefix.clone(), self.nodes[child].value));
            } else {
                self.walk(index, child, end, prefix, out);
            }
            prefix.pop();
        }
    }

    /// Every root-to-accepting path as its branch sequence.
    pub fn accepting_paths(&self) -> Vec<Vec<Branch>> {
        let index = self.cell_index();
        let mut out = Vec::new();
        let mut stack = vec![(self.root(), Vec::new())];
        while let Some((id, prefix)) = stack.pop() {
            if self.nodes[id].status == NodeStatus::Accepting {
                out.push(prefix);
                continue;
            }
            if self.is_dead(id) {
                continue;
            }
            let cell = self.cells[index[&id]];
            for (taken, child) in [(true, cell.right), (false, cell.left)] {
                let mut next = prefix.clone();
                next.push(Branch { term: cell.term, taken });
                stack.push((child, next));
            }
        }
        out
    }

    /// Structured dump: nodes with status and edges with branch polarity.
    pub fn dump(&self) -> BddDump {
        BddDump {
            n: self.instance.n,
            np: self.instance.np,
            nq: self.instance.nq,
            terms: self.terms.clone(),
            nodes: self
                .nodes
                .iter()
                .enumerate()
                .map(|(id, n)| DumpNode { id, node: n.clone() })
                .collect(),
            edges: self
                .cells
                .iter()
                .flat_map(|c| {
                    [(c.left, false), (c.right, true)].map(|(to, taken)| DumpEdge { from: c.top, to, term: c.term, taken })
                })
                .collect(),
            live_unit_bdds: self.live_cells().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryPaths {
    pub value: u64,
    /// Branch sequences ending in a dead node.
    pub failed: Vec<Vec<Branch>>,
    /// Branch sequences reaching the next column, with the exit value.
    pub passed: Vec<(Vec<Branch>, u64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnPaths {
    pub weight: usize,
    pub start: usize,
    pub end: usize,
    pub entries: Vec<EntryPaths>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailedPath {
    pub column: usize,
    pub entry: u64,
    pub branches: Vec<Branch>,
}

pub fn failed_paths(bdd: &Bdd) -> Vec<FailedPath> {
    bdd.column_paths()
        .into_iter()
        .flat_map(|col| {
            col.entries.into_iter().flat_map(move |e| {
                e.failed.into_iter().map(move |branches| FailedPath { column: col.weight, entry: e.value, branches })
            })
        })
        .collect()
}

/// Closed-form band for the node count at width `np`.
pub fn node_bounds(np: usize) -> Result<(u64, u64), BddError> {
    if np < 2 {
        return Err(BddError::WidthTooSmall(np));
    }
    let (lo, hi) = node_bounds_real(np as f64);
    Ok((lo.round() as u64, hi.round() as u64))
}

pub fn node_bounds_real(np: f64) -> (f64, f64) {
    let lower = 2.0 * np.powi(3) - 2.0 * np.powi(2) - 2.0 * np + 5.0;
    let upper = 2.0 * np.powi(3) - 4.0 * np + 5.0;
    (lower, upper)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpNode {
    pub id: NodeId,
    #[serde(flatten)]
    pub node: BddNode,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpEdge {
    pub from: NodeId,
    pub to: NodeId,
    pub term: Term,
    pub taken: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BddDump {
    pub n: u64,
    pub np: usize,
    pub nq: usize,
    pub terms: Vec<Term>,
    pub nodes: Vec<DumpNode>,
    pub edges: Vec<DumpEdge>,
    pub live_unit_bdds: usize,
}
