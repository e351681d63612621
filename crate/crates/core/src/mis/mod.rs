//! Clause-gadget graphs for maximum independent set.
//!
//! Every clause becomes a complete graph on its literal occurrences and
//! every occurrence of a variable is joined to every occurrence of its
//! negation. An independent set can take at most one vertex per gadget, so
//! the formula is satisfiable exactly when the maximum independent set has
//! one vertex per clause. Edges that cannot be realized by geometry are
//! either replaced by even-length wires (each adding a fixed offset to the
//! MIS size) or deferred to post-selection.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{Clause, CnfFormula, Literal, VariableId};

pub mod builtin;
pub mod layout;
pub mod solver;

pub use builtin::{builtin_instances, BuiltinGraph};
pub use layout::{align_layout, validate_layout, LayoutReport};
pub use solver::{solve_mis_exact, MisSolution};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MisError {
    #[error("clause {clause} has {len} literals; gadgets exist for at most 3")]
    ClauseTooLarge { clause: usize, len: usize },
    #[error("wire interior length {0} must be even and at least 2")]
    OddWireLength(usize),
    #[error("edge ({0}, {1}) is not in the graph")]
    MissingEdge(usize, usize),
    #[error("graph has {vertices} vertices, above the cap of {cap}")]
    TooLarge { vertices: usize, cap: usize },
    #[error("unknown vertex label {0:?}")]
    UnknownLabel(String),
    #[error("{0} wire lengths given for {1} edges")]
    WirePlanMismatch(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VertexBase {
    Var { var: VariableId },
    Wire { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexLabel {
    pub base: VertexBase,
    pub negated: bool,
    /// Occurrence number among vertices with the same base and polarity.
    pub duplicate: usize,
    pub clause: Option<usize>,
}

impl VertexLabel {
    pub fn is_wire(&self) -> bool {
        matches!(self.base, VertexBase::Wire { .. })
    }

    pub fn var(&self) -> Option<&VariableId> {
        match &self.base {
            VertexBase::Var { var } => Some(var),
            VertexBase::Wire { .. } => None,
        }
    }
}

/// `p1^(2)`, `¬q0`, `w3`; the duplicate index is written only when above 1
/// or when `always_index` is set.
pub fn format_label(label: &VertexLabel, always_index: bool) -> String {
    match &label.base {
        VertexBase::Wire { index } => format!("w{index}"),
        VertexBase::Var { var } => {
            let neg = if label.negated { "¬" } else { "" };
            if always_index || label.duplicate > 1 {
                format!("{neg}{var}^({})", label.duplicate)
            } else {
                format!("{neg}{var}")
            }
        }
    }
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_label(self, false))
    }
}

/// Path `u - w_1 - … - w_2m - v` standing in for the edge `(u, v)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireSpec {
    pub endpoints: (usize, usize),
    pub interior: Vec<usize>,
}

impl WireSpec {
    pub fn m(&self) -> usize {
        self.interior.len() / 2
    }

    /// Full vertex chain including both endpoints.
    pub fn chain(&self) -> Vec<usize> {
        std::iter::once(self.endpoints.0)
            .chain(self.interior.iter().copied())
            .chain(std::iter::once(self.endpoints.1))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MisGraph {
    pub vertices: Vec<VertexLabel>,
    /// Physical edges `(u, v)` with `u < v`.
    pub edges: BTreeSet<(usize, usize)>,
    pub wires: Vec<WireSpec>,
    /// Conflict edges enforced by post-selection only.
    pub deferred_edges: Vec<(usize, usize)>,
    /// Atom positions in µm, one point per vertex.
    pub coordinates: Option<Vec<Vec<f64>>>,
    pub clause_count: usize,
    /// Units fixed before graph construction; they have no gadget.
    pub ledger: Vec<Literal>,
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphOptions {
    /// Give ledger units their own single-vertex gadgets.
    pub materialize_units: bool,
}

pub fn graph_from_cnf(f: &CnfFormula, opts: GraphOptions) -> Result<MisGraph, MisError> {
    let mut clauses: Vec<Clause> = Vec::new();
    let mut ledger = f.ledger.clone();
    if opts.materialize_units {
        clauses.extend(f.ledger.iter().cloned().map(Clause::unit));
        ledger.clear();
    }
    clauses.extend(f.clauses.iter().cloned());
    graph_from_clauses(&clauses, ledger)
}

/// Gadget graph for a clause list in the given order.
pub fn graph_from_clauses(clauses: &[Clause], ledger: Vec<Literal>) -> Result<MisGraph, MisError> {
    let mut g = MisGraph { clause_count: clauses.len(), ledger, ..Default::default() };
    let mut counts: BTreeMap<(VariableId, bool), usize> = BTreeMap::new();
    for (k, clause) in clauses.iter().enumerate() {
        if clause.len() > 3 {
            return Err(MisError::ClauseTooLarge { clause: k, len: clause.len() });
        }
        let first = g.vertices.len();
        for lit in clause.literals() {
            let dup = counts.entry((lit.var.clone(), lit.negated)).or_insert(0);
            *dup += 1;
            g.vertices.push(VertexLabel {
                base: VertexBase::Var { var: lit.var.clone() },
                negated: lit.negated,
                duplicate: *dup,
                clause: Some(k),
            });
        }
        for u in first..g.vertices.len() {
            for v in u + 1..g.vertices.len() {
                g.edges.insert((u, v));
            }
        }
    }
    for u in 0..g.vertices.len() {
        for v in u + 1..g.vertices.len() {
            let (a, b) = (&g.vertices[u], &g.vertices[v]);
            if a.base == b.base && a.negated != b.negated {
                g.edges.insert((u, v));
            }
        }
    }
    Ok(g)
}

impl MisGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&ordered(u, v))
    }

    pub fn neighbors(&self, u: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| if a == u { Some(b) } else if b == u { Some(a) } else { None })
            .collect()
    }

    /// Adjacency bitmasks; only valid up to 64 vertices.
    pub fn adjacency_masks(&self) -> Vec<u64> {
        let mut adj = vec![0u64; self.len()];
        for &(u, v) in &self.edges {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        adj
    }

    pub fn wire_count(&self) -> usize {
        self.vertices.iter().filter(|v| v.is_wire()).count()
    }

    pub fn is_wire_vertex(&self, u: usize) -> bool {
        self.vertices[u].is_wire()
    }

    /// Vertex with display label `name` (`p1^(2)`, `¬q2`, `~q2^(1)`, `w3`).
    pub fn find(&self, name: &str) -> Result<usize, MisError> {
        let unknown = || MisError::UnknownLabel(name.to_string());
        let name = name.trim();
        let (negated, rest) = match name.strip_prefix('¬').or_else(|| name.strip_prefix('~')) {
            Some(r) => (true, r),
            None => (false, name),
        };
        let (base, dup) = match rest.split_once("^(") {
            Some((b, d)) => (b, d.strip_suffix(')').and_then(|d| d.parse().ok()).ok_or_else(unknown)?),
            None => (rest, 1usize),
        };
        let want = if let Some(idx) = base.strip_prefix('w').and_then(|d| d.parse().ok()) {
            VertexBase::Wire { index: idx }
        } else {
            VertexBase::Var { var: crate::cnf::parse_variable(base).ok_or_else(unknown)? }
        };
        self.vertices
            .iter()
            .position(|v| v.base == want && v.negated == negated && v.duplicate == dup)
            .ok_or_else(unknown)
    }

    pub fn label(&self, u: usize) -> String {
        self.vertices[u].to_string()
    }

    pub fn edge_by_labels(&self, a: &str, b: &str) -> Result<(usize, usize), MisError> {
        Ok((self.find(a)?, self.find(b)?))
    }

    /// Moves conflict edges from the physical edge set to post-selection.
    pub fn defer_edges(&mut self, edges: &[(usize, usize)]) -> Result<(), MisError> {
        for &(u, v) in edges {
            if !self.edges.remove(&ordered(u, v)) {
                return Err(MisError::MissingEdge(u, v));
            }
            self.deferred_edges.push(ordered(u, v));
        }
        Ok(())
    }

    /// Non-wire vertices: positive occurrences by variable and duplicate,
    /// then negated ones the same way.
    pub fn ket_order(&self) -> Vec<usize> {
        let mut logical: Vec<usize> = (0..self.len()).filter(|&u| !self.is_wire_vertex(u)).collect();
        logical.sort_by_key(|&u| {
            let v = &self.vertices[u];
            (v.negated, v.base.clone(), v.duplicate)
        });
        logical
    }

    /// Ket string of a configuration over the non-wire atoms, e.g.
    /// `|0111;10⟩` or `|000,1,111,0;1,00,0,10⟩` when some variable has
    /// several occurrences.
    pub fn ket(&self, bits: &[bool]) -> String {
        let order = self.ket_order();
        let grouped = order.iter().any(|&u| self.vertices[u].duplicate > 1);
        let mut sections = [String::new(), String::new()];
        let mut last: Option<(bool, VertexBase)> = None;
        for &u in &order {
            let v = &self.vertices[u];
            let section = &mut sections[v.negated as usize];
            if grouped && !section.is_empty() && last.as_ref().is_some_and(|(n, b)| *n == v.negated && *b != v.base) {
                section.push(',');
            }
            section.push(if bits[u] { '1' } else { '0' });
            last = Some((v.negated, v.base.clone()));
        }
        format!("|{};{}⟩", sections[0], sections[1])
    }

    /// Inverse of [`MisGraph::ket`] for the non-wire atoms; wire atoms are 0.
    pub fn parse_ket(&self, ket: &str) -> Option<Vec<bool>> {
        let body = ket.trim().strip_prefix('|')?.strip_suffix('⟩')?;
        let digits: Vec<bool> = body
            .chars()
            .filter(|c| *c == '0' || *c == '1')
            .map(|c| c == '1')
            .collect();
        let order = self.ket_order();
        if digits.len() != order.len() {
            return None;
        }
        let mut bits = vec![false; self.len()];
        for (&u, b) in order.iter().zip(digits) {
            bits[u] = b;
        }
        Some(bits)
    }

    pub fn is_independent(&self, bits: &[bool]) -> bool {
        self.edges.iter().all(|&(u, v)| !(bits[u] && bits[v]))
    }

    /// Graph without wire atoms: wire paths become their direct edges again.
    pub fn unwired(&self) -> MisGraph {
        let keep: Vec<usize> = (0..self.len()).filter(|&u| !self.is_wire_vertex(u)).collect();
        let index: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(k, &u)| (u, k)).collect();
        let mut g = MisGraph {
            vertices: keep.iter().map(|&u| self.vertices[u].clone()).collect(),
            clause_count: self.clause_count,
            ledger: self.ledger.clone(),
            coordinates: self
                .coordinates
                .as_ref()
                .map(|c| keep.iter().map(|&u| c[u].clone()).collect()),
            ..Default::default()
        };
        for &(u, v) in &self.edges {
            if let (Some(&a), Some(&b)) = (index.get(&u), index.get(&v)) {
                g.edges.insert(ordered(a, b));
            }
        }
        for w in &self.wires {
            g.edges.insert(ordered(index[&w.endpoints.0], index[&w.endpoints.1]));
        }
        g.deferred_edges = self.deferred_edges.iter().map(|&(u, v)| ordered(index[&u], index[&v])).collect();
        g
    }

    /// Keeps only non-wire positions of a full configuration.
    pub fn strip_wires(&self, bits: &[bool]) -> Vec<bool> {
        (0..self.len()).filter(|&u| !self.is_wire_vertex(u)).map(|u| bits[u]).collect()
    }
}

/// Replaces each listed edge by a path with the given even interior count.
pub fn expand_wires(g: &MisGraph, edges: &[(usize, usize)], lengths: &[usize]) -> Result<MisGraph, MisError> {
    if edges.len() != lengths.len() {
        return Err(MisError::WirePlanMismatch(lengths.len(), edges.len()));
    }
    let mut out = g.clone();
    out.coordinates = None;
    let mut next_index = g.wire_count();
    for (&(u, v), &len) in edges.iter().zip(lengths) {
        if len < 2 || len % 2 == 1 {
            return Err(MisError::OddWireLength(len));
        }
        if !out.edges.remove(&ordered(u, v)) {
            return Err(MisError::MissingEdge(u, v));
        }
        let interior: Vec<usize> = (0..len)
            .map(|_| {
                next_index += 1;
                out.vertices.push(VertexLabel {
                    base: VertexBase::Wire { index: next_index },
                    negated: false,
                    duplicate: 1,
                    clause: None,
                });
                out.vertices.len() - 1
            })
            .collect();
        let wire = WireSpec { endpoints: (u, v), interior };
        for pair in wire.chain().windows(2) {
            out.edges.insert(ordered(pair[0], pair[1]));
        }
        out.wires.push(wire);
    }
    Ok(out)
}

/// Shortest admissible interior count for a new wire.
pub const DEFAULT_WIRE_INTERIOR: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BitStatus {
    One,
    Zero,
    Undecidable,
}

/// Per-variable reading of a chosen vertex set.
pub fn decode_set(g: &MisGraph, chosen: &[bool]) -> BTreeMap<VariableId, BitStatus> {
    let mut seen: BTreeMap<VariableId, (bool, bool)> = BTreeMap::new();
    for (u, v) in g.vertices.iter().enumerate() {
        let Some(var) = v.var() else { continue };
        let entry = seen.entry(var.clone()).or_insert((false, false));
        if chosen[u] {
            if v.negated {
                entry.1 = true;
            } else {
                entry.0 = true;
            }
        }
    }
    let mut out: BTreeMap<VariableId, BitStatus> = seen
        .into_iter()
        .map(|(var, (pos, neg))| {
            let status = match (pos, neg) {
                (true, false) => BitStatus::One,
                (false, true) => BitStatus::Zero,
                _ => BitStatus::Undecidable,
            };
            (var, status)
        })
        .collect();
    for lit in &g.ledger {
        out.entry(lit.var.clone())
            .or_insert(if lit.negated { BitStatus::Zero } else { BitStatus::One });
    }
    out
}

/// Factor words from decoded statuses, if every bit is decided.
pub fn factor_words(status: &BTreeMap<VariableId, BitStatus>, np: usize, nq: usize) -> Option<(u64, u64)> {
    let word = |vars: Vec<VariableId>| -> Option<u64> {
        vars.iter().rev().try_fold(0u64, |acc, v| match status.get(v) {
            Some(BitStatus::One) => Some(acc << 1 | 1),
            Some(BitStatus::Zero) => Some(acc << 1),
            _ => None,
        })
    };
    Some((word((0..np).map(VariableId::p).collect())?, word((0..nq).map(VariableId::q).collect())?))
}
