//! CNF formulas over factor bits, unit-BDD auxiliaries and split dummies.
//!
//! Two encoders turn a pruned diagram into CNF: [`failed_path`] negates the
//! dead branches column by column and simplifies the result, [`generic`]
//! emits a fixed clause block per live unit BDD. Both yield formulas whose
//! solutions projected onto the factor bits are exactly the factor pairs.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod failed_path;
pub mod generic;
pub mod simplify;
pub mod solve;

pub use failed_path::{cnf_failed_paths, cnf_failed_paths_with, FailedPathOptions};
pub use generic::{encode_connection, encode_generic, encode_unit_bdd};
pub use simplify::simplify;
pub use solve::{factor_projection, is_satisfiable, project_solutions, solve_brute_force, Assignment};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CnfError {
    #[error("column {column} has {entries} live entry nodes; use the generic encoder")]
    TooManyEntryNodes { column: usize, entries: usize },
    #[error("brute force over {vars} variables exceeds the cap of {cap}")]
    TooLarge { vars: usize, cap: usize },
    #[error("malformed DIMACS input: {0}")]
    Dimacs(String),
}

/// Unit-BDD cell coordinates `(i, j; v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellKey {
    pub i: usize,
    pub j: usize,
    pub v: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariableId {
    PBit { index: usize },
    QBit { index: usize },
    AuxUp { cell: CellKey },
    AuxLeft { cell: CellKey },
    AuxRight { cell: CellKey },
    AuxNamed { name: String },
    Dummy { serial: usize },
}

impl VariableId {
    pub fn p(index: usize) -> Self {
        Self::PBit { index }
    }

    pub fn q(index: usize) -> Self {
        Self::QBit { index }
    }

    pub fn dummy(serial: usize) -> Self {
        Self::Dummy { serial }
    }

    pub fn is_factor_bit(&self) -> bool {
        matches!(self, Self::PBit { .. } | Self::QBit { .. })
    }

    pub fn pos(self) -> Literal {
        Literal { var: self, negated: false }
    }

    pub fn neg(self) -> Literal {
        Literal { var: self, negated: true }
    }
}

impl fmt::Display for VariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PBit { index } => write!(f, "p{index}"),
            Self::QBit { index } => write!(f, "q{index}"),
            Self::AuxUp { cell: c } => write!(f, "lup({},{};{})", c.i, c.j, c.v),
            Self::AuxLeft { cell: c } => write!(f, "lleft({},{};{})", c.i, c.j, c.v),
            Self::AuxRight { cell: c } => write!(f, "lright({},{};{})", c.i, c.j, c.v),
            Self::AuxNamed { name } => write!(f, "l_{name}"),
            Self::Dummy { serial } => write!(f, "s{serial}"),
        }
    }
}

/// Literals order positives first, then by variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub negated: bool,
    pub var: VariableId,
}

impl Literal {
    pub fn negate(&self) -> Literal {
        Literal { var: self.var.clone(), negated: !self.negated }
    }

    pub fn holds(&self, value: bool) -> bool {
        value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬")?;
        }
        write!(f, "{}", self.var)
    }
}

/// Disjunction of literals, kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Clause(Vec<Literal>);

impl Clause {
    /// Canonical clause, or `None` for a tautology.
    pub fn new(lits: impl IntoIterator<Item = Literal>) -> Option<Clause> {
        let mut lits: Vec<Literal> = lits.into_iter().collect();
        lits.sort();
        lits.dedup();
        let vars: BTreeSet<&VariableId> = lits.iter().map(|l| &l.var).collect();
        (vars.len() == lits.len()).then_some(Clause(lits))
    }

    pub fn unit(lit: Literal) -> Clause {
        Clause(vec![lit])
    }

    pub fn literals(&self) -> &[Literal] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.0.binary_search(lit).is_ok()
    }

    pub fn is_subset(&self, other: &Clause) -> bool {
        self.len() <= other.len() && self.0.iter().all(|l| other.contains(l))
    }

    pub fn without(&self, lit: &Literal) -> Clause {
        Clause(self.0.iter().filter(|l| *l != lit).cloned().collect())
    }

    pub fn satisfied_by(&self, value: impl Fn(&VariableId) -> Option<bool>) -> bool {
        self.0.iter().any(|l| value(&l.var).is_some_and(|v| l.holds(v)))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, "+")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    pub variables: BTreeSet<VariableId>,
    pub clauses: Vec<Clause>,
    /// Units fixed by propagation, in discovery order.
    pub ledger: Vec<Literal>,
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_clauses(clauses: impl IntoIterator<Item = Clause>) -> Self {
        let mut f = Self::new();
        for c in clauses {
            f.push(c);
        }
        f
    }

    pub fn push(&mut self, clause: Clause) {
        self.variables.extend(clause.literals().iter().map(|l| l.var.clone()));
        self.clauses.push(clause);
    }

    pub fn push_lits(&mut self, lits: impl IntoIterator<Item = Literal>) {
        if let Some(c) = Clause::new(lits) {
            self.push(c);
        }
    }

    pub fn register(&mut self, var: VariableId) {
        self.variables.insert(var);
    }

    pub fn extend(&mut self, other: CnfFormula) {
        self.variables.extend(other.variables);
        self.clauses.extend(other.clauses);
        self.ledger.extend(other.ledger);
    }

    pub fn is_three_sat(&self) -> bool {
        self.clauses.iter().all(|c| c.len() <= 3)
    }

    /// Ledger units followed by the clause list.
    pub fn all_clauses(&self) -> Vec<Clause> {
        self.ledger.iter().cloned().map(Clause::unit).chain(self.clauses.iter().cloned()).collect()
    }

    /// Canonical clause set including ledger units.
    pub fn clause_set(&self) -> BTreeSet<Clause> {
        self.all_clauses().into_iter().collect()
    }

    pub fn ledger_value(&self, var: &VariableId) -> Option<bool> {
        self.ledger.iter().find(|l| &l.var == var).map(|l| !l.negated)
    }

    pub fn max_dummy(&self) -> usize {
        self.variables
            .iter()
            .filter_map(|v| match v {
                VariableId::Dummy { serial } => Some(*serial),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for CnfFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.all_clauses() {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Splits clauses longer than three literals with a chain of fresh dummies.
pub fn to_three_sat(f: &CnfFormula) -> CnfFormula {
    let mut out = CnfFormula { variables: f.variables.clone(), clauses: Vec::new(), ledger: f.ledger.clone() };
    let mut serial = f.max_dummy();
    for clause in &f.clauses {
        let lits = clause.literals();
        if lits.len() <= 3 {
            out.push(clause.clone());
            continue;
        }
        let k = lits.len();
        serial += 1;
        let mut link = VariableId::dummy(serial);
        out.push_lits([lits[0].clone(), lits[1].clone(), link.clone().pos()]);
        for lit in &lits[2..k - 2] {
            serial += 1;
            let next = VariableId::dummy(serial);
            out.push_lits([link.neg(), lit.clone(), next.clone().pos()]);
            link = next;
        }
        out.push_lits([link.neg(), lits[k - 2].clone(), lits[k - 1].clone()]);
    }
    out
}

/// DIMACS text with a comment map from ids to variable names. Ledger units
/// are re-emitted first as unit clauses.
pub fn export_dimacs(f: &CnfFormula) -> String {
    let ids: Vec<&VariableId> = f.variables.iter().collect();
    let id_of = |v: &VariableId| ids.binary_search(&v).map(|k| k as i64 + 1).unwrap_or(0);
    let clauses = f.all_clauses();
    let mut out = String::new();
    for (k, v) in ids.iter().enumerate() {
        out.push_str(&format!("c {} {}\n", k + 1, v));
    }
    out.push_str(&format!("p cnf {} {}\n", ids.len(), clauses.len()));
    for c in &clauses {
        for l in c.literals() {
            let id = id_of(&l.var);
            out.push_str(&format!("{} ", if l.negated { -id } else { id }));
        }
        out.push_str("0\n");
    }
    out
}

/// Parses DIMACS written by [`export_dimacs`]; names come from the comment
/// map, unnamed ids become named auxiliaries `x<id>`.
pub fn import_dimacs(text: &str) -> Result<CnfFormula, CnfError> {
    let mut names = std::collections::BTreeMap::new();
    let mut declared = None;
    let mut f = CnfFormula::new();
    let mut current = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if let Some(rest) = line.strip_prefix('c') {
            let mut parts = rest.split_whitespace();
            if let (Some(id), Some(name)) = (parts.next(), parts.next()) {
                if let (Ok(id), Some(var)) = (id.parse::<i64>(), parse_variable(name)) {
                    names.insert(id, var);
                }
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("p cnf") {
            let nums: Vec<usize> = rest.split_whitespace().filter_map(|x| x.parse().ok()).collect();
            if nums.len() != 2 {
                return Err(CnfError::Dimacs(format!("bad header: {line}")));
            }
            declared = Some(nums[0]);
            continue;
        }
        for tok in line.split_whitespace() {
            let x: i64 = tok.parse().map_err(|_| CnfError::Dimacs(format!("bad literal {tok}")))?;
            if x == 0 {
                f.push_lits(std::mem::take(&mut current));
                continue;
            }
            let var = names
                .get(&x.abs())
                .cloned()
                .unwrap_or_else(|| VariableId::AuxNamed { name: format!("x{}", x.abs()) });
            current.push(Literal { var, negated: x < 0 });
        }
    }
    let declared = declared.ok_or_else(|| CnfError::Dimacs("missing header".into()))?;
    for id in 1..=declared as i64 {
        f.register(names.get(&id).cloned().unwrap_or_else(|| VariableId::AuxNamed { name: format!("x{id}") }));
    }
    Ok(f)
}

/// Inverse of the [`VariableId`] display form.
pub fn parse_variable(s: &str) -> Option<VariableId> {
    let cell = |body: &str| -> Option<CellKey> {
        let body = body.strip_prefix('(')?.strip_suffix(')')?;
        let (ij, v) = body.split_once(';')?;
        let (i, j) = ij.split_once(',')?;
        Some(CellKey { i: i.parse().ok()?, j: j.parse().ok()?, v: v.parse().ok()? })
    };
    if let Some(rest) = s.strip_prefix("lup") {
        return Some(VariableId::AuxUp { cell: cell(rest)? });
    }
    if let Some(rest) = s.strip_prefix("lleft") {
        return Some(VariableId::AuxLeft { cell: cell(rest)? });
    }
    if let Some(rest) = s.strip_prefix("lright") {
        return Some(VariableId::AuxRight { cell: cell(rest)? });
    }
    if let Some(rest) = s.strip_prefix("l_") {
        return Some(VariableId::AuxNamed { name: rest.to_string() });
    }
    let (head, tail) = s.split_at(1);
    let index: usize = tail.parse().ok()?;
    match head {
        "p" => Some(VariableId::p(index)),
        "q" => Some(VariableId::q(index)),
        "s" => Some(VariableId::dummy(index)),
        _ => None,
    }
}

/// Parses the `(p1+¬q2)` notation produced by [`Clause`]'s display; `~`
/// is accepted for negation.
pub fn parse_clauses(text: &str) -> Option<Vec<Clause>> {
    let mut bodies = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for ch in text.chars() {
        match ch {
            '(' if depth == 0 => depth = 1,
            '(' => {
                depth += 1;
                current.push(ch);
            }
            ')' if depth == 1 => {
                depth = 0;
                bodies.push(std::mem::take(&mut current));
            }
            ')' => {
                depth = depth.checked_sub(1)?;
                current.push(ch);
            }
            c if depth == 0 && !c.is_whitespace() => return None,
            c if depth > 0 => current.push(c),
            _ => {}
        }
    }
    let mut out = Vec::new();
    for body in bodies {
        let mut lits = Vec::new();
        for tok in body.split('+').map(str::trim).filter(|t| !t.is_empty()) {
            let (negated, name) = match tok.strip_prefix('¬').or_else(|| tok.strip_prefix('~')) {
                Some(rest) => (true, rest),
                None => (false, tok),
            };
            lits.push(Literal { var: parse_variable(name)?, negated });
        }
        out.push(Clause::new(lits)?);
    }
    Some(out)
}
