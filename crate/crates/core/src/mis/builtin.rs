//! Reference graphs for n = 6, 15 and 35, with their experimental layouts.
//!
//! Gadgets follow the printed clause order so duplicate numbering matches
//! the published atom labels. The experimental 35 layout lists duplicate
//! occurrences of `p1`, `¬p1` and `q1` in an order under which no blockade
//! radius works; its points are reassigned among duplicates by
//! [`align_layout`](super::align_layout), which leaves the wire endpoints
//! and all non-duplicated atoms in place.

use serde::{Deserialize, Serialize};

use crate::cnf::{parse_clauses, CnfFormula, VariableId};

use super::{align_layout, expand_wires, graph_from_clauses, MisGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuiltinGraph {
    pub name: String,
    pub n: u64,
    pub widths: (usize, usize),
    /// Formula the graph realizes; ledger units have no gadget.
    pub formula: CnfFormula,
    pub graph: MisGraph,
}

pub const BUILTIN_NAMES: [&str; 5] = ["G6", "G15", "G15Exp", "G35", "G35Exp"];

const PSI_6: &str = "(p1)(q1)(p0+q0)(¬p0+¬q0)";
const PSI_15: &str = "(p1+p2)(q1+q2)(p1+q1)(¬p1+¬q1)(p1+¬p2+¬q2)(q1+¬q2+¬p2)";
const PSI_35: &str = "(p1+p2)(p1+q1)(p1+q2)(¬p1+¬q1)(q1+q2+¬p1)(p2+q1+s1)(¬p1+¬q2+¬s1)";

pub const G15_EXP_TABLE: &[(&str, &[f64])] = &[
    ("p1^(1)", &[0.0, 6.43, 6.43]),
    ("p1^(2)", &[0.0, -6.43, 6.43]),
    ("p1^(3)", &[-9.09, 0.0, 0.0]),
    ("p2", &[-1.64, 12.67, 0.0]),
    ("q1^(1)", &[18.18, 0.0, 0.0]),
    ("q1^(2)", &[9.09, -6.43, 6.43]),
    ("q1^(3)", &[9.09, 6.43, -6.43]),
    ("q2", &[24.61, 0.0, -6.43]),
    ("¬p1", &[0.0, 0.0, 0.0]),
    ("¬p2^(1)", &[-13.64, 4.55, -6.43]),
    ("¬p2^(2)", &[4.55, 14.3, -6.43]),
    ("¬q1", &[9.09, 0.0, 0.0]),
    ("¬q2^(1)", &[-13.64, -4.55, -6.43]),
    ("¬q2^(2)", &[13.64, 14.3, -6.43]),
    ("w1", &[-10.0, 16.31, 0.0]),
    ("w2", &[-15.45, 12.73, -6.43]),
    ("w3", &[27.34, 8.67, -6.43]),
    ("w4", &[22.18, 15.85, -6.43]),
    ("w5", &[29.61, -7.0, -6.43]),
    ("w6", &[22.73, -13.64, -6.43]),
    ("w7", &[13.64, -13.64, -6.43]),
    ("w8", &[4.55, -13.64, -6.43]),
    ("w9", &[-4.55, -13.64, -6.43]),
    ("w10", &[-13.64, -13.64, -6.43]),
];

/// Published 2D points of the experimental 35 graph, keyed by the labels
/// they were printed under.
pub const G35_EXP_TABLE: &[(&str, &[f64])] = &[
    ("p1^(1)", &[35.36, 32.14]),
    ("p1^(2)", &[36.43, 43.21]),
    ("p1^(3)", &[78.21, 41.43]),
    ("p2^(1)", &[29.29, 27.14]),
    ("p2^(2)", &[62.14, 29.29]),
    ("q1^(1)", &[62.14, 48.21]),
    ("q1^(2)", &[60.36, 36.79]),
    ("q2^(1)", &[42.50, 48.21]),
    ("q2^(2)", &[53.93, 47.14]),
    ("¬p1^(1)", &[42.14, 37.5]),
    ("¬p1^(2)", &[56.43, 53.93]),
    ("¬p1^(3)", &[73.21, 47.14]),
    ("¬q1", &[66.79, 41.79]),
    ("¬q2", &[47.86, 42.14]),
    ("q1^(3)", &[71.79, 36.43]),
    ("s1", &[55.36, 33.93]),
    ("¬s1", &[48.93, 34.29]),
    ("w1", &[84.29, 47.86]),
    ("w2", &[80.00, 55.00]),
    ("w3", &[73.57, 61.07]),
    ("w4", &[64.29, 59.29]),
    ("w5", &[31.43, 50.36]),
    ("w6", &[34.64, 57.50]),
    ("w7", &[42.50, 61.43]),
    ("w8", &[50.36, 61.07]),
];

/// Points in vertex order from a label table; panics on labels absent from `g`.
pub fn table_points(g: &MisGraph, table: &[(&str, &[f64])]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); g.len()];
    for (label, point) in table {
        let u = g.find(label).unwrap_or_else(|e| panic!("{e}"));
        out[u] = point.to_vec();
    }
    out
}

fn formula(text: &str, ledger: &[VariableId]) -> CnfFormula {
    let mut f = CnfFormula::from_clauses(parse_clauses(text).expect("builtin clause text"));
    f.ledger = ledger.iter().cloned().map(VariableId::pos).collect();
    f
}

fn gadget_graph(f: &CnfFormula) -> MisGraph {
    graph_from_clauses(&f.clauses, f.ledger.clone()).expect("builtin clauses have at most 3 literals")
}

fn wired(g: &MisGraph, plan: &[(&str, &str, usize)]) -> MisGraph {
    let edges: Vec<(usize, usize)> =
        plan.iter().map(|(a, b, _)| g.edge_by_labels(a, b).expect("builtin wire endpoint")).collect();
    let lengths: Vec<usize> = plan.iter().map(|p| p.2).collect();
    expand_wires(g, &edges, &lengths).expect("builtin wire plan")
}

pub fn builtin(name: &str) -> Option<BuiltinGraph> {
    let (p0, q0) = (VariableId::p(0), VariableId::q(0));
    let (n, widths, f, graph) = match name {
        "G6" => {
            let f = formula(PSI_6, &[]);
            let g = gadget_graph(&f);
            (6, (2, 2), f, g)
        }
        "G15" | "G15Exp" => {
            let f = formula(PSI_15, &[p0, q0]);
            let mut g = gadget_graph(&f);
            if name == "G15Exp" {
                g = wired(&g, &[("p2", "¬p2^(1)", 2), ("q2", "¬q2^(2)", 2), ("q2", "¬q2^(1)", 6)]);
                g.coordinates = Some(table_points(&g, G15_EXP_TABLE));
            }
            (15, (3, 3), f, g)
        }
        "G35" | "G35Exp" => {
            let f = formula(PSI_35, &[p0, q0]);
            let mut g = gadget_graph(&f);
            if name == "G35Exp" {
                g = wired(&g, &[("p1^(2)", "¬p1^(2)", 4), ("p1^(3)", "¬p1^(2)", 4)]);
                let deferred: Vec<(usize, usize)> = [
                    ("p1^(1)", "¬p1^(1)"),
                    ("p1^(1)", "¬p1^(2)"),
                    ("p1^(2)", "¬p1^(3)"),
                    ("p1^(3)", "¬p1^(1)"),
                ]
                .iter()
                .map(|(a, b)| g.edge_by_labels(a, b).expect("builtin deferred edge"))
                .collect();
                g.defer_edges(&deferred).expect("deferred edges exist");
                let table = table_points(&g, G35_EXP_TABLE);
                g.coordinates = align_layout(&g, &table, 0.0, f64::INFINITY).map(|a| a.coordinates);
            }
            (35, (3, 3), f, g)
        }
        _ => return None,
    };
    Some(BuiltinGraph { name: name.to_string(), n, widths, formula: f, graph })
}

pub fn builtin_instances() -> Vec<BuiltinGraph> {
    BUILTIN_NAMES.iter().filter_map(|name| builtin(name)).collect()
}
