//! Blockade-radius checks for supplied atom coordinates.
//!
//! A layout realizes a graph when some radius `R` puts every edge closer
//! than `R` and every other pair farther. Deferred edges are enforced by
//! post-selection, so they are left out of both sides.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{MisGraph, VertexBase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Edge at least as far apart as the closest non-edge.
    LongEdge,
    /// Non-edge at most as far apart as the farthest edge.
    ShortNonEdge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub pair: (usize, usize),
    pub labels: (String, String),
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub pair: PairDistance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutReport {
    pub longest_edge: Option<PairDistance>,
    pub shortest_non_edge: Option<PairDistance>,
    /// Open interval of admissible blockade radii.
    pub window: Option<(f64, f64)>,
    pub violations: Vec<Violation>,
    /// Deferred edges farther apart than every admissible radius.
    pub unrealized: Vec<PairDistance>,
    /// Set when the coordinates do not fit the graph.
    pub malformed: Option<String>,
}

impl LayoutReport {
    pub fn is_valid(&self) -> bool {
        self.window.is_some()
    }

    pub fn width(&self) -> f64 {
        self.window.map_or(0.0, |(lo, hi)| hi - lo)
    }
}

fn pair_distance(g: &MisGraph, coords: &[Vec<f64>], u: usize, v: usize) -> PairDistance {
    let distance = coords[u].iter().zip(&coords[v]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    PairDistance { pair: (u, v), labels: (g.label(u), g.label(v)), distance }
}

/// Checks `coords` (one point per vertex, µm) against the edges of `g`,
/// with the radius restricted to `[r_min, r_max]`.
pub fn validate_layout(g: &MisGraph, coords: &[Vec<f64>], r_min: f64, r_max: f64) -> LayoutReport {
    let mut report = LayoutReport {
        longest_edge: None,
        shortest_non_edge: None,
        window: None,
        violations: Vec::new(),
        unrealized: Vec::new(),
        malformed: None,
    };
    if coords.len() != g.len() {
        report.malformed = Some(format!("{} points for {} vertices", coords.len(), g.len()));
        return report;
    }
    if coords.iter().map(Vec::len).dedup().count() > 1 {
        report.malformed = Some("points of mixed dimension".to_string());
        return report;
    }
    let deferred: BTreeSet<(usize, usize)> = g.deferred_edges.iter().copied().collect();
    let mut edges = Vec::new();
    let mut others = Vec::new();
    for (u, v) in (0..g.len()).tuple_combinations() {
        if deferred.contains(&(u, v)) {
            continue;
        }
        let d = pair_distance(g, coords, u, v);
        if g.has_edge(u, v) {
            edges.push(d);
        } else {
            others.push(d);
        }
    }
    let by_distance = |a: &&PairDistance, b: &&PairDistance| a.distance.total_cmp(&b.distance);
    report.longest_edge = edges.iter().max_by(by_distance).cloned();
    report.shortest_non_edge = others.iter().min_by(by_distance).cloned();
    let low = report.longest_edge.as_ref().map_or(0.0, |p| p.distance).max(r_min);
    let high = report.shortest_non_edge.as_ref().map_or(f64::INFINITY, |p| p.distance).min(r_max);
    if low < high {
        report.window = Some((low, high));
    } else {
        for e in &edges {
            if e.distance >= high {
                report.violations.push(Violation { kind: ViolationKind::LongEdge, pair: e.clone() });
            }
        }
        for o in &others {
            if o.distance <= low {
                report.violations.push(Violation { kind: ViolationKind::ShortNonEdge, pair: o.clone() });
            }
        }
    }
    for &(u, v) in &deferred {
        let d = pair_distance(g, coords, u, v);
        if d.distance >= high {
            report.unrealized.push(d);
        }
    }
    report
}

/// Result of relabeling duplicate occurrences onto supplied points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment {
    pub coordinates: Vec<Vec<f64>>,
    pub report: LayoutReport,
    /// `(vertex, source)`: the vertex takes the point supplied for `source`.
    pub moved: Vec<(usize, usize)>,
}

/// Searches permutations of the points among duplicate occurrences of the
/// same literal for a valid layout. The identity is tried first; the first
/// valid assignment in lexicographic order of per-family permutations wins.
pub fn align_layout(g: &MisGraph, coords: &[Vec<f64>], r_min: f64, r_max: f64) -> Option<Alignment> {
    const SEARCH_CAP: usize = 1 << 20;
    if coords.len() != g.len() {
        return None;
    }
    let mut families: BTreeMap<(VertexBase, bool), Vec<usize>> = BTreeMap::new();
    for (u, v) in g.vertices.iter().enumerate() {
        if !v.is_wire() {
            families.entry((v.base.clone(), v.negated)).or_default().push(u);
        }
    }
    let families: Vec<Vec<usize>> = families.into_values().filter(|f| f.len() > 1).collect();
    let combos: usize = families.iter().map(|f| (1..=f.len()).product::<usize>()).product();
    if combos > SEARCH_CAP {
        return None;
    }
    if families.is_empty() {
        let report = validate_layout(g, coords, r_min, r_max);
        return report.is_valid().then(|| Alignment { coordinates: coords.to_vec(), report, moved: Vec::new() });
    }
    let choices = families.iter().map(|f| f.iter().copied().permutations(f.len()));
    for pick in choices.multi_cartesian_product() {
        let mut placed = coords.to_vec();
        let mut moved = Vec::new();
        for (family, sources) in families.iter().zip(&pick) {
            for (&u, &src) in family.iter().zip(sources) {
                placed[u] = coords[src].clone();
                if u != src {
                    moved.push((u, src));
                }
            }
        }
        let report = validate_layout(g, &placed, r_min, r_max);
        if report.is_valid() {
            return Some(Alignment { coordinates: placed, report, moved });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mis::builtin::{builtin, G35_EXP_TABLE};
    use crate::mis::{VertexBase, VertexLabel};

    fn points(g: &MisGraph, coords: &[Vec<f64>]) -> MisGraph {
        MisGraph { coordinates: Some(coords.to_vec()), ..g.clone() }
    }

    fn line(n: usize, edges: &[(usize, usize)]) -> MisGraph {
        MisGraph {
            vertices: (0..n)
                .map(|k| VertexLabel { base: VertexBase::Wire { index: k + 1 }, negated: false, duplicate: 1, clause: None })
                .collect(),
            edges: edges.iter().copied().collect(),
            ..Default::default()
        }
    }

    #[test]
    fn path_on_a_line_has_a_window() {
        let g = line(3, &[(0, 1), (1, 2)]);
        let c = vec![vec![0.0], vec![5.0], vec![10.0]];
        let r = validate_layout(&points(&g, &c), &c, 0.0, f64::INFINITY);
        assert_eq!(r.window, Some((5.0, 10.0)));
        assert!(r.violations.is_empty());
    }

    #[test]
    fn coincident_non_edge_is_reported() {
        let g = line(2, &[]);
        let c = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let r = validate_layout(&g, &c, 0.0, f64::INFINITY);
        assert!(!r.is_valid());
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].kind, ViolationKind::ShortNonEdge);
    }

    #[test]
    fn radius_limits_clip_the_window() {
        let g = line(3, &[(0, 1), (1, 2)]);
        let c = vec![vec![0.0], vec![5.0], vec![10.0]];
        assert_eq!(validate_layout(&g, &c, 6.0, 9.0).window, Some((6.0, 9.0)));
        assert!(!validate_layout(&g, &c, 0.0, 4.0).is_valid());
    }

    #[test]
    fn malformed_points_are_reported() {
        let g = line(2, &[(0, 1)]);
        assert!(validate_layout(&g, &[vec![0.0]], 0.0, 1.0).malformed.is_some());
        assert!(validate_layout(&g, &[vec![0.0], vec![0.0, 1.0]], 0.0, 1.0).malformed.is_some());
    }

    #[test]
    fn fifteen_experimental_layout_is_valid() {
        let g = builtin("G15Exp").unwrap().graph;
        let r = validate_layout(&g, g.coordinates.as_ref().unwrap(), 0.0, f64::INFINITY);
        let (lo, hi) = r.window.unwrap();
        // longest edge w5 - w6, shortest non-edge p2 - ¬p1
        assert!((lo - 9.561590).abs() < 1e-6 && (hi - 12.775700).abs() < 1e-6, "{lo} {hi}");
        assert_eq!(r.longest_edge.unwrap().labels, ("w5".to_string(), "w6".to_string()));
    }

    #[test]
    fn thirty_five_table_needs_duplicate_relabeling() {
        let g = builtin("G35Exp").unwrap().graph;
        let table = crate::mis::builtin::table_points(&g, G35_EXP_TABLE);
        let literal = validate_layout(&g, &table, 0.0, f64::INFINITY);
        assert!(!literal.is_valid());
        let aligned = align_layout(&g, &table, 0.0, f64::INFINITY).unwrap();
        assert!(aligned.report.is_valid());
        assert_eq!(aligned.report.unrealized.len(), 4);
        assert_eq!(&aligned.coordinates, g.coordinates.as_ref().unwrap());
        let moved: BTreeSet<(String, String)> =
            aligned.moved.iter().map(|&(u, s)| (g.label(u), g.label(s))).collect();
        let want: BTreeSet<(String, String)> = [
            ("p1^(2)", "p1^(3)"),
            ("p1^(3)", "p1^(2)"),
            ("¬p1", "¬p1^(3)"),
            ("¬p1^(3)", "¬p1"),
            ("q1", "q1^(3)"),
            ("q1^(2)", "q1"),
            ("q1^(3)", "q1^(2)"),
        ]
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
        assert_eq!(moved, want);
    }
}
