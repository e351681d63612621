//! From measurement events to factor statistics.
//!
//! Events first pass post-selection on deferred edges, then wire
//! compilation, which keeps an event only when every wire interior is a
//! maximal independent completion of its endpoints and the endpoints are not
//! both excited. Surviving events are read with the duplicate rule and
//! sorted into solutions, unsatisfying assignments and undecidable reads.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{is_satisfiable, CnfFormula, VariableId};
use crate::mis::{decode_set, factor_words, BitStatus, MisGraph};
use crate::problem::{FactorPair, ProblemInstance};
use crate::sim::{bitstring, MeasurementEvent};

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("event has {got} bits, graph has {expected} atoms")]
    LengthMismatch { expected: usize, got: usize },
    #[error("event table: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad bit string {0:?}")]
    BadBits(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WireVerdict {
    /// Non-wire bits of an accepted event.
    Keep(Vec<bool>),
    Discard,
}

pub fn compile_wires(g: &MisGraph, bits: &[bool]) -> Result<WireVerdict, DecodeError> {
    if bits.len() != g.len() {
        return Err(DecodeError::LengthMismatch { expected: g.len(), got: bits.len() });
    }
    for wire in &g.wires {
        let chain: Vec<bool> = wire.chain().iter().map(|&u| bits[u]).collect();
        let (first, last) = (chain[0], chain[chain.len() - 1]);
        if first && last {
            return Ok(WireVerdict::Discard);
        }
        for k in 1..chain.len() - 1 {
            let (left, here, right) = (chain[k - 1], chain[k], chain[k + 1]);
            if here && (left || right) {
                return Ok(WireVerdict::Discard);
            }
            if !here && !left && !right {
                return Ok(WireVerdict::Discard);
            }
        }
    }
    Ok(WireVerdict::Keep(g.strip_wires(bits)))
}

/// False when both ends of a deferred edge are excited.
pub fn post_select_edges(g: &MisGraph, bits: &[bool]) -> bool {
    g.deferred_edges.iter().all(|&(u, v)| !(bits[u] && bits[v]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Solution,
    Unsat,
    Undecidable,
    DiscardedWire,
    DiscardedEdge,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedEvent {
    pub assignment: BTreeMap<VariableId, BitStatus>,
    pub classification: Classification,
    pub factor_pair: Option<(u64, u64)>,
}

/// Reads one wire-free configuration of `g`. Factor bits must all be
/// decided; other variables left undecided are completed existentially.
pub fn classify(g: &MisGraph, f: &CnfFormula, inst: &ProblemInstance, bits: &[bool]) -> DecodedEvent {
    let assignment = decode_set(g, bits);
    let Some((p, q)) = factor_words(&assignment, inst.np, inst.nq) else {
        return DecodedEvent { assignment, classification: Classification::Undecidable, factor_pair: None };
    };
    let fixed: Vec<(VariableId, bool)> = assignment
        .iter()
        .filter_map(|(v, s)| match s {
            BitStatus::One => Some((v.clone(), true)),
            BitStatus::Zero => Some((v.clone(), false)),
            BitStatus::Undecidable => None,
        })
        .collect();
    let product_ok = FactorPair::for_instance(inst, p, q).is_ok_and(|pair| inst.check_factor_pair(&pair));
    let solution = product_ok && is_satisfiable(f, &fixed);
    let classification = if solution { Classification::Solution } else { Classification::Unsat };
    DecodedEvent { assignment, classification, factor_pair: Some((p, q)) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Bucket {
    Solution { p: u64, q: u64 },
    Unsat { p: u64, q: u64 },
    Undecidable,
}

impl Bucket {
    pub fn label(&self) -> String {
        match self {
            Bucket::Solution { p, q } | Bucket::Unsat { p, q } => format!("({p};{q})"),
            Bucket::Undecidable => "undecidable".to_string(),
        }
    }

    pub fn class(&self) -> &'static str {
        match self {
            Bucket::Solution { .. } => "solution",
            Bucket::Unsat { .. } => "unsat",
            Bucket::Undecidable => "undecidable",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: BTreeMap<Bucket, usize>,
    pub total_events: usize,
    pub usable_events: usize,
    pub discarded_wire: usize,
    pub discarded_edge: usize,
}

impl Histogram {
    pub fn probability(&self, bucket: &Bucket) -> f64 {
        if self.usable_events == 0 {
            return 0.0;
        }
        self.counts.get(bucket).copied().unwrap_or(0) as f64 / self.usable_events as f64
    }

    /// Buckets with probabilities over the usable events.
    pub fn buckets(&self) -> Vec<(Bucket, usize, f64)> {
        self.counts.iter().map(|(b, &c)| (*b, c, self.probability(b))).collect()
    }

    pub fn class_mass(&self, class: &str) -> f64 {
        self.buckets().iter().filter(|(b, _, _)| b.class() == class).fold(0.0, |acc, (_, _, p)| acc + p)
    }

    pub fn usable_fraction(&self) -> f64 {
        if self.total_events == 0 {
            0.0
        } else {
            self.usable_events as f64 / self.total_events as f64
        }
    }

    /// Buckets by decreasing count, ties in bucket order.
    pub fn ranked(&self) -> Vec<(Bucket, usize)> {
        let mut v: Vec<(Bucket, usize)> = self.counts.iter().map(|(b, &c)| (*b, c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v
    }
}

/// Histogram of wire-free events read on the wire-free graph `g`.
pub fn decode_events(g: &MisGraph, f: &CnfFormula, inst: &ProblemInstance, events: &[MeasurementEvent]) -> Histogram {
    let mut h = Histogram::default();
    for ev in events {
        let d = classify(g, f, inst, &ev.bits);
        let bucket = match (d.classification, d.factor_pair) {
            (Classification::Solution, Some((p, q))) => Bucket::Solution { p, q },
            (Classification::Unsat, Some((p, q))) => Bucket::Unsat { p, q },
            _ => Bucket::Undecidable,
        };
        *h.counts.entry(bucket).or_insert(0) += ev.multiplicity;
        h.total_events += ev.multiplicity;
        h.usable_events += ev.multiplicity;
    }
    h
}

/// Post-selection, wire compilation and decoding of raw events on `g`.
pub fn process_events(
    g: &MisGraph,
    f: &CnfFormula,
    inst: &ProblemInstance,
    events: &[MeasurementEvent],
) -> Result<Histogram, DecodeError> {
    let plain = g.unwired();
    let mut kept = Vec::new();
    let (mut wire, mut edge, mut total) = (0, 0, 0);
    for ev in events {
        total += ev.multiplicity;
        if ev.bits.len() != g.len() {
            return Err(DecodeError::LengthMismatch { expected: g.len(), got: ev.bits.len() });
        }
        if !post_select_edges(g, &ev.bits) {
            edge += ev.multiplicity;
            continue;
        }
        match compile_wires(g, &ev.bits)? {
            WireVerdict::Keep(bits) => kept.push(MeasurementEvent { bits, multiplicity: ev.multiplicity }),
            WireVerdict::Discard => wire += ev.multiplicity,
        }
    }
    let mut h = decode_events(&plain, f, inst, &kept);
    h.total_events = total;
    h.discarded_wire = wire;
    h.discarded_edge = edge;
    Ok(h)
}

/// `label,class,count,probability` rows in bucket order.
pub fn histogram_csv(h: &Histogram) -> Result<String, DecodeError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["label", "class", "count", "probability"])?;
    for (bucket, count, prob) in h.buckets() {
        w.write_record([bucket.label(), bucket.class().to_string(), count.to_string(), format!("{prob:.9}")])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8"))
}

/// Bar chart of the histogram; solutions blue, unsat black, undecidable gray.
pub fn histogram_svg(h: &Histogram) -> String {
    const BAR: f64 = 36.0;
    const HEIGHT: f64 = 200.0;
    let bars = h.buckets();
    let width = 60.0 + BAR * bars.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{}" font-family="sans-serif" font-size="10">"#,
        HEIGHT + 60.0
    );
    let _ = writeln!(s, r#"<line x1="40" y1="{HEIGHT}" x2="{width}" y2="{HEIGHT}" stroke="black"/>"#);
    for (k, (bucket, count, prob)) in bars.iter().enumerate() {
        let color = match bucket {
            Bucket::Solution { .. } => "#1f5fbf",
            Bucket::Unsat { .. } => "#000000",
            Bucket::Undecidable => "#999999",
        };
        let x = 44.0 + BAR * k as f64;
        let y = HEIGHT * (1.0 - prob);
        let _ = writeln!(
            s,
            r#"<rect x="{x:.1}" y="{y:.3}" width="{:.1}" height="{:.3}" fill="{color}"><title>{} {count}</title></rect>"#,
            BAR - 6.0,
            HEIGHT - y,
            bucket.label()
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" transform="rotate(60 {:.1} {:.1})">{}</text>"#,
            x,
            HEIGHT + 12.0,
            x,
            HEIGHT + 12.0,
            bucket.label()
        );
    }
    s.push_str("</svg>\n");
    s
}

/// `bitstring,count` rows, bit `u` at position `u`.
pub fn events_csv(events: &[MeasurementEvent]) -> Result<String, DecodeError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bitstring", "count"])?;
    for ev in events {
        w.write_record([bitstring(&ev.bits), ev.multiplicity.to_string()])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?).expect("csv output is utf-8"))
}

pub fn read_events_csv(text: &str) -> Result<Vec<MeasurementEvent>, DecodeError> {
    #[derive(Deserialize)]
    struct Row {
        bitstring: String,
        count: usize,
    }
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in r.deserialize() {
        let row: Row = row?;
        let bits = row
            .bitstring
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(DecodeError::BadBits(row.bitstring.clone())),
            })
            .collect::<Result<Vec<bool>, _>>()?;
        out.push(MeasurementEvent { bits, multiplicity: row.count });
    }
    Ok(out)
}
