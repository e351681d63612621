//! Exact maximum independent set by branch and bound.
//!
//! Branches on the highest-degree candidate, takes isolated candidates
//! unconditionally and bounds with a greedy clique cover of the remaining
//! candidates. All maximum sets are enumerated, so the bound only prunes
//! branches that cannot tie the incumbent.

use serde::{Deserialize, Serialize};

use super::{MisError, MisGraph};

pub const MIS_VERTEX_CAP: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisSolution {
    pub size: usize,
    /// Vertex bitmasks, ascending.
    pub sets: Vec<u64>,
}

impl MisSolution {
    pub fn mask_bits(&self, set: &u64, len: usize) -> Vec<bool> {
        (0..len).map(|u| set >> u & 1 == 1).collect()
    }

    pub fn members(set: u64) -> Vec<usize> {
        (0..64).filter(|u| set >> u & 1 == 1).collect()
    }
}

pub fn solve_mis_exact(g: &MisGraph) -> Result<MisSolution, MisError> {
    if g.len() > MIS_VERTEX_CAP {
        return Err(MisError::TooLarge { vertices: g.len(), cap: MIS_VERTEX_CAP });
    }
    let mut search = Search { adj: g.adjacency_masks(), best: 0, sets: Vec::new() };
    let all = if g.is_empty() { 0 } else { u64::MAX >> (64 - g.len()) };
    search.branch(0, all);
    let mut sets = search.sets;
    sets.sort_unstable();
    sets.dedup();
    Ok(MisSolution { size: search.best, sets })
}

struct Search {
    adj: Vec<u64>,
    best: usize,
    sets: Vec<u64>,
}

impl Search {
    fn branch(&mut self, chosen: u64, mut cand: u64) {
        let mut chosen = chosen;
        // isolated candidates belong to every maximum extension
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.adj[v] & cand == 0 {
                chosen |= 1 << v;
                cand &= !(1 << v);
            }
        }
        let size = chosen.count_ones() as usize;
        if cand == 0 {
            if size > self.best {
                self.best = size;
                self.sets.clear();
            }
            if size == self.best {
                self.sets.push(chosen);
            }
            return;
        }
        if size + self.clique_cover_bound(cand) < self.best {
            return;
        }
        let mut pivot = 0;
        let mut degree = 0;
        let mut rest = cand;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let d = (self.adj[v] & cand).count_ones();
            if d > degree {
                degree = d;
                pivot = v;
            }
        }
        self.branch(chosen | 1 << pivot, cand & !(1 << pivot) & !self.adj[pivot]);
        self.branch(chosen, cand & !(1 << pivot));
    }

    /// Number of cliques in a greedy cover of `cand`: an upper bound on any
    /// independent subset.
    fn clique_cover_bound(&self, mut cand: u64) -> usize {
        let mut cliques = 0;
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            let mut common = self.adj[v] & cand;
            while common != 0 {
                let w = common.trailing_zeros() as usize;
                cand &= !(1 << w);
                common &= self.adj[w] & !(1 << w);
            }
            cliques += 1;
        }
        cliques
    }
}
