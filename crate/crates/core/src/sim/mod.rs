//! Rydberg-atom dynamics on a gadget graph.
//!
//! With ħ = 1 and angular frequencies, the Hamiltonian is
//! `H = Σ_j (Ω/2) σx_j − Δ Σ_j n_j + U Σ_(j,k)∈E n_j n_k`. In the perfect
//! blockade limit the last term removes every configuration with an excited
//! edge, so the state lives on the independent sets of the graph. The
//! evolution uses a midpoint piecewise-constant propagator on each schedule
//! segment.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mis::MisGraph;

mod propagate;
mod schedule;

pub use propagate::EXACT_DIM_CAP;
pub use schedule::{
    constant_schedule, sweep_schedule, DriveSchedule, Segment, PEAK_RABI, RAMP_OFF, RAMP_ON, START_DETUNING, SWEEP,
};

pub const BLOCKADE_ATOM_CAP: usize = 28;
pub const FULL_SPACE_ATOM_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{atoms} atoms exceed the {cap}-atom cap for this mode")]
    TooLarge { atoms: usize, cap: usize },
    #[error("time {t} outside the schedule [0, {total}]")]
    OutOfRange { t: f64, total: f64 },
    #[error("schedule drive jumps between segments")]
    Discontinuous,
    #[error("schedule segment has negative duration")]
    NegativeDuration,
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("blockade mode needs an infinite interaction")]
    FiniteBlockade,
    #[error("full-space mode needs a finite interaction")]
    InfiniteInteraction,
    #[error("ground state needs positive detuning, got {0}")]
    NonPositiveDetuning(f64),
    #[error("ground state is defined in blockade mode only")]
    GroundStateMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    Blockade,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub graph: MisGraph,
    /// Pair interaction on edges; `None` is the perfect blockade.
    pub interaction: Option<f64>,
    pub mode: SimMode,
}

impl HamiltonianSpec {
    pub fn blockade(graph: MisGraph) -> Self {
        Self { graph, interaction: None, mode: SimMode::Blockade }
    }

    pub fn full(graph: MisGraph, interaction: f64) -> Self {
        Self { graph, interaction: Some(interaction), mode: SimMode::Full }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        match (self.mode, self.interaction) {
            (SimMode::Blockade, Some(_)) => Err(SimError::FiniteBlockade),
            (SimMode::Full, None) => Err(SimError::InfiniteInteraction),
            (SimMode::Full, Some(u)) if !u.is_finite() => Err(SimError::InfiniteInteraction),
            _ => Ok(()),
        }
    }
}

/// Configurations as bitmasks (bit `u` is atom `u`), ordered by popcount,
/// then by mask value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    pub atoms: usize,
    pub states: Vec<u64>,
}

impl Basis {
    fn from_states(atoms: usize, mut states: Vec<u64>) -> Self {
        states.sort_by_key(|&m| (m.count_ones(), m));
        Self { atoms, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn bits(&self, k: usize) -> Vec<bool> {
        (0..self.atoms).map(|u| self.states[k] >> u & 1 == 1).collect()
    }

    pub fn index(&self) -> HashMap<u64, usize> {
        self.states.iter().enumerate().map(|(k, &m)| (m, k)).collect()
    }
}

pub fn bitstring(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn blockade_basis(g: &MisGraph) -> Result<Basis, SimError> {
    if g.len() > BLOCKADE_ATOM_CAP {
        return Err(SimError::TooLarge { atoms: g.len(), cap: BLOCKADE_ATOM_CAP });
    }
    let adj = g.adjacency_masks();
    let mut states = Vec::new();
    let mut stack = vec![(0usize, 0u64)];
    while let Some((u, set)) = stack.pop() {
        if u == g.len() {
            states.push(set);
            continue;
        }
        stack.push((u + 1, set));
        if adj[u] & set == 0 {
            stack.push((u + 1, set | 1 << u));
        }
    }
    Ok(Basis::from_states(g.len(), states))
}

pub fn full_basis(g: &MisGraph) -> Result<Basis, SimError> {
    if g.len() > FULL_SPACE_ATOM_CAP {
        return Err(SimError::TooLarge { atoms: g.len(), cap: FULL_SPACE_ATOM_CAP });
    }
    Ok(Basis::from_states(g.len(), (0..1u64 << g.len()).collect()))
}

/// `H = (Ω/2)·flips − Δ·excitations + U·violations` on a fixed basis.
#[derive(Debug, Clone)]
pub struct Operator {
    pub basis: Basis,
    pub excitations: Vec<f64>,
    pub violations: Vec<f64>,
    pub interaction: f64,
    /// Pairs `(a, b)`, `a < b`, of basis states one flip apart.
    pub flips: Vec<(usize, usize)>,
}

impl Operator {
    pub fn new(spec: &HamiltonianSpec) -> Result<Self, SimError> {
        spec.validate()?;
        let g = &spec.graph;
        let basis = match spec.mode {
            SimMode::Blockade => blockade_basis(g)?,
            SimMode::Full => full_basis(g)?,
        };
        let index = basis.index();
        let mut flips = Vec::new();
        for (a, &m) in basis.states.iter().enumerate() {
            for u in 0..g.len() {
                if m >> u & 1 == 0 {
                    if let Some(&b) = index.get(&(m | 1 << u)) {
                        flips.push((a.min(b), a.max(b)));
                    }
                }
            }
        }
        flips.sort_unstable();
        let excitations = basis.states.iter().map(|m| m.count_ones() as f64).collect();
        let violations = basis
            .states
            .iter()
            .map(|m| g.edges.iter().filter(|&&(u, v)| m >> u & 1 == 1 && m >> v & 1 == 1).count() as f64)
            .collect();
        Ok(Self { basis, excitations, violations, interaction: spec.interaction.unwrap_or(0.0), flips })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn diagonal(&self, detuning: f64) -> Vec<f64> {
        self.excitations
            .iter()
            .zip(&self.violations)
            .map(|(n, v)| -detuning * n + self.interaction * v)
            .collect()
    }

    pub fn dense(&self, rabi: f64, detuning: f64) -> nalgebra::DMatrix<f64> {
        let mut h = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.diagonal(detuning)));
        for &(a, b) in &self.flips {
            h[(a, b)] = rabi / 2.0;
            h[(b, a)] = rabi / 2.0;
        }
        h
    }

    /// `out = H ψ`.
    pub fn apply(&self, rabi: f64, diag: &[f64], psi: &[Complex64], out: &mut [Complex64]) {
        for (k, o) in out.iter_mut().enumerate() {
            *o = psi[k] * diag[k];
        }
        let half = rabi / 2.0;
        for &(a, b) in &self.flips {
            out[a] += psi[b] * half;
            out[b] += psi[a] * half;
        }
    }
}

/// `H(t)` as a dense matrix on the mode's basis.
pub fn hamiltonian_at(spec: &HamiltonianSpec, sched: &DriveSchedule, t: f64) -> Result<nalgebra::DMatrix<f64>, SimError> {
    let (rabi, detuning) = sched.at(t)?;
    Ok(Operator::new(spec)?.dense(rabi, detuning))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub basis: Basis,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn empty_configuration(basis: Basis) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        let k = basis.states.iter().position(|&m| m == 0).expect("the empty set is in every basis");
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Self { basis, amplitudes }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn amplitude_of(&self, mask: u64) -> Complex64 {
        self.basis
            .states
            .iter()
            .position(|&m| m == mask)
            .map_or(Complex64::new(0.0, 0.0), |k| self.amplitudes[k])
    }

    pub fn probability_of(&self, mask: u64) -> f64 {
        self.amplitude_of(mask).norm_sqr()
    }

    /// Probability of each configuration in basis order, keyed by bit string.
    pub fn probability_map(&self) -> BTreeMap<String, f64> {
        (0..self.basis.len()).map(|k| (bitstring(&self.basis.bits(k)), self.amplitudes[k].norm_sqr())).collect()
    }
}

/// Evolves the empty configuration through `sched` with steps of at most `dt`.
pub fn evolve(spec: &HamiltonianSpec, sched: &DriveSchedule, dt: f64) -> Result<StateVector, SimError> {
    if !(dt > 0.0) {
        return Err(SimError::BadStep(dt));
    }
    let op = Operator::new(spec)?;
    let mut state = StateVector::empty_configuration(op.basis.clone());
    let mut start = 0.0;
    for seg in &sched.segments {
        let steps = (seg.duration / dt).ceil().max(1.0) as usize;
        let h = seg.duration / steps as f64;
        for k in 0..steps {
            let (rabi, detuning) = sched.at((start + (k as f64 + 0.5) * h).min(sched.total_time()))?;
            propagate::step(&op, rabi, detuning, h, &mut state.amplitudes);
        }
        start += seg.duration;
    }
    Ok(state)
}

/// Equal superposition of the maximum independent sets: the ground space at
/// zero Rabi drive and positive detuning.
pub fn ground_state(spec: &HamiltonianSpec, detuning: f64) -> Result<StateVector, SimError> {
    if spec.mode != SimMode::Blockade {
        return Err(SimError::GroundStateMode);
    }
    if !(detuning > 0.0) {
        return Err(SimError::NonPositiveDetuning(detuning));
    }
    let basis = blockade_basis(&spec.graph)?;
    let energy: Vec<f64> = basis.states.iter().map(|m| -detuning * m.count_ones() as f64).collect();
    let lowest = energy.iter().copied().fold(f64::INFINITY, f64::min);
    let ground: Vec<bool> = energy.iter().map(|&e| e == lowest).collect();
    let weight = 1.0 / (ground.iter().filter(|&&g| g).count() as f64).sqrt();
    let amplitudes = ground
        .iter()
        .map(|&g| Complex64::new(if g { weight } else { 0.0 }, 0.0))
        .collect();
    Ok(StateVector { basis, amplitudes })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementEvent {
    pub bits: Vec<bool>,
    pub multiplicity: usize,
}

/// Draws `shots` configurations from `|ψ|²`; events come out in basis order.
pub fn sample(state: &StateVector, shots: usize, seed: u64) -> Vec<MeasurementEvent> {
    let weights = state.probabilities();
    let Ok(dist) = WeightedIndex::new(&weights) else { return Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; weights.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(k, c)| MeasurementEvent { bits: state.basis.bits(k), multiplicity: c })
        .collect()
}
