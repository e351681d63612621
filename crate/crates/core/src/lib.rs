//! Factorization compiled to Rydberg-atom maximum-independent-set graphs.
//!
//! The pipeline runs `n` through a pruned multiplication diagram ([`bdd`]),
//! a CNF encoding ([`cnf`]), a clause-gadget graph with quantum wires
//! ([`mis`]), an adiabatic blockade simulation ([`sim`]) and an event
//! decoder ([`decode`]). [`estimate`] gives the closed-form scaling and
//! [`pipeline`] wires the stages together with staged artifacts.

pub mod bdd;
pub mod cnf;
pub mod decode;
pub mod mis;
pub mod pipeline;
pub mod estimate;
pub mod problem;
pub mod sim;
