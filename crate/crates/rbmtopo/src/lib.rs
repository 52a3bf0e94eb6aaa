//! Exact restricted Boltzmann machine (RBM) parameterizations of
//! topologically ordered quantum states.
//!
//! The crate turns several descriptions of stabilizer-like states into
//! complex-weight RBM networks whose amplitudes match the target state
//! exactly (up to one global scale), and verifies the constructions
//! against independent brute-force oracles:
//!
//! * [`rbm`] — network types, amplitude evaluation, dense expansion;
//! * [`gadgets`] — closed-form hidden-unit blocks (parity, pair phases,
//!   cosine pairs, hyperedge phases, symmetric indicators);
//! * [`phase_poly`] — the mod-8/4/2 phase-polynomial closed form and its
//!   compilation to gadget networks;
//! * [`clifford`] — circuits, the deep-network lowering, hidden-variable
//!   elimination, stabilizer synthesis and a dense simulator;
//! * [`models`] — named lattice models bundled with their oracles;
//! * [`verify`] — fidelity reports, elimination traces, resource bounds.

pub mod clifford;
pub mod error;
pub mod gadgets;
pub mod gf2;
pub mod models;
pub mod phase_poly;
pub mod rbm;
pub mod stabilizer;
pub mod verify;

pub use error::{Error, Result};
