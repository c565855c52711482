//! Exact entanglement calculations for the toric code on small lattices.
//!
//! A dense state-vector oracle (partial traces, partial transposes,
//! negativities and entropies) is cross-checked against closed-form
//! predictions computed from lattice combinatorics alone.

pub mod closedform;
pub mod entanglement;
pub mod groundstate;
pub mod harness;
pub mod kernels;
pub mod lattice;
pub mod linalg;
pub mod pauli;
