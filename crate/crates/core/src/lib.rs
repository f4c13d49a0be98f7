//! Simulation and stuck-at fault injection for a self-checking dual-rail
//! logic family.
//!
//! * [`gate`] models the AND/OR/XOR cells and their internal fault sites.
//! * [`verify`] runs the exhaustive per-gate proofs.
//! * [`netlist`] parses single-rail netlists and compiles them to dual rail.
//! * [`sbox`] generates the composite-field AES S-box netlist.
//! * [`faultsim`] runs single- and multi-fault campaigns.
//! * [`area`] estimates transistor counts.

pub mod area;
pub mod faultsim;
pub mod gate;
pub mod netlist;
pub mod sbox;
pub mod verify;

pub use gate::{
    classify, eval_gate, rail_not, FaultOutcomeClass, GateKind, LocalFaultSite, RailPair,
};
pub use netlist::{DualRailNetlist, SingleRailNetlist};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
