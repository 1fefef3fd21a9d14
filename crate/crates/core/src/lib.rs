//! Qubit routing for coupling-constrained devices.
//!
//! Besides SWAP insertion and bridging, the router can move a qubit's state
//! by teleportation through an entangled ancilla pair (a *channel*). Channels
//! travel with the SWAPs like any other qubit content, and every teleport
//! re-entangles the measured pair so the channel stays available.
//!
//! The crate also ships an OpenQASM 2.0 front end and a branching
//! statevector simulator used to check mapped programs.

pub mod arch;
pub mod ir;
pub mod lowering;
pub mod qasm;
pub mod router;
pub mod verify;

pub use arch::CouplingMap;
pub use ir::{partition_layers, Circuit, Gate, GateKind, Layer};
pub use lowering::RoutedProgram;
pub use router::{CostModel, MappingState, Move, RouteConfig, RouteError, Strategy};
