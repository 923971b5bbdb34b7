//! Order batching for picker routing in rectangular grid warehouses.
//!
//! The central piece is a mixed-integer program that batches orders onto
//! capacity-limited trolleys while *approximating* the routing distance each
//! trolley will travel (aisle edges used, origin legs, cross-aisle span,
//! parity of edge counts per block), without constructing routes. Once a
//! batching is fixed, each trolley is routed exactly: as a required-edge
//! closed walk when reversing inside a subaisle is forbidden, or as a
//! generalized TSP over pick points when it is allowed.
//!
//! This crate is `no_std` (with `alloc`) and holds only the computational
//! pieces: warehouse geometry, the problem data model, the solver-agnostic
//! linear model and its MPS rendering, the batching model builder, exact
//! routers, brute-force oracles and the two batching heuristics. Anything
//! that talks to the outside world (solver processes, instance files, the
//! CLI) lives in the companion `pickbatch` crate, which plugs in through the
//! [`milp::Solver`] trait.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod approx;
pub mod fixtures;
pub mod heuristics;
pub mod instance;
pub mod milp;
pub mod oracle;
pub mod router;
pub mod warehouse;

mod util;

pub use instance::{Batching, Instance, Order, PickLocation, Product};
pub use milp::{MilpModel, SolveResult, SolveStatus, Solver};
pub use warehouse::{GridPoint, SubaisleId, WarehouseLayout};
