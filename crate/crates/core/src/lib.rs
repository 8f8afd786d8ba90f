//! Stochastic multi-resource traffic flow management toolkit.
//!
//! The library models a planning problem where flights choose one route from
//! a per-flight option set, depart from an airport, and traverse one or more
//! capacity-constrained airspace resources (PCAs) whose future capacities are
//! uncertain and described by a scenario tree. Decisions are reroutes, ground
//! delays and air delays; the objective is expected total cost.
//!
//! Modules:
//! - [`instance`]: domain types, instance files, validation, derived indices.
//! - [`scenario`]: scenario trees, branches, nonanticipativity structure.
//! - [`mip`]: generic sparse MIP container, LP/MPS writers, a reference
//!   bounded-variable simplex, and an external solver adapter.
//! - [`modelgen`]: builders for the six stochastic programs
//!   (two-stage / semi-dynamic / dynamic) x (flight-level / flow-aggregated).
//! - [`oracle`]: exhaustive policy enumeration for tiny instances.
//! - [`analysis`]: solution decoding, feasibility checks, comparison reports.
//! - [`gen`]: seeded synthetic instances and the bundled case study.

pub mod analysis;
pub mod error;
pub mod gen;
pub mod instance;
pub mod mip;
pub mod modelgen;
pub mod oracle;
pub mod scenario;

pub use error::Error;
pub use instance::Instance;
