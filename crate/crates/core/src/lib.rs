//! Message- and time-efficient multi-broadcast over connected-dominating-set
//! backbones in wireless ad-hoc networks.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] builds the directed communication graph from node positions,
//!   transmission powers and obstacles, and answers hop-distance, diameter and
//!   conflict-set queries.
//! * [`backbone`] constructs connected dominating sets: a greedy
//!   approximation, a diameter-bounded refinement and an exact oracle.
//! * [`schedule`] produces centralized broadcast and multi-broadcast schedules
//!   on a backbone, makes them collision free and simulates them.
//! * [`dist`] simulates the slotted randomized transmission procedures, with
//!   and without collision detection.
//! * [`bounds`] computes lower bounds and analytic expectations.
//! * [`generate`] builds random and structured network fixtures.

pub mod backbone;
pub mod bounds;
pub mod dist;
mod error;
pub mod generate;
mod geometry;
pub mod model;
pub mod schedule;

pub use backbone::{Backbone, BackboneOrigin, ClusterAssignment, PropagationTree};
pub use bounds::BoundReport;
pub use dist::{DistMetrics, Mode, SimConfig};
pub use error::{Error, Result};
pub use geometry::Point;
pub use model::{NetworkGraph, NodeId, NodeSpec, Obstacle, Subgraph};
pub use schedule::{Batch, Metrics, Rumor, Schedule};
