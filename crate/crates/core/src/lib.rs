//! Planning, control and simulation for parallel self-assembly of mobile
//! modular robots.
//!
//! A target robot morphology is a tree of cube modules joined face-to-face.
//! Given scattered modules on the ground, the pipeline is:
//!
//! 1. [`topology`]: validate the target tree and find its root (graph center).
//! 2. [`layout`]: unfold the tree onto the plane, one module width per edge.
//! 3. [`assignment`]: pick the physical root (nearest the cluster centroid)
//!    and map target roles onto physical modules by minimum total travel.
//! 4. [`scheduler`]: emit waves of docking actions, parents before children,
//!    with the root wave split into side-face and top/bottom-face subgroups
//!    and helper modules inserted for side-face docks.
//! 5. [`motion`]: grid path planning (prioritized space-time A*), path
//!    following, connector alignment and straight-line approach controllers.
//! 6. [`sim`]: a deterministic fixed-timestep world that executes the
//!    schedule and records trajectories, events and metrics.
//!
//! The crate is `no_std`-compatible (requires `alloc`; enable the `libm`
//! feature when building without `std`).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("assembly-core needs either the `std` or the `libm` feature for float math");

pub mod assignment;
pub mod config;
pub mod layout;
pub mod math;
pub mod motion;
pub mod scenario;
pub mod scheduler;
pub mod sim;
pub mod topology;

pub use config::{Config, MotionConfig, SimConfig};
pub use layout::{UnfoldedLayout, MODULE_WIDTH};
pub use math::{Pose2, Vec2};
pub use scenario::Scenario;
pub use scheduler::{AssemblyAction, Schedule, ScheduledAction};
pub use sim::{RunResult, WorldState};
pub use topology::{ConfigGraph, Face, ModuleId};
