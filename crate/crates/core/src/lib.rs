//! Duplication-divergence random graphs with edge deletion.
//!
//! Two models are simulated: Model A (deletion steps also add an isolated
//! vertex, so `N_m = m`) and Model B (deletion steps add nothing, with
//! per-step and possibly state-dependent parameters). Alongside the step
//! kernels the crate provides an exact expectation recursion for Model A,
//! brute-force enumeration of tiny cases, closed-form regime constants and a
//! seeded parallel ensemble runner.

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod graph;
pub mod models;
pub mod oracle;
pub mod output;
pub mod rng;
pub mod theory;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{DegreeHistogram, EvolvingGraph, InitialGraphSpec, VertexId};
pub use models::{Dynamics, ModelKind, ModelParams, ParamSchedule};
pub use rng::{RngStream, StepRng};
