//! Deterministic generators for the benchmark dynamical systems (damped
//! oscillator, shifting tanh, rotating-stretching rigid body), Latin hypercube
//! sampling, a fixed-step RK4 integrator, and snapshot-matrix assembly and
//! CSV I/O.

mod error;
mod io;
mod lhs;
mod msd;
mod rigid_body;
mod rk4;
mod scenarios;
mod tanh_case;

pub use error::{CasegenError, Result};
pub use io::{load_snapshot_csv, write_snapshot_csv};
pub use lhs::lhs_sample;
pub use msd::msd_solve;
pub use rigid_body::{rigid_body_field, RigidBodyParams};
pub use rk4::rk4_integrate;
pub use scenarios::{
    assemble_scenario_matrix, assemble_time_matrix, linspace, MsdCase, PointCloud, RigidBodyCase,
    ScenarioSet, TanhCase, TimeSampling,
};
pub use tanh_case::{tanh_rate, tanh_solution};
