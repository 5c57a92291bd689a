//! Minimal numeric engine for the actor and critic: flat parameter
//! vectors, a reverse-mode tape, GRU networks and Adam. Everything is
//! `f64`.

mod adam;
pub mod categorical;
pub mod checkpoint;
mod nets;
mod params;
mod tape;

pub use adam::Adam;
pub use nets::{gru_cell, CriticForward, CriticNet, CriticSpec, PolicyForward, PolicyNet, PolicySpec};
pub use params::{ParamSlice, ParamVector, SliceKind};
pub use tape::{log_softmax, sigmoid, Tape, Var};
