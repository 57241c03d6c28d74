//! Guided-missile engagement simulation with a two-step predictor-observer
//! that compensates seeker delay.

pub mod airframe;
pub mod cli;
pub mod config;
pub mod engagement;
pub mod error;
pub mod guidance;
pub mod montecarlo;
pub mod observer;
pub mod ode;
pub mod seeker;
pub mod targets;

pub use error::{Error, Result};
