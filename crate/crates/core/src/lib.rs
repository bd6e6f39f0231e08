//! Typical multiqubit entanglement dynamics under independent non-Markovian
//! amplitude damping: channel, measures, initial-state ensembles, Monte
//! Carlo averaging and a search for maximally entangled pure states.

pub mod channel;
pub mod cli;
pub mod entanglement;
pub mod error;
pub mod io;
pub mod linalg;
pub mod montecarlo;
pub mod optimizer;
pub mod states;
pub mod table;

pub use error::{Error, Result};
