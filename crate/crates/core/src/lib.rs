//! Positive α-stable laws and their powers: densities, the unimodality
//! frontier curves, exact complete-monotonicity checks and Monte Carlo
//! verification of distributional identities.

pub mod cmlab;
pub mod density;
pub mod error;
pub mod frontier;
pub mod kanter;
pub mod mc;
pub mod par;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub use par::Exec;
pub use specfun::{EvalResult, Regime, StabilityIndex};
