//! Nelson-Siegel forward curves under the Ho-Lee and Hull-White short-rate
//! models: calibration, closed-form curve evolution on extended
//! Nelson-Siegel bases, numerical consistency checks and exact Monte Carlo
//! simulation.

pub mod cli;
pub mod consistency;
pub mod curves;
pub mod error;
pub mod io;
pub mod models;
pub mod quadrature;
pub mod simulation;

pub use error::{Error, Result};
