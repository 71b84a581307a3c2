//! Price-of-anarchy experiments: single points, log-spaced inflow sweeps,
//! power-law fits of the decay toward 1, and demand sequences.

mod fit;
mod poa;
mod sequence;
mod sweep;

pub use fit::{fit_power_law, FitConfig};
pub use poa::{lock_in_threshold, price_of_anarchy, PoaPoint, OPT_FLOOR};
pub use sequence::{salience_check, Affine, DemandSequence, InflowRule, SalienceReport, DEFAULT_SALIENCE_THRESHOLD};
pub use sweep::{sequence_poa, sweep, LogGrid, RowStatus, SweepMeta, SweepResult, SweepRow};

use crate::asymptotics::AsymptoticsError;
use crate::routing::RoutingError;
use crate::solvers::SolverError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Asymptotics(#[from] AsymptoticsError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("power-law fit is degenerate: {0}")]
    FitDegenerate(String),
}
