//! Nonatomic routing games: Wardrop equilibria, social optima and the price
//! of anarchy across the congestion spectrum, together with the asymptotic
//! calculus (edge indices, tightness, rate exponents and bound constants)
//! that predicts how the price of anarchy behaves in light and heavy traffic.

pub mod routing;
pub mod solvers;
pub mod asymptotics;
pub mod lab;
pub mod scenario;
