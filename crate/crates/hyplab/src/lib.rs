//! Numerical laboratory for wave equations whose propagation speed is
//! singular as t -> 0 and unbounded in x: coefficient catalogs with exact
//! derivative oracles, phase-space zone geometry, resonant counterexample
//! families, spectral mode integration, symbol majorants, and a 1D finite
//! difference solver for cone-of-dependence experiments.

pub mod activators;
pub mod coefficients;
pub mod config;
pub mod jet;
pub mod ode;
pub mod phase;
pub mod profiles;
pub mod quad;
pub mod report;
pub mod runner;
pub mod spectral;
pub mod symbols;
pub mod wavefd;
