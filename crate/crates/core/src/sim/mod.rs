//! The integrated cell simulation and its event log.

pub mod check;
mod log;
mod world;

pub use log::{addressed_to, Access, LogDigest, LogRecord, LogSink, NullSink, VecSink};
pub use world::Simulation;
