//! Discrete-event simulation of a single 802.11 cell with cooperative
//! relaying, RTS duration-inflation attackers, and AP-side duration
//! revalidation with blacklist broadcast.
//!
//! Layout:
//! - [`engine`]: clock, event queue, seeded random substreams
//! - [`channel`]: geometry, rate adaptation, airtime, collisions
//! - [`mac`]: frames, duration arithmetic, NAV, DCF state machine
//! - [`relay`]: relay candidates and selection factor ranking
//! - [`threat`]: attacker behaviours
//! - [`defense`]: revalidation and blacklists
//! - [`sim`]: the cell simulation wiring all of the above together
//! - [`harness`]: configs, runs, statistics, CSV

pub mod channel;
pub mod defense;
pub mod engine;
pub mod harness;
pub mod mac;
pub mod relay;
pub mod sim;
pub mod threat;
