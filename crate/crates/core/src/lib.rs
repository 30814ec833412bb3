//! Backhaul load of two overlapping cache-enabled relays serving single-relay
//! and dual-relay users, under MDS-coded placement and under the coded
//! multicast (ECC) delivery scheme.
//!
//! Three independent evaluators are provided: exact closed forms
//! ([`load_analytic`]), a seeded Monte Carlo simulator ([`simulator`]) and
//! exhaustive enumeration for small instances ([`brute_force`]).

pub mod brute_force;
pub mod combinatorics;
pub mod error;
pub mod experiment;
pub mod load_analytic;
pub mod occupancy;
pub mod scenario;
pub mod simulator;
pub mod validate;

pub use combinatorics::{Count, ExactValue};
pub use error::{Error, Result};
pub use load_analytic::LoadBreakdown;
pub use occupancy::Population;
pub use scenario::{Popularity, Scenario, Scheme};
pub use simulator::{monte_carlo, LoadReport};
