//! Seeded packet-level simulation of placement and delivery.

pub mod monte_carlo;
pub mod placement;
pub mod protocol;
pub mod realization;
pub mod rng;
pub mod tally;

pub use monte_carlo::{monte_carlo, monte_carlo_grid, placement_for, LoadReport};
pub use placement::{place_popularity, place_uniform, PlacementMap};
pub use protocol::{
    count_backhaul, count_backhaul_ecc, count_backhaul_mds, plan_delivery, simulate_protocol, DeliveryPlan,
    FastCounter, Packet, PieceId,
};
pub use realization::{sample_realization, FileSampler, Realization, Request, UserClass};
pub use rng::trial_rng;
pub use tally::{tally, OutcomeTally};
