//! Beaconless geographic forwarding with on-demand cooperative relaying:
//! link models, relay selection, the per-hop handshake, greedy and face
//! routing, and a seeded Monte Carlo runner.

pub mod error;
pub mod geometry;
pub mod mac;
pub mod metrics;
pub mod phy;
pub mod relaysel;
pub mod routing;
pub mod sim;
pub mod time;
pub use error::{ConfigError, Error, Result};
