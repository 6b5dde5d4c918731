//! Frames, contention timers, contention resolution and the per-hop handshake.

mod contention;
mod frame;
mod hop;
mod timers;

pub use contention::{
    resolve_contention, resolve_window, ContentionEntry, ContentionOutcome, ContentionRound, WindowResult,
};
pub use frame::{packet_symbols, Frame, FrameKind, PACKET_BYTES, SYMBOL_RATE_PER_US};
pub use hop::{
    run_hop, ForwarderPlan, HopContext, HopOutcome, HopReport, RoundKind, RoundRecord, TraceKind, TraceRecord,
};
pub use timers::{forwarder_timer, tf1, ts1_initial, ts1_updated};

use crate::error::{Error, Result};
use crate::time::Micros;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacConfig {
    /// Contention window.
    pub t_max: Micros,
    /// Number of contention sub-areas; even.
    pub nsa: usize,
    pub t_data: Micros,
    pub t_ctf: Micros,
    pub t_sel: Micros,
    pub t_ack: Micros,
    /// `None` uses the airtime of the contended response frame.
    pub vulnerability_window: Option<Micros>,
    /// Idealized MAC: the earliest timer always wins.
    pub collision_free: bool,
}

impl Default for MacConfig {
    fn default() -> Self {
        Self::for_constellation(4)
    }
}

impl MacConfig {
    /// Defaults with the DATA airtime of a full packet at constellation `order`.
    pub fn for_constellation(order: u32) -> Self {
        Self {
            t_max: Micros(500.0),
            nsa: 8,
            t_data: Micros(packet_symbols(order) as f64 / SYMBOL_RATE_PER_US),
            t_ctf: Micros(20.0),
            t_sel: Micros(20.0),
            t_ack: Micros(20.0),
            vulnerability_window: None,
            collision_free: false,
        }
    }

    pub fn window_for(&self, response: Micros) -> Micros {
        self.vulnerability_window.unwrap_or(response)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [self.t_max, self.t_data, self.t_ctf, self.t_sel, self.t_ack];
        if positive.iter().any(|t| !(t.0 > 0.0)) {
            return Err(Error::InvalidParameter { name: "mac", reason: "durations must be positive".into() });
        }
        if self.nsa < 2 || self.nsa % 2 != 0 {
            return Err(Error::InvalidSubAreaCount(self.nsa));
        }
        if self.t_data < self.t_ctf.max(self.t_sel).max(self.t_ack) {
            return Err(Error::InvalidParameter { name: "t_data", reason: "shorter than a control frame".into() });
        }
        Ok(())
    }
}
