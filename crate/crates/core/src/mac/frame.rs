use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{NodeId, Position};
use crate::time::Micros;

/// Packet size in bytes carried by every DATA frame.
pub const PACKET_BYTES: usize = 1538;

/// Channel symbol rate in symbols per microsecond (22 MHz at one symbol per Hz).
pub const SYMBOL_RATE_PER_US: f64 = 22.0;

/// Symbols of an uncoded packet: `ceil(1538 * 8 / log2 M)`.
pub fn packet_symbols(order: u32) -> usize {
    let bits = (PACKET_BYTES * 8) as f64;
    (bits / (order as f64).log2()).ceil() as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FrameKind {
    Data,
    Ctf,
    Select,
    Ack,
    RelayData,
}

impl FrameKind {
    pub fn name(self) -> &'static str {
        match self {
            FrameKind::Data => "DATA",
            FrameKind::Ctf => "CTF",
            FrameKind::Select => "SELECT",
            FrameKind::Ack => "ACK",
            FrameKind::RelayData => "RELAY_DATA",
        }
    }

    pub fn carries_payload(self) -> bool {
        matches!(self, FrameKind::Data | FrameKind::RelayData)
    }
}

impl fmt::Display for FrameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub kind: FrameKind,
    pub src: NodeId,
    /// `None` for broadcasts.
    pub dst: Option<NodeId>,
    pub src_position: Position,
    /// Position of the final destination.
    pub dest_position: Position,
    /// Meaningful on CTF frames only.
    pub coop_requested: bool,
    pub payload_symbols: usize,
}

impl Frame {
    pub fn data(src: NodeId, src_position: Position, dest_position: Position, symbols: usize) -> Self {
        Self {
            kind: FrameKind::Data,
            src,
            dst: None,
            src_position,
            dest_position,
            coop_requested: false,
            payload_symbols: symbols,
        }
    }

    pub fn relay_data(
        src: NodeId,
        dst: NodeId,
        src_position: Position,
        dest_position: Position,
        symbols: usize,
    ) -> Self {
        Self { kind: FrameKind::RelayData, dst: Some(dst), ..Self::data(src, src_position, dest_position, symbols) }
    }

    pub fn ctf(
        src: NodeId,
        dst: NodeId,
        src_position: Position,
        dest_position: Position,
        coop_requested: bool,
    ) -> Self {
        Self { coop_requested, ..Self::control(FrameKind::Ctf, src, Some(dst), src_position, dest_position) }
    }

    pub fn control(
        kind: FrameKind,
        src: NodeId,
        dst: Option<NodeId>,
        src_position: Position,
        dest_position: Position,
    ) -> Self {
        Self { kind, src, dst, src_position, dest_position, coop_requested: false, payload_symbols: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::InvalidParameter { name: "frame", reason: reason.to_string() });
        if self.kind.carries_payload() && self.payload_symbols == 0 {
            return bad("data frames need a payload");
        }
        if !self.kind.carries_payload() && self.payload_symbols != 0 {
            return bad("control frames carry no payload");
        }
        if self.kind != FrameKind::Ctf && self.coop_requested {
            return bad("only CTF frames request cooperation");
        }
        Ok(())
    }

    pub fn duration(&self, cfg: &super::MacConfig) -> Micros {
        match self.kind {
            FrameKind::Data | FrameKind::RelayData => cfg.t_data,
            FrameKind::Ctf => cfg.t_ctf,
            FrameKind::Select => cfg.t_sel,
            FrameKind::Ack => cfg.t_ack,
        }
    }
}
