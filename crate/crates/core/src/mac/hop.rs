use std::fmt;

use rand::Rng;

use super::contention::{resolve_contention, ContentionEntry, ContentionOutcome, ContentionRound};
use super::frame::{packet_symbols, FrameKind};
use super::timers::{tf1, ts1_initial, ts1_updated};
use super::MacConfig;
use crate::geometry::{distance, in_relaying_area, NodeId, RelayArea, Topology};
use crate::phy::{awgn_ser, bernoulli, packet_success_prob, sample_fading_power, PhyConfig, QamParams};
use crate::relaysel::{relay_metric, relay_timer, MetricScale};
use crate::routing::blgf_select;
use crate::time::Micros;

/// Everything one hop needs to know.
#[derive(Debug, Clone, Copy)]
pub struct HopContext<'a> {
    pub topology: &'a Topology,
    pub sender: NodeId,
    /// Final destination of the packet.
    pub destination: NodeId,
    pub phy: &'a PhyConfig,
    pub qam: &'a QamParams,
    pub mac: &'a MacConfig,
    pub relay_area: RelayArea,
    /// `false` gives the direct-transmission baseline: CTF never requests help.
    pub cooperation: bool,
    /// Error-free links.
    pub ideal_phy: bool,
}

/// How the forwarder of a hop is found.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ForwarderPlan {
    /// Timer contention among positive-progress neighbors.
    Greedy,
    /// Forwarder already chosen by recovery. `response_at` is when its reply
    /// starts, measured from the end of DATA. With `resumed` the DATA went out
    /// in a greedy attempt that found no forwarder, and the hop picks up where
    /// that attempt stopped.
    Recovery { forwarder: NodeId, response_at: Micros, resumed: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HopOutcome {
    DirectSuccess,
    CoopSuccess,
    CoopFailNoRelay,
    NoForwarder,
    CollisionAbort,
    ResidualError,
}

impl HopOutcome {
    pub fn is_success(self) -> bool {
        matches!(self, HopOutcome::DirectSuccess | HopOutcome::CoopSuccess)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RoundKind {
    Forwarder,
    Relay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundRecord {
    pub kind: RoundKind,
    pub collided: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Frame(FrameKind),
    Collision(FrameKind),
    Timeout,
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceKind::Frame(k) => write!(f, "{k}"),
            TraceKind::Collision(k) => write!(f, "{k}_COLLISION"),
            TraceKind::Timeout => f.write_str("TIMEOUT"),
        }
    }
}

/// One frame event of a hop.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Start of the event, measured from the start of the hop's DATA.
    pub time: Micros,
    pub kind: TraceKind,
    pub src: NodeId,
    pub dst: Option<NodeId>,
    pub outcome: &'static str,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dst = self.dst.map_or_else(|| "*".to_string(), |d| d.to_string());
        write!(f, "{:.3},{},{},{},{}", self.time.0, self.kind, self.src, dst, self.outcome)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HopReport {
    pub outcome: HopOutcome,
    pub forwarder: Option<NodeId>,
    pub relay: Option<NodeId>,
    pub coop_requested: bool,
    /// Airtime from the start of the hop until the sender knows the result.
    pub elapsed: Micros,
    pub rounds: Vec<RoundRecord>,
    /// Symbol errors left in the forwarder's final decision.
    pub symbol_errors: usize,
    pub trace: Vec<TraceRecord>,
}

struct Recorder {
    start: Micros,
    trace: Vec<TraceRecord>,
    rounds: Vec<RoundRecord>,
}

impl Recorder {
    fn push(&mut self, time: Micros, kind: TraceKind, src: NodeId, dst: Option<NodeId>, outcome: &'static str) {
        self.trace.push(TraceRecord { time, kind, src, dst, outcome });
    }

    fn finish(self, outcome: HopOutcome, end: Micros, parts: Parts) -> HopReport {
        HopReport {
            outcome,
            forwarder: parts.forwarder,
            relay: parts.relay,
            coop_requested: parts.coop,
            elapsed: end - self.start,
            rounds: self.rounds,
            symbol_errors: parts.errors,
            trace: self.trace,
        }
    }
}

#[derive(Default)]
struct Parts {
    forwarder: Option<NodeId>,
    relay: Option<NodeId>,
    coop: bool,
    errors: usize,
}

fn mean_snr(ctx: &HopContext, d: f64) -> f64 {
    ctx.phy.total_power * d.powf(-ctx.phy.path_loss_exp) / ctx.phy.noise_power
}

/// Runs one attempt of the DATA / CTF / SELECT / [RELAY_DATA] / ACK exchange.
/// Every transmission uses the full power `P`.
pub fn run_hop<R: Rng + ?Sized>(ctx: &HopContext, plan: ForwarderPlan, rng: &mut R) -> HopReport {
    let mac = ctx.mac;
    let s = ctx.sender;
    let data_end = mac.t_data;
    let mut rec = Recorder { start: Micros::ZERO, trace: Vec::new(), rounds: Vec::new() };

    let (forwarder, response_start, select_start) = match plan {
        ForwarderPlan::Greedy => {
            rec.push(Micros::ZERO, TraceKind::Frame(FrameKind::Data), s, None, "sent");
            let search = blgf_select(ctx.topology, s, ctx.destination, mac, rng);
            rec.rounds.push(RoundRecord { kind: RoundKind::Forwarder, collided: search.window.collided() });
            for (at, ids) in &search.window.collisions {
                for &id in ids {
                    rec.push(data_end + *at, TraceKind::Collision(FrameKind::Ctf), id, Some(s), "garbled");
                }
            }
            match search.window.winner {
                Some((f, t)) => (f, data_end + t, data_end + t + mac.t_ctf),
                None if search.window.collided() => {
                    let end = ts1_initial(mac);
                    rec.push(end, TraceKind::Timeout, s, None, "restart");
                    return rec.finish(HopOutcome::CollisionAbort, end, Parts::default());
                }
                None => {
                    let end = data_end + mac.t_max * 0.5;
                    rec.push(end, TraceKind::Timeout, s, None, "no forwarder");
                    return rec.finish(HopOutcome::NoForwarder, end, Parts::default());
                }
            }
        }
        ForwarderPlan::Recovery { forwarder, response_at, resumed } => {
            if resumed {
                rec.start = data_end + mac.t_max * 0.5;
            } else {
                rec.push(Micros::ZERO, TraceKind::Frame(FrameKind::Data), s, None, "sent");
            }
            // Responses fill the window, then one control slot for protests.
            (forwarder, data_end + response_at, data_end + mac.t_max + mac.t_ctf)
        }
    };
    complete_hop(ctx, rec, forwarder, response_start, select_start, rng)
}

fn complete_hop<R: Rng + ?Sized>(
    ctx: &HopContext,
    mut rec: Recorder,
    f: NodeId,
    response_start: Micros,
    select_start: Micros,
    rng: &mut R,
) -> HopReport {
    let mac = ctx.mac;
    let topo = ctx.topology;
    let s = ctx.sender;
    let (sp, fp) = (topo.position(s), topo.position(f));
    let order = ctx.qam.order();
    let symbols = packet_symbols(order);

    // The forwarder's view of DATA, symbol by symbol.
    let mean_sf = mean_snr(ctx, distance(sp, fp));
    let mut snr_sf = Vec::with_capacity(symbols);
    let mut errors = 0;
    if !ctx.ideal_phy {
        for _ in 0..symbols {
            let snr = mean_sf * sample_fading_power(1.0, rng);
            errors += bernoulli(awgn_ser(snr, order), rng) as usize;
            snr_sf.push(snr);
        }
    }
    let coop = ctx.cooperation && errors > 0;
    let mut parts = Parts { forwarder: Some(f), relay: None, coop, errors };

    rec.push(
        response_start,
        TraceKind::Frame(FrameKind::Ctf),
        f,
        Some(s),
        if coop { "coop requested" } else { "sent" },
    );
    rec.push(select_start, TraceKind::Frame(FrameKind::Select), s, Some(f), "sent");
    let select_end = select_start + mac.t_sel;
    let source_deadline = select_start + ts1_updated(mac, coop);
    let forwarder_deadline = select_start - mac.t_ctf + tf1(mac, coop);

    let fail = |mut rec: Recorder, outcome, parts| {
        rec.push(source_deadline, TraceKind::Timeout, s, None, "restart");
        rec.finish(outcome, source_deadline, parts)
    };

    if !coop {
        if errors > 0 {
            return fail(rec, HopOutcome::ResidualError, parts);
        }
        rec.push(select_end, TraceKind::Frame(FrameKind::Ack), f, Some(s), "sent");
        return rec.finish(HopOutcome::DirectSuccess, select_end + mac.t_ack, parts);
    }

    // Relay candidates: nodes of the relaying area that decoded the whole packet.
    let r = topo.radio_range();
    let decoders: Vec<NodeId> = topo
        .ids()
        .filter(|&id| id != s && id != f && in_relaying_area(sp, fp, topo.position(id), r, ctx.relay_area))
        .filter(|&id| {
            ctx.ideal_phy || bernoulli(packet_success_prob(mean_snr(ctx, topo.distance(s, id)), order, symbols), rng)
        })
        .collect();
    if decoders.is_empty() {
        rec.push(forwarder_deadline, TraceKind::Timeout, f, None, "no relay");
        return fail(rec, HopOutcome::CoopFailNoRelay, parts);
    }

    let p = ctx.phy.path_loss_exp;
    let scale = MetricScale::new(sp, fp, r, ctx.relay_area, p, ctx.qam).expect("QAM weights are positive");
    let entries: Vec<ContentionEntry> = decoders
        .iter()
        .map(|&id| {
            let m = relay_metric(sp, fp, topo.position(id), p, ctx.qam);
            let normalized = scale.normalize(m).map(|n| n.value).unwrap_or(0.0);
            ContentionEntry {
                id,
                timer: relay_timer(normalized, mac.t_max, mac.nsa, rng),
                audible_to: decoders.iter().copied().filter(|&o| topo.can_hear(id, o)).collect(),
            }
        })
        .collect();
    let round = ContentionRound { entries, response: mac.t_data };
    let relay = match resolve_contention(&round, mac) {
        ContentionOutcome::Winner(id) => id,
        ContentionOutcome::Collision(ids) => {
            rec.rounds.push(RoundRecord { kind: RoundKind::Relay, collided: true });
            for id in ids {
                let t = round.entries.iter().find(|e| e.id == id).map(|e| e.timer).unwrap_or_default();
                rec.push(select_end + t, TraceKind::Collision(FrameKind::RelayData), id, Some(f), "garbled");
            }
            return fail(rec, HopOutcome::CollisionAbort, parts);
        }
        ContentionOutcome::Silence => unreachable!("candidate set is non-empty"),
    };
    rec.rounds.push(RoundRecord { kind: RoundKind::Relay, collided: false });
    parts.relay = Some(relay);
    let relay_timer_value = round.entries.iter().find(|e| e.id == relay).map(|e| e.timer).unwrap_or_default();
    let relay_start = select_end + relay_timer_value;
    let relay_end = relay_start + mac.t_data;
    rec.push(relay_start, TraceKind::Frame(FrameKind::RelayData), relay, Some(f), "sent");
    if relay_end > forwarder_deadline {
        rec.push(forwarder_deadline, TraceKind::Timeout, f, None, "relay too late");
        return fail(rec, HopOutcome::CoopFailNoRelay, parts);
    }

    // The relay decoded every symbol, so it forwards all of them; MRC adds SNRs.
    let mean_rf = mean_snr(ctx, topo.distance(relay, f));
    let mut combined_errors = 0;
    for &snr in &snr_sf {
        let combined = snr + mean_rf * sample_fading_power(1.0, rng);
        combined_errors += bernoulli(awgn_ser(combined, order), rng) as usize;
    }
    parts.errors = combined_errors;
    if combined_errors > 0 {
        return fail(rec, HopOutcome::ResidualError, parts);
    }
    rec.push(relay_end, TraceKind::Frame(FrameKind::Ack), f, Some(s), "sent");
    rec.finish(HopOutcome::CoopSuccess, relay_end + mac.t_ack, parts)
}
