use std::collections::HashSet;

use rand::Rng;

use super::bfp::bfp_planarize;
use super::face::{face_next_hop, FaceState};
use crate::geometry::{NodeId, RelayArea, Topology};
use crate::mac::{run_hop, ForwarderPlan, HopContext, HopOutcome, HopReport, MacConfig};
use crate::phy::{PhyConfig, QamParams};
use crate::time::Micros;

/// Restarts per hop after the first attempt.
pub const DEFAULT_MAX_RESTARTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteConfig {
    pub phy: PhyConfig,
    pub qam: QamParams,
    pub mac: MacConfig,
    pub relay_area: RelayArea,
    /// `false` runs the direct-transmission baseline.
    pub cooperation: bool,
    pub ideal_phy: bool,
    pub max_restarts: usize,
    /// `None` caps the hop count at the square of the number of nodes. A
    /// perimeter walk may pass a node more than once, so the node count
    /// itself is too tight.
    pub max_hops: Option<usize>,
}

impl RouteConfig {
    pub fn new(phy: PhyConfig, qam: QamParams, mac: MacConfig) -> Self {
        Self {
            phy,
            qam,
            mac,
            relay_area: RelayArea::default(),
            cooperation: true,
            ideal_phy: false,
            max_restarts: DEFAULT_MAX_RESTARTS,
            max_hops: None,
        }
    }

    /// Error-free links and a collision-free MAC.
    pub fn ideal(mut self) -> Self {
        self.ideal_phy = true;
        self.mac.collision_free = true;
        self
    }

    pub fn baseline(mut self) -> Self {
        self.cooperation = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HopMode {
    Direct,
    Coop,
    Recovery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RouteHop {
    pub forwarder: NodeId,
    pub mode: HopMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteFailure {
    /// Every attempt of a hop failed; carries the last outcome.
    RetriesExhausted(HopOutcome),
    /// Recovery found no edge or walked a face all the way around.
    FaceExhausted,
    HopLimit,
    /// A recovery state repeated.
    Loop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteResult {
    pub hops: Vec<RouteHop>,
    pub delivered: bool,
    pub failure_reason: Option<RouteFailure>,
    /// Every hop attempt in order, failed ones included.
    pub attempts: Vec<HopReport>,
    pub elapsed: Micros,
}

impl RouteResult {
    pub fn path(&self, source: NodeId) -> Vec<NodeId> {
        std::iter::once(source).chain(self.hops.iter().map(|h| h.forwarder)).collect()
    }
}

struct Walk {
    result: RouteResult,
}

impl Walk {
    fn record(&mut self, report: HopReport) -> HopOutcome {
        let outcome = report.outcome;
        self.result.elapsed += report.elapsed;
        self.result.attempts.push(report);
        outcome
    }

    fn fail(mut self, reason: RouteFailure) -> RouteResult {
        self.result.failure_reason = Some(reason);
        self.result
    }
}

/// Carries one packet from `source` to `dest`: greedy hops while a
/// positive-progress neighbor answers, face routing over locally planarized
/// neighborhoods otherwise, until delivery, a hop that exhausts its
/// restarts, a dead face or the hop cap.
pub fn route<R: Rng + ?Sized>(
    topology: &Topology,
    source: NodeId,
    dest: NodeId,
    cfg: &RouteConfig,
    rng: &mut R,
) -> RouteResult {
    let mut walk = Walk {
        result: RouteResult {
            hops: Vec::new(),
            delivered: source == dest,
            failure_reason: None,
            attempts: Vec::new(),
            elapsed: Micros::ZERO,
        },
    };
    let dest_pos = topology.position(dest);
    let max_hops = cfg.max_hops.unwrap_or(topology.len() * topology.len());
    let mut current = source;
    let mut face: Option<FaceState> = None;
    let mut seen: HashSet<(NodeId, NodeId, usize, u64)> = HashSet::new();

    while current != dest {
        if walk.result.hops.len() >= max_hops {
            return walk.fail(RouteFailure::HopLimit);
        }
        let ctx = HopContext {
            topology,
            sender: current,
            destination: dest,
            phy: &cfg.phy,
            qam: &cfg.qam,
            mac: &cfg.mac,
            relay_area: cfg.relay_area,
            cooperation: cfg.cooperation,
            ideal_phy: cfg.ideal_phy,
        };
        if face.as_ref().is_some_and(|f| f.can_exit(topology, current, dest_pos)) {
            face = None;
        }

        let mut resumed = false;
        if face.is_none() {
            let mut restarts = 0;
            loop {
                let report = run_hop(&ctx, ForwarderPlan::Greedy, rng);
                let forwarder = report.forwarder;
                let coop = report.coop_requested;
                match walk.record(report) {
                    HopOutcome::DirectSuccess | HopOutcome::CoopSuccess => {
                        let f = forwarder.expect("successful hop has a forwarder");
                        let mode = if coop { HopMode::Coop } else { HopMode::Direct };
                        walk.result.hops.push(RouteHop { forwarder: f, mode });
                        current = f;
                        break;
                    }
                    HopOutcome::NoForwarder => {
                        face = Some(FaceState::new(topology, current));
                        resumed = true;
                        break;
                    }
                    outcome => {
                        if restarts == cfg.max_restarts {
                            return walk.fail(RouteFailure::RetriesExhausted(outcome));
                        }
                        restarts += 1;
                    }
                }
            }
            if !resumed {
                continue;
            }
        }

        // Recovery hop from `current`.
        let state = face.as_mut().expect("in recovery");
        let neighbors = topology.neighbors(current);
        let bfp = bfp_planarize(topology, current, dest, &neighbors, &cfg.mac, rng);
        let Some(next) = face_next_hop(topology, &bfp.subgraph, dest_pos, state) else {
            return walk.fail(RouteFailure::FaceExhausted);
        };
        let key = (current, next, state.face, state.crossing.x.to_bits() ^ state.crossing.y.to_bits().rotate_left(32));
        if !seen.insert(key) {
            return walk.fail(RouteFailure::Loop);
        }
        let response_at = bfp.announced_at(next).unwrap_or(cfg.mac.t_max);
        let mut restarts = 0;
        loop {
            let plan = ForwarderPlan::Recovery { forwarder: next, response_at, resumed };
            let outcome = walk.record(run_hop(&ctx, plan, rng));
            if outcome.is_success() {
                walk.result.hops.push(RouteHop { forwarder: next, mode: HopMode::Recovery });
                current = next;
                break;
            }
            if restarts == cfg.max_restarts {
                return walk.fail(RouteFailure::RetriesExhausted(outcome));
            }
            restarts += 1;
            resumed = false;
        }
    }
    walk.result.delivered = true;
    walk.result
}
