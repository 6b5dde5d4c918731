use rand::Rng;

use crate::geometry::{classify, csa_ppa, NodeId, ProgressArea, Topology};
use crate::mac::{forwarder_timer, resolve_window, ContentionEntry, ContentionRound, MacConfig, WindowResult};
use crate::time::Micros;

/// Result of one beaconless greedy contention.
#[derive(Debug, Clone, PartialEq)]
pub struct BlgfSearch {
    /// Positive-progress neighbors of the sender, in id order.
    pub candidates: Vec<NodeId>,
    pub window: WindowResult,
}

impl BlgfSearch {
    pub fn forwarder(&self) -> Option<NodeId> {
        self.window.winner.map(|(id, _)| id)
    }
}

pub fn ppa_candidates(topology: &Topology, sender: NodeId, dest: NodeId) -> Vec<NodeId> {
    let (sp, dp) = (topology.position(sender), topology.position(dest));
    let r = topology.radio_range();
    topology
        .neighbors(sender)
        .into_iter()
        .filter(|&v| classify(sp, dp, topology.position(v), r) == ProgressArea::Positive)
        .collect()
}

/// Contention entries of the positive-progress candidates. The destination
/// answers at once; the others draw forwarder timers from their progress band.
pub fn ppa_round<R: Rng + ?Sized>(
    topology: &Topology,
    sender: NodeId,
    dest: NodeId,
    cfg: &MacConfig,
    rng: &mut R,
) -> (Vec<NodeId>, ContentionRound) {
    let (sp, dp) = (topology.position(sender), topology.position(dest));
    let r = topology.radio_range();
    let candidates = ppa_candidates(topology, sender, dest);
    let entries = candidates
        .iter()
        .map(|&v| {
            let timer = if v == dest {
                Micros::ZERO
            } else {
                let csa = csa_ppa(sp, dp, topology.position(v), r, cfg.nsa).expect("candidate is in the PPA");
                forwarder_timer(csa, cfg, rng)
            };
            let audible_to = candidates.iter().copied().filter(|&o| topology.can_hear(v, o)).collect();
            ContentionEntry { id: v, timer, audible_to }
        })
        .collect();
    (candidates, ContentionRound { entries, response: cfg.t_ctf })
}

/// Greedy next-hop search. The source gives up when `T_max / 2` passes
/// without a CTF.
pub fn blgf_select<R: Rng + ?Sized>(
    topology: &Topology,
    sender: NodeId,
    dest: NodeId,
    cfg: &MacConfig,
    rng: &mut R,
) -> BlgfSearch {
    debug_assert_ne!(sender, dest);
    let (candidates, round) = ppa_round(topology, sender, dest, cfg, rng);
    let window = resolve_window(&round, cfg, cfg.t_max * 0.5);
    BlgfSearch { candidates, window }
}
