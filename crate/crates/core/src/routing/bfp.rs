use rand::Rng;

use crate::geometry::{area_index, gabriel_violates, NodeId, ProgressArea, Topology};
use crate::mac::{forwarder_timer, MacConfig};
use crate::time::Micros;

/// Local planar subgraph around a stuck node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanarSubgraph {
    pub center: NodeId,
    /// Neighbors `u` such that `(center, u)` survived, sorted by id.
    pub edges: Vec<NodeId>,
}

impl PlanarSubgraph {
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BfpResult {
    pub subgraph: PlanarSubgraph,
    /// Candidates that answered in the select phase, in answer order.
    pub responders: Vec<(NodeId, Micros)>,
    /// `(protester, protested)` pairs, in the order they were sent.
    pub protests: Vec<(NodeId, NodeId)>,
    /// Candidates that kept quiet because an earlier responder lies in
    /// their own Gabriel circle.
    pub silent: Vec<NodeId>,
    /// When each edge endpoint made itself known to the center: its answer
    /// time, or `T_max` for nodes announced by a protest.
    pub announced_at: Vec<(NodeId, Micros)>,
}

impl BfpResult {
    pub fn announced_at(&self, id: NodeId) -> Option<Micros> {
        self.announced_at.iter().find(|(v, _)| *v == id).map(|(_, t)| *t)
    }
}

/// Select-and-protest planarization with explicit answer timers.
///
/// Select phase, in timer order: a candidate stays silent if an earlier
/// responder lies inside its Gabriel circle with the center (its own edge is
/// invalid), becomes hidden if it lies inside the Gabriel circle of an earlier
/// responder, and answers otherwise. Protest phase: a hidden candidate protests
/// the responder whose circle holds it, which also reveals it to the center;
/// any candidate inside the circle of a revealed node protests it as well,
/// until nothing changes. Revealed nodes that drew no protest keep their edge.
pub fn bfp_with_timers(topology: &Topology, center: NodeId, timed: &[(NodeId, Micros)]) -> BfpResult {
    let c = topology.position(center);
    let pos = |v: NodeId| topology.position(v);
    let mut order: Vec<(NodeId, Micros)> = timed.to_vec();
    order.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));

    let mut responders: Vec<(NodeId, Micros)> = Vec::new();
    let mut hidden: Vec<NodeId> = Vec::new();
    let mut silent = Vec::new();
    for &(v, t) in &order {
        if responders.iter().any(|&(w, _)| gabriel_violates(c, pos(v), pos(w))) {
            silent.push(v);
        } else if responders.iter().any(|&(w, _)| gabriel_violates(c, pos(w), pos(v))) {
            hidden.push(v);
        } else {
            responders.push((v, t));
        }
    }

    let mut announced_at: Vec<(NodeId, Micros)> = responders.clone();
    let mut protests: Vec<(NodeId, NodeId)> = Vec::new();
    let protest_slot = latest_timer(timed);
    loop {
        let mut changed = false;
        for &(v, _) in &order {
            for i in 0..announced_at.len() {
                let x = announced_at[i].0;
                if v == x || protests.contains(&(v, x)) || !gabriel_violates(c, pos(x), pos(v)) {
                    continue;
                }
                protests.push((v, x));
                if !announced_at.iter().any(|(a, _)| *a == v) && hidden.contains(&v) {
                    announced_at.push((v, protest_slot));
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut edges: Vec<NodeId> =
        announced_at.iter().map(|(v, _)| *v).filter(|v| !protests.iter().any(|(_, x)| x == v)).collect();
    edges.sort();
    BfpResult { subgraph: PlanarSubgraph { center, edges }, responders, protests, silent, announced_at }
}

fn latest_timer(timed: &[(NodeId, Micros)]) -> Micros {
    timed.iter().map(|(_, t)| *t).max().unwrap_or_default()
}

/// Planarization with contention timers drawn from each candidate's sub-area
/// relative to the destination. Protests are error-free and do not collide.
pub fn bfp_planarize<R: Rng + ?Sized>(
    topology: &Topology,
    center: NodeId,
    dest: NodeId,
    candidates: &[NodeId],
    cfg: &MacConfig,
    rng: &mut R,
) -> BfpResult {
    let (c, d) = (topology.position(center), topology.position(dest));
    let r = topology.radio_range();
    let timed: Vec<(NodeId, Micros)> = candidates
        .iter()
        .map(|&v| {
            let idx = area_index(c, d, topology.position(v), r, cfg.nsa).expect("valid sub-area count");
            debug_assert_ne!(idx.area, ProgressArea::OutOfRange);
            (v, forwarder_timer(idx.csa, cfg, rng))
        })
        .collect();
    let mut result = bfp_with_timers(topology, center, &timed);
    for entry in result.announced_at.iter_mut() {
        if !result.responders.iter().any(|(v, _)| *v == entry.0) {
            entry.1 = cfg.t_max;
        }
    }
    result
}

/// Gabriel neighbors of `center` among `candidates`, by brute force.
pub fn gabriel_edges(topology: &Topology, center: NodeId, candidates: &[NodeId]) -> Vec<NodeId> {
    let c = topology.position(center);
    let mut edges: Vec<NodeId> = candidates
        .iter()
        .copied()
        .filter(|&u| {
            !candidates.iter().any(|&w| w != u && gabriel_violates(c, topology.position(u), topology.position(w)))
        })
        .collect();
    edges.sort();
    edges
}
