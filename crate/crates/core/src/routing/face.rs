use super::bfp::PlanarSubgraph;
use crate::geometry::{ccw_angle, distance, segment_intersection, NodeId, Position, Topology};

/// Face traversal state carried along a recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceState {
    /// Node where recovery began.
    pub entry: NodeId,
    pub entry_position: Position,
    /// Closest point to the destination at which a traversed edge crossed the
    /// segment from the entry node to the destination.
    pub crossing: Position,
    /// First edge taken on the current face.
    pub first_edge: Option<(NodeId, NodeId)>,
    /// Node the packet arrived from, `None` at the entry node.
    pub previous: Option<NodeId>,
    /// Incremented on every face change.
    pub face: usize,
}

impl FaceState {
    pub fn new(topology: &Topology, entry: NodeId) -> Self {
        let p = topology.position(entry);
        Self { entry, entry_position: p, crossing: p, first_edge: None, previous: None, face: 0 }
    }

    /// True once `node` is closer to `dest` than the entry node.
    pub fn can_exit(&self, topology: &Topology, node: NodeId, dest: Position) -> bool {
        distance(topology.position(node), dest) < distance(self.entry_position, dest)
    }
}

/// First edge counterclockwise from `bearing` around `at`.
fn next_ccw(topology: &Topology, at: NodeId, edges: &[NodeId], bearing: f64) -> Option<NodeId> {
    let here = topology.position(at);
    edges
        .iter()
        .copied()
        .map(|v| (v, ccw_angle(bearing, here.bearing_to(topology.position(v)))))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(v, _)| v)
}

/// Right-hand-rule successor around `subgraph.center`: the first edge
/// counterclockwise from the edge back to the previous node, or from the ray
/// toward the destination on entry. An edge crossing the entry-destination
/// segment closer to the destination than any earlier crossing switches to
/// the next face. Returns `None` when the subgraph is empty or the current
/// face has been walked all the way around.
pub fn face_next_hop(
    topology: &Topology,
    subgraph: &PlanarSubgraph,
    dest: Position,
    state: &mut FaceState,
) -> Option<NodeId> {
    let u = subgraph.center;
    let here = topology.position(u);
    let bearing = match state.previous {
        Some(prev) => here.bearing_to(topology.position(prev)),
        None => here.bearing_to(dest),
    };
    let mut next = next_ccw(topology, u, &subgraph.edges, bearing)?;
    for _ in 0..subgraph.edges.len() {
        let there = topology.position(next);
        let Some(p) = segment_intersection(here, there, state.entry_position, dest) else {
            break;
        };
        if distance(p, dest) >= distance(state.crossing, dest) - 1e-12 {
            break;
        }
        state.crossing = p;
        state.first_edge = None;
        state.face += 1;
        next = next_ccw(topology, u, &subgraph.edges, here.bearing_to(there))?;
    }
    match state.first_edge {
        Some(edge) if edge == (u, next) => return None,
        Some(_) => {}
        None => state.first_edge = Some((u, next)),
    }
    state.previous = Some(u);
    Some(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge() {
        let t = Topology::new(vec![Position::new(0.0, 0.0), Position::new(-0.5, 0.3), Position::new(3.0, 0.0)], 1.0)
            .unwrap();
        let g = PlanarSubgraph { center: NodeId(0), edges: vec![NodeId(1)] };
        let mut st = FaceState::new(&t, NodeId(0));
        assert_eq!(face_next_hop(&t, &g, t.position(NodeId(2)), &mut st), Some(NodeId(1)));
    }

    #[test]
    fn entry_takes_first_counterclockwise_edge() {
        // D straight ahead on +x, two mirrored edges behind S.
        let t = Topology::new(
            vec![Position::new(0.0, 0.0), Position::new(-0.5, 0.5), Position::new(-0.5, -0.5), Position::new(3.0, 0.0)],
            1.0,
        )
        .unwrap();
        let g = PlanarSubgraph { center: NodeId(0), edges: vec![NodeId(1), NodeId(2)] };
        let mut st = FaceState::new(&t, NodeId(0));
        assert_eq!(face_next_hop(&t, &g, t.position(NodeId(3)), &mut st), Some(NodeId(1)));
    }

    #[test]
    fn empty_subgraph() {
        let t = Topology::new(vec![Position::new(0.0, 0.0), Position::new(2.0, 0.0)], 1.0).unwrap();
        let g = PlanarSubgraph { center: NodeId(0), edges: vec![] };
        let mut st = FaceState::new(&t, NodeId(0));
        assert_eq!(face_next_hop(&t, &g, t.position(NodeId(1)), &mut st), None);
    }
}
