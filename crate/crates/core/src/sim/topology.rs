use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{distance, NodeId, Position, Topology};

/// Resamples allowed before random generation gives up.
pub const MAX_RESAMPLES: usize = 1000;

/// Source at the origin, destination at `(1, 0)`, and `n` relays uniform in
/// `{0 <= x <= 1, |y| <= 0.5}`. Node 0 is S, node 1 is D, relays follow.
pub fn gen_relay_topology<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Topology {
    let mut pts = vec![Position::new(0.0, 0.0), Position::new(1.0, 0.0)];
    pts.extend((0..n).map(|_| Position::new(rng.gen::<f64>(), rng.gen::<f64>() - 0.5)));
    Topology::new(pts, 1.0).expect("finite coordinates and unit range")
}

/// Expected unit-disk degree of a node among `nodes` uniform in a square of
/// side `side`, border effects included.
pub fn expected_degree(nodes: usize, side: f64, r: f64) -> f64 {
    let t = (r / side).min(1.0);
    let pair = std::f64::consts::PI * t * t - 8.0 / 3.0 * t.powi(3) + 0.5 * t.powi(4);
    (nodes.saturating_sub(1)) as f64 * pair
}

/// Square side giving the target expected degree, by bisection.
pub fn side_for_degree(nodes: usize, r: f64, degree: f64) -> Result<f64> {
    if nodes < 2 || !(degree > 0.0) || degree > expected_degree(nodes, r, r) {
        return Err(Error::InvalidParameter {
            name: "neighbors",
            reason: format!("{degree} neighbors is not reachable with {nodes} nodes"),
        });
    }
    let (mut lo, mut hi) = (r, r * (nodes as f64).sqrt() * 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected_degree(nodes, mid, r) > degree {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// A random topology with its route endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub topology: Topology,
    pub source: NodeId,
    pub dest: NodeId,
}

/// Parameters of [`gen_random_topology`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomTopology {
    pub nodes: usize,
    pub side: f64,
    pub radio_range: f64,
    /// Accept only placements whose mean degree is within 10% of this.
    pub target_degree: Option<f64>,
}

impl RandomTopology {
    pub fn with_degree(nodes: usize, radio_range: f64, degree: f64) -> Result<Self> {
        let side = side_for_degree(nodes, radio_range, degree)?;
        Ok(Self { nodes, side, radio_range, target_degree: Some(degree) })
    }
}

/// Uniform placement in a square. Node 0 is the source and the destination is
/// the node of its connected component farthest from it. Resamples until the
/// degree target holds and the source has at least one reachable node.
pub fn gen_random_topology<R: Rng + ?Sized>(spec: &RandomTopology, rng: &mut R) -> Result<Placement> {
    if spec.nodes < 2 || !(spec.side > 0.0) {
        return Err(Error::InvalidParameter {
            name: "nodes",
            reason: "need at least two nodes in a non-empty area".into(),
        });
    }
    for _ in 0..MAX_RESAMPLES {
        let pts: Vec<Position> = (0..spec.nodes)
            .map(|_| Position::new(rng.gen::<f64>() * spec.side, rng.gen::<f64>() * spec.side))
            .collect();
        let topology = Topology::new(pts, spec.radio_range)?;
        if let Some(target) = spec.target_degree {
            if (topology.mean_degree() - target).abs() > 0.1 * target {
                continue;
            }
        }
        let source = NodeId(0);
        let sp = topology.position(source);
        let dest = topology.component(source).into_iter().filter(|&v| v != source).max_by(|&a, &b| {
            distance(sp, topology.position(a)).total_cmp(&distance(sp, topology.position(b))).then(b.cmp(&a))
        });
        if let Some(dest) = dest {
            return Ok(Placement { topology, source, dest });
        }
    }
    Err(Error::TopologyGenerationFailed(MAX_RESAMPLES))
}

/// Connected placement with a wall between source and destination that
/// greedy forwarding cannot cross: no node lies inside a band thicker than
/// the radio range, so the packet has to detour around one of its ends.
pub fn gen_void_topology<R: Rng + ?Sized>(nodes: usize, radio_range: f64, rng: &mut R) -> Result<Placement> {
    let r = radio_range;
    let side = 6.0 * r;
    let mid = side / 2.0;
    let half_wall = 0.55 * r;
    let inside_wall = |p: Position| (p.x - mid).abs() <= half_wall && p.y >= 0.2 * side && p.y <= 0.8 * side;
    for _ in 0..MAX_RESAMPLES {
        let mut pts = vec![Position::new(mid - 1.5 * r, mid), Position::new(mid + 1.5 * r, mid)];
        while pts.len() < nodes {
            let p = Position::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side);
            if !inside_wall(p) {
                pts.push(p);
            }
        }
        let topology = Topology::new(pts, r)?;
        if topology.connected(NodeId(0), NodeId(1)) {
            return Ok(Placement { topology, source: NodeId(0), dest: NodeId(1) });
        }
    }
    Err(Error::TopologyGenerationFailed(MAX_RESAMPLES))
}
