use coopgeo::geometry::{segments_cross, NodeId, Position, Topology};
use coopgeo::mac::MacConfig;
use coopgeo::phy::{PhyConfig, QamParams};
use coopgeo::routing::{bfp_planarize, gabriel_edges, route, HopMode, RouteConfig};
use coopgeo::sim::{gen_void_topology, substream};
use proptest::prelude::*;

fn ideal() -> RouteConfig {
    RouteConfig::new(PhyConfig::from_snr_db(25.0), QamParams::new(4).unwrap(), MacConfig::default()).ideal()
}

fn topo(points: &[(f64, f64)], r: f64) -> Topology {
    Topology::new(points.iter().map(|&(x, y)| Position::new(x, y)).collect(), r).unwrap()
}

#[test]
fn adjacent_destination_is_one_direct_hop() {
    let t = topo(&[(0.0, 0.0), (0.5, 0.0), (0.3, 0.2)], 1.0);
    let r = route(&t, NodeId(0), NodeId(1), &ideal(), &mut substream(1, 0));
    assert!(r.delivered);
    assert_eq!(r.path(NodeId(0)), vec![NodeId(0), NodeId(1)]);
    assert_eq!(r.hops[0].mode, HopMode::Direct);
}

#[test]
fn chain_takes_three_greedy_hops() {
    let t = topo(&[(0.0, 0.0), (0.9, 0.0), (1.8, 0.0), (2.7, 0.0)], 1.0);
    let r = route(&t, NodeId(0), NodeId(3), &ideal(), &mut substream(2, 0));
    assert!(r.delivered);
    assert_eq!(r.path(NodeId(0)), (0..4).map(NodeId).collect::<Vec<_>>());
    assert!(r.hops.iter().all(|h| h.mode == HopMode::Direct));
}

#[test]
fn source_equal_to_destination() {
    let t = topo(&[(0.0, 0.0)], 1.0);
    let r = route(&t, NodeId(0), NodeId(0), &ideal(), &mut substream(2, 0));
    assert!(r.delivered && r.hops.is_empty());
}

#[test]
fn void_needs_recovery_and_still_delivers() {
    let mut recovered = 0;
    for seed in 0..20 {
        let mut rng = substream(seed, 0);
        let p = gen_void_topology(50, 0.25, &mut rng).unwrap();
        let r = route(&p.topology, p.source, p.dest, &ideal(), &mut rng);
        assert!(r.delivered, "seed {seed}: {:?}", r.failure_reason);
        recovered += r.hops.iter().any(|h| h.mode == HopMode::Recovery) as usize;
    }
    assert!(recovered >= 15, "{recovered}");
}

#[test]
fn void_around_u_shape() {
    // Dead end at node 1; the only way on is back around through 2 and 3.
    let t = topo(&[(0.0, 0.0), (0.8, 0.0), (-0.5, 0.8), (0.2, 1.4), (1.1, 1.5), (1.8, 0.9), (2.3, 0.1)], 1.0);
    let r = route(&t, NodeId(0), NodeId(6), &ideal(), &mut substream(3, 0));
    assert!(r.delivered, "{:?}", r.failure_reason);
    assert_eq!(r.path(NodeId(0)), [0, 1, 0, 2, 3, 4, 5, 6].map(NodeId).to_vec());
    assert!(r.hops.iter().any(|h| h.mode == HopMode::Recovery));
}

#[test]
fn same_seed_same_route() {
    let cfg = RouteConfig { ideal_phy: false, ..ideal() };
    let mut rng = substream(5, 0);
    let p = gen_void_topology(50, 0.25, &mut rng).unwrap();
    let a = route(&p.topology, p.source, p.dest, &cfg, &mut substream(5, 1));
    let b = route(&p.topology, p.source, p.dest, &cfg, &mut substream(5, 1));
    assert_eq!(a, b);
}

fn points(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..0.0, -1.0f64..1.0), 1..=max)
        .prop_map(|v| v.into_iter().filter(|&(x, y)| x * x + y * y < 0.99 && x * x + y * y > 1e-4).collect())
}

proptest! {
    #[test]
    fn bfp_equals_gabriel(cands in points(12), seed in any::<u64>()) {
        let mut pts = vec![(0.0, 0.0), (5.0, 0.0)];
        pts.extend(cands.iter().copied());
        let t = topo(&pts, 1.0);
        let ids: Vec<NodeId> = (2..pts.len()).map(NodeId).collect();
        let got = bfp_planarize(&t, NodeId(0), NodeId(1), &ids, &MacConfig::default(), &mut substream(seed, 0));
        prop_assert_eq!(got.subgraph.edges, gabriel_edges(&t, NodeId(0), &ids));
    }

    #[test]
    fn planarized_edges_do_not_cross(pts in prop::collection::vec((0.0f64..2.0, 0.0f64..2.0), 3..30), seed in any::<u64>()) {
        let t = topo(&pts, 0.7);
        let mut rng = substream(seed, 0);
        let mut edges = Vec::new();
        for v in t.ids() {
            let sub = bfp_planarize(&t, v, NodeId(0), &t.neighbors(v), &MacConfig::default(), &mut rng).subgraph;
            edges.extend(sub.edges.into_iter().map(|u| (v, u)));
        }
        for (i, &(a, b)) in edges.iter().enumerate() {
            for &(c, d) in &edges[i + 1..] {
                prop_assert!(!segments_cross(t.position(a), t.position(b), t.position(c), t.position(d)));
            }
        }
    }

    #[test]
    fn ideal_delivery_on_connected_graphs(pts in prop::collection::vec((0.0f64..3.0, 0.0f64..3.0), 2..40), seed in any::<u64>()) {
        let t = topo(&pts, 0.8);
        let comp = t.component(NodeId(0));
        let dest = *comp.last().unwrap();
        let r = route(&t, NodeId(0), dest, &ideal(), &mut substream(seed, 0));
        prop_assert!(r.delivered, "{:?}", r.failure_reason);
    }
}
