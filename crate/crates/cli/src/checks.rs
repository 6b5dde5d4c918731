//! Invariant suite behind `coopgeo validate`.

use std::fmt;

use coopgeo::geometry::{segments_cross, NodeId, Position, Topology};
use coopgeo::mac::{
    forwarder_timer, resolve_contention, ContentionEntry, ContentionOutcome, ContentionRound, FrameKind, MacConfig,
    TraceKind,
};
use coopgeo::metrics::{compute_metrics, to_csv};
use coopgeo::phy::{PhyConfig, QamParams};
use coopgeo::relaysel::relay_timer;
use coopgeo::routing::{bfp_planarize, gabriel_edges, route, RouteConfig, RouteFailure};
use coopgeo::sim::{
    gen_random_topology, gen_void_topology, run_scenario, substream, RandomTopology, Scenario, ScenarioKind,
    DEFAULT_SNR_DB,
};
use coopgeo::time::Micros;
use rand::Rng;

type Check = Result<(), String>;

pub struct Report {
    pub lines: Vec<(&'static str, Check)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|(_, c)| c.is_ok())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, check) in &self.lines {
            match check {
                Ok(()) => writeln!(f, "PASS {name}")?,
                Err(why) => writeln!(f, "FAIL {name}: {why}")?,
            }
        }
        let failed = self.lines.iter().filter(|(_, c)| c.is_err()).count();
        writeln!(f, "{} checks, {failed} failed", self.lines.len())
    }
}

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn forwarder_timer_windows(seed: u64) -> Check {
    let cfg = MacConfig::default();
    let slot = cfg.t_max.0 / cfg.nsa as f64;
    let mut rng = substream(seed, 1);
    for csa in 0..cfg.nsa {
        for _ in 0..1000 {
            let t = forwarder_timer(csa, &cfg, &mut rng).0;
            ensure(t >= csa as f64 * slot && t < (csa + 1) as f64 * slot, || format!("csa {csa} drew {t}"))?;
            let ppa = csa < cfg.nsa / 2;
            ensure(ppa == (t < cfg.t_max.0 / 2.0), || format!("csa {csa} crossed T_max/2 with {t}"))?;
        }
    }
    Ok(())
}

fn relay_timer_windows(seed: u64) -> Check {
    let cfg = MacConfig::default();
    let mut rng = substream(seed, 2);
    for k in 0..=10 {
        let n = k as f64 / 10.0;
        for _ in 0..1000 {
            let t = relay_timer(n, cfg.t_max, cfg.nsa, &mut rng).0;
            let lo = cfg.t_max.0 * n;
            ensure(t >= lo && t < lo + 2.0 * cfg.t_max.0 / cfg.nsa as f64, || format!("normalized {n} drew {t}"))?;
        }
    }
    Ok(())
}

fn single_candidate_wins(seed: u64) -> Check {
    let cfg = MacConfig::default();
    let mut rng = substream(seed, 3);
    for _ in 0..1000 {
        let timer = Micros(rng.gen::<f64>() * cfg.t_max.0);
        let round = ContentionRound {
            entries: vec![ContentionEntry { id: NodeId(7), timer, audible_to: Vec::new() }],
            response: cfg.t_ctf,
        };
        ensure(resolve_contention(&round, &cfg) == ContentionOutcome::Winner(NodeId(7)), || {
            format!("timer {timer:?}")
        })?;
    }
    Ok(())
}

fn equal_timers_collide() -> Check {
    let cfg = MacConfig::default();
    let entry =
        |id, audible: usize| ContentionEntry { id: NodeId(id), timer: Micros(40.0), audible_to: vec![NodeId(audible)] };
    let round = ContentionRound { entries: vec![entry(2, 3), entry(3, 2)], response: cfg.t_ctf };
    let outcome = resolve_contention(&round, &cfg);
    ensure(outcome == ContentionOutcome::Collision(vec![NodeId(2), NodeId(3)]), || format!("{outcome:?}"))
}

/// Center at the origin, destination far along +x, candidates in the
/// negative-progress half of the unit disk.
fn npa_instance<R: Rng>(n: usize, rng: &mut R) -> (Topology, Vec<NodeId>) {
    let mut pts = vec![Position::new(0.0, 0.0), Position::new(10.0, 0.0)];
    while pts.len() < n + 2 {
        let p = Position::new(-rng.gen::<f64>(), 2.0 * rng.gen::<f64>() - 1.0);
        if p.norm() < 1.0 && p.norm() > 1e-6 {
            pts.push(p);
        }
    }
    let topology = Topology::new(pts, 1.0).expect("finite positions");
    (topology, (2..n + 2).map(NodeId).collect())
}

fn bfp_matches_gabriel(seed: u64) -> Check {
    let mac = MacConfig::default();
    let mut rng = substream(seed, 4);
    for k in 0..200 {
        let n = 1 + k % 12;
        let (topology, cands) = npa_instance(n, &mut rng);
        let got = bfp_planarize(&topology, NodeId(0), NodeId(1), &cands, &mac, &mut rng).subgraph.edges;
        let want = gabriel_edges(&topology, NodeId(0), &cands);
        ensure(got == want, || format!("instance {k}: {got:?} vs {want:?}"))?;
    }
    Ok(())
}

fn planar_union(seed: u64) -> Check {
    let mac = MacConfig::default();
    let mut rng = substream(seed, 5);
    let spec = RandomTopology::with_degree(40, 0.25, 8.0).map_err(|e| e.to_string())?;
    for k in 0..20 {
        let p = gen_random_topology(&spec, &mut rng).map_err(|e| e.to_string())?;
        let t = &p.topology;
        let mut edges = Vec::new();
        for v in t.ids() {
            let sub = bfp_planarize(t, v, p.dest, &t.neighbors(v), &mac, &mut rng).subgraph;
            edges.extend(sub.edges.iter().map(|&u| (v, u)));
        }
        for (i, &(a, b)) in edges.iter().enumerate() {
            for &(c, d) in &edges[i + 1..] {
                let cross = segments_cross(t.position(a), t.position(b), t.position(c), t.position(d));
                ensure(!cross, || format!("topology {k}: {a}-{b} crosses {c}-{d}"))?;
            }
        }
    }
    Ok(())
}

fn ideal_cfg() -> RouteConfig {
    RouteConfig::new(PhyConfig::from_snr_db(DEFAULT_SNR_DB), QamParams::new(4).expect("4-QAM"), MacConfig::default())
        .ideal()
}

fn ideal_delivery(seed: u64) -> Check {
    let cfg = ideal_cfg();
    let mut rng = substream(seed, 6);
    for k in 0..60 {
        let p = if k % 6 == 0 {
            gen_void_topology(50, 0.25, &mut rng)
        } else {
            let spec = RandomTopology::with_degree(20 + (k % 5) * 10, 0.25, 8.0).map_err(|e| e.to_string())?;
            gen_random_topology(&spec, &mut rng)
        }
        .map_err(|e| e.to_string())?;
        let r = route(&p.topology, p.source, p.dest, &cfg, &mut rng);
        ensure(r.delivered, || format!("topology {k}: {:?}", r.failure_reason))?;
        ensure(r.failure_reason != Some(RouteFailure::Loop), || format!("topology {k} looped"))?;
    }
    Ok(())
}

fn relay_data_only_on_request(seed: u64) -> Check {
    let cfg = RouteConfig::new(
        PhyConfig::from_snr_db(DEFAULT_SNR_DB),
        QamParams::new(4).expect("4-QAM"),
        MacConfig::default(),
    );
    let spec = RandomTopology::with_degree(50, 0.25, 10.0).map_err(|e| e.to_string())?;
    let mut rng = substream(seed, 7);
    for k in 0..20 {
        let p = gen_random_topology(&spec, &mut rng).map_err(|e| e.to_string())?;
        for arm in [cfg, cfg.baseline()] {
            let r = route(&p.topology, p.source, p.dest, &arm, &mut rng);
            for a in &r.attempts {
                let relayed = a.trace.iter().any(|t| t.kind == TraceKind::Frame(FrameKind::RelayData));
                ensure(!relayed || a.coop_requested, || format!("topology {k}: RELAY_DATA without a request"))?;
                ensure(arm.cooperation || !a.coop_requested, || format!("topology {k}: baseline asked for help"))?;
            }
        }
    }
    Ok(())
}

fn deterministic_csv(seed: u64) -> Check {
    let mut s = Scenario::preset(ScenarioKind::PerVsDensity);
    s.seed = seed;
    s.neighbors = vec![5, 10];
    s.topologies = 3;
    s.trials = 5;
    let csv = || run_scenario(&s).map(|r| to_csv(&compute_metrics(&r))).map_err(|e| e.to_string());
    let (a, b) = (csv()?, csv()?);
    ensure(a == b, || "two runs differ".into())
}

pub fn run_all(seed: u64) -> Report {
    let lines = vec![
        ("forwarder timers stay in their sub-area slot", forwarder_timer_windows(seed)),
        ("relay timers stay in their window", relay_timer_windows(seed)),
        ("a single candidate always wins", single_candidate_wins(seed)),
        ("equal timers collide", equal_timers_collide()),
        ("select-and-protest equals the Gabriel graph", bfp_matches_gabriel(seed)),
        ("planarized edges never cross", planar_union(seed)),
        ("ideal links and MAC always deliver", ideal_delivery(seed)),
        ("RELAY_DATA only after a cooperation request", relay_data_only_on_request(seed)),
        ("identical seeds give identical CSV", deterministic_csv(seed)),
    ];
    Report { lines }
}
