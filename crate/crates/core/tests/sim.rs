use coopgeo::geometry::{NodeId, Position};
use coopgeo::metrics::{compute_metrics, to_csv};
use coopgeo::phy::{simulate_symbol, CoopLinks, PhyConfig, QamParams, Transmission};
use coopgeo::relaysel::{relay_metric, select_best, RelayCandidate};
use coopgeo::sim::{
    gen_random_topology, run_baseline, run_scenario, substream, Arm, RandomTopology, RunResult, Scenario, ScenarioKind,
};
use coopgeo::time::Micros;

fn small(kind: ScenarioKind) -> Scenario {
    let mut s = Scenario::preset(kind);
    s.topologies = 3;
    s.trials = 4;
    s.symbols = 500;
    if kind == ScenarioKind::RelayOrdering {
        s.trials = 10;
    }
    s
}

#[test]
fn identical_seeds_give_identical_results() {
    for kind in [ScenarioKind::RelayOrdering, ScenarioKind::PerVsDensity, ScenarioKind::TmaxSweep] {
        let s = small(kind);
        assert_eq!(run_scenario(&s).unwrap(), run_scenario(&s).unwrap(), "{kind}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let s = Scenario { baseline: true, ..small(ScenarioKind::PerVsDensity) };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| run_scenario(&s).unwrap());
    let b = four.install(|| run_scenario(&s).unwrap());
    assert_eq!(to_csv(&compute_metrics(&a)), to_csv(&compute_metrics(&b)));
}

#[test]
fn merge_is_order_independent() {
    let s = small(ScenarioKind::PerVsDensity);
    let full = run_scenario(&s).unwrap();
    let parts: Vec<RunResult> = full
        .trials
        .iter()
        .map(|t| RunResult { scenario: s.clone(), trials: vec![t.clone()], ser: Vec::new() })
        .collect();
    let backwards = parts.into_iter().rev().fold(RunResult::empty(s.clone()), RunResult::merge);
    assert_eq!(backwards, full);
}

#[test]
fn different_seeds_differ() {
    let a = small(ScenarioKind::PerVsDensity);
    let b = Scenario { seed: 2, ..a.clone() };
    assert_ne!(run_scenario(&a).unwrap(), run_scenario(&b).unwrap());
}

#[test]
fn baseline_matches_its_arm_in_a_paired_run() {
    let s = Scenario { baseline: true, ..small(ScenarioKind::PerVsDensity) };
    let paired = run_scenario(&s).unwrap();
    let alone = run_baseline(&s).unwrap();
    let from_pair: Vec<_> = paired.trials.into_iter().filter(|t| t.arm == Arm::Baseline).collect();
    assert_eq!(from_pair, alone.trials);
    assert!(run_baseline(&small(ScenarioKind::RelayOrdering)).is_err());
}

#[test]
fn degree_targets_hold() {
    let spec = RandomTopology::with_degree(50, 0.25, 10.0).unwrap();
    for k in 0..50 {
        let p = gen_random_topology(&spec, &mut substream(11, k)).unwrap();
        let d = p.topology.mean_degree();
        assert!((9.0..=11.0).contains(&d), "{d}");
    }
}

#[test]
fn confidence_interval_shrinks_with_trials() {
    let mut s = Scenario::preset(ScenarioKind::PerVsDensity);
    s.neighbors = vec![5];
    s.topologies = 10;
    s.trials = 20;
    let a = compute_metrics(&run_scenario(&s).unwrap());
    s.trials = 80;
    let b = compute_metrics(&run_scenario(&s).unwrap());
    let ratio = a.get(5.0, "per").unwrap().ci95 / b.get(5.0, "per").unwrap().ci95;
    assert!((1.6..2.5).contains(&ratio), "{ratio}");
}

#[test]
fn protocol_metrics_are_probabilities() {
    let s = Scenario { baseline: true, ..small(ScenarioKind::ThroughputVsConstellation) };
    let m = compute_metrics(&run_scenario(&s).unwrap());
    assert!(!m.rows.is_empty());
    for row in &m.rows {
        assert!((0.0..=1.0).contains(&row.value), "{row:?}");
        assert!(row.ci95 >= 0.0);
    }
    assert!(m.rows.windows(2).all(|w| w[0].x <= w[1].x));
}

#[test]
fn best_metric_relay_has_lowest_simulated_ser() {
    let qam = QamParams::new(4).unwrap();
    let cfg = PhyConfig::from_snr_db(20.0);
    let (s, f) = (Position::new(0.0, 0.0), Position::new(1.0, 0.0));
    let spots = [(0.6, 0.05), (0.3, -0.3), (0.85, 0.4), (0.15, 0.45), (0.95, -0.5)];
    let cands: Vec<RelayCandidate> = spots
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let position = Position::new(x, y);
            let metric = relay_metric(s, f, position, 2.0, &qam);
            RelayCandidate { id: NodeId(i), position, metric, normalized: 0.0, timer: Micros::ZERO }
        })
        .collect();
    let ser: Vec<f64> = spots
        .iter()
        .map(|&(x, y)| {
            let r = Position::new(x, y);
            let links = CoopLinks::from_distances(1.0, (r - s).norm(), (f - r).norm(), 2.0);
            let mut rng = substream(3, 0);
            let n = 100_000;
            (0..n).filter(|_| simulate_symbol(Transmission::Cooperative(links), &cfg, &qam, &mut rng)).count() as f64
                / n as f64
        })
        .collect();
    let mc_best = (0..ser.len()).min_by(|&a, &b| ser[a].total_cmp(&ser[b])).unwrap();
    assert_eq!(select_best(&cands), Some(NodeId(mc_best)), "{ser:?}");
}
