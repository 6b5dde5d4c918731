use coopgeo::geometry::{NodeId, Position, RelayArea, Topology};
use coopgeo::mac::{
    packet_symbols, run_hop, ts1_initial, ts1_updated, ForwarderPlan, FrameKind, HopContext, HopOutcome, MacConfig,
    TraceKind,
};
use coopgeo::phy::{awgn_ser, PhyConfig, QamParams};
use coopgeo::sim::substream;

const SNR_DB: f64 = 25.0;

/// S at the origin, F at 0.2, D out of the source's range at 0.45, and an
/// optional relay at the metric optimum on SF.
fn line(with_relay: bool) -> Topology {
    let mut pts = vec![Position::new(0.0, 0.0), Position::new(0.2, 0.0), Position::new(0.45, 0.0)];
    if with_relay {
        pts.push(Position::new(0.6359 * 0.2, 0.0));
    }
    Topology::new(pts, 0.25).unwrap()
}

fn ctx<'a>(
    t: &'a Topology,
    phy: &'a PhyConfig,
    qam: &'a QamParams,
    mac: &'a MacConfig,
    coop: bool,
    ideal: bool,
) -> HopContext<'a> {
    HopContext {
        topology: t,
        sender: NodeId(0),
        destination: NodeId(2),
        phy,
        qam,
        mac,
        relay_area: RelayArea::Lens,
        cooperation: coop,
        ideal_phy: ideal,
    }
}

/// Expectations over independent Rayleigh fades by trapezoid rule on a fine
/// grid. Returns `E[A(h)]`, `E[A(h + g)]` and `E[A(h) A(h + g)]` for
/// `h ~ Exp(mean_h)`, `g ~ Exp(mean_g)`, `A = awgn_ser(., 4)`.
fn fading_moments(mean_h: f64, mean_g: f64) -> (f64, f64, f64) {
    let step = 0.01;
    let n = 6000;
    let a: Vec<f64> = (0..2 * n).map(|i| awgn_ser(i as f64 * step, 4)).collect();
    let w = |i: usize| if i == 0 { 0.5 * step } else { step };
    let pdf = |x: f64, m: f64| (-x / m).exp() / m;
    let (mut e1, mut e2, mut e12) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let ph = pdf(i as f64 * step, mean_h) * w(i);
        e1 += a[i] * ph;
        for j in 0..n {
            let p = ph * pdf(j as f64 * step, mean_g) * w(j);
            e2 += a[i + j] * p;
            e12 += a[i] * a[i + j] * p;
        }
    }
    (e1, e2, e12)
}

fn assert_rate(hits: usize, n: usize, p: f64, what: &str) {
    let rate = hits as f64 / n as f64;
    let sigma = (p * (1.0 - p) / n as f64).sqrt();
    assert!((rate - p).abs() < 4.0 * sigma + 1e-3, "{what}: {rate} vs oracle {p}");
}

#[test]
fn ideal_hop_is_direct_and_bounded() {
    let (t, phy, qam, mac) =
        (line(true), PhyConfig::from_snr_db(SNR_DB), QamParams::new(4).unwrap(), MacConfig::default());
    let c = ctx(&t, &phy, &qam, &mac, true, true);
    let mut rng = substream(1, 0);
    for _ in 0..200 {
        let r = run_hop(&c, ForwarderPlan::Greedy, &mut rng);
        assert_eq!(r.outcome, HopOutcome::DirectSuccess);
        assert_eq!(r.forwarder, Some(NodeId(1)));
        assert!(!r.trace.iter().any(|e| e.kind == TraceKind::Frame(FrameKind::RelayData)));
        // F sits in the first sub-area.
        let extra = r.elapsed - mac.t_data - mac.t_ctf - mac.t_sel - mac.t_ack;
        assert!(extra.0 >= 0.0 && extra.0 < mac.t_max.0 / mac.nsa as f64, "{extra:?}");
    }
}

#[test]
fn baseline_never_relays_and_matches_oracle() {
    let (t, phy, qam, mac) =
        (line(true), PhyConfig::from_snr_db(SNR_DB), QamParams::new(4).unwrap(), MacConfig::default());
    let c = ctx(&t, &phy, &qam, &mac, false, false);
    let mut rng = substream(2, 0);
    let n = 3000;
    let mut ok = 0;
    for _ in 0..n {
        let r = run_hop(&c, ForwarderPlan::Greedy, &mut rng);
        assert!(!r.coop_requested);
        assert!(!r.trace.iter().any(|e| e.kind == TraceKind::Frame(FrameKind::RelayData)));
        assert!(matches!(r.outcome, HopOutcome::DirectSuccess | HopOutcome::ResidualError), "{:?}", r.outcome);
        assert!(r.elapsed <= ts1_initial(&mac) + ts1_updated(&mac, false));
        ok += (r.outcome == HopOutcome::DirectSuccess) as usize;
    }
    let (e1, _, _) = fading_moments(phy.snr() / 0.04, 1.0);
    assert_rate(ok, n, (1.0 - e1).powi(packet_symbols(4) as i32), "direct success");
}

#[test]
fn lone_forwarder_cannot_get_help() {
    let (t, phy, qam, mac) =
        (line(false), PhyConfig::from_snr_db(SNR_DB), QamParams::new(4).unwrap(), MacConfig::default());
    let c = ctx(&t, &phy, &qam, &mac, true, false);
    let mut rng = substream(3, 0);
    let mut failed = 0;
    for _ in 0..500 {
        let r = run_hop(&c, ForwarderPlan::Greedy, &mut rng);
        match r.outcome {
            HopOutcome::DirectSuccess => assert!(!r.coop_requested),
            HopOutcome::CoopFailNoRelay => {
                assert!(r.coop_requested && r.relay.is_none());
                failed += 1;
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(r.elapsed <= ts1_initial(&mac) + ts1_updated(&mac, r.coop_requested));
    }
    assert!(failed > 100, "{failed}");
}

#[test]
fn cooperative_success_matches_oracle() {
    let (t, phy, qam, mac) =
        (line(true), PhyConfig::from_snr_db(SNR_DB), QamParams::new(4).unwrap(), MacConfig::default());
    let c = ctx(&t, &phy, &qam, &mac, true, false);
    let mut rng = substream(4, 0);
    let n = 4000;
    let (mut direct, mut coop) = (0, 0);
    for _ in 0..n {
        let r = run_hop(&c, ForwarderPlan::Greedy, &mut rng);
        assert!(r.elapsed <= ts1_initial(&mac) + ts1_updated(&mac, r.coop_requested));
        match r.outcome {
            HopOutcome::DirectSuccess => direct += 1,
            HopOutcome::CoopSuccess => {
                assert_eq!(r.relay, Some(NodeId(3)));
                coop += 1;
            }
            HopOutcome::CoopFailNoRelay | HopOutcome::ResidualError => {}
            other => panic!("unexpected {other:?}"),
        }
    }
    let l = packet_symbols(4) as i32;
    let d_sf = 0.2f64;
    let d_sr = 0.6359 * d_sf;
    let d_rf = d_sf - d_sr;
    let (e_sf, e_comb, e_joint) = fading_moments(phy.snr() / (d_sf * d_sf), phy.snr() / (d_rf * d_rf));
    let (e_sr, _, _) = fading_moments(phy.snr() / (d_sr * d_sr), 1.0);
    let relay_decodes = (1.0 - e_sr).powi(l);
    let all_combined_ok = (1.0 - e_comb).powi(l);
    let all_ok = (1.0 - e_sf - e_comb + e_joint).powi(l);
    assert_rate(direct, n, (1.0 - e_sf).powi(l), "direct success");
    assert_rate(coop, n, relay_decodes * (all_combined_ok - all_ok), "cooperative success");
}
